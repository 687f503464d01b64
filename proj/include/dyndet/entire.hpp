#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dyndet/model.hpp"

namespace dyndet {

/// Evaluation handle of an entire function in logarithmic form.
/// log_eval(z) returns log f(z): real part log|f(z)|, imaginary part any
/// determination of arg f(z). Zeros map to -inf real part.
struct EntireFn {
    std::function<cd(cd)> log_eval;

    cd log(cd z) const { return log_eval(z); }
    cd operator()(cd z) const { return std::exp(log_eval(z)); }
};

/// Wraps a plain evaluator.
EntireFn from_values(std::function<cd(cd)> f);

/// W_p(z) = (1 - z) exp(sum_{k<=p} z^k / k)
cd elementary_factor(int p, cd z);

/// sum_{|lambda_j| <= r} |lambda_j| <= C r (1 + |log r|^alpha)
struct TailModel {
    double C = 1.0;
    double alpha = 0.0;

    double bound(double r) const;
};

struct WeierstrassValue {
    cd value;
    double tail_factor;  // |true / value| <= tail_factor and >= 1/tail_factor
};

/// Truncated prod (1 - z lambda_j) over the supplied terms; the dropped tail is
/// bounded through `tail`. Throws ValidationError when the supplied terms
/// violate the model.
WeierstrassValue weierstrass_product(const std::vector<cd>& lambdas, const TailModel& tail, cd z);

struct ZeroCountReport {
    double r = 0.0;         // radius actually used (after perturbation)
    int count = 0;
    double residual = 0.0;  // distance of the raw winding integral to the nearest integer
    bool reliable = true;
    int nodes = 0;
};

/// Winding number of f along |z| = r by phase unwrapping; nodes double until two
/// successive counts agree and every phase step is small. A contour that keeps
/// hitting a zero is pushed out by 1% up to 5 times.
ZeroCountReport argument_principle_count(const EntireFn& f, double r, int nodes = 512);

/// Same on |z - center| = radius without perturbation; returns the raw count
/// or throws NumericalError when unresolved.
int winding_on_circle(const EntireFn& f, cd center, double radius, int nodes = 64);

/// | log|f(0)| + sum mult log(r/|z_k|) - (2 pi)^{-1} int log|f(r e^{it})| dt |
double jensen_residual(const EntireFn& f, const std::vector<std::pair<cd, int>>& zeros, double r,
                       int nodes = 4096);

struct GrowthFit {
    std::vector<double> radii;
    std::vector<double> log_max_modulus;  // log M(r)
    double alpha = 0.0;                   // slope of log log M against log r
    double log_C = 0.0;
    double residual = 0.0;                // rms of the fit
    bool monotone = true;
    bool too_small = false;
    // same fit restricted to the negative real axis
    std::vector<double> log_modulus_negative_axis;
    double alpha_negative_axis = 0.0;
};

GrowthFit growth_order_fit(const EntireFn& f, const std::vector<double>& radii, int samples = 256);

struct CountingFit {
    double beta = 0.0;
    double log_C = 0.0;
    double residual = 0.0;
    bool degenerate = false;
};

CountingFit counting_exponent_fit(const std::vector<std::pair<double, double>>& counts);

/// Least squares y = a + b x; returns {a, b, rms residual, R^2}.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
    double r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dyndet
