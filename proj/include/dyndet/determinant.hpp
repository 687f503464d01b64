#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dyndet/entire.hpp"
#include "dyndet/model.hpp"
#include "dyndet/resonance_set.hpp"
#include "dyndet/single_orbit.hpp"

namespace dyndet {

struct TraceTerm {
    cd amplitude;   // summed tr(Phi_w)/|det(I - Lambda_w)| over words sharing `length`
    double length;  // T(w)
};

/// s_m(z) = sum amplitude * exp(-z * length) for m = 1..max_order.
struct TraceSeries {
    int max_order = 0;
    std::vector<std::vector<TraceTerm>> terms;  // terms[m - 1]
    std::vector<std::uint64_t> word_counts;     // fixed words per order

    cd trace(int m, cd z) const;
    std::vector<cd> traces(cd z, int upto) const;
};

/// Enumerates every fixed word up to length M once. Terms with lengths equal to
/// relative 1e-12 are merged. `cap` <= 0 selects default_orbit_cap.
TraceSeries build_trace_series(const FlowSystem& sys, int M, int cap = 0);

cd trace_power(const FlowSystem& sys, int m, cd z, int cap = 0);

struct DetCoefficients {
    int order = 0;
    std::vector<cd> c;  // c[0] = 1
};

/// Newton recursion p c_p = -sum_{m=1}^{p} s_m c_{p-m}; s[m-1] = s_m.
DetCoefficients det_coefficients(const std::vector<cd>& s, int P);
DetCoefficients det_coefficients(const TraceSeries& series, cd z, int P);

struct DetValue {
    cd value;
    double tail_estimate = 0.0;
    bool converged = true;  // false when the fitted tail is not decreasing at p = M
};

/// sum_{p<=M} c_p(z), with the tail fitted to C exp(pC|z| - p^{1+1/(s(n-1))}/C).
DetValue evaluate_det(const TraceSeries& series, cd z, int M, double gevrey_s, int section_dim);
DetValue evaluate_det(const FlowSystem& sys, cd z, int M, int cap = 0);

/// Handle on the truncated series; the log is taken of the summed value.
EntireFn det_handle(std::shared_ptr<const TraceSeries> series, int M);

/// Transition-independent closed form: the lattice of (a, b, rho) with a in
/// eig(A), b in eig(B), rho in the Poincare lattice, folded into one spectrum
/// with zetas = {a b}.
struct LatticeClosedForm {
    std::vector<cd> adjacency_eigs;
    std::vector<cd> lift_eigs;
    OrbitSpectrum folded;  // t0 = tau, zetas = products a b
    double cutoff = 1e-20;
};

/// Throws ValidationError when edges differ or a roof is not constant.
LatticeClosedForm make_closed_form(const FlowSystem& sys, double cutoff = 1e-20);

ProductValue closed_form_det(const LatticeClosedForm& cf, cd z);
EntireFn closed_form_handle(const LatticeClosedForm& cf, double re_min, double tol = 1e-14);
ResonanceSet closed_form_resonances(const LatticeClosedForm& cf, double r);

struct ResonanceOptions {
    int cells_per_radius = 40;  // grid spacing r / cells_per_radius
    double newton_tol = 1e-13;
    int max_depth = 24;
};

/// Zeros in |z| <= r with multiplicities, each certified by a small-circle
/// winding number. Throws NumericalError when local counts do not add up to the
/// winding number of the whole disk.
ResonanceSet find_resonances(const EntireFn& f, double r, const ResonanceOptions& opt = {});

}  // namespace dyndet
