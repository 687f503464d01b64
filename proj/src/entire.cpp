#include "dyndet/entire.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "dyndet/errors.hpp"
#include "dyndet/parallel.hpp"

namespace dyndet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxStep = 1.0;  // largest accepted phase increment between nodes (rad)
constexpr int kMaxNodes = 1 << 22;

struct Winding {
    long count = 0;
    double raw = 0.0;
    double max_step = 0.0;
    bool finite = true;
};

Winding wind(const std::vector<double>& phase) {
    Winding w;
    double total = 0.0;
    const size_t n = phase.size();
    for (size_t i = 0; i < n; ++i) {
        const double a = phase[i], b = phase[(i + 1) % n];
        if (!std::isfinite(a) || !std::isfinite(b)) {
            w.finite = false;
            return w;
        }
        const double d = std::remainder(b - a, kTwoPi);
        w.max_step = std::max(w.max_step, std::abs(d));
        total += d;
    }
    w.raw = total / kTwoPi;
    w.count = std::lround(w.raw);
    return w;
}

// Phases on an n-node circle, refining by doubling and reusing old nodes.
// Returns nullopt when the contour could not be resolved.
std::optional<Winding> resolve(const EntireFn& f, cd center, double radius, int nodes, int max_nodes,
                               int* nodes_used) {
    auto eval = [&](size_t i, size_t n) {
        const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
        cd lv = f.log(center + std::polar(radius, t));
        if (!std::isfinite(lv.real())) return std::numeric_limits<double>::quiet_NaN();
        return lv.imag();
    };
    size_t n = static_cast<size_t>(std::max(8, nodes));
    std::vector<double> phase(n);
    parallel_for(n, [&](size_t i) { phase[i] = eval(i, n); });
    Winding prev = wind(phase);
    while (true) {
        const size_t n2 = 2 * n;
        if (n2 > static_cast<size_t>(max_nodes)) return std::nullopt;
        std::vector<double> fine(n2);
        for (size_t i = 0; i < n; ++i) fine[2 * i] = phase[i];
        parallel_for(n, [&](size_t i) { fine[2 * i + 1] = eval(2 * i + 1, n2); });
        Winding cur = wind(fine);
        phase.swap(fine);
        n = n2;
        if (!cur.finite) return std::nullopt;
        if (prev.finite && cur.count == prev.count && cur.max_step < kMaxStep) {
            if (nodes_used) *nodes_used = static_cast<int>(n);
            return cur;
        }
        prev = cur;
    }
}

}  // namespace

EntireFn from_values(std::function<cd(cd)> f) {
    return EntireFn{[f = std::move(f)](cd z) {
        cd v = f(z);
        if (v == 0.0) return cd(-std::numeric_limits<double>::infinity(), 0.0);
        return std::log(v);
    }};
}

cd elementary_factor(int p, cd z) {
    cd s = 0.0, zk = 1.0;
    for (int k = 1; k <= p; ++k) {
        zk *= z;
        s += zk / static_cast<double>(k);
    }
    return (1.0 - z) * std::exp(s);
}

double TailModel::bound(double r) const { return C * r * (1.0 + std::pow(std::abs(std::log(r)), alpha)); }

WeierstrassValue weierstrass_product(const std::vector<cd>& lambdas, const TailModel& tail, cd z) {
    const size_t n = lambdas.size();
    for (size_t i = 1; i < n; ++i)
        if (std::abs(lambdas[i]) > std::abs(lambdas[i - 1]) * (1.0 + 1e-14))
            throw ValidationError("entire-analysis", "weierstrass_product", "index " + std::to_string(i),
                                  "terms must have decreasing modulus");
    std::vector<double> suffix(n + 1, 0.0);
    for (size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + std::abs(lambdas[i]);
    for (size_t i = 0; i < n; ++i) {
        const double r = std::abs(lambdas[i]);
        if (r == 0.0) continue;
        if (suffix[i] > tail.bound(r) * (1.0 + 1e-12))
            throw ValidationError("entire-analysis", "weierstrass_product", "index " + std::to_string(i),
                                  "supplied terms exceed the tail model");
    }
    WeierstrassValue out{1.0, 1.0};
    if (z == 0.0) return out;
    for (const auto& l : lambdas) out.value *= 1.0 - z * l;
    if (n > 0 && std::abs(lambdas.back()) > 0.0) {
        const double r = std::abs(lambdas.back());
        const double dropped = std::max(0.0, tail.bound(r) - r);
        out.tail_factor = std::exp(std::abs(z) * dropped);
    }
    return out;
}

int winding_on_circle(const EntireFn& f, cd center, double radius, int nodes) {
    auto w = resolve(f, center, radius, nodes, 1 << 18, nullptr);
    if (!w)
        throw NumericalError("entire-analysis", "winding_on_circle",
                             "center=(" + std::to_string(center.real()) + "," + std::to_string(center.imag()) +
                                 ") radius=" + std::to_string(radius),
                             "phase could not be resolved (zero on or near the contour)");
    return static_cast<int>(w->count);
}

ZeroCountReport argument_principle_count(const EntireFn& f, double r, int nodes) {
    if (!(r > 0.0))
        throw ValidationError("entire-analysis", "argument_principle_count", "r=" + std::to_string(r), "r must be > 0");
    double radius = r;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        int used = 0;
        auto w = resolve(f, 0.0, radius, nodes, kMaxNodes, &used);
        if (w) {
            ZeroCountReport rep;
            rep.r = radius;
            rep.count = static_cast<int>(w->count);
            rep.residual = std::abs(w->raw - static_cast<double>(w->count));
            rep.reliable = rep.residual < 0.1;
            rep.nodes = used;
            return rep;
        }
        radius *= 1.01;
    }
    throw NumericalError("entire-analysis", "argument_principle_count", "r=" + std::to_string(r),
                         "contour degeneracy: a zero stays near |z| = r after perturbation");
}

double jensen_residual(const EntireFn& f, const std::vector<std::pair<cd, int>>& zeros, double r, int nodes) {
    const cd l0 = f.log(0.0);
    if (!(l0.real() > std::log(1e-12)))
        throw ValidationError("entire-analysis", "jensen_residual", "f(0)", "|f(0)| must exceed 1e-12");
    double zero_sum = 0.0;
    for (const auto& [z, mult] : zeros) {
        const double a = std::abs(z);
        if (std::abs(a - r) <= 1e-9 * r)
            throw NumericalError("entire-analysis", "jensen_residual", "|z|=" + std::to_string(a), "zero on the contour");
        if (a < r) zero_sum += mult * std::log(r / a);
    }
    std::vector<double> lm(static_cast<size_t>(nodes));
    parallel_for(lm.size(), [&](size_t i) {
        const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(nodes);
        lm[i] = f.log(std::polar(r, t)).real();
    });
    double mean = 0.0;
    for (double v : lm) {
        if (!std::isfinite(v))
            throw NumericalError("entire-analysis", "jensen_residual", "r=" + std::to_string(r), "zero on the contour");
        mean += v;
    }
    mean /= nodes;
    return std::abs(l0.real() + zero_sum - mean);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit fit;
    const size_t n = x.size();
    if (n < 2) return fit;
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        const double e = y[i] - fit.intercept - fit.slope * x[i];
        ss += e * e;
    }
    fit.rms = std::sqrt(ss / n);
    fit.r2 = syy > 0 ? 1.0 - ss / syy : 1.0;
    return fit;
}

GrowthFit growth_order_fit(const EntireFn& f, const std::vector<double>& radii, int samples) {
    if (radii.size() < 5)
        throw ValidationError("entire-analysis", "growth_order_fit", "#radii=" + std::to_string(radii.size()),
                              "need at least 5 radii");
    samples = std::max(64, samples + (samples % 2));
    for (size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1]))
            throw ValidationError("entire-analysis", "growth_order_fit", "radii", "radii must be strictly increasing");

    GrowthFit fit;
    fit.radii = radii;
    for (double r : radii) {
        std::vector<double> lm(static_cast<size_t>(samples));
        parallel_for(lm.size(), [&](size_t i) {
            const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(samples);
            lm[i] = f.log(std::polar(r, t)).real();
        });
        fit.log_max_modulus.push_back(*std::max_element(lm.begin(), lm.end()));
        fit.log_modulus_negative_axis.push_back(f.log(cd(-r, 0.0)).real());
    }
    for (size_t i = 1; i < radii.size(); ++i)
        if (fit.log_max_modulus[i] < fit.log_max_modulus[i - 1]) fit.monotone = false;

    auto loglog = [&](const std::vector<double>& logm, double* slope, double* icpt, double* rms) {
        std::vector<double> x, y;
        for (size_t i = 0; i < radii.size(); ++i)
            if (logm[i] > std::log(2.0)) {
                x.push_back(std::log(radii[i]));
                y.push_back(std::log(logm[i]));
            }
        if (x.size() < 2) return false;
        auto lf = linear_fit(x, y);
        *slope = lf.slope;
        if (icpt) *icpt = lf.intercept;
        if (rms) *rms = lf.rms;
        return true;
    };
    fit.too_small = !loglog(fit.log_max_modulus, &fit.alpha, &fit.log_C, &fit.residual);
    loglog(fit.log_modulus_negative_axis, &fit.alpha_negative_axis, nullptr, nullptr);
    return fit;
}

CountingFit counting_exponent_fit(const std::vector<std::pair<double, double>>& counts) {
    std::vector<double> x, y;
    for (const auto& [r, n] : counts)
        if (n >= 1.0 && r > 0.0) {
            x.push_back(std::log(r));
            y.push_back(std::log(n));
        }
    if (x.size() < 5)
        throw ValidationError("entire-analysis", "counting_exponent_fit", "#usable=" + std::to_string(x.size()),
                              "need at least 5 radii with N(r) >= 1");
    CountingFit fit;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
        fit.degenerate = true;
        fit.log_C = y.front();
        return fit;
    }
    auto lf = linear_fit(x, y);
    fit.beta = lf.slope;
    fit.log_C = lf.intercept;
    fit.residual = lf.rms;
    return fit;
}

}  // namespace dyndet
