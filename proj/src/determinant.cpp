#include "dyndet/determinant.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dyndet/errors.hpp"
#include "dyndet/orbits.hpp"

namespace dyndet {

namespace {

// Accumulates terms of one order, merging equal lengths.
class OrderBin {
public:
    void add(double length, cd amplitude) {
        if (last_ != nullptr && length == last_length_) {
            last_->amplitude += amplitude;
            return;
        }
        const long long key = std::llround(std::log(length) * 1e12);
        if (key == last_key_ && last_ != nullptr) {
            last_->amplitude += amplitude;
            return;
        }
        auto [it, fresh] = index_.try_emplace(key, terms_.size());
        if (fresh) terms_.push_back({0.0, length});
        terms_[it->second].amplitude += amplitude;
        last_key_ = key;
        last_length_ = length;
        last_ = &terms_[it->second];
    }
    std::vector<TraceTerm> take() {
        last_ = nullptr;
        return std::move(terms_);
    }
    std::uint64_t words = 0;

private:
    std::vector<TraceTerm> terms_;
    std::unordered_map<long long, size_t> index_;
    long long last_key_ = 0;
    double last_length_ = 0.0;
    TraceTerm* last_ = nullptr;
};

template <int N, int D>
class Enumerator {
    using M = Eigen::Matrix<double, N, N>;
    using V = Eigen::Matrix<double, N, 1>;
    using C = Eigen::Matrix<cd, D, D>;

    struct Edge {
        M lin;
        V off;
        C lift;
        double t0 = 0.0;
        V c;
    };
    struct Frame {
        M lin;
        V off;
        C lift;
        double rc = 0.0;
        V rg;
    };

public:
    Enumerator(const FlowSystem& sys, int max_order)
        : sys_(sys), k_(sys.graph.size()), n_(sys.section_dim), d_(sys.bundle_dim), max_order_(max_order) {
        edges_.resize(static_cast<size_t>(k_) * k_);
        has_.assign(edges_.size(), false);
        for (const auto& [key, e] : sys.edges) {
            Edge& dst = edges_[key.first * k_ + key.second];
            dst.lin = e.linear;
            dst.off = e.offset;
            dst.lift = e.lift;
            dst.t0 = e.roof.t0;
            dst.c = e.roof.c;
            has_[key.first * k_ + key.second] = true;
            if (!e.roof.c.isZero(0.0)) constant_roof_ = false;
        }
        bins_.resize(static_cast<size_t>(max_order));
        stack_.resize(static_cast<size_t>(max_order) + 1);
        word_.resize(static_cast<size_t>(max_order) + 1);
        for (auto& f : stack_) init_frame(f);
    }

    TraceSeries run() {
        for (int start = 0; start < k_; ++start) {
            Frame& f0 = stack_[0];
            f0.lin = M::Identity(n_, n_);
            f0.off = V::Zero(n_);
            f0.lift = C::Identity(d_, d_);
            f0.rc = 0.0;
            f0.rg = V::Zero(n_);
            word_[0] = start;
            descend(0);
        }
        TraceSeries out;
        out.max_order = max_order_;
        for (auto& b : bins_) {
            out.word_counts.push_back(b.words);
            out.terms.push_back(b.take());
        }
        return out;
    }

private:
    void init_frame(Frame& f) {
        f.lin = M::Zero(n_, n_);
        f.off = V::Zero(n_);
        f.lift = C::Zero(d_, d_);
        f.rg = V::Zero(n_);
    }

    static void step(const Frame& from, const Edge& e, Frame& to) {
        to.rc = from.rc + e.t0 + e.c.dot(from.off);
        to.rg.noalias() = from.rg + from.lin.transpose() * e.c;
        to.off.noalias() = e.lin * from.off;
        to.off += e.off;
        to.lin.noalias() = e.lin * from.lin;
        to.lift.noalias() = from.lift * e.lift;
    }

    void close(int depth) {
        const int start = word_[0];
        const int last = word_[depth];
        const Edge& e = edges_[last * k_ + start];
        step(stack_[depth], e, closing_);
        const int m = depth + 1;
        M ImL = M::Identity(n_, n_) - closing_.lin;
        double det = 1.0;
        V x = V::Zero(n_);
        if (n_ > 0) {
            M inv;
            if constexpr (N != Eigen::Dynamic && N <= 4) {
                det = ImL.determinant();
                inv = ImL.inverse();
            } else {
                Eigen::FullPivLU<M> lu(ImL);
                det = lu.determinant();
                inv = lu.inverse();
            }
            const double cond = ImL.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
            if (!(cond < 1e12)) fail_hyperbolic(m);
            x.noalias() = inv * closing_.off;
        }
        const double T = closing_.rc + closing_.rg.dot(x);
        if (!constant_roof_) check_roofs(depth, x);
        if (!(T > 0.0))
            throw NumericalError("orbit-enum", "orbit_data", word_text(m), "orbit length <= 0");
        OrderBin& bin = bins_[m - 1];
        ++bin.words;
        bin.add(T, closing_.lift.trace() / std::abs(det));
    }

    void check_roofs(int depth, const V& x) {
        for (int q = 0; q <= depth; ++q) {
            const int a = word_[q], b = q < depth ? word_[q + 1] : word_[0];
            const Edge& e = edges_[a * k_ + b];
            V p = stack_[q].lin * x + stack_[q].off;
            if (!(e.t0 + e.c.dot(p) > 0.0))
                throw NumericalError("orbit-enum", "orbit_data", word_text(depth + 1),
                                     "roof value <= 0 at orbit point " + std::to_string(q));
        }
    }

    void descend(int depth) {
        const int last = word_[depth];
        if (has_[last * k_ + word_[0]]) close(depth);
        if (depth + 1 >= max_order_) return;
        for (int b = 0; b < k_; ++b) {
            if (!has_[last * k_ + b]) continue;
            step(stack_[depth], edges_[last * k_ + b], stack_[depth + 1]);
            word_[depth + 1] = b;
            descend(depth + 1);
        }
    }

    std::string word_text(int m) const {
        std::string s;
        for (int q = 0; q < m; ++q) s += (q ? " " : "") + sys_.graph.symbols[word_[q]];
        return s;
    }

    [[noreturn]] void fail_hyperbolic(int m) const {
        throw NumericalError("orbit-enum", "orbit_data", word_text(m),
                             "I - P is numerically singular (hyperbolicity failure)");
    }

    const FlowSystem& sys_;
    int k_, n_, d_, max_order_;
    bool constant_roof_ = true;
    std::vector<Edge> edges_;
    std::vector<bool> has_;
    std::vector<OrderBin> bins_;
    std::vector<Frame> stack_;
    Frame closing_;
    std::vector<int> word_;
};

template <int N, int D>
TraceSeries enumerate(const FlowSystem& sys, int M) {
    return Enumerator<N, D>(sys, M).run();
}

template <int N>
TraceSeries dispatch_bundle(const FlowSystem& sys, int M) {
    switch (sys.bundle_dim) {
        case 1: return enumerate<N, 1>(sys, M);
        case 2: return enumerate<N, 2>(sys, M);
        default: return enumerate<N, Eigen::Dynamic>(sys, M);
    }
}

}  // namespace

cd TraceSeries::trace(int m, cd z) const {
    cd s = 0.0;
    for (const auto& t : terms[m - 1]) s += t.amplitude * std::exp(-z * t.length);
    return s;
}

std::vector<cd> TraceSeries::traces(cd z, int upto) const {
    std::vector<cd> s(static_cast<size_t>(upto));
    for (int m = 1; m <= upto; ++m) s[m - 1] = trace(m, z);
    return s;
}

TraceSeries build_trace_series(const FlowSystem& sys, int M, int cap) {
    auto rep = validate_system(sys);
    if (!rep.ok())
        throw ValidationError("determinant", "build_trace_series", rep.violations.front(), "invalid system");
    if (cap <= 0) cap = default_orbit_cap(sys.graph.size());
    if (M < 0 || M > cap)
        throw ValidationError("determinant", "build_trace_series", "M=" + std::to_string(M),
                              "enumeration cap exceeded (cap " + std::to_string(cap) + ")");
    if (M == 0 || sys.edges.empty()) {
        TraceSeries s;
        s.max_order = M;
        s.terms.assign(static_cast<size_t>(M), {});
        s.word_counts.assign(static_cast<size_t>(M), 0);
        return s;
    }
    switch (sys.section_dim) {
        case 1: return dispatch_bundle<1>(sys, M);
        case 2: return dispatch_bundle<2>(sys, M);
        case 3: return dispatch_bundle<3>(sys, M);
        default: return dispatch_bundle<Eigen::Dynamic>(sys, M);
    }
}

cd trace_power(const FlowSystem& sys, int m, cd z, int cap) {
    if (m < 1) throw ValidationError("determinant", "trace_power", "m=" + std::to_string(m), "m must be >= 1");
    return build_trace_series(sys, m, cap).trace(m, z);
}

DetCoefficients det_coefficients(const std::vector<cd>& s, int P) {
    if (static_cast<int>(s.size()) < P)
        throw ValidationError("determinant", "det_coefficients", "P=" + std::to_string(P), "not enough traces");
    DetCoefficients out;
    out.order = P;
    out.c.assign(static_cast<size_t>(P) + 1, 0.0);
    out.c[0] = 1.0;
    for (int p = 1; p <= P; ++p) {
        cd acc = 0.0;
        for (int m = 1; m <= p; ++m) acc += s[m - 1] * out.c[p - m];
        out.c[p] = -acc / static_cast<double>(p);
    }
    return out;
}

DetCoefficients det_coefficients(const TraceSeries& series, cd z, int P) {
    if (series.max_order < P)
        throw ValidationError("determinant", "det_coefficients", "P=" + std::to_string(P),
                              "trace series shorter than requested order");
    return det_coefficients(series.traces(z, P), P);
}

namespace {

DetValue sum_with_tail(const DetCoefficients& dc, double gevrey_s, int section_dim) {
    DetValue out;
    out.value = 0.0;
    for (const auto& c : dc.c) out.value += c;
    const int M = dc.order;
    // log|c_p| ~ a + b p - c p^gamma
    const double gamma = 1.0 + 1.0 / (gevrey_s * std::max(1, section_dim));
    std::vector<double> ps, ls;
    for (int p = 1; p <= M; ++p) {
        const double a = std::abs(dc.c[p]);
        if (a > 1e-300) {
            ps.push_back(p);
            ls.push_back(std::log(a));
        }
    }
    if (ps.size() < 3) {
        out.tail_estimate = M >= 1 ? std::abs(dc.c[M]) : 0.0;
        return out;
    }
    Eigen::MatrixXd X(ps.size(), 3);
    Eigen::VectorXd y(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = ps[i];
        X(i, 2) = -std::pow(ps[i], gamma);
        y(i) = ls[i];
    }
    Eigen::Vector3d coef = X.colPivHouseholderQr().solve(y);
    auto model = [&](double p) { return coef(0) + coef(1) * p - coef(2) * std::pow(p, gamma); };
    const double slope_at_M = coef(1) - coef(2) * gamma * std::pow(static_cast<double>(M), gamma - 1.0);
    out.converged = coef(2) > 0.0 && slope_at_M < 0.0;
    if (!out.converged) {
        out.tail_estimate = INFINITY;
        return out;
    }
    double tail = 0.0;
    for (int p = M + 1; p <= M + 400; ++p) {
        const double term = std::exp(model(p));
        tail += term;
        if (term < 1e-30 * std::max(tail, 1e-300)) break;
    }
    out.tail_estimate = tail;
    return out;
}

}  // namespace

DetValue evaluate_det(const TraceSeries& series, cd z, int M, double gevrey_s, int section_dim) {
    return sum_with_tail(det_coefficients(series, z, M), gevrey_s, section_dim);
}

DetValue evaluate_det(const FlowSystem& sys, cd z, int M, int cap) {
    if (sys.edges.empty()) return DetValue{1.0, 0.0, true};
    return evaluate_det(build_trace_series(sys, M, cap), z, M, sys.gevrey_s, sys.section_dim);
}

EntireFn det_handle(std::shared_ptr<const TraceSeries> series, int M) {
    return from_values([series, M](cd z) {
        cd v = 0.0;
        for (const auto& c : det_coefficients(*series, z, M).c) v += c;
        return v;
    });
}

LatticeClosedForm make_closed_form(const FlowSystem& sys, double cutoff) {
    auto rep = validate_system(sys);
    if (!rep.ok()) throw ValidationError("determinant", "make_closed_form", rep.violations.front(), "invalid system");
    if (sys.edges.empty() || !is_transition_independent(sys))
        throw ValidationError("determinant", "make_closed_form", "",
                              "closed form needs identical linear part, lift and constant roof on every edge");
    const EdgeMap& e = sys.edges.begin()->second;
    LatticeClosedForm cf;
    cf.cutoff = cutoff;
    Eigen::ComplexEigenSolver<CMat> ea(sys.graph.adjacency.cast<cd>());
    Eigen::ComplexEigenSolver<CMat> eb(e.lift);
    for (int i = 0; i < ea.eigenvalues().size(); ++i) cf.adjacency_eigs.push_back(ea.eigenvalues()(i));
    for (int i = 0; i < eb.eigenvalues().size(); ++i) cf.lift_eigs.push_back(eb.eigenvalues()(i));

    OrbitSpectrum& spec = cf.folded;
    spec.t0 = e.roof.t0;
    auto take = [&](const Mat& block, std::vector<cd>& dst) {
        if (block.rows() == 0) return;
        Eigen::EigenSolver<Mat> es(block);
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            cd v = es.eigenvalues()(i);
            dst.push_back(v);
            if (std::abs(v.imag()) <= 1e-12 * std::abs(v) && v.real() < -1.0) ++spec.q_minus;
        }
    };
    take(e.linear.topLeftCorner(sys.d_u, sys.d_u), spec.lambdas);
    take(e.linear.bottomRightCorner(sys.d_s, sys.d_s), spec.mus);
    for (const auto& a : cf.adjacency_eigs)
        for (const auto& b : cf.lift_eigs) {
            cd ab = a * b;
            if (std::abs(ab) > 1e-12) spec.zetas.push_back(ab);
        }
    validate_spectrum(spec);
    return cf;
}

ProductValue closed_form_det(const LatticeClosedForm& cf, cd z) { return single_orbit_det(cf.folded, z, cf.cutoff); }

EntireFn closed_form_handle(const LatticeClosedForm& cf, double re_min, double tol) {
    return single_orbit_handle(cf.folded, re_min, tol);
}

ResonanceSet closed_form_resonances(const LatticeClosedForm& cf, double r) {
    return single_orbit_resonances(cf.folded, r);
}

}  // namespace dyndet
