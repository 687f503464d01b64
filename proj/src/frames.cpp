#include "dyndet/frames.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "dyndet/entire.hpp"
#include "dyndet/errors.hpp"
#include "dyndet/parallel.hpp"

namespace dyndet {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void invalid(const std::string& op, const std::string& input, const std::string& what) {
    throw ValidationError("frames", op, input, what);
}

double psi(double t, double s) { return t <= 0.0 ? 0.0 : std::exp(-std::pow(t, -1.0 / (s - 1.0))); }

double interval_distance(double x, double lo, double hi) {
    if (x < lo) return lo - x;
    if (x > hi) return x - hi;
    return 0.0;
}

int inf_norm(const Eigen::VectorXi& v) { return v.size() == 0 ? 0 : v.cwiseAbs().maxCoeff(); }

/// All integer vectors with |ell|_inf <= L, lexicographic.
std::vector<Eigen::VectorXi> frequency_set(int dim, int L) {
    std::vector<Eigen::VectorXi> out;
    Eigen::VectorXi ell = Eigen::VectorXi::Constant(dim, -L);
    while (true) {
        out.push_back(ell);
        int k = dim - 1;
        while (k >= 0 && ell(k) == L) {
            ell(k) = -L;
            --k;
        }
        if (k < 0) break;
        ++ell(k);
    }
    return out;
}

struct QuadGrid {
    int N = 0;       // intervals per dimension
    double step = 0.0;
    std::vector<double> y;  // nodes relative to the center, N + 1 of them
};

QuadGrid make_grid(double r, int N) {
    QuadGrid g;
    g.N = N + (N % 2);
    g.step = 2.0 * r / g.N;
    g.y.resize(static_cast<std::size_t>(g.N + 1));
    for (int j = 0; j <= g.N; ++j) g.y[static_cast<std::size_t>(j)] = -r + j * g.step;
    return g;
}

/// Rows exp(-2 pi i xi_q y_j) for nodes j = 0, stride, 2 stride, ...
CMat exp_table(const std::vector<double>& xis, const QuadGrid& g, int stride) {
    const int n = g.N / stride + 1;
    CMat E(static_cast<Eigen::Index>(xis.size()), n);
    for (std::size_t q = 0; q < xis.size(); ++q)
        for (int j = 0; j < n; ++j)
            E(static_cast<Eigen::Index>(q), j) =
                std::polar(1.0, -kTwoPi * xis[q] * g.y[static_cast<std::size_t>(j * stride)]);
    return E;
}

/// Sorted distinct values with an index lookup tolerant to rounding.
struct DistinctValues {
    std::vector<double> values;
    std::map<long long, int> slot;

    int add(double v) {
        const long long key = std::llround(v * 1e9);
        auto it = slot.find(key);
        if (it != slot.end()) return it->second;
        const int i = static_cast<int>(values.size());
        values.push_back(v);
        slot.emplace(key, i);
        return i;
    }
};

struct BlockResult {
    CMat H;  // phase * h^(ell' - Lambda^T ell), rows: row ells, cols: col ells
    double error = 0.0;
    double l1 = 0.0;
    bool empty = true;
};

/// Scalar part of the entries for edge map `e`, row center b and column center a.
BlockResult compute_block(const EdgeMap& e, const FrameGeometry& geom, const FrameParams& p, cd z, int b_index,
                          int a_index, const std::vector<Eigen::VectorXi>& row_ells,
                          const std::vector<Eigen::VectorXi>& col_ells) {
    const int k = geom.dim;
    const Mat lt = e.linear.transpose();
    BlockResult out;
    out.H = CMat::Zero(static_cast<Eigen::Index>(row_ells.size()), static_cast<Eigen::Index>(col_ells.size()));

    double xi_max = 0.0;
    for (const auto& lr : row_ells)
        for (const auto& lc : col_ells) {
            const Vec xi = lr.cast<double>() - lt * lc.cast<double>();
            xi_max = std::max(xi_max, xi.cwiseAbs().maxCoeff());
        }
    const int N = std::max(p.quad_nodes, static_cast<int>(std::ceil(32.0 * geom.r_theta * xi_max)));
    const QuadGrid g = make_grid(geom.r_theta, N);
    const int n1 = g.N + 1;

    // Integrand samples h(y) = theta_b(b+y) theta~_a(F(b+y)) exp(-z tau(b+y)).
    const Vec& b = geom.centers[static_cast<std::size_t>(b_index)];
    const int n2 = k == 2 ? n1 : 1;
    CMat hs(n1, n2);
    Vec x(k);
    double hmax = 0.0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            x(0) = b(0) + g.y[static_cast<std::size_t>(i)];
            if (k == 2) x(1) = b(1) + g.y[static_cast<std::size_t>(j)];
            const double th = geom.theta(b_index, x);
            cd v = 0.0;
            if (th != 0.0) {
                const double tt = geom.theta_tilde(a_index, e.apply(x));
                if (tt != 0.0) v = th * tt * std::exp(-z * e.roof(x));
            }
            hs(i, j) = v;
            hmax = std::max(hmax, std::abs(v));
        }
    if (hmax == 0.0) return out;
    out.empty = false;
    const double w1 = std::pow(g.step, k);
    out.l1 = hs.cwiseAbs().sum() * w1;

    const Vec Fb = e.apply(b);
    auto phase = [&](const Eigen::VectorXi& lr, const Eigen::VectorXi& lc) {
        return std::polar(1.0, kTwoPi * (lc.cast<double>().dot(Fb) - lr.cast<double>().dot(b)));
    };

    bool diagonal = true;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j && e.linear(i, j) != 0.0) diagonal = false;

    const auto R = static_cast<Eigen::Index>(row_ells.size());
    const auto C = static_cast<Eigen::Index>(col_ells.size());
    CMat full(R, C), half(R, C);

    if (diagonal) {
        std::vector<DistinctValues> dv(static_cast<std::size_t>(k));
        std::vector<Eigen::MatrixXi> slot(static_cast<std::size_t>(k), Eigen::MatrixXi(R, C));
        for (Eigen::Index r = 0; r < R; ++r)
            for (Eigen::Index c = 0; c < C; ++c)
                for (int d = 0; d < k; ++d)
                    slot[static_cast<std::size_t>(d)](r, c) = dv[static_cast<std::size_t>(d)].add(
                        row_ells[static_cast<std::size_t>(r)](d) -
                        e.linear(d, d) * col_ells[static_cast<std::size_t>(c)](d));
        for (int stride : {1, 2}) {
            const double w = std::pow(g.step * stride, k);
            CMat T;
            if (k == 1) {
                const int m = g.N / stride + 1;
                CMat sub(m, 1);
                for (int i = 0; i < m; ++i) sub(i, 0) = hs(i * stride, 0);
                T = exp_table(dv[0].values, g, stride) * sub * w;  // K1 x 1
            } else {
                const int m = g.N / stride + 1;
                CMat sub(m, m);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) sub(i, j) = hs(i * stride, j * stride);
                const CMat E1 = exp_table(dv[0].values, g, stride);
                const CMat E2 = exp_table(dv[1].values, g, stride);
                T = E1 * (sub * E2.transpose()) * w;  // K1 x K2
            }
            CMat& dst = stride == 1 ? full : half;
            for (Eigen::Index r = 0; r < R; ++r)
                for (Eigen::Index c = 0; c < C; ++c)
                    dst(r, c) = T(slot[0](r, c), k == 2 ? slot[1](r, c) : 0);
        }
    } else {
        for (int stride : {1, 2}) {
            const double w = std::pow(g.step * stride, k);
            const int m = g.N / stride + 1;
            CMat sub(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) sub(i, j) = hs(i * stride, j * stride);
            CMat& dst = stride == 1 ? full : half;
            for (Eigen::Index r = 0; r < R; ++r)
                for (Eigen::Index c = 0; c < C; ++c) {
                    const Vec xi = row_ells[static_cast<std::size_t>(r)].cast<double>() -
                                   lt * col_ells[static_cast<std::size_t>(c)].cast<double>();
                    const CMat e1 = exp_table({xi(0)}, g, stride);
                    const CMat e2 = exp_table({xi(1)}, g, stride);
                    dst(r, c) = (e1 * sub * e2.transpose())(0, 0) * w;
                }
        }
    }

    for (Eigen::Index r = 0; r < R; ++r)
        for (Eigen::Index c = 0; c < C; ++c) {
            const cd ph = phase(row_ells[static_cast<std::size_t>(r)], col_ells[static_cast<std::size_t>(c)]);
            out.error = std::max(out.error, std::abs(full(r, c) - half(r, c)));
            out.H(r, c) = ph * full(r, c);
        }
    return out;
}

void check_block(const BlockResult& br, const FrameParams& p, const std::string& op, const std::string& where) {
    if (br.empty) return;
    if (br.error > p.quad_tol * std::max(br.l1, std::numeric_limits<double>::min())) {
        std::ostringstream os;
        os << "quadrature refinement disagreement " << br.error << " exceeds " << p.quad_tol << " x " << br.l1;
        throw NumericalError("frames", op, where, os.str());
    }
}

}  // namespace

double escape_G(const Vec& xi_un, const Vec& xi_st, double s) {
    const double st = xi_st.size() ? xi_st.norm() : 0.0;
    const double un = xi_un.size() ? xi_un.norm() : 0.0;
    return std::pow(st, 1.0 / s) - std::pow(un, 1.0 / s);
}

double EscapeWeight::of(const Eigen::VectorXi& ell) const {
    const Vec xi = kTwoPi * ell.cast<double>();
    return escape_G(xi.tail(d_s), xi.head(d_u), s);
}

double plateau(double r, double rin, double rout, double s) {
    if (r <= rin) return 1.0;
    if (r >= rout) return 0.0;
    const double t = (rout - r) / (rout - rin);
    const double a = psi(t, s);
    const double b = psi(1.0 - t, s);
    return a / (a + b);
}

double FrameGeometry::window_sum(const Vec& x) const {
    double sum = 0.0;
    for (const auto& c : centers) sum += plateau((x - c).norm(), 0.0, r_theta, s);
    return sum;
}

double FrameGeometry::theta(int a, const Vec& x) const {
    const double beta = plateau((x - centers[static_cast<std::size_t>(a)]).norm(), 0.0, r_theta, s);
    if (beta == 0.0) return 0.0;
    double inside = 1.0;
    for (int i = 0; i < dim; ++i)
        inside *= plateau(interval_distance(x(i), lo(i), hi(i)), 0.0, omega_width * r_theta, s);
    const double denom = window_sum(x) + (1.0 - inside);
    return scale * beta / denom;
}

double FrameGeometry::theta_tilde(int a, const Vec& x) const {
    return plateau((x - centers[static_cast<std::size_t>(a)]).norm(), r_theta, tilde_radius, s) / scale;
}

FrameGeometry make_frame(const FlowSystem& sys, const FrameParams& p) {
    FrameGeometry g;
    g.dim = sys.section_dim;
    if (g.dim < 1 || g.dim > 2)
        invalid("make_frame", "n-1=" + std::to_string(g.dim), "frame discretization supports n-1 in {1, 2}");
    g.s = sys.gevrey_s;
    g.lo = p.box_lo.size() ? p.box_lo : Vec::Zero(g.dim);
    g.hi = p.box_hi.size() ? p.box_hi : Vec::Zero(g.dim);
    if (g.lo.size() != g.dim || g.hi.size() != g.dim)
        invalid("make_frame", "box", "box corners must have n-1 coordinates");
    if ((g.hi - g.lo).minCoeff() < 0.0) invalid("make_frame", "box", "box_lo must not exceed box_hi");
    const double side = (g.hi - g.lo).maxCoeff();
    g.delta = p.delta > 0.0 ? p.delta : (side > 0.0 ? 0.1 * side : 0.75);
    g.r_theta = p.r_theta > 0.0 ? p.r_theta : 0.4 * g.delta;
    g.tilde_radius = 2.0 * g.delta / 3.0;
    g.omega_width = p.omega_width;
    g.scale = p.window_scale;
    if (!(g.scale > 0.0)) invalid("make_frame", "window_scale", "must be positive");
    if (!(p.omega_width > 0.0)) invalid("make_frame", "omega_width", "must be positive");
    if (!(g.r_theta < g.tilde_radius))
        invalid("make_frame", "r_theta=" + std::to_string(g.r_theta), "must be below 2 delta / 3");
    if (g.r_theta + g.tilde_radius > 1.0)
        invalid("make_frame", "delta=" + std::to_string(g.delta),
                "r_theta + 2 delta / 3 must not exceed the unit period");

    std::vector<std::vector<double>> axes(static_cast<std::size_t>(g.dim));
    double spacing = 0.0;
    for (int i = 0; i < g.dim; ++i) {
        const double len = g.hi(i) - g.lo(i);
        const int count = len > 0.0 ? static_cast<int>(std::ceil(len / (g.delta / 2.0) - 1e-9)) + 1 : 1;
        const double h = count > 1 ? len / (count - 1) : 0.0;
        spacing = std::max(spacing, h);
        for (int j = 0; j < count; ++j) axes[static_cast<std::size_t>(i)].push_back(g.lo(i) + j * h);
    }
    if (!(g.r_theta > 0.5 * spacing * std::sqrt(static_cast<double>(g.dim))))
        invalid("make_frame", "r_theta=" + std::to_string(g.r_theta), "windows do not cover the box");
    if (g.dim == 1) {
        for (double a : axes[0]) g.centers.push_back(Vec::Constant(1, a));
    } else {
        for (double a : axes[0])
            for (double b : axes[1]) {
                Vec c(2);
                c << a, b;
                g.centers.push_back(c);
            }
    }
    return g;
}

std::vector<FrameAtom> frame_atoms(const FlowSystem& sys, const FrameGeometry& geom, int L) {
    std::vector<FrameAtom> atoms;
    const auto ells = frequency_set(geom.dim, L);
    for (int sym = 0; sym < sys.graph.size(); ++sym)
        for (int c = 0; c < static_cast<int>(geom.centers.size()); ++c)
            for (const auto& ell : ells)
                for (int j = 0; j < sys.bundle_dim; ++j) atoms.push_back({sym, c, ell, j});
    return atoms;
}

EntryValue matrix_entry(const FlowSystem& sys, const FrameGeometry& geom, const FrameParams& p, cd z,
                        const FrameAtom& col, const FrameAtom& row) {
    if (!sys.graph.admissible(row.symbol, col.symbol))
        invalid("matrix_entry", std::to_string(row.symbol) + "->" + std::to_string(col.symbol),
                "edge not admissible");
    const EdgeMap& e = sys.edge(row.symbol, col.symbol);
    const BlockResult br = compute_block(e, geom, p, z, row.center, col.center, {row.ell}, {col.ell});
    check_block(br, p, "matrix_entry", "centers " + std::to_string(row.center) + "," + std::to_string(col.center));
    if (br.empty) return {0.0, 0.0};
    const cd n = e.lift(row.channel, col.channel);
    return {br.H(0, 0) * n, br.error * std::abs(n)};
}

GalerkinMatrix assemble_operator(const FlowSystem& sys, cd z, const FrameParams& p, const EscapeWeight& w) {
    if (p.L < 0) invalid("assemble_operator", "L=" + std::to_string(p.L), "must be nonnegative");
    if (!(w.epsilon >= 0.0)) invalid("assemble_operator", "epsilon", "must be nonnegative");
    const FrameGeometry geom = make_frame(sys, p);
    GalerkinMatrix m;
    m.index = frame_atoms(sys, geom, p.L);
    m.z = z;
    m.L = p.L;
    const auto ells = frequency_set(geom.dim, p.L);
    const int nc = static_cast<int>(geom.centers.size());
    const int nl = static_cast<int>(ells.size());
    const int d = sys.bundle_dim;
    const Eigen::Index per_symbol = static_cast<Eigen::Index>(nc) * nl * d;
    const Eigen::Index n = per_symbol * sys.graph.size();
    m.raw = CMat::Zero(n, n);

    struct Task {
        int from, to, b, a;
    };
    std::vector<Task> tasks;
    for (const auto& [key, edge] : sys.edges)
        for (int b = 0; b < nc; ++b)
            for (int a = 0; a < nc; ++a) tasks.push_back({key.first, key.second, b, a});
    std::vector<BlockResult> results(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t t) {
        const Task& tk = tasks[t];
        results[t] = compute_block(sys.edge(tk.from, tk.to), geom, p, z, tk.b, tk.a, ells, ells);
    });

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const Task& tk = tasks[t];
        const BlockResult& br = results[t];
        std::ostringstream where;
        where << "edge " << sys.graph.symbols[static_cast<std::size_t>(tk.from)] << "->"
              << sys.graph.symbols[static_cast<std::size_t>(tk.to)] << ", centers " << tk.b << "," << tk.a;
        check_block(br, p, "assemble_operator", where.str());
        if (br.empty) continue;
        const CMat& N = sys.edge(tk.from, tk.to).lift;
        m.quad_error = std::max(m.quad_error, br.error * N.cwiseAbs().maxCoeff());
        const Eigen::Index r0 = tk.from * per_symbol + static_cast<Eigen::Index>(tk.b) * nl * d;
        const Eigen::Index c0 = tk.to * per_symbol + static_cast<Eigen::Index>(tk.a) * nl * d;
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                for (int pr = 0; pr < d; ++pr)
                    for (int pc = 0; pc < d; ++pc)
                        m.raw(r0 + i * d + pr, c0 + j * d + pc) = br.H(i, j) * N(pr, pc);
    }

    m.G.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) m.G(i) = w.of(m.index[static_cast<std::size_t>(i)].ell);

    double eps = w.epsilon;
    for (int halvings = 0;; ++halvings) {
        const Vec up = (-eps * m.G).array().exp();
        const Vec down = (eps * m.G).array().exp();
        m.weighted = up.asDiagonal() * m.raw * down.asDiagonal();
        m.max_row_norm = n ? m.weighted.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
        m.epsilon = eps;
        m.epsilon_halvings = halvings;
        if (std::isfinite(m.max_row_norm) && m.max_row_norm <= p.row_norm_bound) break;
        if (halvings >= 60 || eps == 0.0) {
            if (!std::isfinite(m.max_row_norm))
                throw NumericalError("frames", "assemble_operator", "epsilon=" + std::to_string(w.epsilon),
                                     "weighted operator has non-finite row norm");
            break;
        }
        eps *= 0.5;
    }
    return m;
}

cd galerkin_det(const GalerkinMatrix& m) {
    const Eigen::Index n = m.weighted.rows();
    if (n == 0) return 1.0;
    const CMat A = CMat::Identity(n, n) - m.weighted;
    return Eigen::PartialPivLU<CMat>(A).determinant();
}

cd galerkin_det(const FlowSystem& sys, cd z, const FrameParams& p, const EscapeWeight& w) {
    return galerkin_det(assemble_operator(sys, z, p, w));
}

SweepResult galerkin_sweep(const FlowSystem& sys, cd z, FrameParams p, const EscapeWeight& w,
                           const std::vector<int>& Ls) {
    if (Ls.empty()) invalid("galerkin_sweep", "L list", "empty");
    SweepResult out;
    out.Ls = Ls;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < Ls.size(); ++i) {
        p.L = Ls[i];
        out.dets.push_back(galerkin_det(sys, z, p, w));
        const double step =
            i == 0 ? std::numeric_limits<double>::infinity() : std::abs(out.dets[i] - out.dets[i - 1]);
        out.steps.push_back(step);
        if (i > 0 && step < best) {
            best = step;
            out.chosen = static_cast<int>(i);
        }
    }
    return out;
}

DecayFit decay_fit(std::vector<double> sv, double exponent, double dynamic_range) {
    std::sort(sv.begin(), sv.end(), std::greater<>());
    DecayFit fit;
    fit.exponent = exponent;
    fit.singular_values = sv;
    const double top = sv.empty() ? 0.0 : sv.front();
    const double floor = std::max(top * dynamic_range, top * 64.0 * std::numeric_limits<double>::epsilon());
    std::vector<double> x, y;
    for (std::size_t m = 0; m < sv.size() && top > 0.0 && sv[m] >= floor; ++m) {
        x.push_back(std::pow(static_cast<double>(m + 1), exponent));
        y.push_back(std::log(sv[m]));
    }
    fit.fitted = static_cast<int>(x.size());
    if (fit.fitted < 20)
        throw NumericalError("frames", "decay_profile", "fitted=" + std::to_string(fit.fitted),
                             "fewer than 20 singular values in the fit range");
    const LinearFit lf = linear_fit(x, y);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r2 = lf.r2;
    return fit;
}

DecayFit decay_profile(const GalerkinMatrix& m, double s, int section_dim, double dynamic_range) {
    const Eigen::BDCSVD<CMat> svd(m.weighted);
    const Vec sv = svd.singularValues();
    return decay_fit(std::vector<double>(sv.data(), sv.data() + sv.size()), 1.0 / (s * section_dim),
                     dynamic_range);
}

EscapeDecayReport escape_decay_check(const FlowSystem& sys, const FrameGeometry& geom, const GalerkinMatrix& m,
                                     const EscapeWeight& w, double varpi, int min_ell) {
    EscapeDecayReport rep;
    rep.c = std::numeric_limits<double>::infinity();
    const auto ells = frequency_set(geom.dim, m.L);
    for (const auto& [key, e] : sys.edges) {
        const Mat inv_t = e.linear.transpose().inverse();
        for (std::size_t b = 0; b < geom.centers.size(); ++b) {
            const Vec Fb = e.apply(geom.centers[b]);
            for (std::size_t a = 0; a < geom.centers.size(); ++a) {
                const double dx2 = (Fb - geom.centers[a]).squaredNorm();
                if (dx2 > varpi * varpi) continue;
                for (const auto& lr : ells) {
                    const int nr = inf_norm(lr);
                    if (nr < min_ell) continue;
                    const Vec pulled = inv_t * (kTwoPi * lr.cast<double>());
                    const double g_row = w.of(lr);
                    for (const auto& lc : ells) {
                        const Vec xc = kTwoPi * lc.cast<double>();
                        const double d2 = dx2 + (pulled - xc).squaredNorm() / (1.0 + xc.squaredNorm());
                        if (d2 > varpi * varpi) continue;
                        ++rep.pairs;
                        const double ratio = (g_row - w.of(lc)) / std::pow(static_cast<double>(nr), 1.0 / w.s);
                        rep.c = std::min(rep.c, ratio);
                    }
                }
            }
        }
    }
    if (rep.pairs == 0) rep.c = 0.0;
    rep.holds = rep.pairs > 0 && rep.c > 0.0;
    return rep;
}

std::vector<cd> reconstruct(const FrameGeometry& geom, const std::function<double(const Vec&)>& f, int L,
                            const std::vector<Vec>& points, int quad_nodes) {
    const auto ells = frequency_set(geom.dim, L);
    const QuadGrid g = make_grid(geom.r_theta, quad_nodes);
    const int n1 = g.N + 1;
    const int n2 = geom.dim == 2 ? n1 : 1;
    const double w = std::pow(g.step, geom.dim);
    std::vector<cd> out(points.size(), 0.0);
    Vec x(geom.dim);
    for (int a = 0; a < static_cast<int>(geom.centers.size()); ++a) {
        const Vec& c = geom.centers[static_cast<std::size_t>(a)];
        CMat samples(n1, n2);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                x(0) = c(0) + g.y[static_cast<std::size_t>(i)];
                if (geom.dim == 2) x(1) = c(1) + g.y[static_cast<std::size_t>(j)];
                const double th = geom.theta(a, x);
                samples(i, j) = th == 0.0 ? 0.0 : th * f(x);
            }
        std::vector<double> freqs;
        for (int l = -L; l <= L; ++l) freqs.push_back(l);
        const CMat E = exp_table(freqs, g, 1);
        // Coefficients relative to the center; the center phase is restored below.
        const CMat T = geom.dim == 1 ? CMat(E * samples * w) : CMat(E * (samples * E.transpose()) * w);
        for (std::size_t q = 0; q < points.size(); ++q) {
            const double tt = geom.theta_tilde(a, points[q]);
            if (tt == 0.0) continue;
            const Vec rel = points[q] - c;
            cd sum = 0.0;
            for (const auto& ell : ells) {
                const cd coef = geom.dim == 1 ? T(ell(0) + L, 0) : T(ell(0) + L, ell(1) + L);
                sum += coef * std::polar(1.0, kTwoPi * ell.cast<double>().dot(rel));
            }
            out[q] += tt * sum;
        }
    }
    return out;
}

}  // namespace dyndet
