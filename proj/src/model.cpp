#include "dyndet/model.hpp"

#include <sstream>

#include "dyndet/errors.hpp"

namespace dyndet {

namespace {

std::string edge_name(const FlowSystem& sys, int from, int to) {
    return "(" + sys.graph.symbols[from] + "," + sys.graph.symbols[to] + ")";
}

bool blocks_ok(const Mat& m, int du, int ds) {
    if (du == 0 || ds == 0) return true;
    return m.topRightCorner(du, ds).isZero(0.0) && m.bottomLeftCorner(ds, du).isZero(0.0);
}

}  // namespace

int TransitionGraph::index_of(const std::string& symbol) const {
    for (int i = 0; i < size(); ++i)
        if (symbols[i] == symbol) return i;
    return -1;
}

const EdgeMap& FlowSystem::edge(int from, int to) const {
    auto it = edges.find({from, to});
    if (it == edges.end())
        throw ValidationError("core-model", "edge", std::to_string(from) + "->" + std::to_string(to),
                              "no edge map for this transition");
    return it->second;
}

bool is_irreducible(const TransitionGraph& graph) {
    const int k = graph.size();
    if (k == 0) return true;
    Eigen::MatrixXi reach = graph.adjacency;
    for (int via = 0; via < k; ++via)
        for (int i = 0; i < k; ++i)
            if (reach(i, via))
                for (int j = 0; j < k; ++j)
                    if (reach(via, j)) reach(i, j) = 1;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (!reach(i, j)) return false;
    return true;
}

ValidationReport validate_system(const FlowSystem& sys) {
    ValidationReport rep;
    const auto& g = sys.graph;
    const int k = g.size();
    const int nm1 = sys.section_dim;

    if (g.adjacency.rows() != k || g.adjacency.cols() != k) {
        rep.violations.push_back("adjacency is not square with side #symbols");
        return rep;
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (g.adjacency(i, j) != 0 && g.adjacency(i, j) != 1)
                rep.violations.push_back("adjacency entry " + std::to_string(i) + "," + std::to_string(j) +
                                         " not in {0,1}");
    if (sys.d_u < 0 || sys.d_s < 0 || sys.d_u + sys.d_s != nm1)
        rep.violations.push_back("split (d_u, d_s) does not add up to n-1");
    if (sys.bundle_dim < 1) rep.violations.push_back("bundle dimension d must be >= 1");
    if (!(sys.gevrey_s > 1.0)) rep.violations.push_back("gevrey exponent s must be > 1");
    if (!rep.violations.empty()) return rep;

    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            bool has = sys.edges.count({i, j}) > 0;
            if (g.adjacency(i, j) == 1 && !has) rep.violations.push_back("missing edge map " + edge_name(sys, i, j));
            if (g.adjacency(i, j) == 0 && has)
                rep.violations.push_back("edge map on inadmissible transition " + edge_name(sys, i, j));
        }

    for (const auto& [key, e] : sys.edges) {
        if (key.first < 0 || key.first >= k || key.second < 0 || key.second >= k) {
            rep.violations.push_back("edge map references unknown symbol");
            continue;
        }
        const std::string name = edge_name(sys, key.first, key.second);
        if (e.linear.rows() != nm1 || e.linear.cols() != nm1 || e.offset.size() != nm1 || e.roof.c.size() != nm1) {
            rep.violations.push_back("section dimension mismatch on edge " + name);
            continue;
        }
        if (e.lift.rows() != sys.bundle_dim || e.lift.cols() != sys.bundle_dim) {
            rep.violations.push_back("lift dimension mismatch on edge " + name);
            continue;
        }
        if (!blocks_ok(e.linear, sys.d_u, sys.d_s))
            rep.violations.push_back("linear part not block diagonal on edge " + name);
        if (sys.d_u > 0) {
            auto ev = e.linear.topLeftCorner(sys.d_u, sys.d_u).eigenvalues();
            for (int q = 0; q < ev.size(); ++q)
                if (!(std::abs(ev(q)) > 1.0)) {
                    rep.violations.push_back("expanding eigenvalue modulus <= 1 on edge " + name);
                    break;
                }
        }
        if (sys.d_s > 0) {
            auto ev = e.linear.bottomRightCorner(sys.d_s, sys.d_s).eigenvalues();
            for (int q = 0; q < ev.size(); ++q)
                if (!(std::abs(ev(q)) < 1.0)) {
                    rep.violations.push_back("contracting eigenvalue modulus >= 1 on edge " + name);
                    break;
                }
        }
        if (!(e.roof.t0 > 0.0)) rep.violations.push_back("roof t0 <= 0 on edge " + name);
    }

    if (!is_irreducible(g)) rep.warnings.push_back("adjacency not irreducible");
    return rep;
}

std::uint64_t trace_adjacency_power(const TransitionGraph& graph, int m) {
    if (m < 1) throw ValidationError("core-model", "trace_adjacency_power", "m=" + std::to_string(m), "m must be >= 1");
    const int k = graph.size();
    using U = std::uint64_t;
    std::vector<U> base(static_cast<size_t>(k) * k), cur(base.size()), next(base.size());
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) base[i * k + j] = static_cast<U>(graph.adjacency(i, j));
    cur = base;
    auto overflow = [&]() {
        return NumericalError("core-model", "trace_adjacency_power", "m=" + std::to_string(m),
                              "integer overflow in tr(A^m)");
    };
    for (int step = 1; step < m; ++step) {
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                U acc = 0;
                for (int q = 0; q < k; ++q) {
                    U prod;
                    if (__builtin_mul_overflow(cur[i * k + q], base[q * k + j], &prod)) throw overflow();
                    if (__builtin_add_overflow(acc, prod, &acc)) throw overflow();
                }
                next[i * k + j] = acc;
            }
        std::swap(cur, next);
    }
    U tr = 0;
    for (int i = 0; i < k; ++i)
        if (__builtin_add_overflow(tr, cur[i * k + i], &tr)) throw overflow();
    return tr;
}

AffineMapData compose(const AffineMapData& first, const AffineMapData& second) {
    AffineMapData out;
    out.linear = second.linear * first.linear;
    out.offset = second.linear * first.offset + second.offset;
    out.lift = first.lift * second.lift;
    out.roof_const = first.roof_const + second.roof_const + second.roof_grad.dot(first.offset);
    out.roof_grad = first.roof_grad + first.linear.transpose() * second.roof_grad;
    return out;
}

AffineMapData compose_along_word(const FlowSystem& sys, const std::vector<int>& word) {
    const int nm1 = sys.section_dim;
    AffineMapData acc;
    acc.linear = Mat::Identity(nm1, nm1);
    acc.offset = Vec::Zero(nm1);
    acc.lift = CMat::Identity(sys.bundle_dim, sys.bundle_dim);
    acc.roof_grad = Vec::Zero(nm1);
    for (size_t q = 0; q + 1 < word.size(); ++q) {
        const int a = word[q], b = word[q + 1];
        if (a < 0 || b < 0 || a >= sys.graph.size() || b >= sys.graph.size() || !sys.graph.admissible(a, b)) {
            std::ostringstream os;
            os << "(" << a << "," << b << ") at position " << q;
            throw ValidationError("core-model", "compose_along_word", os.str(), "inadmissible transition");
        }
        const EdgeMap& e = sys.edge(a, b);
        // roof of this edge is evaluated at the current point acc(x)
        acc.roof_const += e.roof.t0 + e.roof.c.dot(acc.offset);
        acc.roof_grad += acc.linear.transpose() * e.roof.c;
        acc.offset = e.linear * acc.offset + e.offset;
        acc.linear = e.linear * acc.linear;
        acc.lift = acc.lift * e.lift;
    }
    return acc;
}

bool is_transition_independent(const FlowSystem& sys, double tol) {
    const EdgeMap* ref = nullptr;
    for (const auto& [key, e] : sys.edges) {
        if (!e.roof.c.isZero(tol)) return false;
        if (!ref) {
            ref = &e;
            continue;
        }
        if (!(e.linear - ref->linear).isZero(tol) || !(e.lift - ref->lift).isZero(tol) ||
            std::abs(e.roof.t0 - ref->roof.t0) > tol)
            return false;
    }
    return true;
}

FlowSystem make_uniform_system(const Eigen::MatrixXi& adjacency, const EdgeMap& edge, int d_u, int d_s,
                               double gevrey_s) {
    FlowSystem sys;
    const int k = static_cast<int>(adjacency.rows());
    for (int i = 0; i < k; ++i) sys.graph.symbols.push_back(std::to_string(i));
    sys.graph.adjacency = adjacency;
    sys.section_dim = static_cast<int>(edge.linear.rows());
    sys.bundle_dim = static_cast<int>(edge.lift.rows());
    sys.gevrey_s = gevrey_s;
    sys.d_u = d_u;
    sys.d_s = d_s;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (adjacency(i, j) == 1) sys.edges[{i, j}] = edge;
    return sys;
}

}  // namespace dyndet
