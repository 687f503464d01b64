#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dyndet {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Symbol set I with a 0/1 adjacency matrix A indexed by I.
struct TransitionGraph {
    std::vector<std::string> symbols;
    Eigen::MatrixXi adjacency;

    int size() const { return static_cast<int>(symbols.size()); }
    bool admissible(int from, int to) const { return adjacency(from, to) == 1; }
    int index_of(const std::string& symbol) const;  // -1 when absent
};

/// Affine roof tau(x) = t0 + c.x
struct Roof {
    double t0 = 1.0;
    Vec c;

    double operator()(const Vec& x) const { return t0 + c.dot(x); }
};

/// Data attached to one admissible transition.
struct EdgeMap {
    Mat linear;   // (n-1)x(n-1), expanding block first
    Vec offset;   // (n-1)
    Roof roof;
    CMat lift;    // d x d

    Vec apply(const Vec& x) const { return linear * x + offset; }
};

struct FlowSystem {
    TransitionGraph graph;
    std::map<std::pair<int, int>, EdgeMap> edges;
    int section_dim = 0;  // n-1
    int bundle_dim = 1;   // d
    double gevrey_s = 2.0;
    int d_u = 0;
    int d_s = 0;

    int n() const { return section_dim + 1; }
    const EdgeMap& edge(int from, int to) const;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_system(const FlowSystem& sys);

/// Reachability-based irreducibility test.
bool is_irreducible(const TransitionGraph& graph);

/// tr(A^m) in exact integer arithmetic. Throws NumericalError on overflow.
std::uint64_t trace_adjacency_power(const TransitionGraph& graph, int m);

/// Composite of the edge maps along a word a_0 ... a_m.
/// The roof sum along the word, started at x, is roof_const + roof_grad.x
struct AffineMapData {
    Mat linear;
    Vec offset;
    CMat lift;
    double roof_const = 0.0;
    Vec roof_grad;

    Vec apply(const Vec& x) const { return linear * x + offset; }
    double roof_sum(const Vec& x) const { return roof_const + roof_grad.dot(x); }
};

/// Lift product is B_{e_0} B_{e_1} ... B_{e_{m-1}} (word order).
AffineMapData compose_along_word(const FlowSystem& sys, const std::vector<int>& word);

/// Composes w1 (first) then w2; both given as edge-level composites.
AffineMapData compose(const AffineMapData& first, const AffineMapData& second);

/// Same data for every admissible edge: the transition-independent case.
bool is_transition_independent(const FlowSystem& sys, double tol = 0.0);

/// Graph with the given adjacency carrying `edge` on every admissible transition.
/// Symbols are named "0", "1", ...
FlowSystem make_uniform_system(const Eigen::MatrixXi& adjacency, const EdgeMap& edge, int d_u, int d_s,
                               double gevrey_s);

}  // namespace dyndet
