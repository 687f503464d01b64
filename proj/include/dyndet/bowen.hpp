#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "dyndet/determinant.hpp"
#include "dyndet/entire.hpp"
#include "dyndet/model.hpp"
#include "dyndet/orbits.hpp"

namespace dyndet {

/// Subset of I as a bit mask (#I <= 32).
using SymbolSet = std::uint32_t;
using KindTuple = std::vector<int>;

inline SymbolSet singleton(int i) { return SymbolSet{1} << i; }
int set_size(SymbolSet s);

struct QkElement {
    std::vector<SymbolSet> subsets;

    SymbolSet un() const;
    bool operator==(const QkElement&) const = default;
};

struct IkVertex {
    QkElement tuple;
    int symbol = 0;

    bool operator==(const IkVertex&) const = default;
};

/// Predicate on (J, i) with i in J.
using CoOccurrenceOracle = std::function<bool(SymbolSet, int)>;

/// Accepts exactly the singletons ({i}, i).
CoOccurrenceOracle singleton_oracle();

/// Accepts singletons and every (J, i) with J inside a listed (J', i).
CoOccurrenceOracle table_oracle(std::vector<std::pair<SymbolSet, int>> table);

/// Ordered tuples of pairwise disjoint subsets with #V_j = k_j, lexicographic.
std::vector<QkElement> build_Qk(int symbol_count, const KindTuple& k);

/// Throws ValidationError when the oracle rejects a singleton or is not monotone
/// on the pairs it is asked about.
std::vector<IkVertex> build_Ik(const std::vector<QkElement>& qk, const CoOccurrenceOracle& oracle, int symbol_count);

struct AkGraph {
    KindTuple k;
    std::vector<IkVertex> vertices;
    Eigen::MatrixXi adjacency;

    int edge_count() const { return adjacency.sum(); }
    TransitionGraph as_graph() const;
};

/// A_k((U,i),(V,j)) = 1 iff U and V agree off one component j0 and, for some W,
/// U_{j0} = W u {i}, V_{j0} = W u {j} with A(i,j) = 1. The moving symbol is the
/// distinguished symbol i of the source vertex.
AkGraph build_Ak(const KindTuple& k, const std::vector<IkVertex>& ik, const TransitionGraph& base);

/// (V, i) -> i along a path of vertex indices. Throws on an inadmissible path.
Word project_pk(const AkGraph& g, const std::vector<int>& path);

/// sum over k of (-1)^{length(k)+1} count(k); the identity holds iff this is 1.
long long verify_counting_identity(const std::map<KindTuple, long long>& preimage_counts);

/// All tuples with entries summing to at most #I, graded lexicographic order.
std::vector<KindTuple> kind_tuples(int symbol_count);

/// Tuples with nonempty I_k, with their graphs.
std::vector<AkGraph> build_family(const TransitionGraph& base, const CoOccurrenceOracle& oracle);

/// Trace series of d_k: fixed words of Sigma_k weighted by the projected orbit,
/// with the T#/T factor of the image orbit.
TraceSeries bowen_trace_series(const FlowSystem& base, const AkGraph& g, int M);

struct AlternatingPair {
    EntireFn f;  // product over odd-length tuples
    EntireFn g;  // product over even-length tuples

    /// f/g; near a zero of g the value comes from the mean of f/g over a small
    /// circle. Throws NumericalError when g has a zero f does not cancel.
    cd quotient(cd z, double tol = 1e-10) const;
    EntireFn quotient_handle() const;
};

AlternatingPair assemble_alternating(const std::map<KindTuple, EntireFn>& dets);

}  // namespace dyndet
