#include "dyndet/bowen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "dyndet/errors.hpp"

namespace dyndet {

int set_size(SymbolSet s) { return std::popcount(s); }

SymbolSet QkElement::un() const {
    SymbolSet u = 0;
    for (auto s : subsets) u |= s;
    return u;
}

CoOccurrenceOracle singleton_oracle() {
    return [](SymbolSet J, int i) { return J == singleton(i); };
}

CoOccurrenceOracle table_oracle(std::vector<std::pair<SymbolSet, int>> table) {
    return [table = std::move(table)](SymbolSet J, int i) {
        if (!(J & singleton(i))) return false;
        if (J == singleton(i)) return true;
        for (const auto& [big, sym] : table)
            if (sym == i && (J & ~big) == 0) return true;
        return false;
    };
}

namespace {

// k-subsets of `pool` in lexicographic order of their sorted element lists.
void subsets_of(SymbolSet pool, int k, int from, int n, SymbolSet acc, std::vector<SymbolSet>& out) {
    if (k == 0) {
        out.push_back(acc);
        return;
    }
    for (int i = from; i < n; ++i)
        if (pool & singleton(i)) subsets_of(pool, k - 1, i + 1, n, acc | singleton(i), out);
}

void fill_qk(int n, const KindTuple& k, size_t j, SymbolSet used, QkElement& cur, std::vector<QkElement>& out) {
    if (j == k.size()) {
        out.push_back(cur);
        return;
    }
    const SymbolSet all = n >= 32 ? ~SymbolSet{0} : ((SymbolSet{1} << n) - 1);
    std::vector<SymbolSet> options;
    subsets_of(all & ~used, k[j], 0, n, 0, options);
    for (auto s : options) {
        cur.subsets.push_back(s);
        fill_qk(n, k, j + 1, used | s, cur, out);
        cur.subsets.pop_back();
    }
}

void compositions(int total, KindTuple& cur, std::vector<KindTuple>& out) {
    if (total == 0) {
        out.push_back(cur);
        return;
    }
    for (int first = 1; first <= total; ++first) {
        cur.push_back(first);
        compositions(total - first, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<QkElement> build_Qk(int symbol_count, const KindTuple& k) {
    if (symbol_count > 32)
        throw ValidationError("bowen", "build_Qk", "#I=" + std::to_string(symbol_count), "at most 32 symbols");
    std::vector<QkElement> out;
    int total = 0;
    for (int kj : k) {
        if (kj < 1) throw ValidationError("bowen", "build_Qk", "k_j=" + std::to_string(kj), "entries must be positive");
        total += kj;
    }
    if (k.empty() || total > symbol_count) return out;
    QkElement cur;
    fill_qk(symbol_count, k, 0, 0, cur, out);
    return out;
}

std::vector<IkVertex> build_Ik(const std::vector<QkElement>& qk, const CoOccurrenceOracle& oracle, int symbol_count) {
    for (int i = 0; i < symbol_count; ++i)
        if (!oracle(singleton(i), i))
            throw ValidationError("bowen", "build_Ik", "symbol " + std::to_string(i), "oracle rejects a singleton");
    std::vector<IkVertex> out;
    for (const auto& v : qk) {
        const SymbolSet u = v.un();
        for (int i = 0; i < symbol_count; ++i) {
            if (!(u & singleton(i)) || !oracle(u, i)) continue;
            for (int x = 0; x < symbol_count; ++x)
                if (x != i && (u & singleton(x)) && !oracle(u & ~singleton(x), i))
                    throw ValidationError("bowen", "build_Ik", "symbol " + std::to_string(i),
                                          "oracle is not monotone under shrinking");
            out.push_back({v, i});
        }
    }
    return out;
}

TransitionGraph AkGraph::as_graph() const {
    TransitionGraph g;
    for (size_t v = 0; v < vertices.size(); ++v) g.symbols.push_back(std::to_string(v));
    g.adjacency = adjacency;
    return g;
}

AkGraph build_Ak(const KindTuple& k, const std::vector<IkVertex>& ik, const TransitionGraph& base) {
    AkGraph g;
    g.k = k;
    g.vertices = ik;
    const int nv = static_cast<int>(ik.size());
    g.adjacency = Eigen::MatrixXi::Zero(nv, nv);
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) {
            const auto& U = ik[a].tuple.subsets;
            const auto& V = ik[b].tuple.subsets;
            const int i = ik[a].symbol, j = ik[b].symbol;
            if (U.size() != V.size() || !base.admissible(i, j)) continue;
            int differing = 0, j0 = -1;
            for (size_t m = 0; m < U.size(); ++m)
                if (U[m] != V[m]) {
                    ++differing;
                    j0 = static_cast<int>(m);
                }
            if (differing > 1) continue;
            auto component_ok = [&](int c) {
                if (!(U[c] & singleton(i))) return false;
                for (SymbolSet W : {U[c] & ~singleton(i), U[c]})
                    if ((W | singleton(j)) == V[c]) return true;
                return false;
            };
            bool ok = false;
            if (differing == 1)
                ok = component_ok(j0);
            else
                for (size_t c = 0; c < U.size() && !ok; ++c) ok = component_ok(static_cast<int>(c));
            if (ok) g.adjacency(a, b) = 1;
        }
    return g;
}

Word project_pk(const AkGraph& g, const std::vector<int>& path) {
    Word out;
    const int nv = static_cast<int>(g.vertices.size());
    for (size_t q = 0; q < path.size(); ++q) {
        if (path[q] < 0 || path[q] >= nv)
            throw ValidationError("bowen", "project_pk", "vertex " + std::to_string(path[q]), "unknown vertex");
        if (q > 0 && g.adjacency(path[q - 1], path[q]) != 1)
            throw ValidationError("bowen", "project_pk", "step " + std::to_string(q), "inadmissible path");
        out.push_back(g.vertices[path[q]].symbol);
    }
    return out;
}

long long verify_counting_identity(const std::map<KindTuple, long long>& preimage_counts) {
    long long s = 0;
    for (const auto& [k, count] : preimage_counts) s += (k.size() % 2 ? 1 : -1) * count;
    return s;
}

std::vector<KindTuple> kind_tuples(int symbol_count) {
    std::vector<KindTuple> out;
    for (int total = 1; total <= symbol_count; ++total) {
        std::vector<KindTuple> level;
        KindTuple cur;
        compositions(total, cur, level);
        std::sort(level.begin(), level.end());
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

std::vector<AkGraph> build_family(const TransitionGraph& base, const CoOccurrenceOracle& oracle) {
    std::vector<AkGraph> out;
    for (const auto& k : kind_tuples(base.size())) {
        auto ik = build_Ik(build_Qk(base.size(), k), oracle, base.size());
        if (ik.empty()) continue;
        out.push_back(build_Ak(k, ik, base));
    }
    return out;
}

TraceSeries bowen_trace_series(const FlowSystem& base, const AkGraph& g, int M) {
    TraceSeries out;
    out.max_order = M;
    const TransitionGraph tg = g.as_graph();
    std::map<Word, PeriodicOrbitRecord> cache;
    for (int m = 1; m <= M; ++m) {
        std::vector<TraceTerm> terms;
        auto words = enumerate_fixed_words(tg, m);
        out.word_counts.push_back(words.size());
        for (const auto& w : words) {
            const Word proj = project_pk(g, w);
            const Word rep = least_rotation(proj);
            auto it = cache.find(rep);
            if (it == cache.end()) it = cache.emplace(rep, orbit_data(base, make_cyclic_word(proj))).first;
            const auto& rec = it->second;
            const double factor = static_cast<double>(rec.word.minimal_period) / minimal_period(w);
            cd amp = factor * rec.weight();
            bool merged = false;
            for (auto& t : terms)
                if (std::abs(t.length - rec.T) <= 1e-12 * rec.T) {
                    t.amplitude += amp;
                    merged = true;
                    break;
                }
            if (!merged) terms.push_back({amp, rec.T});
        }
        out.terms.push_back(std::move(terms));
    }
    return out;
}

namespace {

EntireFn product_of(std::vector<EntireFn> parts) {
    return EntireFn{[parts = std::move(parts)](cd z) {
        cd s = 0.0;
        for (const auto& p : parts) s += p.log(z);
        return s;
    }};
}

}  // namespace

AlternatingPair assemble_alternating(const std::map<KindTuple, EntireFn>& dets) {
    std::vector<EntireFn> odd, even;
    for (const auto& [k, d] : dets) (k.size() % 2 ? odd : even).push_back(d);
    return {product_of(std::move(odd)), product_of(std::move(even))};
}

cd AlternatingPair::quotient(cd z, double tol) const {
    const cd lg = g.log(z);
    if (std::exp(lg.real()) >= tol) return std::exp(f.log(z) - lg);
    const double rho = 1e-3 * std::max(1.0, std::abs(z));
    const int wf = winding_on_circle(f, z, rho), wg = winding_on_circle(g, z, rho);
    if (wf < wg)
        throw NumericalError("bowen", "assemble_alternating",
                             "z=(" + std::to_string(z.real()) + "," + std::to_string(z.imag()) + ")",
                             "pole proximity: g vanishes to higher order than f");
    const int nodes = 64;
    cd mean = 0.0;
    for (int q = 0; q < nodes; ++q) {
        const cd w = z + std::polar(rho, 2.0 * std::numbers::pi * q / nodes);
        mean += std::exp(f.log(w) - g.log(w));
    }
    return mean / static_cast<double>(nodes);
}

EntireFn AlternatingPair::quotient_handle() const {
    return EntireFn{[f = f, g = g](cd z) { return f.log(z) - g.log(z); }};
}

}  // namespace dyndet
