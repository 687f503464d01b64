#include "dyndet/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dyndet/errors.hpp"

namespace dyndet {

namespace {

std::string word_string(const FlowSystem& sys, const Word& w) {
    std::string s;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) s += ' ';
        s += sys.graph.symbols[w[i]];
    }
    return s;
}

void extend(const TransitionGraph& g, int m, Word& prefix, std::vector<Word>& out) {
    if (static_cast<int>(prefix.size()) == m) {
        if (g.admissible(prefix.back(), prefix.front())) out.push_back(prefix);
        return;
    }
    for (int j = 0; j < g.size(); ++j)
        if (g.admissible(prefix.back(), j)) {
            prefix.push_back(j);
            extend(g, m, prefix, out);
            prefix.pop_back();
        }
}

}  // namespace

int default_orbit_cap(int symbol_count) {
    if (symbol_count <= 1) return 4096;
    return std::max(1, static_cast<int>(std::floor(24.0 / std::log2(static_cast<double>(symbol_count)))));
}

std::vector<Word> enumerate_fixed_words(const TransitionGraph& graph, int m) {
    std::vector<Word> out;
    if (m < 1) return out;
    Word prefix;
    prefix.reserve(m);
    for (int i = 0; i < graph.size(); ++i) {
        prefix.assign(1, i);
        extend(graph, m, prefix, out);
    }
    return out;
}

int minimal_period(const Word& w) {
    const int m = static_cast<int>(w.size());
    for (int p = 1; p <= m; ++p) {
        if (m % p) continue;
        bool ok = true;
        for (int i = 0; i + p < m && ok; ++i) ok = w[i] == w[i + p];
        if (ok) return p;
    }
    return m;
}

Word least_rotation(const Word& w) {
    Word best = w, r = w;
    for (size_t k = 1; k < w.size(); ++k) {
        std::rotate(r.begin(), r.begin() + 1, r.end());
        if (r < best) best = r;
    }
    return best;
}

CyclicWord make_cyclic_word(const Word& w) {
    CyclicWord c;
    c.letters = least_rotation(w);
    c.minimal_period = minimal_period(c.letters);
    return c;
}

std::vector<CyclicWord> group_into_orbits(const std::vector<Word>& words) {
    std::map<Word, int> classes;
    for (const auto& w : words) classes.emplace(least_rotation(w), 0);
    std::vector<CyclicWord> out;
    out.reserve(classes.size());
    for (const auto& [rep, unused] : classes) {
        (void)unused;
        out.push_back({rep, minimal_period(rep)});
    }
    return out;
}

PeriodicOrbitRecord orbit_data(const FlowSystem& sys, const CyclicWord& word) {
    const int m = word.m();
    if (m < 1) throw ValidationError("orbit-enum", "orbit_data", "", "empty word");
    Word closed = word.letters;
    closed.push_back(word.letters.front());
    AffineMapData comp = compose_along_word(sys, closed);

    const int nm1 = sys.section_dim;
    Mat ImL = Mat::Identity(nm1, nm1) - comp.linear;
    Eigen::FullPivLU<Mat> lu(ImL);
    double cond = 1.0;
    if (nm1 > 0) {
        Eigen::JacobiSVD<Mat> svd(ImL);
        const auto& sv = svd.singularValues();
        cond = sv(nm1 - 1) > 0 ? sv(0) / sv(nm1 - 1) : INFINITY;
    }
    if (!(cond < 1e12))
        throw NumericalError("orbit-enum", "orbit_data", word_string(sys, word.letters),
                             "I - P is numerically singular (hyperbolicity failure)");

    PeriodicOrbitRecord rec;
    rec.word = word;
    rec.fixed_point = nm1 > 0 ? Vec(lu.solve(comp.offset)) : Vec();
    rec.poincare = comp.linear;
    rec.lift = comp.lift;
    rec.lift_trace = comp.lift.trace();
    rec.det_factor = nm1 > 0 ? std::abs(lu.determinant()) : 1.0;

    // per-edge roof positivity along the orbit
    Vec x = rec.fixed_point;
    double total = 0.0, primitive = 0.0;
    for (int k = 0; k < m; ++k) {
        const EdgeMap& e = sys.edge(closed[k], closed[k + 1]);
        double tau = e.roof(x);
        if (!(tau > 0.0))
            throw NumericalError("orbit-enum", "orbit_data", word_string(sys, word.letters),
                                 "roof value <= 0 at orbit point " + std::to_string(k));
        total += tau;
        if (k < word.minimal_period) primitive += tau;
        x = e.apply(x);
    }
    rec.T = total;
    rec.T_primitive = primitive;
    if (!(rec.T > 0.0))
        throw NumericalError("orbit-enum", "orbit_data", word_string(sys, word.letters), "orbit length <= 0");
    return rec;
}

}  // namespace dyndet
