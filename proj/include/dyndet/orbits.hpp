#pragma once

#include <vector>

#include "dyndet/model.hpp"

namespace dyndet {

using Word = std::vector<int>;

struct CyclicWord {
    Word letters;           // lexicographically least rotation
    int minimal_period = 0;

    int m() const { return static_cast<int>(letters.size()); }
};

struct PeriodicOrbitRecord {
    CyclicWord word;
    Vec fixed_point;
    double T = 0.0;
    double T_primitive = 0.0;
    Mat poincare;
    CMat lift;
    double det_factor = 0.0;
    cd lift_trace;

    cd weight() const { return lift_trace / det_factor; }
};

/// Largest word length the enumerator accepts by default: 24 for two symbols,
/// scaled by 1/log2(#I).
int default_orbit_cap(int symbol_count);

/// Cyclically admissible words of length m, lexicographic order.
std::vector<Word> enumerate_fixed_words(const TransitionGraph& graph, int m);

int minimal_period(const Word& w);

Word least_rotation(const Word& w);

/// Rotation classes, sorted by representative.
std::vector<CyclicWord> group_into_orbits(const std::vector<Word>& words);

/// Exact affine data of the periodic orbit coded by `word`.
PeriodicOrbitRecord orbit_data(const FlowSystem& sys, const CyclicWord& word);

/// Convenience: rotation class of a raw cyclic word.
CyclicWord make_cyclic_word(const Word& w);

}  // namespace dyndet
