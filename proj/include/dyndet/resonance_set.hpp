#pragma once

#include <string>
#include <vector>

#include "dyndet/model.hpp"

namespace dyndet {

struct Resonance {
    cd z;
    int multiplicity = 1;
    double residual = 0.0;  // |d(z)| at the reported point
};

struct ResonanceSet {
    std::vector<Resonance> zeros;
    std::string provenance;  // "lattice" or "numerical"

    int total() const {
        int n = 0;
        for (const auto& r : zeros) n += r.multiplicity;
        return n;
    }
};

/// Orders by (Re, Im).
void sort_resonances(ResonanceSet& set);

}  // namespace dyndet
