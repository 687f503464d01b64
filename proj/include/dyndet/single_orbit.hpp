#pragma once

#include <vector>

#include "dyndet/entire.hpp"
#include "dyndet/model.hpp"
#include "dyndet/resonance_set.hpp"

namespace dyndet {

/// Spectral data of a basic set consisting of one periodic orbit.
struct OrbitSpectrum {
    double t0 = 1.0;
    std::vector<cd> lambdas;  // |lambda| > 1
    std::vector<cd> mus;      // |mu| < 1
    int q_minus = 0;          // Poincare eigenvalues in (-inf, -1)
    std::vector<cd> zetas;    // lift eigenvalues
};

/// Throws ValidationError on any breach (moduli within 1e-9 of 1 included).
void validate_spectrum(const OrbitSpectrum& spec);

struct LatticeResonance {
    cd value;
    int multiplicity = 0;
    std::vector<int> k;  // exponents of lambdas, each >= 1
    std::vector<int> l;  // exponents of mus, each >= 0
    int zeta_index = 0;
};

/// All rho = zeta (-1)^{q_-} prod lambda^{-k} prod mu^{l} with |rho| >= r_min,
/// merged by value (relative 1e-12). Sorted by decreasing modulus, then argument.
std::vector<LatticeResonance> enumerate_lattice(const OrbitSpectrum& spec, double r_min);

/// Sum over the whole lattice of |rho| (geometric majorant).
double lattice_abs_total(const OrbitSpectrum& spec);

struct ProductValue {
    cd value;
    cd log_value;       // principal-free log: sum of factor logs
    double tail_bound;  // bound on |log(true) - log_value|
};

/// prod over rho with |rho| >= r_min of (1 - rho e^{-z t0})^{mult}, with tail bound.
ProductValue single_orbit_det(const OrbitSpectrum& spec, cd z, double r_min);

/// Log-evaluation handle that picks r_min so the tail bound stays below `tol`
/// for every Re z >= re_min.
EntireFn single_orbit_handle(const OrbitSpectrum& spec, double re_min, double tol = 1e-14);

/// z = (log|rho| + i arg rho + 2 pi i k)/t0 with |z| <= r.
ResonanceSet single_orbit_resonances(const OrbitSpectrum& spec, double r);

/// Spectrum of the self-loop orbit of a one-symbol system.
OrbitSpectrum spectrum_from_system(const FlowSystem& sys);

}  // namespace dyndet
