#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dyndet/model.hpp"

namespace dyndet {

/// G(x, xi) = |xi_st|^{1/s} - |xi_un|^{1/s} with Euclidean block norms.
double escape_G(const Vec& xi_un, const Vec& xi_st, double s);

struct EscapeWeight {
    double epsilon = 0.25;
    double s = 2.0;
    int d_u = 0;
    int d_s = 0;

    /// Escape value of an atom with frequency ell (xi = 2 pi ell). Frequencies on the
    /// expanding coordinates grow under the transposed map, so they take the
    /// stable slot of G.
    double of(const Eigen::VectorXi& ell) const;
};

struct FrameParams {
    int L = 4;
    double delta = 0.0;        // 0: 0.1 x box side, or 0.75 for a point box
    double r_theta = 0.0;      // 0: 0.4 delta
    double omega_width = 0.5;  // outer regularizer width, in units of r_theta
    double varpi = 1.0;        // near-pair threshold in the Kohn-Nirenberg metric
    Vec box_lo;                // covered box, same for every symbol
    Vec box_hi;
    int quad_nodes = 256;      // trapezoid intervals per dimension, minimum
    double quad_tol = 1e-8;    // full vs half resolution, relative to the block maximum
    double row_norm_bound = 1e6;
    double window_scale = 1.0;  // theta scaled by k, theta~ by 1/k
};

/// Smooth step: 1 for r <= rin, 0 for r >= rout, Gevrey of order s in between.
double plateau(double r, double rin, double rout, double s);

/// Centers, windows and cutoffs shared by all symbols.
struct FrameGeometry {
    int dim = 1;
    double s = 2.0;
    double delta = 0.75;
    double r_theta = 0.3;
    double tilde_radius = 0.5;  // 2 delta / 3
    double omega_width = 0.5;
    double scale = 1.0;
    Vec lo;
    Vec hi;
    std::vector<Vec> centers;

    /// theta_a(x); sum over a is identically `scale` on the box.
    double theta(int a, const Vec& x) const;
    /// theta~_a(x), equal to 1/scale on supp theta_a.
    double theta_tilde(int a, const Vec& x) const;
    double window_sum(const Vec& x) const;
};

/// Rejects section dimensions above 2 and inconsistent radii with ValidationError.
FrameGeometry make_frame(const FlowSystem& sys, const FrameParams& p);

struct FrameAtom {
    int symbol = 0;
    int center = 0;
    Eigen::VectorXi ell;
    int channel = 0;
};

/// Atoms ordered by symbol, center, ell (lexicographic), channel.
std::vector<FrameAtom> frame_atoms(const FlowSystem& sys, const FrameGeometry& geom, int L);

struct EntryValue {
    cd value;
    double error = 0.0;  // |full - half resolution|
};

/// <L_{z,alpha,beta} e~_col, e_row> for the edge row.symbol -> col.symbol.
EntryValue matrix_entry(const FlowSystem& sys, const FrameGeometry& geom, const FrameParams& p, cd z,
                        const FrameAtom& col, const FrameAtom& row);

struct GalerkinMatrix {
    std::vector<FrameAtom> index;
    CMat raw;       // unweighted inner products
    CMat weighted;  // exp(-eps (G_row - G_col)) raw
    Vec G;
    cd z;
    int L = 0;
    double epsilon = 0.0;
    int epsilon_halvings = 0;
    double quad_error = 0.0;
    double max_row_norm = 0.0;
};

GalerkinMatrix assemble_operator(const FlowSystem& sys, cd z, const FrameParams& p, const EscapeWeight& w);

/// det(I - M) by LU.
cd galerkin_det(const GalerkinMatrix& m);
cd galerkin_det(const FlowSystem& sys, cd z, const FrameParams& p, const EscapeWeight& w);

struct SweepResult {
    std::vector<int> Ls;
    std::vector<cd> dets;
    std::vector<double> steps;  // |d_L - d_{previous L}|, steps[0] = inf
    int chosen = 0;             // index of the L with the smallest step
    cd value() const { return dets[static_cast<std::size_t>(chosen)]; }
};

SweepResult galerkin_sweep(const FlowSystem& sys, cd z, FrameParams p, const EscapeWeight& w,
                           const std::vector<int>& Ls);

struct DecayFit {
    std::vector<double> singular_values;  // all, decreasing
    int fitted = 0;                       // leading values used in the fit
    double exponent = 0.5;                // fit against m^exponent
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Fit of log sigma_m against m^exponent over the values within `dynamic_range`
/// of sigma_1. Throws NumericalError when fewer than 20 values qualify.
DecayFit decay_fit(std::vector<double> singular_values, double exponent, double dynamic_range = 1e-2);

/// Singular values of the weighted matrix with exponent 1/(s (n-1)).
DecayFit decay_profile(const GalerkinMatrix& m, double s, int section_dim, double dynamic_range = 1e-2);

struct EscapeDecayReport {
    int pairs = 0;          // near pairs with |ell_row| >= min_ell
    double c = 0.0;         // min over pairs of (G_row - G_col) / |ell_row|^{1/s}
    bool holds = false;     // c > 0 and pairs > 0
};

/// Near pairs: Kohn-Nirenberg distance between (F(b), Lambda^{-T} xi_row) and
/// (a, xi_col) at most varpi, on admissible edges.
EscapeDecayReport escape_decay_check(const FlowSystem& sys, const FrameGeometry& geom, const GalerkinMatrix& m,
                                     const EscapeWeight& w, double varpi, int min_ell = 4);

/// sum_{a, |ell| <= L} <f, e_{a,ell}> e~_{a,ell} evaluated at `points`.
std::vector<cd> reconstruct(const FrameGeometry& geom, const std::function<double(const Vec&)>& f, int L,
                            const std::vector<Vec>& points, int quad_nodes = 256);

}  // namespace dyndet
