#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dyndet/determinant.hpp"
#include "dyndet/errors.hpp"
#include "dyndet/frames.hpp"
#include "fixtures.hpp"

using namespace dyndet;

namespace {

/// Frame settings used for the two-shift throughout.
FrameParams two_shift_params(int L) {
    FrameParams p;
    p.L = L;
    p.delta = 0.75;
    p.r_theta = 0.3;
    p.varpi = 0.25;
    p.box_lo = Vec::Zero(2);
    p.box_hi = Vec::Zero(2);
    return p;
}

EscapeWeight two_shift_weight(double eps = 0.25) {
    EscapeWeight w;
    w.epsilon = eps;
    w.s = 2.0;
    w.d_u = 1;
    w.d_s = 1;
    return w;
}

/// A one-dimensional section, only used to shape the frame.
FlowSystem line_system() {
    FlowSystem sys;
    sys.graph.symbols = {"a"};
    sys.graph.adjacency = Eigen::MatrixXi::Ones(1, 1);
    sys.section_dim = 1;
    sys.bundle_dim = 1;
    sys.d_u = 1;
    sys.d_s = 0;
    sys.gevrey_s = 2.0;
    return sys;
}

Vec point(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

}  // namespace

TEST_CASE("escape function") {
    CHECK(escape_G(Vec::Constant(1, 4.0), Vec::Zero(1), 2.0) == doctest::Approx(-2.0));
    CHECK(escape_G(Vec::Zero(1), Vec::Constant(1, 9.0), 2.0) == doctest::Approx(3.0));
    CHECK(escape_G(point(3.0, 4.0), Vec::Constant(1, 1.0), 1.0) == doctest::Approx(-4.0));

    const auto w = two_shift_weight();
    CHECK(w.of((Eigen::VectorXi(2) << 1, 0).finished()) == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)));
    CHECK(w.of((Eigen::VectorXi(2) << 0, 1).finished()) == doctest::Approx(-std::sqrt(2.0 * std::numbers::pi)));
    CHECK(w.of(Eigen::VectorXi::Zero(2)) == 0.0);
}

TEST_CASE("plateau function") {
    CHECK(plateau(0.1, 0.2, 0.5, 2.0) == 1.0);
    CHECK(plateau(0.5, 0.2, 0.5, 2.0) == 0.0);
    CHECK(plateau(0.35, 0.2, 0.5, 2.0) == doctest::Approx(0.5));
    double prev = 1.0;
    for (double r = 0.2; r <= 0.5; r += 0.01) {
        const double v = plateau(r, 0.2, 0.5, 3.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("partition of unity on the box") {
    FrameParams p;
    p.box_lo = point(-0.5, -0.3);
    p.box_hi = point(0.5, 0.3);
    p.delta = 0.4;
    for (double scale : {1.0, 2.5}) {
        p.window_scale = scale;
        const auto g = make_frame(fixtures::two_shift(), p);
        CHECK(g.r_theta == doctest::Approx(0.16));
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(-0.3, 0.3);
        const int nc = static_cast<int>(g.centers.size());
        for (int t = 0; t < 200; ++t) {
            const Vec x = point(ux(rng), uy(rng));
            double sum = 0.0;
            for (int a = 0; a < nc; ++a) {
                const double th = g.theta(a, x);
                sum += th;
                if (th > 0.0) CHECK(std::abs(g.theta_tilde(a, x) * scale - 1.0) < 1e-14);
            }
            CHECK(std::abs(sum - scale) < 1e-10 * scale);
        }
        // away from the box the regularizer takes over
        const Vec out = point(0.5 + 0.9 * g.r_theta, 0.0);
        double sum = 0.0;
        for (int a = 0; a < nc; ++a) sum += g.theta(a, out);
        CHECK(sum < scale);
    }
}

TEST_CASE("frame parameters are validated") {
    auto p = two_shift_params(2);
    p.r_theta = 0.6;
    CHECK_THROWS_AS(make_frame(fixtures::two_shift(), p), ValidationError);
    p = two_shift_params(2);
    p.delta = 1.2;
    p.r_theta = 0.5;
    CHECK_THROWS_AS(make_frame(fixtures::two_shift(), p), ValidationError);
    p = two_shift_params(2);
    p.box_hi = point(2.0, 0.0);
    p.delta = 0.3;
    p.r_theta = 0.05;
    CHECK_THROWS_AS(make_frame(fixtures::two_shift(), p), ValidationError);

    FlowSystem three = fixtures::two_shift();
    three.section_dim = 3;
    CHECK_THROWS_AS(make_frame(three, two_shift_params(2)), ValidationError);
}

TEST_CASE("atoms are ordered by symbol, center, frequency, channel") {
    const auto sys = fixtures::two_shift();
    const auto g = make_frame(sys, two_shift_params(1));
    const auto atoms = frame_atoms(sys, g, 1);
    REQUIRE(atoms.size() == 18);
    CHECK(atoms[0].symbol == 0);
    CHECK(atoms[0].ell == (Eigen::VectorXi(2) << -1, -1).finished());
    CHECK(atoms[1].ell == (Eigen::VectorXi(2) << -1, 0).finished());
    CHECK(atoms[9].symbol == 1);
}

TEST_CASE("weighting is a diagonal similarity") {
    const auto sys = fixtures::two_shift();
    const cd z(4.0, 0.5);
    const auto m0 = assemble_operator(sys, z, two_shift_params(3), two_shift_weight(0.0));
    CHECK((m0.weighted - m0.raw).norm() == 0.0);
    const auto m1 = assemble_operator(sys, z, two_shift_params(3), two_shift_weight(0.25));
    CHECK(m1.epsilon > 0.0);
    const cd d0 = galerkin_det(m0), d1 = galerkin_det(m1);
    CHECK(std::abs(d0 - d1) < 1e-10 * std::abs(d0));

    auto scaled = two_shift_params(3);
    scaled.window_scale = 3.0;
    const cd d2 = galerkin_det(sys, z, scaled, two_shift_weight(0.25));
    CHECK(std::abs(d2 - d1) < 1e-12 * std::abs(d1));
}

TEST_CASE("systems without edges give the identity") {
    FlowSystem sys = fixtures::two_shift();
    sys.edges.clear();
    sys.graph.adjacency.setZero();
    const auto m = assemble_operator(sys, cd(4.0, 0.0), two_shift_params(2), two_shift_weight());
    CHECK(m.raw.isZero(0.0));
    CHECK(galerkin_det(m) == cd(1.0));
}

TEST_CASE("single entries agree with the assembled matrix") {
    const auto sys = fixtures::two_shift();
    const auto p = two_shift_params(2);
    const auto g = make_frame(sys, p);
    const cd z(4.5, 1.0);
    const auto m = assemble_operator(sys, z, p, two_shift_weight());
    for (int r : {0, 7, 30})
        for (int c : {3, 12, 44}) {
            const auto e = matrix_entry(sys, g, p, z, m.index[static_cast<std::size_t>(c)],
                                        m.index[static_cast<std::size_t>(r)]);
            CHECK(std::abs(e.value - m.raw(r, c)) < 1e-13);
        }
}

TEST_CASE("decay fit on synthetic profiles") {
    std::vector<double> sv;
    for (int m = 1; m <= 100; ++m) sv.push_back(std::exp(-std::sqrt(double(m))));
    const auto fit = decay_fit(sv, 0.5);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.fitted >= 20);

    std::vector<double> steep;
    for (int m = 1; m <= 100; ++m) steep.push_back(std::exp(-double(m)));
    CHECK_THROWS_AS(decay_fit(steep, 0.5), NumericalError);
}

TEST_CASE("reconstruction from frame coefficients") {
    FrameParams p;
    p.box_lo = Vec::Constant(1, -0.375);
    p.box_hi = Vec::Constant(1, 0.375);
    p.delta = 0.75;
    p.r_theta = 0.45;
    p.omega_width = 1.0;
    const auto g = make_frame(line_system(), p);
    const auto gauss = [](const Vec& x) { return std::exp(-x.squaredNorm() / (2.0 * 0.01)); };
    std::vector<Vec> pts;
    for (int i = 0; i <= 30; ++i) pts.push_back(Vec::Constant(1, -0.375 + 0.025 * i));
    const auto max_err = [&](int L) {
        const auto rec = reconstruct(g, gauss, L, pts);
        double err = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, std::abs(rec[i] - gauss(pts[i])));
        return err;
    };
    const double e8 = max_err(8), e16 = max_err(16), e32 = max_err(32);
    CHECK(e16 < 1e-4);
    CHECK(e32 < 1e-6);
    CHECK(e16 < 0.1 * e8);
    CHECK(e32 < 0.1 * e16);
}

TEST_CASE("near pairs gain escape weight") {
    const auto sys = fixtures::two_shift();
    const auto p = two_shift_params(6);
    const auto g = make_frame(sys, p);
    const auto w = two_shift_weight();
    const auto m = assemble_operator(sys, cd(4.0, 0.0), p, w);
    const auto rep = escape_decay_check(sys, g, m, w, p.varpi);
    CHECK(rep.pairs > 0);
    CHECK(rep.holds);
    CHECK(rep.c > 0.0);
}

TEST_CASE("far pairs are small") {
    const auto sys = fixtures::two_shift();
    const auto m = assemble_operator(sys, cd(4.0, 0.0), two_shift_params(6), two_shift_weight());
    double peak = 0.0, far = 0.0;
    for (Eigen::Index r = 0; r < m.raw.rows(); ++r)
        for (Eigen::Index c = 0; c < m.raw.cols(); ++c) {
            const auto& lr = m.index[static_cast<std::size_t>(r)].ell;
            const auto& lc = m.index[static_cast<std::size_t>(c)].ell;
            // frequency mismatch ell_row - Lambda^T ell_col
            const double k1 = lr(0) - 2.0 * lc(0), k2 = lr(1) - 0.5 * lc(1);
            const double v = std::abs(m.raw(r, c));
            peak = std::max(peak, v);
            if (std::hypot(k1, k2) >= 12.0) far = std::max(far, v);
        }
    CHECK(peak > 0.0);
    CHECK(far < 1e-2 * peak);
}

TEST_CASE("Galerkin determinant approaches the closed form") {
    const auto sys = fixtures::two_shift();
    const auto cf = make_closed_form(sys);
    const cd z(4.0, 0.0);
    const auto sweep = galerkin_sweep(sys, z, two_shift_params(8), two_shift_weight(), {6, 8, 10});
    REQUIRE(sweep.dets.size() == 3);
    CHECK(std::isinf(sweep.steps[0]));
    const cd ref = closed_form_det(cf, z).value;
    CHECK(std::abs(sweep.value() - ref) < 1e-3);
    CHECK(std::abs(sweep.dets[2] - ref) < std::abs(sweep.dets[0] - ref));
}
