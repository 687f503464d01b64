#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dyndet/determinant.hpp"
#include "dyndet/entire.hpp"
#include "dyndet/errors.hpp"
#include "fixtures.hpp"

using namespace dyndet;

namespace {

EntireFn exp_of(std::function<cd(cd)> g) { return EntireFn{std::move(g)}; }

}  // namespace

TEST_CASE("elementary factors") {
    CHECK(std::abs(elementary_factor(0, cd(0.3, 0.2)) - cd(0.7, -0.2)) < 1e-15);
    CHECK(std::abs(elementary_factor(1, 0.5) - 0.5 * std::exp(0.5)) < 1e-15);
    CHECK(elementary_factor(3, 1.0) == cd(0.0));
    // W_p(z) = 1 + O(z^{p+1})
    const cd z(1e-3, 0.0);
    CHECK(std::abs(elementary_factor(2, z) - 1.0) < 1e-9);
}

TEST_CASE("convergent Weierstrass product") {
    std::vector<cd> lambdas;
    for (int j = 1; j <= 60; ++j) lambdas.push_back(std::pow(2.0, -j));
    const auto v = weierstrass_product(lambdas, TailModel{1.0, 0.0}, 1.0);
    CHECK(std::abs(v.value - 0.2887880950866024) < 1e-10);
    CHECK(v.tail_factor >= 1.0);
    CHECK(v.tail_factor < 1.0 + 1e-15);
    CHECK(weierstrass_product(lambdas, TailModel{1.0, 0.0}, 0.0).value == cd(1.0));

    std::vector<cd> rising = {0.25, 0.5};
    CHECK_THROWS_AS(weierstrass_product(rising, TailModel{}, 1.0), ValidationError);
    CHECK_THROWS_AS(weierstrass_product(lambdas, TailModel{0.5, 0.0}, 1.0), ValidationError);
}

TEST_CASE("argument principle counts") {
    const auto cubic = from_values([](cd z) { return z * z * z - 1.0; });
    CHECK(argument_principle_count(cubic, 2.0).count == 3);
    CHECK(argument_principle_count(cubic, 0.5).count == 0);

    const auto zexp = exp_of([](cd z) { return std::log(z) + z; });
    CHECK(argument_principle_count(zexp, 1.0).count == 1);

    const auto sine = from_values([](cd z) { return std::sin(z); });
    const auto rep = argument_principle_count(sine, 10.0);
    CHECK(rep.count == 7);
    CHECK(rep.reliable);
}

TEST_CASE("contour through a zero is pushed out") {
    const auto f = from_values([](cd z) { return z - 1.0; });
    const auto rep = argument_principle_count(f, 1.0);
    CHECK(rep.count == 1);
    CHECK(rep.r > 1.0);
    CHECK_THROWS_AS(argument_principle_count(f, 0.0), ValidationError);
}

TEST_CASE("winding on small circles") {
    const auto f = from_values([](cd z) { return (z - 1.0) * (z - 1.0) * (z + 1.0); });
    CHECK(winding_on_circle(f, 1.0, 0.1) == 2);
    CHECK(winding_on_circle(f, -1.0, 0.1) == 1);
    CHECK(winding_on_circle(f, cd(0.0, 1.0), 0.1) == 0);
}

TEST_CASE("Jensen formula") {
    const auto f = from_values([](cd z) { return (z - 0.5) * (z + 2.0); });
    CHECK(jensen_residual(f, {{0.5, 1}, {-2.0, 1}}, 1.0) < 1e-10);
    CHECK(jensen_residual(f, {{0.5, 1}, {-2.0, 1}}, 3.0) < 1e-10);
    CHECK(jensen_residual(f, {}, 1.0) > 0.5);
    const auto at_zero = from_values([](cd z) { return z; });
    CHECK_THROWS_AS(jensen_residual(at_zero, {}, 1.0), ValidationError);
    CHECK_THROWS_AS(jensen_residual(f, {{0.5, 1}, {-2.0, 1}}, 2.0), NumericalError);
}

TEST_CASE("growth order of elementary entire functions") {
    std::vector<double> radii;
    for (double r = 4.0; r <= 20.0; r += 2.0) radii.push_back(r);
    const auto gauss = growth_order_fit(exp_of([](cd z) { return z * z; }), radii);
    CHECK(gauss.alpha == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(gauss.monotone);
    const auto ez = growth_order_fit(exp_of([](cd z) { return z; }), radii);
    CHECK(ez.alpha == doctest::Approx(1.0).epsilon(1e-6));
    const auto emz = growth_order_fit(exp_of([](cd z) { return -z; }), radii);
    CHECK(emz.alpha_negative_axis == doctest::Approx(1.0).epsilon(1e-6));

    const auto constant = growth_order_fit(from_values([](cd) { return cd(1.0); }), radii);
    CHECK(constant.too_small);
    const auto one = from_values([](cd) { return cd(1.0); });
    CHECK_THROWS_AS(growth_order_fit(one, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(growth_order_fit(one, {1.0, 2.0, 3.0, 3.0, 4.0}), ValidationError);
}

TEST_CASE("counting exponent") {
    std::vector<std::pair<double, double>> cubes;
    for (double r = 2.0; r <= 12.0; r += 2.0) cubes.push_back({r, r * r * r});
    const auto fit = counting_exponent_fit(cubes);
    CHECK(fit.beta == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.residual < 1e-12);

    std::vector<std::pair<double, double>> flat;
    for (double r = 1.0; r <= 6.0; r += 1.0) flat.push_back({r, 4.0});
    CHECK(counting_exponent_fit(flat).degenerate);
    CHECK_THROWS_AS(counting_exponent_fit({{1.0, 1.0}, {2.0, 0.0}}), ValidationError);
}

TEST_CASE("two-shift resonances grow cubically") {
    const auto cf = make_closed_form(fixtures::two_shift());
    std::vector<std::pair<double, double>> counts;
    for (double r = 10.0; r <= 40.0; r += 5.0) counts.push_back({r, double(closed_form_resonances(cf, r).total())});
    const auto fit = counting_exponent_fit(counts);
    CHECK(fit.beta > 2.5);
    CHECK(fit.beta < 3.5);
}

TEST_CASE("linear fit") {
    const auto lf = linear_fit({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
    CHECK(lf.slope == doctest::Approx(2.0));
    CHECK(lf.intercept == doctest::Approx(1.0));
    CHECK(lf.r2 == doctest::Approx(1.0));
}
