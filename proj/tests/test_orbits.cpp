#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "dyndet/errors.hpp"
#include "dyndet/orbits.hpp"
#include "fixtures.hpp"

using namespace dyndet;

TEST_CASE("fixed words of the full two-shift") {
    const auto g = fixtures::two_shift().graph;
    const auto words = enumerate_fixed_words(g, 2);
    CHECK(words == std::vector<Word>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    for (int m = 1; m <= 10; ++m) CHECK(enumerate_fixed_words(g, m).size() == trace_adjacency_power(g, m));
}

TEST_CASE("fixed words of small graphs") {
    TransitionGraph id{{"a", "b"}, Eigen::MatrixXi::Identity(2, 2)};
    CHECK(enumerate_fixed_words(id, 3) == std::vector<Word>{{0, 0, 0}, {1, 1, 1}});
    TransitionGraph swap{{"a", "b"}, (Eigen::MatrixXi(2, 2) << 0, 1, 1, 0).finished()};
    CHECK(enumerate_fixed_words(swap, 2) == std::vector<Word>{{0, 1}, {1, 0}});
    CHECK(enumerate_fixed_words(swap, 3).empty());
}

TEST_CASE("rotation classes") {
    const auto classes = group_into_orbits({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    REQUIRE(classes.size() == 3);
    CHECK(classes[0].letters == Word{0, 0});
    CHECK(classes[0].minimal_period == 1);
    CHECK(classes[1].letters == Word{0, 1});
    CHECK(classes[1].minimal_period == 2);
    CHECK(classes[2].letters == Word{1, 1});
    CHECK(classes[2].minimal_period == 1);

    const auto three = group_into_orbits(enumerate_fixed_words(fixtures::two_shift().graph, 3));
    int fixed = 0, full = 0;
    for (const auto& c : three) (c.minimal_period == 1 ? fixed : full)++;
    CHECK(fixed == 2);
    CHECK(full == 2);
}

TEST_CASE("class sizes add up to the word count") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = fixtures::random_system(rng, 3);
        for (int m = 1; m <= 8; ++m) {
            const auto words = enumerate_fixed_words(sys.graph, m);
            std::size_t total = 0;
            for (const auto& c : group_into_orbits(words)) {
                CHECK(m % c.minimal_period == 0);
                total += static_cast<std::size_t>(c.minimal_period);
            }
            CHECK(total == words.size());
        }
    }
}

TEST_CASE("minimal period and least rotation") {
    CHECK(minimal_period({0, 1, 0, 1}) == 2);
    CHECK(minimal_period({0, 0, 1}) == 3);
    CHECK(minimal_period({2}) == 1);
    CHECK(least_rotation({1, 0, 2, 0}) == Word{0, 1, 0, 2});
}

TEST_CASE("orbit data of the self-loop") {
    const auto sys = fixtures::single_loop();
    const auto r1 = orbit_data(sys, make_cyclic_word({0}));
    CHECK(r1.fixed_point.norm() == 0.0);
    CHECK(r1.T == doctest::Approx(1.0));
    CHECK(r1.T_primitive == doctest::Approx(1.0));
    CHECK(r1.det_factor == doctest::Approx(0.5));
    CHECK(r1.lift_trace == cd(1.0, 0.0));

    const auto r2 = orbit_data(sys, make_cyclic_word({0, 0}));
    CHECK(r2.T == doctest::Approx(2.0));
    CHECK(r2.T_primitive == doctest::Approx(1.0));
    CHECK(r2.det_factor == doctest::Approx(2.25));

    auto shifted = sys;
    shifted.edges.begin()->second.offset << 1.0, 0.0;
    const auto r3 = orbit_data(shifted, make_cyclic_word({0}));
    CHECK(r3.fixed_point(0) == doctest::Approx(-1.0));
    CHECK(std::abs(r3.fixed_point(1)) < 1e-15);
}

TEST_CASE("orbit data invariants on random systems") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 8; ++trial) {
        const auto sys = fixtures::random_system(rng, 3, 2);
        for (int m = 1; m <= 5; ++m)
            for (const auto& c : group_into_orbits(enumerate_fixed_words(sys.graph, m))) {
                const auto r = orbit_data(sys, c);
                CHECK(r.T == doctest::Approx(double(m) / c.minimal_period * r.T_primitive).epsilon(1e-12));
                CHECK(r.det_factor > 0.0);

                // factorization through eigenvalues of the Poincare map
                const Eigen::ComplexEigenSolver<Mat> es(r.poincare);
                double prod = 1.0;
                for (int i = 0; i < 2; ++i) {
                    const cd ev = es.eigenvalues()(i);
                    if (std::abs(ev) > 1.0) prod *= 1.0 / std::abs(ev) / std::abs(1.0 - 1.0 / ev);
                    else prod *= 1.0 / std::abs(1.0 - ev);
                }
                CHECK(std::abs(1.0 / r.det_factor - prod) < 1e-12 * prod);

                // rotation invariance
                Word rot = c.letters;
                std::rotate(rot.begin(), rot.begin() + 1, rot.end());
                CyclicWord raw{rot, c.minimal_period};
                const auto rr = orbit_data(sys, raw);
                CHECK(std::abs(rr.T - r.T) < 1e-12 * r.T);
                CHECK(std::abs(rr.T_primitive - r.T_primitive) < 1e-12 * r.T);
                CHECK(std::abs(rr.det_factor - r.det_factor) < 1e-10 * r.det_factor);
                CHECK(std::abs(rr.lift_trace - r.lift_trace) < 1e-12 * (1.0 + std::abs(r.lift_trace)));

                // repetition
                Word twice = c.letters;
                twice.insert(twice.end(), c.letters.begin(), c.letters.end());
                const auto r2 = orbit_data(sys, make_cyclic_word(twice));
                CHECK(std::abs(r2.T - 2.0 * r.T) < 1e-12 * r.T);
                CHECK((r2.poincare - r.poincare * r.poincare).norm() < 1e-10 * (1.0 + r2.poincare.norm()));
            }
    }
}

TEST_CASE("negative roof is rejected") {
    auto sys = fixtures::single_loop();
    sys.edges.begin()->second.offset << 4.0, 0.0;  // fixed point x = (-4, 0)
    sys.edges.begin()->second.roof.c << 0.5, 0.0;  // tau = 1 - 2 < 0
    CHECK_THROWS_AS(orbit_data(sys, make_cyclic_word({0})), NumericalError);
}

TEST_CASE("default cap") {
    CHECK(default_orbit_cap(2) == 24);
    CHECK(default_orbit_cap(4) == 12);
}
