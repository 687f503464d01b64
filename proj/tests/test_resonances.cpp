#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dyndet/determinant.hpp"
#include "dyndet/errors.hpp"
#include "dyndet/single_orbit.hpp"
#include "fixtures.hpp"

using namespace dyndet;

namespace {

OrbitSpectrum hyperbolic() {
    OrbitSpectrum s;
    s.lambdas = {2.0};
    s.mus = {0.5};
    s.zetas = {1.0};
    return s;
}

/// Every reference zero is matched by a found zero with the same multiplicity.
void check_same(const ResonanceSet& found, const ResonanceSet& ref, double tol) {
    REQUIRE(found.zeros.size() == ref.zeros.size());
    for (const auto& r : ref.zeros) {
        CAPTURE(r.z);
        const Resonance* best = nullptr;
        for (const auto& f : found.zeros)
            if (!best || std::abs(f.z - r.z) < std::abs(best->z - r.z)) best = &f;
        CHECK(std::abs(best->z - r.z) < tol);
        CHECK(best->multiplicity == r.multiplicity);
    }
}

}  // namespace

TEST_CASE("two-shift zeros in the unit disk") {
    const auto cf = make_closed_form(fixtures::two_shift());
    const auto set = find_resonances(closed_form_handle(cf, -2.0), 1.0);
    auto zeros = set.zeros;
    std::sort(zeros.begin(), zeros.end(), [](const auto& a, const auto& b) { return a.z.real() < b.z.real(); });
    REQUIRE(zeros.size() == 2);
    CHECK(std::abs(zeros[0].z - cd(-std::log(2.0), 0.0)) < 1e-8);
    CHECK(zeros[0].multiplicity == 2);
    CHECK(std::abs(zeros[1].z) < 1e-10);
    CHECK(zeros[1].multiplicity == 1);
    CHECK(set.total() == 3);
}

TEST_CASE("nonvanishing function has no zeros") {
    const auto one = from_values([](cd) { return cd(1.0); });
    CHECK(find_resonances(one, 5.0).zeros.empty());
    const auto ez = EntireFn{[](cd z) { return z; }};
    CHECK(find_resonances(ez, 5.0).zeros.empty());
    CHECK_THROWS_AS(find_resonances(one, 0.0), ValidationError);
}

TEST_CASE("polynomial zeros with multiplicity") {
    const auto f = from_values([](cd z) { return (z - cd(1.0, 1.0)) * (z - cd(1.0, 1.0)) * (z + 2.0) * (z - 0.5); });
    ResonanceSet ref;
    ref.zeros = {{cd(1.0, 1.0), 2}, {cd(-2.0, 0.0), 1}, {cd(0.5, 0.0), 1}};
    check_same(find_resonances(f, 3.0), ref, 1e-7);
}

TEST_CASE("numerical search reproduces the lattice in a disk") {
    const auto spec = hyperbolic();
    const auto numerical = find_resonances(single_orbit_handle(spec, -8.0, 1e-15), 7.0);
    check_same(numerical, single_orbit_resonances(spec, 7.0), 1e-6);
}

TEST_CASE("found zeros are zeros") {
    const auto cf = make_closed_form(fixtures::two_shift());
    const EntireFn f = closed_form_handle(cf, -5.0);
    const auto set = find_resonances(f, 4.0);
    CHECK(set.total() == argument_principle_count(f, 4.0).count);
    for (const auto& r : set.zeros) CHECK(r.residual < 1e-6);
}
