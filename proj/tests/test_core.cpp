#include "bbgky/core.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace bbgky;

namespace {

const Domain big = Domain::cube(20.0, 1.0);

std::vector<PhasePoint> at(std::initializer_list<Vec3> qs)
{
    std::vector<PhasePoint> xs;
    for (const auto& q : qs)
        xs.push_back({q, {0, 0, 0}});
    return xs;
}

} // namespace

TEST_CASE("domain sides must leave room for a sphere")
{
    CHECK_THROWS_AS(Domain::cube(2.0, 1.0), std::invalid_argument);
    CHECK_NOTHROW(Domain::cube(2.01, 1.0));
    const Domain d({1, 2, 3}, {5, 6, 7}, 1.0);
    CHECK(d.inset_lower() == Vec3{1.5, 2.5, 3.5});
    CHECK(d.inset_upper() == Vec3{4.5, 5.5, 6.5});
    CHECK(d.inset_volume() == doctest::Approx(27.0));
}

TEST_CASE("non-finite coordinates are rejected")
{
    CHECK_THROWS_AS(Vec3::finite(0.0, NAN, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Configuration(big, {{{1, 1, INFINITY}, {0, 0, 0}}}), std::invalid_argument);
}

TEST_CASE("classify: interior, contact and excluded")
{
    CHECK(classify(big, at({{8, 10, 10}, {10, 10, 10}})) == Admissibility::Interior);
    CHECK(classify(big, at({{9, 10, 10}, {10, 10, 10}})) == Admissibility::Contact);
    CHECK(classify(big, at({{0.25, 10, 10}})) == Admissibility::Excluded);
    CHECK(classify(big, at({{0.5, 10, 10}})) == Admissibility::Contact);
    CHECK(classify(big, at({{9.5, 10, 10}, {10, 10, 10}})) == Admissibility::Excluded);
    CHECK(classify(big, at({})) == Admissibility::Interior);
}

TEST_CASE("classify is invariant under relabelling")
{
    auto xs = at({{3, 3, 3}, {3.9, 3.2, 3.1}, {10, 4, 7}, {12, 12, 0.6}});
    const Admissibility reference = classify(big, xs);
    std::sort(xs.begin(), xs.end(), [](const PhasePoint& a, const PhasePoint& b) { return a.q.x < b.q.x; });
    do {
        CHECK(classify(big, xs) == reference);
    } while (std::next_permutation(
        xs.begin(), xs.end(), [](const PhasePoint& a, const PhasePoint& b) { return a.q.x < b.q.x; }));
}

TEST_CASE("omega_admissible")
{
    const Configuration lone(big, at({{10, 10, 10}}));
    CHECK(omega_admissible(lone, 0, {3, -1, 2}, {0, 0, 1}));
    CHECK(omega_admissible(lone, 0, {0, 0, 0}, {1, 0, 0}));

    // A second particle 1.5a along the ray: the new sphere would sit 0.5a from it.
    const Configuration pair(big, at({{10, 10, 10}, {11.5, 10, 10}}));
    CHECK_FALSE(omega_admissible(pair, 0, {0, 0, 0}, {1, 0, 0}));
    CHECK(omega_admissible(pair, 0, {0, 0, 0}, {-1, 0, 0}));

    // Center a/2 + a from the wall: the contact point lands exactly on the
    // margin, any tilt further towards the wall leaves the box.
    const Configuration wall(big, at({{1.5, 10, 10}}));
    CHECK(omega_admissible(wall, 0, {0, 0, 0}, {-1, 0, 0}));
    const Configuration closer(big, at({{1.2, 10, 10}}));
    CHECK_FALSE(omega_admissible(closer, 0, {0, 0, 0}, {-1, 0, 0}));
    const double c = std::sqrt(0.5);
    CHECK_FALSE(omega_admissible(closer, 0, {0, 0, 0}, {-c, c, 0}));
    CHECK(omega_admissible(closer, 0, {0, 0, 0}, {-0.6, 0.8, 0}));

    CHECK_THROWS_AS(omega_admissible(lone, 1, {0, 0, 0}, {1, 0, 0}), std::out_of_range);
    CHECK_THROWS_AS(omega_admissible(lone, 0, {0, 0, 0}, {1, 1, 0}), std::invalid_argument);
}

TEST_CASE("an admissible insertion touches its partner")
{
    const Configuration x(big, at({{10, 10, 10}, {12, 11, 10}}));
    const Vec3 omega{0.6, 0, 0.8};
    REQUIRE(omega_admissible(x, 0, {1, 2, 3}, omega));
    const Configuration y = with_contact_particle(x, 0, {1, 2, 3}, omega);
    CHECK(y.size() == 3);
    CHECK(classify(y) == Admissibility::Contact);
    CHECK(norm(y[2].q - y[0].q) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(y[2].p == Vec3{1, 2, 3});
}

TEST_CASE("omega_sign_class")
{
    CHECK(omega_sign_class({0, 0, 0}, {1, 0, 0}, {1, 0, 0}) == OmegaSign::Plus);
    CHECK(omega_sign_class({0, 0, 0}, {-1, 0, 0}, {1, 0, 0}) == OmegaSign::Minus);
    CHECK(omega_sign_class({0, 0, 0}, {0, 1, 0}, {1, 0, 0}) == OmegaSign::Grazing);
    CHECK(omega_sign_class({1, 0, 0}, {1, 1, 0}, {1e-13, 1, 0}) == OmegaSign::Plus);
}
