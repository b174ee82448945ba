#include "bbgky/specialflow.hpp"

#include <doctest.h>

#include <cmath>

using namespace bbgky;

TEST_CASE("single atom with unit ceiling")
{
    const SpecialFlow f = SpecialFlow::atoms({1.0}, {0}, {1.0});
    // P{tau_m <= t} = min(max(t - m + 1, 0), 1): 1 + 1 + 0.5.
    CHECK(collision_count_sum(f, 2.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(collision_count_sum(f, 1e-9) == doctest::Approx(1e-9));
    const FlowIdentityReport r = verify_identity(f, 2.5);
    CHECK(r.pass);
}

TEST_CASE("permutation of five atoms")
{
    const SpecialFlow f = SpecialFlow::atoms({1, 1, 1, 1, 1}, {1, 2, 3, 4, 0}, {0.3, 0.7, 1.1, 0.45, 0.9});
    for (double t : {0.1, 0.77, 3.7, 11.0}) {
        CHECK(std::abs(collision_count_sum(f, t) - 5.0 * t) <= 1e-10);
        CHECK(verify_identity(f, t).pass);
    }
    CHECK(std::abs(collision_count_sum(f, 1.2) + collision_count_sum(f, 2.5) - collision_count_sum(f, 3.7)) <= 1e-10);

    // Unequal masses must be preserved by the permutation.
    CHECK_THROWS_AS(SpecialFlow::atoms({1, 2}, {1, 0}, {1, 1}), std::invalid_argument);
    const SpecialFlow g = SpecialFlow::atoms({1, 2, 1}, {2, 1, 0}, {0.5, 1.5, 0.8});
    CHECK(std::abs(collision_count_sum(g, 4.2) - 4.0 * 4.2) <= 1e-10);
    CHECK(g.measure_defect() == 0.0);
}

TEST_CASE("partition of the base")
{
    const SpecialFlow f = SpecialFlow::atoms({1, 1, 1, 1, 1}, {1, 2, 3, 4, 0}, {0.3, 0.7, 1.1, 0.45, 0.9});
    const auto masses = partition_masses(f, 2.0);
    double sum = 0.0;
    for (double m : masses) {
        CHECK(m >= 0.0);
        sum += m;
    }
    CHECK(sum == doctest::Approx(5.0));
    // Every atom lies in B_k with k >= 2 since all ceilings are below t.
    CHECK(masses[0] == 0.0);

    const SpecialFlow r = SpecialFlow::rotation(0.3819660112501051, 1.0, 0.4, 2);
    double total = 0.0;
    for (double m : partition_masses(r, 3.3, 1024))
        total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rotation with constant ceiling")
{
    for (double c : {0.5, 1.0, 2.3}) {
        const SpecialFlow f = SpecialFlow::rotation(std::sqrt(2.0) - 1.0, c, 0.0, 1, 1.0);
        CHECK(collision_count_sum(f, 5.0, 512) == doctest::Approx(5.0).epsilon(1e-12));
    }
    const SpecialFlow heavy = SpecialFlow::rotation(std::sqrt(2.0) - 1.0, 1.0, 0.0, 1, 2.5);
    CHECK(collision_count_sum(heavy, 3.0, 512) == doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("rotation with oscillating ceiling converges at second order")
{
    const SpecialFlow f = SpecialFlow::rotation((std::sqrt(5.0) - 1.0) / 2.0, 1.0, 0.4, 3, 1.0);
    const FlowIdentityReport r = verify_identity(f, 5.3, 4096);
    CHECK(r.pass);
    CHECK(r.error_bound < 1e-6);
    const RefinementStudy s = refinement_study(f, 5.3, 64, 6);
    CHECK(s.fitted_order > 1.5);
    CHECK(s.errors.back() < s.errors.front());
    CHECK(f.measure_defect(4096) < 1e-3);
}

TEST_CASE("interval exchange")
{
    const SpecialFlow f = SpecialFlow::exchange({0.2, 0.5, 0.3}, {2, 0, 1}, 1.0, 0.4, 3, 1.0);
    for (double x : {0.05, 0.3, 0.69, 0.95})
        CHECK(f.inverse_map(f.map(x)) == doctest::Approx(x).epsilon(1e-14));
    CHECK(f.map(0.1) == doctest::Approx(0.4));
    CHECK(f.map(0.3) == doctest::Approx(0.6));
    CHECK(f.map(0.9) == doctest::Approx(0.2));
    CHECK(verify_identity(f, 5.3, 4096).pass);
}

TEST_CASE("flows from config blocks")
{
    const SpecialFlow a = special_flow_from_json(parse_config_text(R"(
variant = "atoms"
ceilings = [0.3, 0.7, 1.1]
permutation = [2, 0, 1]
)"));
    CHECK(a.discrete());
    CHECK(collision_count_sum(a, 2.0) == doctest::Approx(6.0));

    const SpecialFlow r = special_flow_from_json(parse_config_text(R"(
variant = "rotation"
alpha = 0.25
ceiling_mean = 2.0
)"));
    CHECK(r.map(0.9) == doctest::Approx(0.15));
    CHECK_THROWS_AS(special_flow_from_json(parse_config_text("variant = \"baker\"")), ConfigError);
    CHECK_THROWS_AS(special_flow_from_json(parse_config_text("variant = \"rotation\"\nceiling_mean = 0.1\nceiling_amplitude = 0.5")),
        ConfigError);
}
