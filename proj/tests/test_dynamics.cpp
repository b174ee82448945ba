#include "bbgky/dynamics.hpp"
#include "bbgky/stats.hpp"

#include <doctest.h>

#include <sstream>

using namespace bbgky;

namespace {

const Domain huge({-100, -100, -100}, {100, 100, 100}, 1.0);

void check_close(const Vec3& a, const Vec3& b, double tol = 1e-12)
{
    CHECK(norm(a - b) <= tol);
}

} // namespace

TEST_CASE("pair collision law")
{
    auto [pi, pj] = pair_collide({1, 0, 0}, {-1, 0, 0}, {1, 0, 0});
    CHECK(pi == Vec3{-1, 0, 0});
    CHECK(pj == Vec3{1, 0, 0});

    std::tie(pi, pj) = pair_collide({1, 0, 0}, {-1, 0, 0}, {0, 1, 0});
    CHECK(pi == Vec3{1, 0, 0});
    CHECK(pj == Vec3{-1, 0, 0});

    Rng rng = make_rng(3, {});
    for (int k = 0; k < 1000; ++k) {
        const Vec3 a = uniform_in_box({-3, -3, -3}, {3, 3, 3}, rng);
        const Vec3 b = uniform_in_box({-3, -3, -3}, {3, 3, 3}, rng);
        const Vec3 w = uniform_unit_vector(rng);
        const auto [a1, b1] = pair_collide(a, b, w);
        const auto [a2, b2] = pair_collide(a1, b1, w);
        check_close(a2, a);
        check_close(b2, b);
        check_close(a1 + b1, a + b);
        CHECK(norm2(a1) + norm2(b1) == doctest::Approx(norm2(a) + norm2(b)).epsilon(1e-13));
        CHECK(dot(w, a1 - b1) == doctest::Approx(-dot(w, a - b)).epsilon(1e-12));
    }
}

TEST_CASE("specular reflection")
{
    CHECK(wall_reflect({-2, 3, 0}, {1, 0, 0}) == Vec3{2, 3, 0});
    CHECK(wall_reflect({0, 3, -1}, {1, 0, 0}) == Vec3{0, 3, -1});
    const Vec3 p{0.3, -1.7, 2.2};
    const Vec3 n{0, 0, -1};
    CHECK(wall_reflect(wall_reflect(p, n), n) == p);
}

TEST_CASE("next event: head-on pair")
{
    const Configuration c(huge, {{{0, 0, 0}, {1, 0, 0}}, {{3, 0, 0}, {-1, 0, 0}}});
    const auto e = next_event(c, Direction::Forward);
    REQUIRE(e);
    REQUIRE(e->is_pair());
    CHECK(e->time == doctest::Approx(1.0).epsilon(1e-14));
    const auto& pc = std::get<PairCollision>(e->kind);
    CHECK(pc.i == 0);
    CHECK(pc.j == 1);
    check_close(pc.omega, {1, 0, 0});

    // Backward in time the same pair separates, so only walls remain.
    const auto back = next_event(c, Direction::Backward);
    REQUIRE(back);
    CHECK_FALSE(back->is_pair());
}

TEST_CASE("next event: wall")
{
    const Domain box = Domain::cube(10.0, 1.0);
    const Configuration c(box, {{{7, 5, 5}, {2, 0, 0}}});
    const auto e = next_event(c, Direction::Forward);
    REQUIRE(e);
    CHECK_FALSE(e->is_pair());
    CHECK(e->time == doctest::Approx((3.0 - 0.5) / 2.0));
    const auto& w = std::get<WallReflection>(e->kind);
    CHECK(w.face.axis == 0);
    CHECK(w.face.upper);

    const Configuration apart(box, {{{3, 5, 5}, {-1, 0, 0}}, {{6, 5, 5}, {1, 0, 0}}});
    const auto only_wall = next_event(apart, Direction::Forward);
    REQUIRE(only_wall);
    CHECK_FALSE(only_wall->is_pair());
    CHECK(only_wall->time == doctest::Approx(2.5));

    const Configuration still(box, {{{3, 5, 5}, {0, 0, 0}}});
    CHECK_FALSE(next_event(still, Direction::Forward));
}

TEST_CASE("simultaneous events are degenerate")
{
    const Domain box = Domain::cube(10.0, 1.0);
    const Configuration c(box, {{{5, 3, 5}, {1, 0, 0}}, {{5, 7, 5}, {1, 0, 0}}});
    CHECK_THROWS_AS(next_event(c, Direction::Forward), DegeneracyError);
}

TEST_CASE("evolve: identity, head-on exchange and limits")
{
    const Configuration c(huge, {{{0, 0, 0}, {1, 0, 0}}, {{3, 0, 0}, {-1, 0, 0}}});
    CHECK(evolve(c, 0.0, Limit::FromFuture).config == c);

    const Evolution two = evolve(c, 2.0, Limit::FromFuture);
    check_close(two.config[0].q, {0, 0, 0});
    check_close(two.config[1].q, {3, 0, 0});
    check_close(two.config[0].p, {-1, 0, 0});
    check_close(two.config[1].p, {1, 0, 0});
    REQUIRE(two.log.size() == 1);
    CHECK(two.log[0].time == doctest::Approx(1.0));
    check_close(two.log[0].pre[0], {1, 0, 0});
    check_close(two.log[0].post[0], {-1, 0, 0});

    // Landing exactly on the collision instant.
    const Evolution future = evolve(c, 1.0, Limit::FromFuture);
    const Evolution past = evolve(c, 1.0, Limit::FromPast);
    check_close(future.config[0].p, {-1, 0, 0});
    check_close(past.config[0].p, {1, 0, 0});
    check_close(future.config[0].q, {1, 0, 0});
    check_close(past.config[0].q, {1, 0, 0});

    // Backward from the touching state: with FromFuture the returned momenta
    // are the ones just after the instant in physical time.
    const Evolution back = evolve(two.config, -1.0, Limit::FromFuture);
    check_close(back.config[0].p, {-1, 0, 0});
    const Evolution back_past = evolve(two.config, -1.0, Limit::FromPast);
    check_close(back_past.config[0].p, {1, 0, 0});
    const Evolution start = evolve(two.config, -2.0, Limit::FromFuture);
    check_close(start.config[0].q, {0, 0, 0});
    check_close(start.config[1].p, {-1, 0, 0});
}

TEST_CASE("evolve backward undoes forward")
{
    const Domain box = Domain::cube(5.0, 1.0);
    const Configuration c(box,
        {{{1, 1, 1}, {0.7, 0.2, -0.4}}, {{3.2, 2.5, 1.4}, {-0.3, 0.9, 0.1}}, {{2.1, 3.9, 3.3}, {0.5, -0.6, 0.8}}});
    const Evolution f = evolve(c, 7.3, Limit::FromFuture);
    CHECK(f.log.size() > 5);
    const Evolution b = evolve(f.config, -7.3, Limit::FromFuture);
    for (std::size_t i = 0; i < c.size(); ++i) {
        check_close(b.config[i].q, c[i].q, 1e-9);
        check_close(b.config[i].p, c[i].p, 1e-9);
    }
    for (std::size_t k = 1; k < f.log.size(); ++k)
        CHECK(f.log[k].time > f.log[k - 1].time);
}

TEST_CASE("contact start: approaching pair collides first")
{
    const Configuration touching(huge, {{{0, 0, 0}, {1, 0, 0}}, {{1, 0, 0}, {-1, 0, 0}}});
    const Evolution e = evolve(touching, 0.5, Limit::FromFuture);
    check_close(e.config[0].q, {-0.5, 0, 0});
    check_close(e.config[1].q, {1.5, 0, 0});
    const Configuration leaving(huge, {{{0, 0, 0}, {-1, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}});
    const Evolution f = evolve(leaving, 0.5, Limit::FromFuture);
    check_close(f.config[0].q, {-0.5, 0, 0});
    CHECK(f.log.empty());
}

TEST_CASE("zero motion stays put")
{
    const Configuration c(huge, {{{0, 0, 0}, {0, 0, 0}}, {{5, 0, 0}, {0, 0, 0}}});
    CHECK(evolve(c, 3.0, Limit::FromFuture).config == c);
    CHECK(evolve(c, -3.0, Limit::FromPast).config == c);
}

TEST_CASE("trajectory csv has one record per event")
{
    const Configuration c(huge, {{{0, 0, 0}, {1, 0, 0}}, {{3, 0, 0}, {-1, 0, 0}}});
    std::ostringstream out;
    write_trajectory_csv(out, evolve(c, 2.0, Limit::FromFuture).log);
    const std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.rfind("time,kind", 0) == 0);
}
