#include "bbgky/correlations.hpp"
#include "bbgky/hierarchy.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace bbgky;

namespace {

const Domain wide = Domain::cube(40.0, 1.0);

void check_close(const Vec3& a, const Vec3& b, double tol = 1e-10)
{
    CHECK(norm(a - b) <= tol);
}

bool within(const SignedEstimate& e, double expected, double k = 4.0)
{
    return std::abs(e.value - expected) <= k * e.std_error;
}

// Test correlation function of order n+1 that depends on the added momentum
// only through |p - p_j|, so the signed flux integral cancels.
struct RelativeGaussian final : PhaseFunction {
    Vec3 pj;
    std::size_t max_order() const override { return 2; }
    bool supports(std::size_t n) const override { return n == 2; }
    double draw(std::span<const PhasePoint> x, Rng&) const override
    {
        return std::exp(-norm2(x[1].p - pj));
    }
};

} // namespace

TEST_CASE("history with no insertions is the backward flow")
{
    const Configuration x(wide, {{{20, 20, 20}, {0.5, -0.3, 0.2}}});
    const HistoryOutcome out = build_history(x, 3.0, {});
    CHECK(out.status == HistoryStatus::Valid);
    CHECK(out.weight == 1.0);
    check_close(out.terminal[0].q, {18.5, 20.9, 19.4});
    check_close(out.terminal[0].p, {0.5, -0.3, 0.2});
}

TEST_CASE("one insertion, outgoing in backward time")
{
    const Vec3 q{20, 20, 20};
    const Vec3 p{0.4, 0.1, 0};
    const Configuration x(wide, {{q, p}});
    const double t = 2.0, t1 = 1.5;
    const Vec3 phat{0.2, -0.6, 0.3};
    const Vec3 omega{0, 0.6, 0.8};
    REQUIRE(omega_sign_class(p, phat, omega) == OmegaSign::Minus);
    const HistoryOutcome out = build_history(x, t, {{t1}, {0}, {phat}, {omega}});
    REQUIRE(out.status == HistoryStatus::Valid);
    const Vec3 q1 = q - p * (t - t1);
    check_close(out.terminal[0].q, q - p * t);
    check_close(out.terminal[1].q, q1 + omega - phat * t1);
    check_close(out.terminal[0].p, p);
    check_close(out.terminal[1].p, phat);
    CHECK(out.weight == doctest::Approx(dot(omega, phat - p)));
    CHECK(out.weight < 0.0);
}

TEST_CASE("one insertion, colliding in backward time")
{
    const Vec3 q{20, 20, 20};
    const Vec3 p{0.4, 0.1, 0};
    const Configuration x(wide, {{q, p}});
    const double t = 2.0, t1 = 1.5;
    const Vec3 phat{0.2, 0.9, 0.7};
    const Vec3 omega{0, 0.6, 0.8};
    REQUIRE(omega_sign_class(p, phat, omega) == OmegaSign::Plus);
    const HistoryOutcome out = build_history(x, t, {{t1}, {0}, {phat}, {omega}});
    REQUIRE(out.status == HistoryStatus::Valid);
    const auto [p1, p2] = pair_collide(p, phat, omega);
    const Vec3 q1 = q - p * (t - t1);
    check_close(out.terminal[0].p, p1);
    check_close(out.terminal[1].p, p2);
    check_close(out.terminal[0].q, q1 - p1 * t1);
    check_close(out.terminal[1].q, q1 + omega - p2 * t1);
    CHECK(out.weight == doctest::Approx(dot(omega, phat - p)));
    CHECK(out.weight > 0.0);

    // Reversing the direction flips the sign of the flux factor.
    const HistoryOutcome flipped = build_history(x, t, {{t1}, {0}, {phat}, {-omega}});
    CHECK(flipped.weight == doctest::Approx(-out.weight));
}

TEST_CASE("insertion outside the domain is inadmissible")
{
    const Configuration x(wide, {{{1.2, 20, 20}, {0, 0, 0}}});
    const HistoryOutcome out = build_history(x, 1.0, {{0.5}, {0}, {{1, 0, 0}}, {{-1, 0, 0}}});
    CHECK(out.status == HistoryStatus::Inadmissible);
    CHECK(out.weight == 0.0);
}

TEST_CASE("malformed histories are rejected")
{
    const Configuration x(wide, {{{20, 20, 20}, {0, 0, 0}}});
    CHECK_THROWS_AS(build_history(x, 1.0, {{0.5, 0.7}, {0, 0}, {{}, {}}, {{1, 0, 0}, {1, 0, 0}}}), std::invalid_argument);
    CHECK_THROWS_AS(build_history(x, 1.0, {{0.5}, {1}, {{}}, {{1, 0, 0}}}), std::invalid_argument);
    CHECK_THROWS_AS(build_history(x, 1.0, {{1.5}, {0}, {{}}, {{1, 0, 0}}}), std::invalid_argument);
}

TEST_CASE("collision operator: zero, symmetric cancellation, and a wall cap")
{
    const Domain d = Domain::cube(4.0, 1.0);
    const CollisionOperatorParams params{200000, 1.0, 17};

    struct None final : PhaseFunction {
        std::size_t max_order() const override { return 1; }
        double draw(std::span<const PhasePoint>, Rng&) const override { return 0.0; }
    } none;
    const Configuration mid(d, {{{2, 2, 2}, {0.3, -0.4, 0.5}}});
    const MonteCarloResult z = collision_operator(none, mid, 0, params);
    CHECK(z.estimate.value == 0.0);
    CHECK(z.estimate.std_error == 0.0);

    RelativeGaussian g;
    g.pj = mid[0].p;
    const MonteCarloResult sym = collision_operator(g, mid, 0, params);
    CHECK(within(sym.estimate, 0.0));
    CHECK(sym.estimate.positive > 0.1);

    // Equilibrium rho_2 = 2 h(p_1) h(p_2) (unnormalized). With the particle
    // 0.2a from the inset face x = 0.5 the admissible directions are
    // omega_x >= -0.2, and the p-integral of omega.(p - p_1) h(p) is -omega.p_1:
    //   C = -2 a^2 h(p_1) p_1x pi (1 - 0.04).
    const NormalizedDensity nd(DensitySpec::canonical(d, 2, 1.0));
    const SpecCorrelations rho(nd);
    const Vec3 p1{1.0, 0.3, -0.2};
    const Configuration near(d, {{{0.7, 2, 2}, p1}});
    const double expected = -2.0 * nd.maxwellian().density(p1) * p1.x * std::numbers::pi * (1.0 - 0.04);
    const MonteCarloResult c = collision_operator(rho, near, 0, params);
    CHECK(within(c.estimate, expected));
    CHECK(c.estimate.std_error < 0.05 * std::abs(expected));

    // The same value by direct quadrature over the sphere.
    const int nt = 800, np = 800;
    double quad = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double u = -1.0 + (i + 0.5) * 2.0 / nt;
        for (int k = 0; k < np; ++k) {
            const double phi = (k + 0.5) * 2.0 * std::numbers::pi / np;
            const double s = std::sqrt(1 - u * u);
            const Vec3 w{u, s * std::cos(phi), s * std::sin(phi)};
            if (near[0].q.x + w.x >= 0.5)
                quad += -dot(w, p1);
        }
    }
    quad *= 2.0 * nd.maxwellian().density(p1) * (2.0 / nt) * (2.0 * std::numbers::pi / np);
    CHECK(quad == doctest::Approx(expected).epsilon(2e-3));
}

TEST_CASE("series at short times reduces to the pullback")
{
    const Domain d = Domain::cube(4.0, 1.0);
    const NormalizedDensity nd(DensitySpec::modulated(d, 2, 1.0, SpatialWeight::cosine(0.5)));
    const SpecCorrelations rho(nd);
    const DeltaBox delta({ParticleBox{{1, 1, 1}, {3, 3, 3}, {-1, -1, -1}, {1, 1, 1}}});
    SeriesParams sp;
    sp.samples = 200000;
    sp.m_max = 0;
    sp.seed = 5;
    const SeriesResult s = series_eval(rho, d, delta, 1e-9, sp);
    REQUIRE(s.strata.size() == 1);

    const MonteCarloResult direct = pullback_term(rho, d, delta, 1e-9, {200000, 1, 6});
    CHECK(std::abs(s.total.value - direct.estimate.value)
        <= 4.0 * std::hypot(s.total.std_error, direct.estimate.std_error));

    // Strata beyond N - n are never produced for canonical data.
    sp.m_max = 5;
    sp.samples = 2000;
    const SeriesResult more = series_eval(rho, d, delta, 0.5, sp);
    CHECK(more.strata.size() == 2);
}

TEST_CASE("empirical correlations: total mass is exact")
{
    const Domain d = Domain::cube(4.0, 1.0);
    const DensitySpec spec = DensitySpec::modulated(d, 3, 1.0, SpatialWeight::cosine(0.5));
    const Vec3 lo = d.inset_lower(), hi = d.inset_upper();
    const DeltaBox all({ParticleBox{lo, hi, {-1e3, -1e3, -1e3}, {1e3, 1e3, 1e3}}});
    for (double t : {0.0, 1.7}) {
        const MonteCarloResult r = empirical_rho(spec, all, t, Limit::FromFuture, {2000, 1, 3});
        CHECK(r.estimate.value == doctest::Approx(3.0));
        CHECK(r.estimate.std_error == 0.0);
    }
}

TEST_CASE("empirical correlations at t = 0 match the closed form")
{
    const Domain d = Domain::cube(4.0, 1.0);
    const DensitySpec spec = DensitySpec::modulated(d, 2, 1.0, SpatialWeight::cosine(0.5));
    const NormalizedDensity nd(spec);
    const SpecCorrelations rho(nd);
    const DeltaBox delta({ParticleBox{{0.5, 1, 1}, {1.5, 3, 3}, {-1, -1, -1}, {1, 2, 1}}});
    const MonteCarloResult emp = empirical_rho(spec, delta, 0.0, Limit::FromFuture, {300000, 1, 9});
    const MonteCarloResult pull = pullback_term(rho, d, delta, 1e-12, {300000, 1, 10});
    const SignedEstimate closed = divided(pull.estimate, nd.normalization());
    CHECK(std::abs(emp.estimate.value - closed.value) <= 4.0 * std::hypot(emp.estimate.std_error, closed.std_error));
}

TEST_CASE("estimates agree across worker counts")
{
    const Domain d = Domain::cube(4.0, 1.0);
    const DensitySpec spec = DensitySpec::modulated(d, 2, 1.0, SpatialWeight::cosine(0.5));
    const DeltaBox delta({ParticleBox{{1, 1, 1}, {3, 3, 3}, {-1.5, -1.5, -1.5}, {1.5, 1.5, 1.5}}});
    const MonteCarloResult one = empirical_rho(spec, delta, 2.0, Limit::FromFuture, {100000, 1, 31});
    const MonteCarloResult three = empirical_rho(spec, delta, 2.0, Limit::FromFuture, {100000, 3, 31});
    CHECK(three.estimate.samples == one.estimate.samples);
    CHECK(std::abs(one.estimate.value - three.estimate.value)
        <= 4.0 * std::hypot(one.estimate.std_error, three.estimate.std_error));

    // Same worker count, same seed: identical numbers.
    const MonteCarloResult again = empirical_rho(spec, delta, 2.0, Limit::FromFuture, {100000, 3, 31});
    CHECK(again.estimate.value == three.estimate.value);
    CHECK(again.estimate.std_error == three.estimate.std_error);
}

TEST_CASE("momentum flux factor")
{
    for (double beta : {0.5, 1.0, 2.0})
        CHECK(momentum_flux_factor(beta) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi * beta)).epsilon(1e-10));
}

TEST_CASE("rate integral counts every pair collision twice")
{
    // The integrand runs over ordered pairs, so E[# pair collisions in [0, t]]
    // equals half of t times the integral.
    const Domain d = Domain::cube(4.0, 1.0);
    const DensitySpec spec = DensitySpec::canonical(d, 2, 1.0);
    const NormalizedDensity nd(spec);
    const MonteCarloResult rate = collision_rate_integral(nd, {400000, 1, 41});
    const double t = 3.0;
    const MonteCarloResult count = expected_collisions(spec, t, {40000, 1, 42});
    const SignedEstimate twice = scaled(count.estimate, 2.0);
    const SignedEstimate rhs = scaled(rate.estimate, t);
    CHECK(std::abs(twice.value - rhs.value) <= 4.0 * std::hypot(twice.std_error, rhs.std_error));
    CHECK(mean_free_time(nd, {400000, 1, 41}) == doctest::Approx(2.0 / rate.estimate.value));
}
