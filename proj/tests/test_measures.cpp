#include "bbgky/correlations.hpp"
#include "bbgky/measures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace bbgky;

TEST_CASE("Maxwellian is normalized")
{
    for (double beta : {0.5, 1.0, 3.0}) {
        const Maxwellian h(beta);
        // Radial Simpson rule out to 16 standard deviations.
        const double reach = 16.0 / std::sqrt(beta);
        const int cells = 20000;
        const double dr = reach / cells;
        double sum = 0.0;
        for (int k = 0; k <= cells; ++k) {
            const double r = k * dr;
            const double w = (k == 0 || k == cells) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            sum += w * r * r * h.density({r, 0, 0});
        }
        const double total = 4.0 * std::numbers::pi * sum * dr / 3.0;
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("sampling one particle")
{
    const DensitySpec spec = DensitySpec::canonical(Domain::cube(6.0, 1.0), 1, 2.0);
    Rng rng = make_rng(5, {});
    const int n = 100000;
    double p2 = 0.0, qx = 0.0, qmin = 10.0, qmax = -10.0;
    for (int k = 0; k < n; ++k) {
        const Configuration c = sample(spec, rng);
        REQUIRE(c.size() == 1);
        p2 += norm2(c[0].p);
        qx += c[0].q.x;
        qmin = std::min(qmin, c[0].q.x);
        qmax = std::max(qmax, c[0].q.x);
    }
    // <|p|^2> = 3/beta with standard error sqrt(6)/beta/sqrt(n).
    CHECK(std::abs(p2 / n - 1.5) < 4.0 * std::sqrt(6.0) / 2.0 / std::sqrt(double(n)));
    CHECK(std::abs(qx / n - 3.0) < 4.0 * (5.0 / std::sqrt(12.0)) / std::sqrt(double(n)));
    CHECK(qmin >= 0.5);
    CHECK(qmax <= 5.5);
}

TEST_CASE("rejection keeps spheres apart in a tight box")
{
    const DensitySpec spec = DensitySpec::canonical(Domain({0, 0, 0}, {2.1, 2.1, 3.2}, 1.0), 2, 1.0);
    Rng rng = make_rng(9, {});
    for (int k = 0; k < 2000; ++k) {
        const Configuration c = sample(spec, rng);
        CHECK(norm(c[0].q - c[1].q) >= 1.0);
        CHECK(classify(c) != Admissibility::Excluded);
    }
}

TEST_CASE("grand-canonical particle number ratio")
{
    const Domain d = Domain::cube(2.4, 1.0);
    const double z = 0.3;
    const DensitySpec spec = DensitySpec::grand_canonical(d, z, 1.0, 1);
    const NormalizedDensity nd(spec);
    const double v = d.inset_volume();
    CHECK(nd.particle_number_probability(1) / nd.particle_number_probability(0) == doctest::Approx(z * v));

    Rng rng = make_rng(21, {});
    const int n = 200000;
    int ones = 0;
    for (int k = 0; k < n; ++k)
        ones += sample(spec, rng).size() == 1 ? 1 : 0;
    const double p1 = double(ones) / n;
    const double expected = z * v / (1.0 + z * v);
    CHECK(std::abs(p1 - expected) < 4.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST_CASE("density_eval")
{
    const Domain d = Domain::cube(4.0, 1.0);
    const DensitySpec eq = DensitySpec::canonical(d, 2, 1.0);
    const NormalizedDensity nd(eq);
    const Maxwellian h(1.0);
    const Configuration good(d, {{{1, 1, 1}, {0.2, 0.1, 0}}, {{3, 3, 3}, {-1, 0.5, 0.3}}});
    const double expected = h.density(good[0].p) * h.density(good[1].p) / nd.normalization().value;
    CHECK(density_eval(nd, good) == doctest::Approx(expected).epsilon(1e-14));

    const Configuration overlap(d, {{{1, 1, 1}, {0, 0, 0}}, {{1.5, 1, 1}, {0, 0, 0}}});
    CHECK(density_eval(nd, overlap) == 0.0);

    // Two spheres in a 3x3x3 inset box: Q_2 = 27^2 - 27 * (4 pi / 3) up to wall corrections.
    CHECK(nd.configuration_integral(1).value == doctest::Approx(27.0));
    CHECK(nd.configuration_integral(2).value < 27.0 * 27.0);
    CHECK(nd.configuration_integral(2).value > 27.0 * 27.0 - 27.0 * 4.0 * std::numbers::pi / 3.0 - 1.0);

    // Modulation with amplitude zero reproduces the equilibrium value.
    const DensitySpec flat = DensitySpec::modulated(d, 2, 1.0, SpatialWeight::cosine(0.0));
    const NormalizedDensity nf(flat);
    CHECK(density_eval(nf, good) == doctest::Approx(density_eval(nd, good)).epsilon(1e-12));
}

TEST_CASE("density is unchanged by a collision")
{
    const Domain d = Domain::cube(4.0, 1.0);
    const NormalizedDensity nd(DensitySpec::modulated(d, 2, 1.0, SpatialWeight::cosine(0.5)));
    Rng rng = make_rng(4, {});
    for (int k = 0; k < 200; ++k) {
        const Vec3 omega = uniform_unit_vector(rng);
        const Vec3 q{2, 2, 2};
        std::vector<PhasePoint> x{{q, uniform_in_box({-2, -2, -2}, {2, 2, 2}, rng)},
            {q + omega, uniform_in_box({-2, -2, -2}, {2, 2, 2}, rng)}};
        const double before = nd.unnormalized(x);
        std::tie(x[0].p, x[1].p) = pair_collide(x[0].p, x[1].p, omega);
        CHECK(nd.unnormalized(x) == doctest::Approx(before).epsilon(1e-12));
        // Bound by c prod h with c = N! Gmax^N.
        const Maxwellian& h = nd.maxwellian();
        CHECK(nd.unnormalized(x) <= 2.0 * 1.5 * 1.5 * h.density(x[0].p) * h.density(x[1].p) * (1 + 1e-12));
    }
}

TEST_CASE("spec round-trips through its config block")
{
    const DensitySpec s = DensitySpec::modulated(Domain({1, 0, 0}, {5, 4, 6}, 1.0), 3, 1.5, SpatialWeight::cosine(0.3));
    const DensitySpec back = density_spec_from_json(to_json(s));
    CHECK(back.domain == s.domain);
    CHECK(back.particles == 3);
    CHECK(back.beta == 1.5);
    CHECK(back.weight.amplitude == 0.3);
    CHECK(back.variant_name() == "modulated");

    Json bad = to_json(s);
    bad["variant"] = "quantum";
    CHECK_THROWS_AS(density_spec_from_json(bad), ConfigError);
    bad = to_json(s);
    bad["N"] = 0;
    CHECK_THROWS_AS(density_spec_from_json(bad), ConfigError);
}

TEST_CASE("canonical correlation of one particle is the weighted marginal")
{
    // rho_1(x) = 2 int f_2(x, y) dy: closed form against the generic map.
    const Domain d = Domain::cube(3.0, 1.0);
    const NormalizedDensity nd(DensitySpec::modulated(d, 2, 1.0, SpatialWeight::cosine(0.5)));
    const SpecDensity f(nd);
    const CorrelationMap generic = correlation_map(f, d, 1.0);
    const SpecCorrelations closed(nd);
    Rng rng = make_rng(8, {});
    const std::vector<PhasePoint> x{{{1.1, 1.5, 1.5}, {0.2, -0.1, 0.4}}};
    const SignedEstimate a = estimate_at(generic, x, 400000, rng);
    const SignedEstimate b = estimate_at(closed, x, 400000, rng);
    CHECK(std::abs(a.value - b.value) < 4.0 * std::hypot(a.std_error, b.std_error));

    // Vanishes on excluded points.
    const std::vector<PhasePoint> bad{{{0.2, 1.5, 1.5}, {0, 0, 0}}};
    CHECK(estimate_at(closed, bad, 100, rng).value == 0.0);
    CHECK(estimate_at(generic, bad, 100, rng).value == 0.0);
}

namespace {

struct Zero final : PhaseFunction {
    std::size_t max_order() const override { return 2; }
    double draw(std::span<const PhasePoint>, Rng&) const override { return 0.0; }
};

} // namespace

TEST_CASE("correlation map on a one-particle micro-domain")
{
    const Domain d = Domain::cube(2.4, 1.0);
    const NormalizedDensity nd(DensitySpec::grand_canonical(d, 0.7, 1.0, 1));
    const SpecDensity f(nd);
    const CorrelationMap rho = correlation_map(f, d, 1.0);
    const InverseCorrelationMap back = inverse_correlation_map(rho, d, 1.0);
    Rng rng = make_rng(12, {});

    // rho_1 = f_1 exactly; rho_0 = f_0 + int f_1 = Z.
    const std::vector<PhasePoint> x{{{1.2, 1.0, 1.4}, {0.3, 0.1, -0.2}}};
    const SignedEstimate r1 = estimate_at(rho, x, 10, rng);
    CHECK(r1.value == doctest::Approx(nd.unnormalized(x)));
    CHECK(r1.std_error == 0.0);
    const SignedEstimate r0 = estimate_at(rho, {}, 200000, rng);
    CHECK(std::abs(r0.value - nd.normalization().value) <= std::max(4.0 * r0.std_error, 1e-12));

    const SignedEstimate f0 = estimate_at(back, {}, 200000, rng);
    CHECK(std::abs(f0.value - 1.0) < 4.0 * f0.std_error);
    CHECK(estimate_at(back, x, 10, rng).value == doctest::Approx(nd.unnormalized(x)));

    const Zero zero;
    const CorrelationMap rz = correlation_map(zero, d, 1.0);
    const InverseCorrelationMap fz = inverse_correlation_map(rz, d, 1.0);
    CHECK(estimate_at(fz, {}, 100, rng).value == 0.0);
    CHECK(estimate_at(fz, x, 100, rng).value == 0.0);
}
