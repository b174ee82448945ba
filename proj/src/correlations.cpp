#include "bbgky/correlations.hpp"

#include <vector>

namespace bbgky {

SignedEstimate estimate_at(const PhaseFunction& f, std::span<const PhasePoint> x, std::uint64_t samples, Rng& rng)
{
    Accumulator acc;
    for (std::uint64_t s = 0; s < samples; ++s)
        acc.add(f.draw(x, rng));
    return to_estimate(acc);
}

namespace {

double inverse_factorial(std::size_t m)
{
    double f = 1.0;
    for (std::size_t k = 2; k <= m; ++k)
        f /= static_cast<double>(k);
    return f;
}

bool any_supported(const PhaseFunction& f, std::size_t from)
{
    for (std::size_t k = from; k <= f.max_order(); ++k)
        if (f.supports(k))
            return true;
    return false;
}

// One draw of sum_m sign^m / m! int g_{n+m}(x, y) dy with the m added particles
// shared between the terms (each term on its own is unbiased). Positions are
// uniform on the inset box, momenta from `proposal`.
double extension_sum(const PhaseFunction& g, std::span<const PhasePoint> x, const Domain& domain,
    const Maxwellian& proposal, double sign, Rng& rng)
{
    const std::size_t n = x.size();
    if (n > g.max_order())
        return 0.0;
    const std::size_t extra = g.max_order() - n;
    const Vec3 lo = domain.inset_lower();
    const Vec3 hi = domain.inset_upper();
    const double volume = domain.inset_volume();

    std::vector<PhasePoint> xs(x.begin(), x.end());
    double total = 0.0;
    double weight = 1.0;
    double parity = 1.0;
    for (std::size_t m = 0; m <= extra; ++m) {
        if (m > 0) {
            PhasePoint y;
            y.q = uniform_in_box(lo, hi, rng);
            y.p = proposal.sample(rng);
            weight *= volume / proposal.density(y.p);
            parity *= sign;
            xs.push_back(y);
        }
        if (!g.supports(n + m))
            continue;
        if (!admissible(domain, xs))
            break;
        total += parity * weight * inverse_factorial(m) * g.draw(xs, rng);
    }
    return total;
}

} // namespace

SpecCorrelations::SpecCorrelations(const NormalizedDensity& density, std::uint64_t inner)
    : density_(density)
    , inner_(inner == 0 ? 1 : inner)
{
}

double SpecCorrelations::draw(std::span<const PhasePoint> x, Rng& rng) const
{
    const DensitySpec& spec = density_.spec();
    const int n = static_cast<int>(x.size());
    if (n > spec.max_order() || !admissible(spec.domain, x))
        return 0.0;
    double log_h = 0.0;
    for (const auto& xi : x)
        log_h += density_.maxwellian().log_density(xi.p);
    const double prefactor = density_.spatial_product(x) * std::exp(log_h);

    const int extra = spec.max_order() - n;
    const Vec3 lo = spec.domain.inset_lower();
    const Vec3 hi = spec.domain.inset_upper();
    const double volume = spec.domain.inset_volume();
    std::vector<PhasePoint> xs;
    double sum = 0.0;
    for (std::uint64_t s = 0; s < inner_; ++s) {
        xs.assign(x.begin(), x.end());
        double positional = 1.0;
        for (int m = 0; m <= extra; ++m) {
            if (m > 0) {
                PhasePoint y;
                y.q = uniform_in_box(lo, hi, rng);
                positional *= volume * spec.weight.value(spec.domain, y.q);
                xs.push_back(y);
            }
            const double c = spec.coefficient(n + m);
            if (c == 0.0)
                continue;
            if (m > 0 && !admissible(spec.domain, xs))
                break;
            sum += c * inverse_factorial(static_cast<std::size_t>(m)) * positional;
        }
    }
    return prefactor * sum / static_cast<double>(inner_);
}

CorrelationMap::CorrelationMap(const PhaseFunction& f, const Domain& domain, double beta0, std::uint64_t inner)
    : f_(f)
    , domain_(domain)
    , proposal_(beta0)
    , inner_(inner == 0 ? 1 : inner)
{
}

bool CorrelationMap::supports(std::size_t n) const { return any_supported(f_, n); }

double CorrelationMap::draw(std::span<const PhasePoint> x, Rng& rng) const
{
    double sum = 0.0;
    for (std::uint64_t s = 0; s < inner_; ++s)
        sum += extension_sum(f_, x, domain_, proposal_, 1.0, rng);
    return sum / static_cast<double>(inner_);
}

InverseCorrelationMap::InverseCorrelationMap(
    const PhaseFunction& rho, const Domain& domain, double beta0, std::uint64_t inner)
    : rho_(rho)
    , domain_(domain)
    , proposal_(beta0)
    , inner_(inner == 0 ? 1 : inner)
{
}

bool InverseCorrelationMap::supports(std::size_t n) const { return any_supported(rho_, n); }

double InverseCorrelationMap::draw(std::span<const PhasePoint> x, Rng& rng) const
{
    double sum = 0.0;
    for (std::uint64_t s = 0; s < inner_; ++s)
        sum += extension_sum(rho_, x, domain_, proposal_, -1.0, rng);
    return sum / static_cast<double>(inner_);
}

double EvolvedDensity::draw(std::span<const PhasePoint> x, Rng& rng) const
{
    if (!f_.supports(x.size()) || !admissible(domain_, x))
        return 0.0;
    std::vector<PhasePoint> xs(x.begin(), x.end());
    evolve_in_place(domain_, xs, -s_, Limit::FromFuture);
    return f_.draw(xs, rng);
}

} // namespace bbgky
