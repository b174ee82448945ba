#include "bbgky/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bbgky {

Maxwellian::Maxwellian(double beta)
    : beta_(beta)
    , log_norm_(1.5 * std::log(beta / (2.0 * std::numbers::pi)))
{
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("Maxwellian: beta must be positive");
}

double Maxwellian::log_density(const Vec3& p) const { return log_norm_ - 0.5 * beta_ * norm2(p); }

double Maxwellian::density(const Vec3& p) const { return std::exp(log_density(p)); }

Vec3 Maxwellian::sample(Rng& rng) const
{
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(beta_));
    const double x = normal(rng);
    const double y = normal(rng);
    const double z = normal(rng);
    return {x, y, z};
}

SpatialWeight SpatialWeight::cosine(double amplitude)
{
    if (!(std::abs(amplitude) < 1.0))
        throw std::invalid_argument("SpatialWeight: cosine amplitude must satisfy |A| < 1");
    return {Kind::Cosine, amplitude};
}

double SpatialWeight::value(const Domain& domain, const Vec3& q) const
{
    if (kind == Kind::Uniform)
        return 1.0;
    return 1.0 + amplitude * std::cos(std::numbers::pi * (q.x - domain.lower().x) / domain.side(0));
}

double SpatialWeight::inset_integral(const Domain& domain) const
{
    // The cosine term integrates to sin(pi - u) - sin(u) = 0 over the inset
    // interval, which is symmetric about the box center.
    return domain.inset_volume();
}

namespace {

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

} // namespace

DensitySpec DensitySpec::canonical(const Domain& domain, int n, double beta)
{
    DensitySpec s;
    s.ensemble = Ensemble::Canonical;
    s.domain = domain;
    s.particles = n;
    s.beta = beta;
    s.validate();
    return s;
}

DensitySpec DensitySpec::modulated(const Domain& domain, int n, double beta, SpatialWeight g)
{
    DensitySpec s = canonical(domain, n, beta);
    s.weight = g;
    s.validate();
    return s;
}

DensitySpec DensitySpec::grand_canonical(const Domain& domain, double z, double beta, std::optional<int> n_max)
{
    DensitySpec s;
    s.ensemble = Ensemble::GrandCanonical;
    s.domain = domain;
    s.fugacity = z;
    s.beta = beta;
    s.max_particles = n_max ? *n_max : packing_bound(domain);
    s.validate();
    return s;
}

int DensitySpec::packing_bound(const Domain& domain)
{
    // The balls of radius a/2 around admissible centers are disjoint and lie
    // inside the box.
    const double a = domain.diameter();
    const double box = domain.side(0) * domain.side(1) * domain.side(2);
    const double ball = std::numbers::pi * a * a * a / 6.0;
    const double bound = std::floor(box / ball);
    return static_cast<int>(std::min<double>(bound, kParticleCap));
}

double DensitySpec::coefficient(int n) const
{
    if (n < 0 || n > max_order())
        return 0.0;
    if (ensemble == Ensemble::Canonical)
        return n == particles ? factorial(n) : 0.0;
    return std::pow(fugacity, n);
}

std::string DensitySpec::variant_name() const
{
    if (ensemble == Ensemble::GrandCanonical)
        return "grand_canonical";
    return is_equilibrium() ? "canonical" : "modulated";
}

void DensitySpec::validate() const
{
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("density: beta must be positive");
    if (weight.kind == SpatialWeight::Kind::Cosine && !(std::abs(weight.amplitude) < 1.0))
        throw std::invalid_argument("density: cosine amplitude must satisfy |A| < 1");
    if (ensemble == Ensemble::Canonical) {
        if (particles < 1)
            throw std::invalid_argument("density: N must be at least 1");
    } else {
        if (!(fugacity > 0.0) || !std::isfinite(fugacity))
            throw std::invalid_argument("density: fugacity must be positive");
        if (max_particles < 1 || max_particles > packing_bound(domain))
            throw std::invalid_argument("density: n_max must lie in [1, " + std::to_string(packing_bound(domain)) + "]");
    }
}

Json to_json(const DensitySpec& spec)
{
    Json j;
    j["schema_version"] = DensitySpec::kSchemaVersion;
    j["variant"] = spec.variant_name();
    if (spec.ensemble == Ensemble::Canonical) {
        j["N"] = spec.particles;
    } else {
        j["z"] = spec.fugacity;
        j["n_max"] = spec.max_particles;
    }
    j["beta"] = spec.beta;
    const Domain& d = spec.domain;
    j["origin"] = {d.lower().x, d.lower().y, d.lower().z};
    j["box"] = {d.side(0), d.side(1), d.side(2)};
    j["a"] = d.diameter();
    j["g"] = spec.weight.kind == SpatialWeight::Kind::Uniform ? "uniform" : "cosine";
    if (spec.weight.kind == SpatialWeight::Kind::Cosine)
        j["amplitude"] = spec.weight.amplitude;
    j["seed"] = spec.seed;
    return j;
}

namespace {

Vec3 vec3_from(const Json& block, const std::string& key, Vec3 fallback)
{
    if (!block.contains(key))
        return fallback;
    const Json& v = block.at(key);
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); }))
        throw ConfigError("'" + key + "' must be a list of three numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

} // namespace

DensitySpec density_spec_from_json(const Json& block)
{
    const auto version = get_integer(block, "schema_version", DensitySpec::kSchemaVersion);
    if (version != DensitySpec::kSchemaVersion)
        throw ConfigError("density: unsupported schema_version " + std::to_string(version));
    const std::string variant = get_string(block, "variant");
    const double a = get_number(block, "a", 1.0);
    const Vec3 origin = vec3_from(block, "origin", {0, 0, 0});
    const Vec3 sides = vec3_from(block, "box", {10 * a, 10 * a, 10 * a});

    DensitySpec s;
    try {
        s.domain = Domain(origin, origin + sides, a);
        s.beta = get_number(block, "beta", 1.0);
        if (variant == "canonical" || variant == "modulated") {
            s.ensemble = Ensemble::Canonical;
            s.particles = static_cast<int>(get_integer(block, "N"));
        } else if (variant == "grand_canonical") {
            s.ensemble = Ensemble::GrandCanonical;
            s.fugacity = get_number(block, "z");
            s.max_particles = static_cast<int>(get_integer(block, "n_max", DensitySpec::packing_bound(s.domain)));
        } else {
            throw ConfigError("density: unknown variant '" + variant + "'");
        }
        const std::string g = get_string(block, "g", variant == "modulated" ? "cosine" : "uniform");
        if (g == "cosine")
            s.weight = SpatialWeight::cosine(get_number(block, "amplitude", 0.5));
        else if (g != "uniform")
            throw ConfigError("density: unknown g '" + g + "'");
        if (variant == "modulated" && s.is_equilibrium())
            throw ConfigError("density: variant 'modulated' needs g = \"cosine\"");
        if (variant == "canonical" && !s.is_equilibrium())
            throw ConfigError("density: variant 'canonical' takes g = \"uniform\"");
        s.seed = static_cast<std::uint64_t>(get_integer(block, "seed", 1));
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

NormalizedDensity::NormalizedDensity(DensitySpec spec, std::uint64_t proposals)
    : spec_(std::move(spec))
    , maxwellian_(spec_.beta)
{
    spec_.validate();
    if (proposals == 0)
        throw std::invalid_argument("NormalizedDensity: proposals must be positive");
    const int n_max = spec_.max_order();
    const Vec3 lo = spec_.domain.inset_lower();
    const Vec3 hi = spec_.domain.inset_upper();
    const double volume = spec_.domain.inset_volume();

    q_.resize(static_cast<std::size_t>(n_max) + 1);
    q_[0] = {1.0, 0.0, 0, 1.0, 0.0};
    if (n_max >= 1) {
        const double q1 = spec_.weight.inset_integral(spec_.domain);
        q_[1] = {q1, 0.0, 0, q1, 0.0};
    }
    std::vector<PhasePoint> xs;
    for (int n = 2; n <= n_max; ++n) {
        if (spec_.coefficient(n) == 0.0)
            continue;
        Rng rng = make_rng(spec_.seed, {fnv1a("configuration-integral"), static_cast<std::uint64_t>(n)});
        Accumulator acc;
        xs.assign(static_cast<std::size_t>(n), PhasePoint{});
        for (std::uint64_t s = 0; s < proposals; ++s) {
            for (auto& x : xs)
                x.q = uniform_in_box(lo, hi, rng);
            acc.add(admissible(spec_.domain, xs) ? spatial_product(xs) : 0.0);
        }
        q_[static_cast<std::size_t>(n)] = scaled(to_estimate(acc), std::pow(volume, n));
    }

    z_ = {};
    for (int n = 0; n <= n_max; ++n) {
        const double c = spec_.coefficient(n);
        if (c != 0.0)
            z_ = z_ + scaled(q_[static_cast<std::size_t>(n)], c / factorial(n));
    }
}

double NormalizedDensity::spatial_product(std::span<const PhasePoint> x) const
{
    double g = 1.0;
    for (const auto& xi : x)
        g *= spec_.weight.value(spec_.domain, xi.q);
    return g;
}

double NormalizedDensity::unnormalized(std::span<const PhasePoint> x) const
{
    const double c = spec_.coefficient(static_cast<int>(x.size()));
    if (c == 0.0 || !admissible(spec_.domain, x))
        return 0.0;
    double log_h = 0.0;
    for (const auto& xi : x)
        log_h += maxwellian_.log_density(xi.p);
    return c * spatial_product(x) * std::exp(log_h);
}

double NormalizedDensity::particle_number_probability(int n) const
{
    if (n < 0 || n > spec_.max_order())
        return 0.0;
    return spec_.coefficient(n) * q_[static_cast<std::size_t>(n)].value / factorial(n) / z_.value;
}

double density_eval(const NormalizedDensity& density, const Configuration& config)
{
    if (!(config.domain() == density.domain()))
        throw std::invalid_argument("density_eval: configuration lives in a different domain");
    const double f = density.unnormalized(config.particles()) / density.normalization().value;
    if (density.spec().ensemble == Ensemble::Canonical)
        return f / factorial(static_cast<int>(config.size()));
    return f;
}

Configuration sample(const DensitySpec& spec, Rng& rng, std::uint64_t max_attempts, SampleStats* stats)
{
    spec.validate();
    const Domain& domain = spec.domain;
    const Vec3 lo = domain.inset_lower();
    const Vec3 hi = domain.inset_upper();
    const double g_max = spec.weight.max();
    const Maxwellian h(spec.beta);

    // Proposal weights over the particle number: c_n (V g_max)^n / n!.
    std::vector<double> number_weights;
    if (spec.ensemble == Ensemble::GrandCanonical) {
        const double vg = domain.inset_volume() * g_max;
        for (int n = 0; n <= spec.max_order(); ++n)
            number_weights.push_back(spec.coefficient(n) * std::pow(vg, n) / factorial(n));
    }
    std::discrete_distribution<int> number(number_weights.begin(), number_weights.end());

    std::vector<PhasePoint> xs;
    for (std::uint64_t attempt = 1; attempt <= max_attempts; ++attempt) {
        const int n = spec.ensemble == Ensemble::Canonical ? spec.particles : number(rng);
        xs.assign(static_cast<std::size_t>(n), PhasePoint{});
        double accept = 1.0;
        for (auto& x : xs) {
            x.q = uniform_in_box(lo, hi, rng);
            accept *= spec.weight.value(domain, x.q) / g_max;
        }
        const bool ok = admissible(domain, xs) && (accept >= 1.0 || uniform01(rng) < accept);
        if (!ok)
            continue;
        for (auto& x : xs)
            x.p = h.sample(rng);
        if (stats)
            stats->proposals += attempt;
        return Configuration(domain, std::move(xs));
    }
    throw InfeasibleGeometry("sample: no admissible configuration after " + std::to_string(max_attempts) + " proposals");
}

} // namespace bbgky
