#include "bbgky/core.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bbgky {

Vec3 Vec3::finite(double x, double y, double z)
{
    Vec3 v{x, y, z};
    if (!v.is_finite())
        throw std::invalid_argument("Vec3: non-finite component");
    return v;
}

Domain::Domain(Vec3 lower, Vec3 upper, double diameter)
    : lower_(lower)
    , upper_(upper)
    , diameter_(diameter)
{
    if (!lower.is_finite() || !upper.is_finite() || !std::isfinite(diameter))
        throw std::invalid_argument("Domain: non-finite geometry");
    if (!(diameter > 0.0))
        throw std::invalid_argument("Domain: diameter must be positive");
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(upper[k] - lower[k] > 2.0 * diameter))
            throw std::invalid_argument("Domain: side " + std::to_string(k) + " must exceed twice the diameter");
    }
}

Vec3 Domain::inset_lower() const
{
    const double h = 0.5 * diameter_;
    return {lower_.x + h, lower_.y + h, lower_.z + h};
}

Vec3 Domain::inset_upper() const
{
    const double h = 0.5 * diameter_;
    return {upper_.x - h, upper_.y - h, upper_.z - h};
}

double Domain::inset_volume() const
{
    return (side(0) - diameter_) * (side(1) - diameter_) * (side(2) - diameter_);
}

const char* to_string(Admissibility a)
{
    switch (a) {
    case Admissibility::Interior: return "interior";
    case Admissibility::Contact: return "contact";
    case Admissibility::Excluded: return "excluded";
    }
    return "?";
}

const char* to_string(OmegaSign s)
{
    switch (s) {
    case OmegaSign::Plus: return "plus";
    case OmegaSign::Minus: return "minus";
    case OmegaSign::Grazing: return "grazing";
    }
    return "?";
}

Configuration::Configuration(Domain domain, std::vector<PhasePoint> particles)
    : domain_(domain)
    , particles_(std::move(particles))
{
    for (const auto& x : particles_) {
        if (!x.q.is_finite() || !x.p.is_finite())
            throw std::invalid_argument("Configuration: non-finite coordinate");
    }
}

Configuration Configuration::reversed() const
{
    auto flipped = particles_;
    for (auto& x : flipped)
        x.p = -x.p;
    return {domain_, std::move(flipped)};
}

Admissibility classify(const Domain& domain, std::span<const PhasePoint> particles)
{
    const double a = domain.diameter();
    const double eps = domain.contact_tolerance();
    const Vec3 lo = domain.inset_lower();
    const Vec3 hi = domain.inset_upper();
    bool contact = false;

    for (const auto& x : particles) {
        for (std::size_t k = 0; k < 3; ++k) {
            const double margin = std::min(x.q[k] - lo[k], hi[k] - x.q[k]);
            if (margin < -eps)
                return Admissibility::Excluded;
            if (margin <= eps)
                contact = true;
        }
    }
    for (std::size_t i = 0; i < particles.size(); ++i) {
        for (std::size_t j = i + 1; j < particles.size(); ++j) {
            const double gap = norm(particles[i].q - particles[j].q) - a;
            if (gap < -eps)
                return Admissibility::Excluded;
            if (gap <= eps)
                contact = true;
        }
    }
    return contact ? Admissibility::Contact : Admissibility::Interior;
}

namespace {

void check_contact_arguments(const Configuration& config, std::size_t j, const Vec3& omega)
{
    if (j >= config.size())
        throw std::out_of_range("contact particle index out of range");
    if (!omega.is_finite() || std::abs(norm(omega) - 1.0) > kUnitTolerance)
        throw std::invalid_argument("contact direction must be a unit vector");
}

} // namespace

Configuration with_contact_particle(const Configuration& config, std::size_t j, const Vec3& p_new, const Vec3& omega)
{
    check_contact_arguments(config, j, omega);
    std::vector<PhasePoint> extended(config.particles().begin(), config.particles().end());
    extended.push_back({config[j].q + config.domain().diameter() * omega, p_new});
    return {config.domain(), std::move(extended)};
}

bool omega_admissible(const Configuration& config, std::size_t j, const Vec3& p_new, const Vec3& omega)
{
    check_contact_arguments(config, j, omega);
    const Domain& d = config.domain();
    const double a = d.diameter();
    const double eps = d.contact_tolerance();
    const Vec3 q = config[j].q + a * omega;
    const Vec3 lo = d.inset_lower();
    const Vec3 hi = d.inset_upper();
    (void)p_new; // membership does not depend on the momentum outside the null set of degenerate orbits

    for (std::size_t k = 0; k < 3; ++k) {
        if (q[k] - lo[k] < -eps || hi[k] - q[k] < -eps)
            return false;
    }
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (i == j)
            continue;
        if (norm(config[i].q - q) - a < -eps)
            return false;
    }
    return classify(config) != Admissibility::Excluded;
}

OmegaSign omega_sign_class(const Vec3& p_j, const Vec3& p_new, const Vec3& omega)
{
    const Vec3 rel = p_new - p_j;
    const double normal = dot(omega, rel);
    const double band = kGrazingTolerance * norm(rel);
    if (normal > band)
        return OmegaSign::Plus;
    if (normal < -band)
        return OmegaSign::Minus;
    return OmegaSign::Grazing;
}

} // namespace bbgky
