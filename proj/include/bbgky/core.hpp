// Phase-space geometry for hard spheres of diameter a in an axis-aligned box.
//
// A configuration (x_1, ..., x_n), x_i = (q_i, p_i), is admissible when every
// center keeps a distance of at least a/2 from the walls and every pair of
// centers is at least a apart. Particles have unit mass, so p is also the
// velocity.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bbgky {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    /// Validating factory; throws std::invalid_argument on NaN or Inf.
    static Vec3 finite(double x, double y, double z);

    double operator[](std::size_t k) const { return k == 0 ? x : (k == 1 ? y : z); }
    double& operator[](std::size_t k) { return k == 0 ? x : (k == 1 ? y : z); }

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    Vec3& operator+=(const Vec3& o)
    {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3& operator-=(const Vec3& o)
    {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    Vec3& operator*=(double s)
    {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Contact tolerance, in units of the diameter.
inline constexpr double kContactTolerance = 1e-9;
/// Relative tolerance below which a normal relative velocity counts as grazing.
inline constexpr double kGrazingTolerance = 1e-9;
/// Tolerance on |omega| - 1 for direction arguments.
inline constexpr double kUnitTolerance = 1e-12;

class Domain {
public:
    /// Throws std::invalid_argument unless every side exceeds 2a.
    Domain(Vec3 lower, Vec3 upper, double diameter);

    static Domain cube(double side, double diameter) { return {{0, 0, 0}, {side, side, side}, diameter}; }

    const Vec3& lower() const { return lower_; }
    const Vec3& upper() const { return upper_; }
    double diameter() const { return diameter_; }
    double side(std::size_t axis) const { return upper_[axis] - lower_[axis]; }

    /// Box available to sphere centers: the domain shrunk by a/2 on every face.
    Vec3 inset_lower() const;
    Vec3 inset_upper() const;
    double inset_volume() const;

    double contact_tolerance() const { return kContactTolerance * diameter_; }

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    Vec3 lower_;
    Vec3 upper_;
    double diameter_;
};

struct PhasePoint {
    Vec3 q;
    Vec3 p;

    friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

enum class Admissibility { Interior, Contact, Excluded };

const char* to_string(Admissibility a);

/// An ordered list of particles in a domain. Immutable after construction.
class Configuration {
public:
    /// Throws std::invalid_argument if any coordinate is not finite.
    Configuration(Domain domain, std::vector<PhasePoint> particles);

    const Domain& domain() const { return domain_; }
    std::size_t size() const { return particles_.size(); }
    bool empty() const { return particles_.empty(); }
    const PhasePoint& operator[](std::size_t i) const { return particles_[i]; }
    std::span<const PhasePoint> particles() const { return particles_; }

    /// Copy with momenta negated (the velocity reversal V).
    Configuration reversed() const;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    Domain domain_;
    std::vector<PhasePoint> particles_;
};

/// Classification against the admissible phase space, with equality decided
/// up to Domain::contact_tolerance().
Admissibility classify(const Domain& domain, std::span<const PhasePoint> particles);
inline Admissibility classify(const Configuration& c) { return classify(c.domain(), c.particles()); }

inline bool admissible(const Domain& domain, std::span<const PhasePoint> particles)
{
    return classify(domain, particles) != Admissibility::Excluded;
}

/// Configuration with a particle added at q_j + a*omega carrying momentum p_new.
/// Indices are zero-based. Throws std::out_of_range / std::invalid_argument.
Configuration with_contact_particle(const Configuration& config, std::size_t j, const Vec3& p_new, const Vec3& omega);

/// True iff adding a particle at q_j + a*omega keeps the configuration admissible.
/// Throws std::out_of_range for a bad index and std::invalid_argument for a non-unit omega.
bool omega_admissible(const Configuration& config, std::size_t j, const Vec3& p_new, const Vec3& omega);

enum class OmegaSign { Plus, Minus, Grazing };

const char* to_string(OmegaSign s);

/// Sign of omega . (p_new - p_j), with a relative grazing band.
OmegaSign omega_sign_class(const Vec3& p_j, const Vec3& p_new, const Vec3& omega);

} // namespace bbgky
