// Initial measures on the hard-sphere phase space.
//
// All densities handled here have the product form
//
//     f_n(x_1..x_n) = c_n / Z * prod_i g(q_i) h_beta(p_i)   on Gamma_n,
//
// written in the grand-canonical convention where the probability of finding
// n particles in dx_1..dx_n is f_n dx / n!. A canonical system of N particles
// is the special case c_N = N! and c_n = 0 otherwise; the grand-canonical
// equilibrium has c_n = z^n. The spatial weight g is identically one for the
// equilibrium variants.

#pragma once

#include "bbgky/config_text.hpp"
#include "bbgky/core.hpp"
#include "bbgky/stats.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

namespace bbgky {

class Maxwellian {
public:
    explicit Maxwellian(double beta);

    double beta() const { return beta_; }
    /// h_beta(p) = (beta / 2pi)^{3/2} exp(-beta |p|^2 / 2)
    double density(const Vec3& p) const;
    double log_density(const Vec3& p) const;
    Vec3 sample(Rng& rng) const;

private:
    double beta_;
    double log_norm_;
};

/// Strictly positive spatial weight g(q) that depends on q_x only.
struct SpatialWeight {
    enum class Kind { Uniform, Cosine };

    Kind kind = Kind::Uniform;
    double amplitude = 0.0; ///< cosine amplitude A in 1 + A cos(pi (q_x - lo_x) / L_x), |A| < 1

    static SpatialWeight uniform() { return {}; }
    static SpatialWeight cosine(double amplitude);

    double value(const Domain& domain, const Vec3& q) const;
    double max() const { return kind == Kind::Uniform ? 1.0 : 1.0 + std::abs(amplitude); }
    /// Exact integral of g over the inset box.
    double inset_integral(const Domain& domain) const;
};

enum class Ensemble { Canonical, GrandCanonical };

struct DensitySpec {
    static constexpr int kSchemaVersion = 1;
    static constexpr int kParticleCap = 4;

    Ensemble ensemble = Ensemble::Canonical;
    Domain domain = Domain::cube(10.0, 1.0);
    int particles = 2;         ///< N for canonical specs
    double fugacity = 0.0;     ///< z for grand-canonical specs
    int max_particles = 0;     ///< n_max for grand-canonical specs
    double beta = 1.0;
    SpatialWeight weight;
    std::uint64_t seed = 1;    ///< seed of the normalization estimate

    static DensitySpec canonical(const Domain& domain, int n, double beta);
    static DensitySpec modulated(const Domain& domain, int n, double beta, SpatialWeight g);
    /// n_max defaults to the packing bound; an explicit value may only lower it.
    static DensitySpec grand_canonical(const Domain& domain, double z, double beta, std::optional<int> n_max = {});

    /// Volume bound on how many spheres fit in the domain, capped at kParticleCap.
    static int packing_bound(const Domain& domain);

    /// Largest particle number with nonzero density.
    int max_order() const { return ensemble == Ensemble::Canonical ? particles : max_particles; }
    /// Sector coefficient c_n.
    double coefficient(int n) const;
    bool is_equilibrium() const { return weight.kind == SpatialWeight::Kind::Uniform; }
    std::string variant_name() const;

    /// Throws std::invalid_argument when parameters are out of range.
    void validate() const;
};

Json to_json(const DensitySpec& spec);
DensitySpec density_spec_from_json(const Json& block);

/// A spec together with its Monte Carlo configuration integrals
///     Q_n = int_{inset^n} prod g(q_i) 1_{Gamma_n}(q) dq,
/// and the normalization Z = sum_n c_n Q_n / n!.
class NormalizedDensity {
public:
    static constexpr std::uint64_t kDefaultProposals = 1'000'000;

    explicit NormalizedDensity(DensitySpec spec, std::uint64_t proposals = kDefaultProposals);

    const DensitySpec& spec() const { return spec_; }
    const Domain& domain() const { return spec_.domain; }
    const Maxwellian& maxwellian() const { return maxwellian_; }

    const SignedEstimate& configuration_integral(int n) const { return q_.at(static_cast<std::size_t>(n)); }
    const SignedEstimate& normalization() const { return z_; }

    /// f_n without the 1/Z factor, GC convention; zero outside Gamma_n.
    double unnormalized(std::span<const PhasePoint> x) const;
    /// prod g(q_i) over the given particles.
    double spatial_product(std::span<const PhasePoint> x) const;

    /// Probability of n particles, with Z taken at its estimate.
    double particle_number_probability(int n) const;

private:
    DensitySpec spec_;
    Maxwellian maxwellian_;
    std::vector<SignedEstimate> q_;
    SignedEstimate z_;
};

/// Density of the measure at a configuration: the labelled N-particle density
/// f_N for canonical specs and the grand-canonical f_n otherwise.
double density_eval(const NormalizedDensity& density, const Configuration& config);

class InfeasibleGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SampleStats {
    std::uint64_t proposals = 0;
};

/// Exact rejection sampler; throws InfeasibleGeometry after `max_attempts`
/// consecutive rejections.
Configuration sample(const DensitySpec& spec, Rng& rng, std::uint64_t max_attempts = 10'000'000,
    SampleStats* stats = nullptr);

} // namespace bbgky
