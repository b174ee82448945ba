// Time-integrated BBGKY hierarchy: the collision operator, collision histories
// with their signed weights, the Monte Carlo evaluation of the history series,
// and empirical correlation functions from forward simulation.

#pragma once

#include "bbgky/correlations.hpp"
#include "bbgky/dynamics.hpp"
#include "bbgky/measures.hpp"
#include "bbgky/stats.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace bbgky {

/// Axis-aligned box in the phase space of one particle.
struct ParticleBox {
    Vec3 q_lo, q_hi;
    Vec3 p_lo, p_hi;

    bool contains(const PhasePoint& x) const;
    double volume() const;
    PhasePoint sample(Rng& rng) const;
};

/// Product of per-particle boxes, intersected with Gamma_n on membership.
class DeltaBox {
public:
    DeltaBox() = default;
    explicit DeltaBox(std::vector<ParticleBox> factors);

    std::size_t order() const { return factors_.size(); }
    const std::vector<ParticleBox>& factors() const { return factors_; }
    double volume() const;
    /// Membership of (x_1..x_n) in the box and in Gamma_n.
    bool contains(const Domain& domain, std::span<const PhasePoint> x) const;
    /// Uniform point of the product box (admissibility not enforced).
    std::vector<PhasePoint> sample(Rng& rng) const;

private:
    std::vector<ParticleBox> factors_;
};

struct CollisionHistory {
    std::vector<double> times;        ///< t_1 >= t_2 >= ... >= t_m in [0, t]
    std::vector<std::size_t> labels;  ///< zero-based j_k < n + k - 1
    std::vector<Vec3> momenta;        ///< p-hat_k
    std::vector<Vec3> directions;     ///< omega-hat_k

    std::size_t size() const { return times.size(); }
};

enum class HistoryStatus { Valid, Inadmissible, Degenerate };

const char* to_string(HistoryStatus s);

struct HistoryOutcome {
    std::vector<PhasePoint> terminal; ///< x_1(0) .. x_{n+m}(0)
    double weight = 0.0;              ///< W = prod a^2 omega_k . (p_k - p_{j_k}(t_k))
    HistoryStatus status = HistoryStatus::Valid;
};

/// Runs the backward construction from x at time t. Inadmissible insertions
/// and degenerate backward legs give weight 0 with the matching status.
/// Throws std::invalid_argument for a structurally invalid history.
HistoryOutcome build_history(const Configuration& x, double t, const CollisionHistory& delta);

/// Counts of samples that produced no value.
struct Rejections {
    std::uint64_t degenerate = 0;  ///< dropped: a trajectory hit a degeneracy
    std::uint64_t inadmissible = 0; ///< kept as zeros: insertion outside Gamma
    std::uint64_t attempted = 0;

    void merge(const Rejections& o)
    {
        degenerate += o.degenerate;
        inadmissible += o.inadmissible;
        attempted += o.attempted;
    }
    double degenerate_rate() const { return attempted ? static_cast<double>(degenerate) / static_cast<double>(attempted) : 0.0; }
};

struct MonteCarloResult {
    SignedEstimate estimate;
    Rejections rejections;
};

struct CollisionOperatorParams {
    std::uint64_t samples = 100'000;
    double beta0 = 1.0;
    std::uint64_t seed = 1;
};

/// One draw of (C_{j,n+1} rho_{n+1})(x): p ~ h_beta0, omega uniform on S^2.
double collision_operator_draw(const PhaseFunction& rho, const Domain& domain, std::span<const PhasePoint> x,
    std::size_t j, const Maxwellian& proposal, Rng& rng);

/// Monte Carlo estimate of
///   a^2 int dp int_{S^2} domega omega.(p - p_j) rho_{n+1}(x, q_j + a omega, p)
/// with inadmissible directions contributing zero. j is zero-based.
MonteCarloResult collision_operator(
    const PhaseFunction& rho, const Configuration& x, std::size_t j, const CollisionOperatorParams& params);

struct SeriesParams {
    std::uint64_t samples = 1'000'000;
    std::size_t m_max = 2;
    /// Sample fractions for m = 0, m = 1 and m >= 2 (the last split evenly).
    std::vector<double> allocation{0.5, 0.3, 0.2};
    double beta0 = 1.0;
    unsigned workers = 1;
    std::uint64_t seed = 1;
};

struct StratumResult {
    std::size_t m = 0;
    SignedEstimate estimate;
    Rejections rejections;
};

struct SeriesResult {
    SignedEstimate total;
    std::vector<StratumResult> strata;
    Rejections rejections;
};

/// int_Delta dx int dδ W(x, δ) rho0_{n+m}(terminal points), stratified over m.
/// Strata with m above m_max or where rho0_{n+m} vanishes are skipped.
SeriesResult series_eval(const PhaseFunction& rho0, const Domain& domain, const DeltaBox& delta, double t,
    const SeriesParams& params);

struct EstimatorParams {
    std::uint64_t samples = 100'000;
    unsigned workers = 1;
    std::uint64_t seed = 1;
};

/// int_Delta rho_n(x, t) dx from forward simulation of the initial measure: the expected
/// number of ordered n-tuples of distinct particles whose state at time t lies
/// in Delta (the first n particles, times N..(N-n+1), for canonical specs).
MonteCarloResult empirical_rho(const DensitySpec& spec, const DeltaBox& delta, double t, Limit limit,
    const EstimatorParams& params);

/// int_Delta rho0_n(T_{-t} x) dx.
MonteCarloResult pullback_term(const PhaseFunction& rho0, const Domain& domain, const DeltaBox& delta, double t,
    const EstimatorParams& params);

/// sum_j int_0^t ds int_Delta dx [C_{j,n+1} rho_{n+1}(s)](T_{-t+s} x), with
/// rho_{n+1}(s) the correlation function of the transported density f o T_{-s}.
MonteCarloResult collision_term(const PhaseFunction& f, const Domain& domain, const DeltaBox& delta, double t,
    double beta0, const EstimatorParams& params);

struct CollisionTallies {
    SignedEstimate gain; ///< sum_m N..(N-n+1) P{x(tau_m+) in T_{tau_m - t+} Delta, tau_m <= t}
    SignedEstimate loss; ///< same with the pre-collision group state
    SignedEstimate net;  ///< gain - loss, estimated per sample
    Rejections rejections;
};

/// Tallies of collisions between the group {1..n} and the rest, from forward
/// simulation of a canonical spec.
CollisionTallies collision_tallies(const DensitySpec& spec, const DeltaBox& delta, double t,
    const EstimatorParams& params);

/// Expected number of pair collisions (walls excluded) in [0, t] for a
/// canonical spec started from its own measure.
MonteCarloResult expected_collisions(const DensitySpec& spec, double t, const EstimatorParams& params);

/// int dp_1 dp_2 h(p_1) h(p_2) (omega . (p_1 - p_2))_+ by two-dimensional
/// quadrature over the components along omega.
double momentum_flux_factor(double beta);

/// The rate integral
///   int dq_1 dp_1 int dp_2 int_{Omega_{1-}} domega a^2 omega.(p_1 - p_2) rho_eq,2(q_1, p_1, q_1 + a omega, p_2)
/// for an equilibrium spec: momentum factor by quadrature, positions by Monte Carlo.
MonteCarloResult collision_rate_integral(const NormalizedDensity& density, const EstimatorParams& params);

/// Mean time between pair collisions of one particle, N / rate integral.
double mean_free_time(const NormalizedDensity& density, const EstimatorParams& params);

} // namespace bbgky
