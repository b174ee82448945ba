// Functions on the grand phase space Gamma = U_n Gamma_n, evaluated by
// unbiased single draws so that they can be nested inside outer Monte Carlo
// estimators without bias.
//
// The correlation vector of a density vector f is
//     rho_n(x) = sum_m 1/m! int_{Gamma_m(x)} f_{n+m}(x, y) dy,
// and the inverse map is the alternating sum
//     f_n(x) = sum_m (-1)^m / m! int rho_{n+m}(x, y) dy.
// For a canonical density in the GC convention (f_N = N! times the labelled
// density) the first formula reduces to the N(N-1)..(N-n+1)-weighted marginal.

#pragma once

#include "bbgky/dynamics.hpp"
#include "bbgky/measures.hpp"
#include "bbgky/stats.hpp"

#include <cstddef>
#include <span>

namespace bbgky {

class PhaseFunction {
public:
    virtual ~PhaseFunction() = default;

    /// Largest n with a possibly nonzero component.
    virtual std::size_t max_order() const = 0;
    /// False when the order-n component is known to vanish identically.
    virtual bool supports(std::size_t n) const { return n <= max_order(); }
    /// One unbiased draw of the order-|x| component at x. Deterministic
    /// functions ignore the generator. May throw DegeneracyError when the
    /// draw involves evolving a degenerate configuration.
    virtual double draw(std::span<const PhasePoint> x, Rng& rng) const = 0;
};

/// Mean of `samples` independent draws with its standard error.
SignedEstimate estimate_at(const PhaseFunction& f, std::span<const PhasePoint> x, std::uint64_t samples, Rng& rng);

/// The density vector of a spec, GC convention, without the 1/Z factor.
class SpecDensity final : public PhaseFunction {
public:
    explicit SpecDensity(const NormalizedDensity& density)
        : density_(density)
    {
    }

    std::size_t max_order() const override { return static_cast<std::size_t>(density_.spec().max_order()); }
    bool supports(std::size_t n) const override { return density_.spec().coefficient(static_cast<int>(n)) != 0.0; }
    double draw(std::span<const PhasePoint> x, Rng&) const override { return density_.unnormalized(x); }

private:
    const NormalizedDensity& density_;
};

/// Correlation functions of a spec without the 1/Z factor. The momentum
/// integrals are done analytically, the position integrals by `inner` uniform
/// draws over the inset box.
class SpecCorrelations final : public PhaseFunction {
public:
    explicit SpecCorrelations(const NormalizedDensity& density, std::uint64_t inner = 1);

    std::size_t max_order() const override { return static_cast<std::size_t>(density_.spec().max_order()); }
    double draw(std::span<const PhasePoint> x, Rng& rng) const override;

private:
    const NormalizedDensity& density_;
    std::uint64_t inner_;
};

/// rho = F(f) for an arbitrary density vector f, by Monte Carlo over the
/// added particles: positions uniform in the inset box, momenta from h_beta0.
class CorrelationMap final : public PhaseFunction {
public:
    CorrelationMap(const PhaseFunction& f, const Domain& domain, double beta0, std::uint64_t inner = 1);

    std::size_t max_order() const override { return f_.max_order(); }
    bool supports(std::size_t n) const override;
    double draw(std::span<const PhasePoint> x, Rng& rng) const override;

private:
    const PhaseFunction& f_;
    Domain domain_;
    Maxwellian proposal_;
    std::uint64_t inner_;
};

/// f = F^{-1}(rho), same sampling scheme as CorrelationMap.
class InverseCorrelationMap final : public PhaseFunction {
public:
    InverseCorrelationMap(const PhaseFunction& rho, const Domain& domain, double beta0, std::uint64_t inner = 1);

    std::size_t max_order() const override { return rho_.max_order(); }
    bool supports(std::size_t n) const override;
    double draw(std::span<const PhasePoint> x, Rng& rng) const override;

private:
    const PhaseFunction& rho_;
    Domain domain_;
    Maxwellian proposal_;
    std::uint64_t inner_;
};

inline CorrelationMap correlation_map(const PhaseFunction& f, const Domain& domain, double beta0, std::uint64_t inner = 1)
{
    return {f, domain, beta0, inner};
}

inline InverseCorrelationMap inverse_correlation_map(
    const PhaseFunction& rho, const Domain& domain, double beta0, std::uint64_t inner = 1)
{
    return {rho, domain, beta0, inner};
}

/// Pullback f(s) = f o T_{-s}: the density vector transported by the flow.
class EvolvedDensity final : public PhaseFunction {
public:
    EvolvedDensity(const PhaseFunction& f, const Domain& domain, double s)
        : f_(f)
        , domain_(domain)
        , s_(s)
    {
    }

    std::size_t max_order() const override { return f_.max_order(); }
    bool supports(std::size_t n) const override { return f_.supports(n); }
    double draw(std::span<const PhasePoint> x, Rng& rng) const override;

private:
    const PhaseFunction& f_;
    Domain domain_;
    double s_;
};

} // namespace bbgky
