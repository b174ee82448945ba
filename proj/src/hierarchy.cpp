#include "bbgky/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace bbgky {

bool ParticleBox::contains(const PhasePoint& x) const
{
    for (std::size_t k = 0; k < 3; ++k) {
        if (x.q[k] < q_lo[k] || x.q[k] > q_hi[k] || x.p[k] < p_lo[k] || x.p[k] > p_hi[k])
            return false;
    }
    return true;
}

double ParticleBox::volume() const
{
    double v = 1.0;
    for (std::size_t k = 0; k < 3; ++k)
        v *= (q_hi[k] - q_lo[k]) * (p_hi[k] - p_lo[k]);
    return v;
}

PhasePoint ParticleBox::sample(Rng& rng) const { return {uniform_in_box(q_lo, q_hi, rng), uniform_in_box(p_lo, p_hi, rng)}; }

DeltaBox::DeltaBox(std::vector<ParticleBox> factors)
    : factors_(std::move(factors))
{
    if (factors_.empty())
        throw std::invalid_argument("DeltaBox: at least one particle box is required");
    for (const auto& f : factors_) {
        for (std::size_t k = 0; k < 3; ++k) {
            if (!(f.q_hi[k] > f.q_lo[k]) || !(f.p_hi[k] > f.p_lo[k]))
                throw std::invalid_argument("DeltaBox: every interval must have positive length");
        }
    }
}

double DeltaBox::volume() const
{
    double v = 1.0;
    for (const auto& f : factors_)
        v *= f.volume();
    return v;
}

bool DeltaBox::contains(const Domain& domain, std::span<const PhasePoint> x) const
{
    if (x.size() != factors_.size())
        return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!factors_[i].contains(x[i]))
            return false;
    return admissible(domain, x);
}

std::vector<PhasePoint> DeltaBox::sample(Rng& rng) const
{
    std::vector<PhasePoint> x;
    x.reserve(factors_.size());
    for (const auto& f : factors_)
        x.push_back(f.sample(rng));
    return x;
}

const char* to_string(HistoryStatus s)
{
    switch (s) {
    case HistoryStatus::Valid: return "valid";
    case HistoryStatus::Inadmissible: return "inadmissible";
    case HistoryStatus::Degenerate: return "degenerate";
    }
    return "?";
}

HistoryOutcome build_history(const Configuration& x, double t, const CollisionHistory& delta)
{
    const std::size_t m = delta.size();
    if (delta.labels.size() != m || delta.momenta.size() != m || delta.directions.size() != m)
        throw std::invalid_argument("build_history: inconsistent history lengths");
    if (!(t >= 0.0))
        throw std::invalid_argument("build_history: t must be nonnegative");
    double previous = t;
    for (std::size_t k = 0; k < m; ++k) {
        if (!(delta.times[k] <= previous) || !(delta.times[k] >= 0.0))
            throw std::invalid_argument("build_history: times must satisfy 0 <= t_m <= .. <= t_1 <= t");
        if (delta.labels[k] >= x.size() + k)
            throw std::invalid_argument("build_history: label out of range");
        previous = delta.times[k];
    }

    const Domain& domain = x.domain();
    const double a = domain.diameter();
    HistoryOutcome out;
    out.terminal.assign(x.particles().begin(), x.particles().end());
    if (!admissible(domain, out.terminal)) {
        out.status = HistoryStatus::Inadmissible;
        return out;
    }
    out.weight = 1.0;
    try {
        double now = t;
        for (std::size_t k = 0; k < m; ++k) {
            evolve_in_place(domain, out.terminal, -(now - delta.times[k]), Limit::FromFuture);
            now = delta.times[k];
            const PhasePoint& carrier = out.terminal[delta.labels[k]];
            const Vec3& omega = delta.directions[k];
            const PhasePoint added{carrier.q + omega * a, delta.momenta[k]};
            const double flux = a * a * dot(omega, added.p - carrier.p);
            out.terminal.push_back(added);
            if (!admissible(domain, out.terminal)) {
                out.weight = 0.0;
                out.status = HistoryStatus::Inadmissible;
                return out;
            }
            out.weight *= flux;
        }
        evolve_in_place(domain, out.terminal, -now, Limit::FromFuture);
    } catch (const DegeneracyError&) {
        out.weight = 0.0;
        out.status = HistoryStatus::Degenerate;
    }
    return out;
}

namespace {

struct Tally {
    Accumulator acc;
    Rejections rejections;

    void merge(const Tally& o)
    {
        acc.merge(o.acc);
        rejections.merge(o.rejections);
    }
};

MonteCarloResult to_result(const Tally& t) { return {to_estimate(t.acc), t.rejections}; }

// Runs `draw(rng)` `samples` times over the worker pool. `draw` returns the
// sample value or throws DegeneracyError to drop the sample; it may bump the
// inadmissible counter through the tally it receives.
template <class Draw>
Tally run_tally(std::uint64_t samples, unsigned workers, std::uint64_t seed, std::uint64_t stream, Draw&& draw)
{
    return run_blocks<Tally>(samples, workers, seed, stream, [&](Tally& tally, Rng& rng, std::uint64_t count) {
        for (std::uint64_t s = 0; s < count; ++s) {
            ++tally.rejections.attempted;
            try {
                const double v = draw(rng, tally.rejections);
                tally.acc.add(v);
            } catch (const DegeneracyError&) {
                ++tally.rejections.degenerate;
            }
        }
    });
}

double falling_factorial(int n, int k)
{
    double f = 1.0;
    for (int i = 0; i < k; ++i)
        f *= n - i;
    return f;
}

} // namespace

double collision_operator_draw(const PhaseFunction& rho, const Domain& domain, std::span<const PhasePoint> x,
    std::size_t j, const Maxwellian& proposal, Rng& rng)
{
    if (j >= x.size())
        throw std::out_of_range("collision_operator: label out of range");
    const Vec3 p = proposal.sample(rng);
    const Vec3 omega = uniform_unit_vector(rng);
    std::vector<PhasePoint> extended(x.begin(), x.end());
    extended.push_back({x[j].q + omega * domain.diameter(), p});
    if (!admissible(domain, extended))
        return 0.0;
    const double a = domain.diameter();
    const double jacobian = 4.0 * std::numbers::pi / proposal.density(p);
    return jacobian * a * a * dot(omega, p - x[j].p) * rho.draw(extended, rng);
}

MonteCarloResult collision_operator(
    const PhaseFunction& rho, const Configuration& x, std::size_t j, const CollisionOperatorParams& params)
{
    if (j >= x.size())
        throw std::out_of_range("collision_operator: label out of range");
    const Maxwellian proposal(params.beta0);
    Rng rng = make_rng(params.seed, {fnv1a("collision-operator")});
    Tally tally;
    if (rho.supports(x.size() + 1)) {
        for (std::uint64_t s = 0; s < params.samples; ++s) {
            ++tally.rejections.attempted;
            try {
                tally.acc.add(collision_operator_draw(rho, x.domain(), x.particles(), j, proposal, rng));
            } catch (const DegeneracyError&) {
                ++tally.rejections.degenerate;
            }
        }
    } else {
        for (std::uint64_t s = 0; s < params.samples; ++s)
            tally.acc.add(0.0);
        tally.rejections.attempted = params.samples;
    }
    return to_result(tally);
}

namespace {

std::vector<std::uint64_t> stratum_sizes(const SeriesParams& params, std::size_t strata)
{
    std::vector<double> share(strata, 0.0);
    const auto& alloc = params.allocation;
    auto fraction = [&](std::size_t i) { return i < alloc.size() ? alloc[i] : 0.0; };
    for (std::size_t m = 0; m < strata; ++m) {
        if (m < 2)
            share[m] = fraction(m);
        else
            share[m] = fraction(2) / static_cast<double>(strata - 2);
    }
    const double total = std::accumulate(share.begin(), share.end(), 0.0);
    if (!(total > 0.0))
        throw std::invalid_argument("series_eval: allocation gives no samples");
    std::vector<std::uint64_t> sizes(strata);
    for (std::size_t m = 0; m < strata; ++m)
        sizes[m] = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::llround(
                                                   static_cast<double>(params.samples) * share[m] / total)));
    return sizes;
}

} // namespace

SeriesResult series_eval(const PhaseFunction& rho0, const Domain& domain, const DeltaBox& delta, double t,
    const SeriesParams& params)
{
    if (!(t > 0.0))
        throw std::invalid_argument("series_eval: t must be positive");
    const std::size_t n = delta.order();
    const std::size_t top = std::min(params.m_max, rho0.max_order() >= n ? rho0.max_order() - n : 0);
    const std::vector<std::uint64_t> sizes = stratum_sizes(params, top + 1);
    const Maxwellian proposal(params.beta0);
    const double volume = delta.volume();

    SeriesResult result;
    for (std::size_t m = 0; m <= top; ++m) {
        if (!rho0.supports(n + m))
            continue;
        double factorial = 1.0;
        double labels = 1.0;
        for (std::size_t k = 1; k <= m; ++k) {
            factorial *= static_cast<double>(k);
            labels *= static_cast<double>(n + k - 1);
        }
        const double simplex = std::pow(t, static_cast<double>(m)) / factorial;

        auto draw = [&](Rng& rng, Rejections& rej) -> double {
            const Configuration x(domain, delta.sample(rng));
            CollisionHistory h;
            std::vector<double> u(m);
            for (auto& v : u)
                v = t * uniform01(rng);
            std::sort(u.begin(), u.end(), std::greater<>());
            h.times = u;
            double weight = volume * simplex * labels;
            for (std::size_t k = 0; k < m; ++k) {
                h.labels.push_back(std::min<std::size_t>(
                    static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n + k)), n + k - 1));
                const Vec3 p = proposal.sample(rng);
                h.momenta.push_back(p);
                h.directions.push_back(uniform_unit_vector(rng));
                weight *= 4.0 * std::numbers::pi / proposal.density(p);
            }
            const HistoryOutcome out = build_history(x, t, h);
            if (out.status == HistoryStatus::Degenerate)
                throw DegeneracyError(DegeneracyKind::SimultaneousEvents, 0.0, "history leg");
            if (out.status == HistoryStatus::Inadmissible) {
                ++rej.inadmissible;
                return 0.0;
            }
            return weight * out.weight * rho0.draw(out.terminal, rng);
        };
        const Tally tally = run_tally(sizes[m], params.workers, params.seed, fnv1a("series") + m, draw);
        StratumResult sr{m, to_estimate(tally.acc), tally.rejections};
        result.total = result.total + sr.estimate;
        result.rejections.merge(sr.rejections);
        result.strata.push_back(sr);
    }
    return result;
}

namespace {

// Number of ordered tuples of distinct particles whose states lie in Delta.
std::uint64_t count_tuples(const Domain& domain, const DeltaBox& delta, std::span<const PhasePoint> xs)
{
    const std::size_t n = delta.order();
    if (xs.size() < n)
        return 0;
    std::vector<std::size_t> pick;
    std::vector<PhasePoint> tuple;
    std::vector<bool> used(xs.size(), false);
    std::uint64_t count = 0;
    std::function<void()> recurse = [&] {
        const std::size_t level = pick.size();
        if (level == n) {
            tuple.clear();
            for (auto i : pick)
                tuple.push_back(xs[i]);
            if (delta.contains(domain, tuple))
                ++count;
            return;
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (used[i] || !delta.factors()[level].contains(xs[i]))
                continue;
            used[i] = true;
            pick.push_back(i);
            recurse();
            pick.pop_back();
            used[i] = false;
        }
    };
    recurse();
    return count;
}

} // namespace

MonteCarloResult empirical_rho(const DensitySpec& spec, const DeltaBox& delta, double t, Limit limit,
    const EstimatorParams& params)
{
    const std::size_t n = delta.order();
    const bool canonical = spec.ensemble == Ensemble::Canonical;
    if (canonical && n > static_cast<std::size_t>(spec.particles))
        throw std::invalid_argument("empirical_rho: n exceeds N");
    const double factor = canonical ? falling_factorial(spec.particles, static_cast<int>(n)) : 1.0;
    auto draw = [&](Rng& rng, Rejections&) -> double {
        const Configuration c = sample(spec, rng);
        std::vector<PhasePoint> xs(c.particles().begin(), c.particles().end());
        if (t != 0.0)
            evolve_in_place(spec.domain, xs, t, limit);
        if (canonical)
            return delta.contains(spec.domain, std::span<const PhasePoint>(xs).first(n)) ? factor : 0.0;
        return static_cast<double>(count_tuples(spec.domain, delta, xs));
    };
    return to_result(run_tally(params.samples, params.workers, params.seed, fnv1a("empirical"), draw));
}

MonteCarloResult pullback_term(const PhaseFunction& rho0, const Domain& domain, const DeltaBox& delta, double t,
    const EstimatorParams& params)
{
    const double volume = delta.volume();
    auto draw = [&](Rng& rng, Rejections& rej) -> double {
        std::vector<PhasePoint> x = delta.sample(rng);
        if (!admissible(domain, x)) {
            ++rej.inadmissible;
            return 0.0;
        }
        evolve_in_place(domain, x, -t, Limit::FromFuture);
        return volume * rho0.draw(x, rng);
    };
    return to_result(run_tally(params.samples, params.workers, params.seed, fnv1a("pullback"), draw));
}

MonteCarloResult collision_term(const PhaseFunction& f, const Domain& domain, const DeltaBox& delta, double t,
    double beta0, const EstimatorParams& params)
{
    if (!(t > 0.0))
        throw std::invalid_argument("collision_term: t must be positive");
    const std::size_t n = delta.order();
    const double volume = delta.volume();
    const Maxwellian proposal(beta0);
    auto draw = [&](Rng& rng, Rejections& rej) -> double {
        std::vector<PhasePoint> x = delta.sample(rng);
        if (!admissible(domain, x)) {
            ++rej.inadmissible;
            return 0.0;
        }
        const double s = t * uniform01(rng);
        const std::size_t j = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1);
        evolve_in_place(domain, x, -(t - s), Limit::FromFuture);
        const EvolvedDensity evolved(f, domain, s);
        const CorrelationMap rho(evolved, domain, beta0);
        return volume * t * static_cast<double>(n) * collision_operator_draw(rho, domain, x, j, proposal, rng);
    };
    return to_result(run_tally(params.samples, params.workers, params.seed, fnv1a("collision-term"), draw));
}

namespace {

struct TallyTriple {
    Accumulator gain, loss, net;
    Rejections rejections;

    void merge(const TallyTriple& o)
    {
        gain.merge(o.gain);
        loss.merge(o.loss);
        net.merge(o.net);
        rejections.merge(o.rejections);
    }
};

} // namespace

CollisionTallies collision_tallies(const DensitySpec& spec, const DeltaBox& delta, double t,
    const EstimatorParams& params)
{
    if (spec.ensemble != Ensemble::Canonical)
        throw std::invalid_argument("collision_tallies: canonical spec required");
    const std::size_t n = delta.order();
    if (n + 1 > static_cast<std::size_t>(spec.particles))
        throw std::invalid_argument("collision_tallies: need N >= n + 1");
    const double factor = falling_factorial(spec.particles, static_cast<int>(n));
    const Domain& domain = spec.domain;

    const TallyTriple merged = run_blocks<TallyTriple>(params.samples, params.workers, params.seed,
        fnv1a("collision-tallies"), [&](TallyTriple& out, Rng& rng, std::uint64_t count) {
            std::vector<PhasePoint> group;
            for (std::uint64_t s = 0; s < count; ++s) {
                ++out.rejections.attempted;
                const Configuration c = sample(spec, rng);
                double gain = 0.0;
                double loss = 0.0;
                try {
                    Simulator sim(domain, {c.particles().begin(), c.particles().end()});
                    sim.run(t, true, [&](const LogEntry& e, std::span<const PhasePoint> now) {
                        const auto* pc = std::get_if<PairCollision>(&e.event.kind);
                        if (!pc || ((pc->i < n) == (pc->j < n)))
                            return;
                        const double remaining = t - e.time;
                        group.assign(now.begin(), now.begin() + static_cast<std::ptrdiff_t>(n));
                        std::vector<PhasePoint> after = group;
                        evolve_in_place(domain, after, remaining, Limit::FromFuture);
                        if (delta.contains(domain, after))
                            gain += factor;
                        if (pc->i < n)
                            group[pc->i].p = e.pre[0];
                        else
                            group[pc->j].p = e.pre[1];
                        evolve_in_place(domain, group, remaining, Limit::FromPast);
                        if (delta.contains(domain, group))
                            loss += factor;
                    });
                } catch (const DegeneracyError&) {
                    ++out.rejections.degenerate;
                    continue;
                }
                out.gain.add(gain);
                out.loss.add(loss);
                out.net.add(gain - loss);
            }
        });
    return {to_estimate(merged.gain), to_estimate(merged.loss), to_estimate(merged.net), merged.rejections};
}

MonteCarloResult expected_collisions(const DensitySpec& spec, double t, const EstimatorParams& params)
{
    auto draw = [&](Rng& rng, Rejections&) -> double {
        const Configuration c = sample(spec, rng);
        Simulator sim(spec.domain, {c.particles().begin(), c.particles().end()});
        std::uint64_t collisions = 0;
        sim.run(t, true, [&](const LogEntry& e, std::span<const PhasePoint>) {
            if (e.event.is_pair())
                ++collisions;
        });
        return static_cast<double>(collisions);
    };
    return to_result(run_tally(params.samples, params.workers, params.seed, fnv1a("collisions"), draw));
}

double momentum_flux_factor(double beta)
{
    // Only the components u_1, u_2 of p_1, p_2 along omega matter; the others
    // integrate to one. In the rotated variables u = (u_1 - u_2)/sqrt2 and
    // v = (u_1 + u_2)/sqrt2 the integrand is smooth on the half plane u >= 0.
    const double sigma = 1.0 / std::sqrt(beta);
    const double reach = 14.0 * sigma;
    const int panels = 2000;
    const double du = reach / panels;
    const double dv = 2.0 * reach / panels;
    auto phi = [&](double x) { return std::exp(-0.5 * beta * x * x) * std::sqrt(beta / (2.0 * std::numbers::pi)); };
    auto simpson = [](int i, int panels_) { return (i == 0 || i == panels_) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    double total = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double u = i * du;
        double inner = 0.0;
        for (int k = 0; k <= panels; ++k) {
            const double v = -reach + k * dv;
            const double u1 = (u + v) / std::numbers::sqrt2;
            const double u2 = (v - u) / std::numbers::sqrt2;
            inner += simpson(k, panels) * phi(u1) * phi(u2);
        }
        total += simpson(i, panels) * std::numbers::sqrt2 * u * inner * dv / 3.0;
    }
    return total * du / 3.0;
}

MonteCarloResult collision_rate_integral(const NormalizedDensity& density, const EstimatorParams& params)
{
    const DensitySpec& spec = density.spec();
    if (!spec.is_equilibrium())
        throw std::invalid_argument("collision_rate_integral: equilibrium spec required");
    if (spec.max_order() < 2)
        throw std::invalid_argument("collision_rate_integral: need at least two particles");
    const Domain& domain = spec.domain;
    const double a = domain.diameter();
    const double volume = domain.inset_volume();
    const Vec3 lo = domain.inset_lower();
    const Vec3 hi = domain.inset_upper();
    const int extra = spec.max_order() - 2;

    // Position part of rho_eq,2 at a contact pair, unnormalized:
    // sum_m c_{2+m}/m! int 1_Gamma(q_1, q_1 + a omega, y_1..y_m) dy.
    auto draw = [&](Rng& rng, Rejections& rej) -> double {
        std::vector<PhasePoint> xs(2);
        xs[0].q = uniform_in_box(lo, hi, rng);
        xs[1].q = xs[0].q + uniform_unit_vector(rng) * a;
        if (!admissible(domain, xs)) {
            ++rej.inadmissible;
            return 0.0;
        }
        double positional = 0.0;
        double weight = volume * 4.0 * std::numbers::pi * a * a;
        double inv_factorial = 1.0;
        for (int m = 0; m <= extra; ++m) {
            if (m > 0) {
                xs.push_back({uniform_in_box(lo, hi, rng), {}});
                weight *= volume;
                inv_factorial /= m;
                if (!admissible(domain, xs))
                    break;
            }
            positional += spec.coefficient(2 + m) * inv_factorial * weight;
        }
        return positional;
    };
    const Tally tally = run_tally(params.samples, params.workers, params.seed, fnv1a("rate-integral"), draw);
    const SignedEstimate position = divided(to_estimate(tally.acc), density.normalization());
    return {scaled(position, momentum_flux_factor(spec.beta)), tally.rejections};
}

double mean_free_time(const NormalizedDensity& density, const EstimatorParams& params)
{
    const MonteCarloResult rate = collision_rate_integral(density, params);
    return static_cast<double>(density.spec().max_order()) / rate.estimate.value;
}

} // namespace bbgky
