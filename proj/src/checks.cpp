// The registered checks. Each returns one report per case.

#include "bbgky/correlations.hpp"
#include "bbgky/dynamics.hpp"
#include "bbgky/harness.hpp"
#include "bbgky/hierarchy.hpp"
#include "bbgky/specialflow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace bbgky {

namespace {

class Context {
public:
    Context(const ExperimentConfig& cfg, std::string check)
        : cfg_(cfg)
        , check_(std::move(check))
        , settings_(cfg.check_settings(check_))
        , seed_(check_seed(cfg.seed, check_))
        , hash_(cfg.hash())
    {
    }

    const ExperimentConfig& cfg() const { return cfg_; }
    const Json& settings() const { return settings_; }

    std::uint64_t seed(const std::string& label) const { return mix64(seed_ ^ fnv1a(label)); }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) const
    {
        return static_cast<std::uint64_t>(get_integer(settings_, key, static_cast<std::int64_t>(fallback)));
    }
    double number(const std::string& key, double fallback) const { return get_number(settings_, key, fallback); }

    std::vector<int> integers(const std::string& key, std::vector<int> fallback) const
    {
        if (!settings_.contains(key))
            return fallback;
        const Json& v = settings_.at(key);
        if (!v.is_array())
            throw ConfigError("check." + check_ + "." + key + " must be a list of integers");
        std::vector<int> out;
        for (const auto& e : v) {
            if (!e.is_number_integer())
                throw ConfigError("check." + check_ + "." + key + " must be a list of integers");
            out.push_back(e.get<int>());
        }
        return out;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const
    {
        if (!settings_.contains(key))
            return fallback;
        const Json& v = settings_.at(key);
        if (!v.is_array() || v.empty())
            throw ConfigError("check." + check_ + "." + key + " must be a list of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number())
                throw ConfigError("check." + check_ + "." + key + " must be a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::string> box_names(std::vector<std::string> fallback) const
    {
        if (!settings_.contains("boxes"))
            return fallback;
        std::vector<std::string> out;
        for (const auto& e : settings_.at("boxes")) {
            if (!e.is_string())
                throw ConfigError("check." + check_ + ".boxes must be a list of box names");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    CheckReport report(const std::string& case_id, std::uint64_t seed) const
    {
        CheckReport r;
        r.id = check_ + "/" + case_id;
        r.check = check_;
        r.k_sigma = cfg_.k_sigma;
        r.degenerate_ceiling = cfg_.degenerate_ceiling;
        r.seed = seed;
        r.config_hash = hash_;
        return r;
    }

    CheckReport deterministic(const std::string& case_id, double lhs, double rhs, double tolerance) const
    {
        CheckReport r = report(case_id, seed_);
        r.deterministic = true;
        r.lhs = lhs;
        r.rhs = rhs;
        r.tolerance = tolerance;
        finalize(r);
        return r;
    }

    EstimatorParams estimator(const std::string& label, std::uint64_t samples) const
    {
        return {samples, cfg_.workers, seed(label)};
    }

private:
    const ExperimentConfig& cfg_;
    std::string check_;
    const Json& settings_;
    std::uint64_t seed_;
    std::string hash_;
};

std::string format_number(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

void set_sides(CheckReport& r, const SignedEstimate& lhs, const SignedEstimate& rhs)
{
    r.lhs = lhs.value;
    r.lhs_err = lhs.std_error;
    r.rhs = rhs.value;
    r.rhs_err = rhs.std_error;
    r.samples = lhs.samples + rhs.samples;
}

Json estimate_json(const SignedEstimate& e)
{
    return {{"value", e.value}, {"stderr", e.std_error}, {"samples", e.samples}, {"positive", e.positive},
        {"negative", e.negative}};
}

DensitySpec with_particles(DensitySpec spec, int n)
{
    spec.particles = n;
    spec.validate();
    return spec;
}

DensitySpec equilibrium_of(DensitySpec spec)
{
    spec.weight = SpatialWeight::uniform();
    return spec;
}

DeltaBox single_box(const ExperimentConfig& cfg, const std::string& name) { return DeltaBox({cfg.box(name)}); }

// Explicit t, or t_mft mean free times of the equilibrium version of `spec`.
double resolve_time(const Context& ctx, const DensitySpec& spec, Json& details)
{
    if (ctx.settings().contains("t")) {
        const double t = ctx.number("t", 1.0);
        details["t"] = t;
        return t;
    }
    const double multiple = ctx.number("t_mft", 1.0);
    const NormalizedDensity eq(equilibrium_of(spec));
    const MonteCarloResult rate = collision_rate_integral(eq, ctx.estimator("mft", ctx.count("rate_samples", 200'000)));
    const double mft = static_cast<double>(spec.max_order()) / rate.estimate.value;
    details["mean_free_time"] = mft;
    details["t"] = multiple * mft;
    return multiple * mft;
}

double max_rate(std::initializer_list<double> rates) { return *std::max_element(rates.begin(), rates.end()); }

// ---------------------------------------------------------------------------

std::vector<CheckReport> conservation(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "conservation");
    const std::uint64_t collisions = ctx.count("collisions", 1'000'000);
    const double tol = ctx.number("tolerance", 1e-12);
    Rng rng = make_rng(ctx.seed("laws"), {});
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gaussian = [&] {
        const double x = normal(rng);
        const double y = normal(rng);
        const double z = normal(rng);
        return Vec3{x, y, z};
    };

    double momentum = 0, energy = 0, involution = 0, flip = 0;
    for (std::uint64_t s = 0; s < collisions; ++s) {
        const Vec3 pi = gaussian();
        const Vec3 pj = gaussian();
        const Vec3 omega = uniform_unit_vector(rng);
        const auto [qi, qj] = pair_collide(pi, pj, omega);
        const double scale = norm(pi) + norm(pj);
        const double e0 = norm2(pi) + norm2(pj);
        momentum = std::max(momentum, norm((qi + qj) - (pi + pj)) / scale);
        energy = std::max(energy, std::abs(norm2(qi) + norm2(qj) - e0) / e0);
        const auto [ri, rj] = pair_collide(qi, qj, omega);
        involution = std::max(involution, std::max(norm(ri - pi), norm(rj - pj)) / scale);
        flip = std::max(flip, std::abs(dot(omega, qi - qj) + dot(omega, pi - pj)) / norm(pi - pj));
    }

    double speed = 0, reflect_twice = 0;
    for (std::uint64_t s = 0; s < collisions; ++s) {
        const Vec3 p = gaussian();
        Vec3 n{};
        n[s % 3] = (s / 3) % 2 ? 1.0 : -1.0;
        const Vec3 r = wall_reflect(p, n);
        speed = std::max(speed, std::abs(norm(r) - norm(p)) / norm(p));
        reflect_twice = std::max(reflect_twice, norm(wall_reflect(r, n) - p) / norm(p));
    }

    // Per-event energy drift along simulated trajectories.
    const std::uint64_t trajectories = ctx.count("trajectories", 200);
    const std::uint64_t events = ctx.count("events", 100);
    const DensitySpec spec = equilibrium_of(with_particles(cfg.density, static_cast<int>(ctx.count("particles", 5))));
    double drift = 0;
    std::uint64_t logged = 0;
    Rng trng = make_rng(ctx.seed("trajectories"), {});
    for (std::uint64_t s = 0; s < trajectories; ++s) {
        const Configuration c = sample(spec, trng);
        Simulator sim(spec.domain, {c.particles().begin(), c.particles().end()});
        auto total_energy = [&] {
            double e = 0;
            for (const auto& x : sim.particles())
                e += norm2(x.p);
            return e;
        };
        double before = total_energy();
        try {
            for (std::uint64_t k = 0; k < events; ++k) {
                if (!sim.step())
                    break;
                const double after = total_energy();
                drift = std::max(drift, std::abs(after - before) / before);
                before = after;
                ++logged;
            }
        } catch (const DegeneracyError&) {
        }
    }

    std::vector<CheckReport> out;
    out.push_back(ctx.deterministic("pair_momentum", momentum, 0.0, tol));
    out.push_back(ctx.deterministic("pair_energy", energy, 0.0, tol));
    out.push_back(ctx.deterministic("pair_involution", involution, 0.0, tol));
    out.push_back(ctx.deterministic("pair_normal_flip", flip, 0.0, tol));
    out.push_back(ctx.deterministic("wall_speed", speed, 0.0, tol));
    out.push_back(ctx.deterministic("wall_involution", reflect_twice, 0.0, tol));
    out.push_back(ctx.deterministic("trajectory_energy", drift, 0.0, tol));
    for (std::size_t i = 0; i + 1 < out.size(); ++i)
        out[i].samples = collisions;
    out.back().samples = logged;
    return out;
}

std::vector<CheckReport> reversibility(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "reversibility");
    const std::uint64_t trajectories = ctx.count("trajectories", 1000);
    const std::uint64_t events = ctx.count("events", 20);
    const int particles = static_cast<int>(ctx.count("particles", 5));
    const double tol = ctx.number("tolerance", 1e-8);
    const DensitySpec spec = equilibrium_of(with_particles(cfg.density, particles));
    const Domain& domain = spec.domain;
    Rng rng = make_rng(ctx.seed("trajectories"), {});

    double worst = 0.0;
    std::uint64_t accepted = 0, close_events = 0, degenerate = 0, attempts = 0, total_events = 0;
    while (accepted < trajectories && attempts < 20 * trajectories) {
        ++attempts;
        const Configuration x = sample(spec, rng);
        try {
            Simulator probe(domain, {x.particles().begin(), x.particles().end()});
            std::vector<double> times{0.0};
            for (std::uint64_t k = 0; k <= events; ++k) {
                if (!probe.step())
                    break;
                times.push_back(probe.elapsed());
            }
            if (times.size() < events + 2)
                continue;
            const double eps = event_tolerance(domain, x.particles());
            double min_gap = INFINITY;
            for (std::size_t k = 2; k < times.size(); ++k)
                min_gap = std::min(min_gap, times[k] - times[k - 1]);
            if (!(min_gap > 10.0 * eps)) {
                ++close_events;
                continue;
            }
            const double t = 0.5 * (times[events] + times[events + 1]);
            const Evolution forward = evolve(x, t, Limit::FromFuture);
            const Evolution back = evolve(forward.config.reversed(), t, Limit::FromFuture);
            const Configuration returned = back.config.reversed();
            double speed2 = 0.0;
            for (const auto& p : x.particles())
                speed2 += norm2(p.p);
            const double speed = std::sqrt(speed2);
            const double length = std::max({domain.side(0), domain.side(1), domain.side(2)});
            for (std::size_t i = 0; i < x.size(); ++i) {
                worst = std::max(worst, norm(returned[i].q - x[i].q) / length);
                worst = std::max(worst, norm(returned[i].p - x[i].p) / speed);
            }
            total_events += forward.log.size();
            ++accepted;
        } catch (const DegeneracyError&) {
            ++degenerate;
        }
    }
    CheckReport r = ctx.deterministic("round_trip", worst, 0.0, tol);
    r.samples = accepted;
    r.degenerate_rate = attempts ? static_cast<double>(degenerate) / static_cast<double>(attempts) : 0.0;
    r.details = {{"particles", particles}, {"trajectories", accepted}, {"skipped_close_events", close_events},
        {"mean_events", accepted ? static_cast<double>(total_events) / static_cast<double>(accepted) : 0.0}};
    if (accepted < trajectories)
        r.pass = false;
    return {r};
}

std::vector<CheckReport> liouville(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "liouville");
    const DensitySpec spec = equilibrium_of(cfg.density);
    const std::uint64_t samples = ctx.count("samples", 200'000);
    Json base;
    const double unit = resolve_time(ctx, spec, base);
    const std::vector<double> multiples = ctx.numbers("times", {0.5, 1.0, 2.0});
    std::vector<CheckReport> out;
    for (const auto& name : ctx.box_names({"bulk"})) {
        const DeltaBox delta = single_box(cfg, name);
        const MonteCarloResult at_zero = empirical_rho(spec, delta, 0.0, Limit::FromFuture, ctx.estimator(name + "/0", samples));
        for (double multiple : multiples) {
            const double t = multiple * unit;
            const std::string label = name + "/t=" + format_number(multiple);
            const MonteCarloResult later = empirical_rho(spec, delta, t, Limit::FromFuture, ctx.estimator(label, samples));
            CheckReport r = ctx.report(label, ctx.seed(label));
            set_sides(r, later.estimate, at_zero.estimate);
            r.degenerate_rate = later.rejections.degenerate_rate();
            r.details = base;
            r.details["t"] = t;
            finalize(r);
            out.push_back(r);
        }
    }
    return out;
}

// The quadrature error is bounded by C K^-p, so convergence at least as fast
// as the expected order passes. Kinks landing near grid points can make it faster.
CheckReport order_case(const Context& ctx, const std::string& id, const RefinementStudy& study, double expected)
{
    const double slack = ctx.number("order_tolerance", 0.5);
    CheckReport r = ctx.deterministic(id, study.fitted_order, expected, slack);
    r.pass = std::isfinite(study.fitted_order) && study.fitted_order >= expected - slack;
    r.z = std::max(0.0, expected - study.fitted_order) / slack;
    r.details = {{"cells", study.cells}, {"errors", study.errors}, {"orders", study.orders},
        {"rule", "fitted order >= expected - order_tolerance"}};
    return r;
}

std::vector<CheckReport> special_flow(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "special_flow");
    const double exact_tol = ctx.number("tolerance", 1e-10);
    const std::size_t cells = ctx.count("cells", 1 << 12);
    std::vector<CheckReport> out;

    const SpecialFlow atom = SpecialFlow::atoms({1.0}, {0}, {1.0});
    out.push_back(ctx.deterministic("atom", collision_count_sum(atom, 2.5), 2.5, exact_tol));

    const SpecialFlow perm = SpecialFlow::atoms({1, 1, 1, 1, 1}, {1, 2, 3, 4, 0}, {0.3, 0.7, 1.1, 0.45, 0.9});
    const double tp = ctx.number("t_permutation", 3.7);
    out.push_back(ctx.deterministic("permutation", collision_count_sum(perm, tp), tp * perm.base_measure(), exact_tol));
    out.push_back(ctx.deterministic("permutation_additivity",
        collision_count_sum(perm, 1.3) + collision_count_sum(perm, tp - 1.3), collision_count_sum(perm, tp), exact_tol));
    {
        const auto masses = partition_masses(perm, tp);
        double sum = 0;
        for (double m : masses)
            sum += m;
        out.push_back(ctx.deterministic("permutation_partition", sum, perm.base_measure(), exact_tol));
    }

    const double tr = ctx.number("t_rotation", 5.3);
    const SpecialFlow rot = SpecialFlow::rotation((std::sqrt(5.0) - 1.0) / 2.0, 1.0, 0.4, 3, 1.0);
    {
        const FlowIdentityReport rep = verify_identity(rot, tr, cells);
        CheckReport r = ctx.deterministic("rotation", rep.lhs, rep.rhs, rep.error_bound);
        r.samples = cells;
        r.details = {{"coarse", rep.coarse}, {"error_bound", rep.error_bound}};
        out.push_back(r);
    }
    {
        const RefinementStudy study = refinement_study(rot, tr, ctx.count("coarsest", 64), 7);
        out.push_back(order_case(ctx, "rotation_order", study, 2.0));
    }
    {
        const auto masses = partition_masses(rot, tr, cells);
        double sum = 0;
        for (double m : masses)
            sum += m;
        out.push_back(ctx.deterministic("rotation_partition", sum, rot.base_measure(), 1e-12));
        out.push_back(ctx.deterministic("rotation_invariance", rot.measure_defect(cells), 0.0, 2.0 / static_cast<double>(cells)));
    }

    const SpecialFlow ex = SpecialFlow::exchange({0.2, 0.5, 0.3}, {2, 0, 1}, 1.0, 0.4, 3, 1.0);
    {
        const FlowIdentityReport rep = verify_identity(ex, tr, cells);
        CheckReport r = ctx.deterministic("exchange", rep.lhs, rep.rhs, rep.error_bound);
        r.samples = cells;
        r.details = {{"coarse", rep.coarse}, {"error_bound", rep.error_bound}};
        out.push_back(r);
        const RefinementStudy study = refinement_study(ex, tr, ctx.count("coarsest", 64), 7);
        out.push_back(order_case(ctx, "exchange_order", study, 1.0));
    }
    return out;
}

std::vector<CheckReport> lemma2_rate(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "lemma2_rate");
    const std::uint64_t samples = ctx.count("samples", 100'000);
    const std::uint64_t rate_samples = ctx.count("rate_samples", 1'000'000);
    std::vector<CheckReport> out;
    for (int n : ctx.integers("particles", {2, 3})) {
        const DensitySpec spec = equilibrium_of(with_particles(cfg.density, n));
        const NormalizedDensity eq(spec);
        const std::string label = "N" + std::to_string(n);
        const MonteCarloResult rate = collision_rate_integral(eq, ctx.estimator(label + "/rate", rate_samples));
        const double mft = static_cast<double>(n) / rate.estimate.value;
        const double t = ctx.settings().contains("t") ? ctx.number("t", 1.0) : ctx.number("t_mft", 1.0) * mft;
        const MonteCarloResult count = expected_collisions(spec, t, ctx.estimator(label + "/count", samples));
        CheckReport r = ctx.report(label, ctx.seed(label));
        set_sides(r, count.estimate, scaled(rate.estimate, t));
        r.degenerate_rate = count.rejections.degenerate_rate();
        r.details = {{"t", t}, {"trajectories", count.estimate.samples}, {"rate_integral", estimate_json(rate.estimate)},
            {"mean_free_time", mft},
            {"rhs_over_lhs", r.rhs / r.lhs}, {"momentum_factor", momentum_flux_factor(spec.beta)}};
        finalize(r);
        out.push_back(r);
    }
    return out;
}

std::vector<CheckReport> prop1_decomposition(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "prop1_decomposition");
    const DensitySpec spec = with_particles(cfg.density, static_cast<int>(ctx.count("particles", 2)));
    const std::uint64_t samples = ctx.count("samples", 400'000);
    const std::uint64_t rhs_samples = ctx.count("rhs_samples", samples);
    const NormalizedDensity density(spec);
    const SpecCorrelations rho0(density);
    Json base;
    const double t = resolve_time(ctx, spec, base);
    std::vector<CheckReport> out;
    for (const auto& name : ctx.box_names({"bulk", "near_wall", "high_momentum"})) {
        const DeltaBox delta = single_box(cfg, name);
        const MonteCarloResult lhs = empirical_rho(spec, delta, t, Limit::FromFuture, ctx.estimator(name + "/lhs", samples));
        const MonteCarloResult pull = pullback_term(rho0, spec.domain, delta, t, ctx.estimator(name + "/pullback", rhs_samples));
        const SignedEstimate first = divided(pull.estimate, density.normalization());
        const CollisionTallies tallies = collision_tallies(spec, delta, t, ctx.estimator(name + "/tallies", rhs_samples));
        CheckReport r = ctx.report(name, ctx.seed(name));
        set_sides(r, lhs.estimate, first + tallies.net);
        r.samples = lhs.estimate.samples + first.samples + tallies.net.samples;
        r.degenerate_rate = max_rate({lhs.rejections.degenerate_rate(), pull.rejections.degenerate_rate(),
            tallies.rejections.degenerate_rate()});
        r.details = base;
        r.details["pullback"] = estimate_json(first);
        r.details["gain"] = estimate_json(tallies.gain);
        r.details["loss"] = estimate_json(tallies.loss);
        finalize(r);
        out.push_back(r);
    }
    return out;
}

std::vector<CheckReport> prop5_onestep(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "prop5_onestep");
    const DensitySpec spec = with_particles(cfg.density, static_cast<int>(ctx.count("particles", 2)));
    const std::uint64_t samples = ctx.count("samples", 400'000);
    const std::uint64_t rhs_samples = ctx.count("rhs_samples", samples);
    const NormalizedDensity density(spec);
    const SpecCorrelations rho0(density);
    const SpecDensity f(density);
    Json base;
    const double t = resolve_time(ctx, spec, base);
    std::vector<CheckReport> out;
    for (const auto& name : ctx.box_names({"bulk", "near_wall", "high_momentum"})) {
        const DeltaBox delta = single_box(cfg, name);
        const MonteCarloResult lhs = empirical_rho(spec, delta, t, Limit::FromFuture, ctx.estimator(name + "/lhs", samples));
        const MonteCarloResult pull = pullback_term(rho0, spec.domain, delta, t, ctx.estimator(name + "/pullback", rhs_samples));
        const MonteCarloResult coll = collision_term(f, spec.domain, delta, t, ctx.number("beta0", spec.beta),
            ctx.estimator(name + "/collision", rhs_samples));
        const SignedEstimate rhs = divided(pull.estimate + coll.estimate, density.normalization());
        CheckReport r = ctx.report(name, ctx.seed(name));
        set_sides(r, lhs.estimate, rhs);
        r.degenerate_rate = max_rate({lhs.rejections.degenerate_rate(), pull.rejections.degenerate_rate(),
            coll.rejections.degenerate_rate()});
        r.details = base;
        r.details["pullback"] = estimate_json(divided(pull.estimate, density.normalization()));
        r.details["collision"] = estimate_json(divided(coll.estimate, density.normalization()));
        finalize(r);
        out.push_back(r);
    }
    return out;
}

CheckReport series_case(const Context& ctx, const std::string& label, const DensitySpec& spec,
    const NormalizedDensity& density, const DeltaBox& delta, double t, std::uint64_t samples,
    std::uint64_t series_samples, Json details)
{
    const SpecCorrelations rho0(density);
    const MonteCarloResult lhs = empirical_rho(spec, delta, t, Limit::FromFuture, ctx.estimator(label + "/lhs", samples));
    SeriesParams params;
    params.samples = series_samples;
    params.m_max = static_cast<std::size_t>(ctx.count("m_max", 8));
    params.allocation = ctx.numbers("allocation", params.allocation);
    params.beta0 = ctx.number("beta0", spec.beta);
    params.workers = ctx.cfg().workers;
    params.seed = ctx.seed(label + "/series");
    const SeriesResult series = series_eval(rho0, spec.domain, delta, t, params);
    const SignedEstimate rhs = divided(series.total, density.normalization());
    CheckReport r = ctx.report(label, ctx.seed(label));
    set_sides(r, lhs.estimate, rhs);
    r.degenerate_rate = max_rate({lhs.rejections.degenerate_rate(), series.rejections.degenerate_rate()});
    Json strata = Json::array();
    for (const auto& s : series.strata) {
        Json j = estimate_json(divided(s.estimate, density.normalization()));
        j["m"] = s.m;
        j["inadmissible"] = s.rejections.inadmissible;
        j["degenerate"] = s.rejections.degenerate;
        strata.push_back(j);
    }
    details["strata"] = strata;
    details["normalization"] = estimate_json(density.normalization());
    r.details = details;
    finalize(r);
    return r;
}

std::vector<CheckReport> series_identity(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "series_identity");
    const std::uint64_t samples = ctx.count("samples", 400'000);
    const std::uint64_t series_samples = ctx.count("series_samples", 1'000'000);
    std::vector<CheckReport> out;
    for (int n : ctx.integers("particles", {2, 3})) {
        const DensitySpec spec = with_particles(cfg.density, n);
        const NormalizedDensity density(spec);
        Json base;
        const double t = resolve_time(ctx, spec, base);
        for (const auto& name : ctx.box_names({"bulk", "near_wall", "high_momentum"})) {
            const std::string label = "N" + std::to_string(n) + "/" + name;
            out.push_back(series_case(ctx, label, spec, density, single_box(cfg, name), t, samples, series_samples, base));
        }
    }
    return out;
}

DensitySpec micro_spec(const Context& ctx)
{
    if (!ctx.settings().contains("density"))
        throw ConfigError("check settings need a [density] block for the grand-canonical micro-domain");
    DensitySpec spec = density_spec_from_json(ctx.settings().at("density"));
    if (spec.ensemble != Ensemble::GrandCanonical)
        throw ConfigError("the micro-domain density must be grand_canonical");
    return spec;
}

std::vector<CheckReport> grand_canonical_identity(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "grand_canonical_identity");
    const DensitySpec spec = micro_spec(ctx);
    const NormalizedDensity density(spec);
    const std::uint64_t samples = ctx.count("samples", 400'000);
    const std::uint64_t series_samples = ctx.count("series_samples", 1'000'000);
    const double t = ctx.number("t", 1.0);
    std::vector<CheckReport> out;
    for (const auto& name : ctx.box_names({"micro"})) {
        Json details = {{"t", t}, {"n_max", spec.max_particles}, {"z", spec.fugacity}};
        out.push_back(series_case(ctx, name, spec, density, single_box(cfg, name), t, samples, series_samples, details));
    }
    return out;
}

std::vector<CheckReport> map_roundtrip(const ExperimentConfig& cfg)
{
    const Context ctx(cfg, "map_roundtrip");
    const DensitySpec spec = micro_spec(ctx);
    const NormalizedDensity density(spec);
    const std::uint64_t samples = ctx.count("samples", 200'000);
    const SpecDensity f(density);
    const CorrelationMap rho = correlation_map(f, spec.domain, spec.beta);
    const InverseCorrelationMap back = inverse_correlation_map(rho, spec.domain, spec.beta);
    const SpecCorrelations closed(density);

    // Test points of every order up to n_max, inside the inset box.
    const Vec3 lo = spec.domain.inset_lower();
    const Vec3 hi = spec.domain.inset_upper();
    const Vec3 mid = (lo + hi) * 0.5;
    const double a = spec.domain.diameter();
    std::vector<std::vector<PhasePoint>> points;
    points.push_back({});
    points.push_back({{mid, {0.3, -0.2, 0.1}}});
    const double reach = std::min({hi.x - mid.x, hi.y - mid.y, hi.z - mid.z});
    const Vec3 offset = Vec3{1.0, 1.0, 1.0} * (std::min(reach, 0.6 * a) / std::sqrt(3.0));
    points.push_back({{mid - offset, {0.3, -0.2, 0.1}}, {mid + offset, {-0.4, 0.5, 0.2}}});
    if (!admissible(spec.domain, points.back()))
        points.pop_back();
    if (static_cast<int>(points.size()) > spec.max_particles + 1)
        points.resize(static_cast<std::size_t>(spec.max_particles) + 1);

    std::vector<CheckReport> out;
    Rng rng = make_rng(ctx.seed("points"), {});
    for (const auto& x : points) {
        const std::string order = "n" + std::to_string(x.size());
        const SignedEstimate recovered = estimate_at(back, x, samples, rng);
        CheckReport r = ctx.report("inverse_" + order, ctx.seed(order));
        set_sides(r, recovered, {density.unnormalized(x), 0.0, 0, 0, 0});
        finalize(r);
        out.push_back(r);

        const SignedEstimate generic = estimate_at(rho, x, samples, rng);
        const SignedEstimate direct = estimate_at(closed, x, samples, rng);
        CheckReport c = ctx.report("forward_" + order, ctx.seed(order + "/forward"));
        set_sides(c, generic, direct);
        finalize(c);
        out.push_back(c);
    }
    // rho_0 is the total mass Z of the unnormalized density.
    const SignedEstimate mass = estimate_at(rho, {}, samples, rng);
    CheckReport m = ctx.report("total_mass", ctx.seed("total_mass"));
    set_sides(m, mass, density.normalization());
    finalize(m);
    out.push_back(m);
    return out;
}

} // namespace

std::vector<CheckReport> run_check(const std::string& check, const ExperimentConfig& cfg)
{
    static const std::map<std::string, std::function<std::vector<CheckReport>(const ExperimentConfig&)>> registry{
        {"conservation", conservation}, {"reversibility", reversibility}, {"liouville", liouville},
        {"special_flow", special_flow}, {"lemma2_rate", lemma2_rate}, {"prop1_decomposition", prop1_decomposition},
        {"prop5_onestep", prop5_onestep}, {"series_identity", series_identity},
        {"grand_canonical_identity", grand_canonical_identity}, {"map_roundtrip", map_roundtrip}};
    const auto it = registry.find(check);
    if (it == registry.end())
        throw ConfigError("unknown check '" + check + "'");
    return it->second(cfg);
}

} // namespace bbgky
