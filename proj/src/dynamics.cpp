#include "bbgky/dynamics.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace bbgky {

Vec3 Face::outward_normal() const
{
    Vec3 n{};
    n[axis] = upper ? 1.0 : -1.0;
    return n;
}

const char* to_string(Face f)
{
    static const char* names[3][2] = {{"x-", "x+"}, {"y-", "y+"}, {"z-", "z+"}};
    return names[f.axis][f.upper ? 1 : 0];
}

const char* to_string(DegeneracyKind k)
{
    switch (k) {
    case DegeneracyKind::GrazingContact: return "grazing_contact";
    case DegeneracyKind::SimultaneousEvents: return "simultaneous_events";
    case DegeneracyKind::CornerContact: return "corner_contact";
    }
    return "?";
}

DegeneracyError::DegeneracyError(DegeneracyKind kind, double time, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail)
    , kind_(kind)
    , time_(time)
{
}

std::pair<Vec3, Vec3> pair_collide(const Vec3& p_i, const Vec3& p_j, const Vec3& omega)
{
    const Vec3 transfer = omega * dot(omega, p_i - p_j);
    return {p_i - transfer, p_j + transfer};
}

Vec3 wall_reflect(const Vec3& p, const Vec3& n) { return p - n * (2.0 * dot(n, p)); }

double event_tolerance(const Domain& domain, std::span<const PhasePoint> particles)
{
    double energy = 0.0;
    for (const auto& x : particles)
        energy += norm2(x.p);
    if (energy == 0.0)
        return 0.0;
    return 1e-9 * domain.diameter() / std::sqrt(energy);
}

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

// Smaller root of |dq + tau*dp| = a for an approaching pair, or kNever.
double pair_contact_time(const Vec3& dq, const Vec3& dp, double a)
{
    const double b = dot(dq, dp);
    if (b >= 0.0)
        return kNever;
    const double rel2 = norm2(dp);
    const double c = norm2(dq) - a * a;
    const double disc = b * b - rel2 * c;
    if (disc <= 0.0)
        return kNever;
    // c / (-b + sqrt(disc)) equals (-b - sqrt(disc)) / rel2 without cancellation.
    const double tau = c / (-b + std::sqrt(disc));
    return std::max(tau, 0.0);
}

struct Candidate {
    double time = kNever;
    Event event;
};

std::optional<Event> earliest_event(const Domain& domain, std::span<const PhasePoint> xs, double tolerance)
{
    const double a = domain.diameter();
    const Vec3 lo = domain.inset_lower();
    const Vec3 hi = domain.inset_upper();
    Candidate first;
    Candidate second;

    auto offer = [&](double time, auto&& make) {
        if (time < first.time) {
            second = first;
            first.time = time;
            first.event = make();
        } else if (time < second.time) {
            second.time = time;
            second.event = make();
        }
    };

    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::uint8_t k = 0; k < 3; ++k) {
            const double v = xs[i].p[k];
            if (v == 0.0)
                continue;
            const bool upper = v > 0.0;
            const double target = upper ? hi[k] : lo[k];
            const double time = std::max((target - xs[i].q[k]) / v, 0.0);
            offer(time, [&] {
                const Face face{k, upper};
                return Event{time, WallReflection{i, face, face.outward_normal()}};
            });
        }
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double time = pair_contact_time(xs[i].q - xs[j].q, xs[i].p - xs[j].p, a);
            if (time == kNever)
                continue;
            offer(time, [&] { return Event{time, PairCollision{i, j, {}}}; });
        }
    }

    if (first.time == kNever)
        return std::nullopt;
    if (second.time != kNever && second.time - first.time <= tolerance) {
        const auto* w1 = std::get_if<WallReflection>(&first.event.kind);
        const auto* w2 = std::get_if<WallReflection>(&second.event.kind);
        if (w1 && w2 && w1->i == w2->i)
            throw DegeneracyError(DegeneracyKind::CornerContact, first.time, "particle reaches two walls at once");
        throw DegeneracyError(DegeneracyKind::SimultaneousEvents, first.time, "two events coincide");
    }

    if (auto* pc = std::get_if<PairCollision>(&first.event.kind)) {
        const Vec3 sep = (xs[pc->j].q + xs[pc->j].p * first.time) - (xs[pc->i].q + xs[pc->i].p * first.time);
        pc->omega = sep * (1.0 / norm(sep));
    }
    return first.event;
}

} // namespace

std::optional<Event> next_event(const Configuration& config, Direction direction)
{
    if (direction == Direction::Forward)
        return earliest_event(config.domain(), config.particles(), event_tolerance(config.domain(), config.particles()));
    const Configuration flipped = config.reversed();
    return earliest_event(flipped.domain(), flipped.particles(), event_tolerance(flipped.domain(), flipped.particles()));
}

Simulator::Simulator(const Domain& domain, std::vector<PhasePoint> particles)
    : domain_(domain)
    , particles_(std::move(particles))
    , tolerance_(event_tolerance(domain, particles_))
{
}

void Simulator::reverse_momenta()
{
    for (auto& x : particles_)
        x.p = -x.p;
}

std::optional<Event> Simulator::find_next() const { return earliest_event(domain_, particles_, tolerance_); }

void Simulator::drift(double dt)
{
    for (auto& x : particles_)
        x.q += x.p * dt;
}

LogEntry Simulator::apply(const Event& e)
{
    if (++events_ > budget_)
        throw std::runtime_error("Simulator: event budget exhausted");
    LogEntry entry;
    entry.time = elapsed_;
    entry.event = e;
    if (const auto* pc = std::get_if<PairCollision>(&e.kind)) {
        PhasePoint& xi = particles_[pc->i];
        PhasePoint& xj = particles_[pc->j];
        const Vec3 sep = xj.q - xi.q;
        const Vec3 omega = sep * (1.0 / norm(sep));
        const Vec3 rel = xi.p - xj.p;
        const double normal = dot(omega, rel);
        if (std::abs(normal) <= kGrazingTolerance * norm(rel))
            throw DegeneracyError(DegeneracyKind::GrazingContact, elapsed_, "vanishing normal relative momentum");
        entry.pre = {xi.p, xj.p};
        entry.position = {xi.q, xj.q};
        std::tie(xi.p, xj.p) = pair_collide(xi.p, xj.p, omega);
        entry.post = {xi.p, xj.p};
        entry.event.kind = PairCollision{pc->i, pc->j, omega};
    } else {
        const auto& w = std::get<WallReflection>(e.kind);
        PhasePoint& x = particles_[w.i];
        entry.pre[0] = x.p;
        entry.position[0] = x.q;
        x.p = wall_reflect(x.p, w.normal);
        entry.post[0] = x.p;
    }
    return entry;
}

std::optional<LogEntry> Simulator::step()
{
    const auto next = find_next();
    if (!next)
        return std::nullopt;
    drift(next->time);
    elapsed_ += next->time;
    return apply(*next);
}

namespace {

// Forward traversal realises FromFuture for t > 0; backward traversal of a
// final event corresponds to the opposite physical side.
bool apply_final(double t, Limit limit) { return (t > 0.0) == (limit == Limit::FromFuture); }

} // namespace

Evolution evolve(const Configuration& config, double t, Limit limit, bool record_log)
{
    if (!std::isfinite(t))
        throw std::invalid_argument("evolve: non-finite time");
    Evolution out{config, {}};
    if (t == 0.0)
        return out;
    Simulator sim(config.domain(), {config.particles().begin(), config.particles().end()});
    if (t < 0.0)
        sim.reverse_momenta();
    auto record = [&](const LogEntry& entry, std::span<const PhasePoint>) {
        if (!record_log)
            return;
        LogEntry e = entry;
        if (t < 0.0) {
            for (auto* v : {&e.pre, &e.post})
                for (auto& p : *v)
                    p = -p;
        }
        out.log.push_back(e);
    };
    sim.run(std::abs(t), apply_final(t, limit), record);
    if (t < 0.0)
        sim.reverse_momenta();
    out.config = Configuration(config.domain(), std::move(sim.mutable_particles()));
    return out;
}

void evolve_in_place(const Domain& domain, std::vector<PhasePoint>& particles, double t, Limit limit)
{
    if (t == 0.0)
        return;
    Simulator sim(domain, std::move(particles));
    if (t < 0.0)
        sim.reverse_momenta();
    sim.run(std::abs(t), apply_final(t, limit));
    if (t < 0.0)
        sim.reverse_momenta();
    particles = std::move(sim.mutable_particles());
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log)
{
    out << "time,kind,i,partner";
    for (const char* stage : {"pre", "post"})
        for (const char* who : {"i", "j"})
            for (const char* c : {"x", "y", "z"})
                out << ',' << stage << '_' << who << '_' << c;
    out << '\n';
    const auto precision = out.precision(17);
    for (const auto& e : log) {
        const bool pair = e.event.is_pair();
        out << e.time << ',' << (pair ? "pair" : "wall") << ',';
        if (pair) {
            const auto& pc = std::get<PairCollision>(e.event.kind);
            out << pc.i << ',' << pc.j;
        } else {
            const auto& w = std::get<WallReflection>(e.event.kind);
            out << w.i << ',' << to_string(w.face);
        }
        for (const auto* v : {&e.pre, &e.post}) {
            for (int slot = 0; slot < 2; ++slot) {
                for (std::size_t k = 0; k < 3; ++k) {
                    out << ',';
                    if (pair || slot == 0)
                        out << (*v)[slot][k];
                }
            }
        }
        out << '\n';
    }
    out.precision(precision);
}

} // namespace bbgky
