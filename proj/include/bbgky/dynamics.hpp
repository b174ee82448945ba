// Event-driven hard-sphere flow with specular walls.
//
// Between events particles move freely. Pair contacts apply the elastic
// collision law, wall contacts the specular reflection. The flow is defined
// for signed times; backward evolution is V o T_|t| o V with V the momentum
// reversal. At an event instant the one-sided limits differ; Limit selects
// which set of momenta is returned.

#pragma once

#include "bbgky/core.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bbgky {

enum class Direction { Forward, Backward };

/// FromFuture is T_{t+} (post-collision momenta in physical time),
/// FromPast is T_{t-} (pre-collision momenta).
enum class Limit { FromFuture, FromPast };

struct Face {
    std::uint8_t axis = 0;
    bool upper = false;

    Vec3 outward_normal() const;
    friend bool operator==(const Face&, const Face&) = default;
};

const char* to_string(Face f);

struct PairCollision {
    std::size_t i = 0;
    std::size_t j = 0;
    Vec3 omega; ///< unit vector from q_i to q_j at contact
};

struct WallReflection {
    std::size_t i = 0;
    Face face;
    Vec3 normal;
};

struct Event {
    double time = 0.0; ///< time to the event from the configuration it was computed for
    std::variant<PairCollision, WallReflection> kind;

    bool is_pair() const { return std::holds_alternative<PairCollision>(kind); }
};

struct LogEntry {
    double time = 0.0; ///< elapsed time since the start of the run (in the direction of integration)
    Event event;
    std::array<Vec3, 2> pre{}; ///< momenta of the involved particles before the event; slot 1 unused for walls
    std::array<Vec3, 2> post{};
    std::array<Vec3, 2> position{};
};

using TrajectoryLog = std::vector<LogEntry>;

enum class DegeneracyKind { GrazingContact, SimultaneousEvents, CornerContact };

const char* to_string(DegeneracyKind k);

class DegeneracyError : public std::runtime_error {
public:
    DegeneracyError(DegeneracyKind kind, double time, const std::string& detail);

    DegeneracyKind kind() const { return kind_; }
    double time() const { return time_; }

private:
    DegeneracyKind kind_;
    double time_;
};

/// Elastic pair collision; returns (p_i', p_j').
std::pair<Vec3, Vec3> pair_collide(const Vec3& p_i, const Vec3& p_j, const Vec3& omega);

/// Specular reflection at a wall with outward normal n.
Vec3 wall_reflect(const Vec3& p, const Vec3& n);

/// Event coincidence tolerance 1e-9 * a / speed scale, with the speed scale
/// sqrt(sum |p_i|^2) (conserved along a trajectory). Zero when nothing moves.
double event_tolerance(const Domain& domain, std::span<const PhasePoint> particles);

/// Earliest event in the given direction of integration, or nothing when all
/// particles are at rest. Times are nonnegative. Throws DegeneracyError when
/// the two earliest candidates coincide within the event tolerance.
std::optional<Event> next_event(const Configuration& config, Direction direction);

/// Forward event-driven integrator over a mutable particle state.
class Simulator {
public:
    static constexpr std::uint64_t kDefaultEventBudget = 1'000'000;

    Simulator(const Domain& domain, std::vector<PhasePoint> particles);

    const Domain& domain() const { return domain_; }
    std::span<const PhasePoint> particles() const { return particles_; }
    std::vector<PhasePoint>& mutable_particles() { return particles_; }
    double elapsed() const { return elapsed_; }
    std::uint64_t events() const { return events_; }

    void reverse_momenta();

    /// Runs forward for `duration`. When an event falls on the final instant
    /// it is applied iff `apply_final_event`. The observer is called after
    /// every applied event with the log entry and the post-event state.
    template <class Observer>
    void run(double duration, bool apply_final_event, Observer&& observer);

    void run(double duration, bool apply_final_event)
    {
        run(duration, apply_final_event, [](const LogEntry&, std::span<const PhasePoint>) {});
    }

    /// Applies events one at a time; returns the entry of the applied event or
    /// nothing if no event exists.
    std::optional<LogEntry> step();

    void set_event_budget(std::uint64_t budget) { budget_ = budget; }

private:
    std::optional<Event> find_next() const;
    void drift(double dt);
    LogEntry apply(const Event& e);

    Domain domain_;
    std::vector<PhasePoint> particles_;
    double tolerance_;
    double elapsed_ = 0.0;
    std::uint64_t events_ = 0;
    std::uint64_t budget_ = kDefaultEventBudget;
};

struct Evolution {
    Configuration config;
    TrajectoryLog log;
};

/// T_{t+-}^{(n)}(config) for signed t. The log is in the order events are
/// traversed; for t < 0 its times are elapsed backward times.
Evolution evolve(const Configuration& config, double t, Limit limit, bool record_log = true);

/// In-place variant without logging, for hot loops.
void evolve_in_place(const Domain& domain, std::vector<PhasePoint>& particles, double t, Limit limit);

/// CSV dump: time,kind,i,partner,pre_i_x..post_j_z (one record per event).
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);

// ---------------------------------------------------------------------------

template <class Observer>
void Simulator::run(double duration, bool apply_final_event, Observer&& observer)
{
    if (duration < 0.0)
        throw std::invalid_argument("Simulator::run: negative duration");
    if (duration == 0.0)
        return;
    double remaining = duration;
    for (;;) {
        const auto next = find_next();
        if (!next || next->time > remaining + tolerance_) {
            drift(remaining);
            elapsed_ += remaining;
            return;
        }
        if (next->time >= remaining - tolerance_) {
            drift(remaining);
            elapsed_ += remaining;
            if (apply_final_event) {
                Event at_end = *next;
                at_end.time = 0.0;
                const LogEntry entry = apply(at_end);
                observer(entry, std::span<const PhasePoint>(particles_));
            }
            return;
        }
        drift(next->time);
        elapsed_ += next->time;
        remaining -= next->time;
        const LogEntry entry = apply(*next);
        observer(entry, std::span<const PhasePoint>(particles_));
    }
}

} // namespace bbgky
