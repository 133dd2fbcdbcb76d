#pragma once

// Method of steps: the trajectory is extended window by window. Each window is
// the fixed point of the map "RK4-propagate the system with delayed lookups
// served by the previous iterate", found by Picard iteration from a
// constant-velocity seed.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "feynbody/dynamics.hpp"
#include "feynbody/trajectory.hpp"
#include "feynbody/units.hpp"

namespace feynbody {

class WorkerPool;

struct RunConfig {
    double window = 2.0;       ///< Picard window length
    double inner_step = 0.01;  ///< RK4 step
    double picard_tol = 1e-12;
    int picard_max_iter = 50;
    double t_end = 10.0;
    double det_floor = 1e-8;
    double r_min = 0.0;   ///< <= 0: 1e-9 l_ref
    double v_cap = 0.999; ///< echoed; the history carries the cap in force
    double tol_lc = 0.0;  ///< <= 0: 1e-12 max(c |t|, l_ref)
    double tol_res = 1e-8;
    CouplingForm coupling_form = CouplingForm::Derived;
    UnitSystem units = UnitSystem::Dimensionless;
    unsigned workers = 1;

    EvalOptions eval_options() const;
    /// Throws InvalidConfig unless window >= inner_step > 0, picard_tol > 0, t_end > 0.
    void validate() const;
};

enum class TerminatorKind { Completed, Collision, SingularPhi, SpeedCap, NoConvergence };

constexpr std::string_view to_string(TerminatorKind k) {
    switch (k) {
        case TerminatorKind::Completed: return "completed";
        case TerminatorKind::Collision: return "collision";
        case TerminatorKind::SingularPhi: return "singular_phi";
        case TerminatorKind::SpeedCap: return "speed_cap";
        case TerminatorKind::NoConvergence: return "no_convergence";
    }
    return "unknown";
}

struct Terminator {
    TerminatorKind kind = TerminatorKind::Completed;
    double t = 0.0;
    int charge = -1;
    int other = -1;
    double value = 0.0;
};

enum class EventKind { Collision, SingularPhi, SpeedCap, WindowHalved, NoConvergence, WarningClamp, DetJump };

constexpr std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Collision: return "collision";
        case EventKind::SingularPhi: return "singular_phi";
        case EventKind::SpeedCap: return "speed_cap";
        case EventKind::WindowHalved: return "window_halved";
        case EventKind::NoConvergence: return "no_convergence";
        case EventKind::WarningClamp: return "warning_clamp";
        case EventKind::DetJump: return "det_jump";
    }
    return "unknown";
}

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::WindowHalved;
    int charge = -1;
    int other = -1;  ///< second charge of a pair event
    std::optional<double> value;
};

/// Per committed sample and charge.
struct StepRecord {
    double t = 0.0;
    std::size_t charge = 0;
    double det_phi = 0.0;
    double det_other = 0.0;  ///< det with the coupling form not in use
    double min_rho = 0.0;
    double min_distance = 0.0;  ///< instantaneous distance to the nearest partner
    double speed = 0.0;
    double residual = 0.0;      ///< normalized momentum-force residual
    double light_cone = 0.0;    ///< max |rho - c (t - s)| / max(1, c |t|)
    int picard_iters = 0;
    double contraction_ratio = 0.0;
};

struct WindowRecord {
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<double> distances;  ///< d_m = sup_distance(iterate m, iterate m-1), m >= 1
    int iterations() const { return static_cast<int>(distances.size()); }
};

struct RunResult {
    TrajectoryHistory history;
    double T_max = 0.0;
    Terminator terminator;
    std::vector<Event> events;
    std::vector<StepRecord> steps;
    std::vector<WindowRecord> windows;
    double max_residual = 0.0;
    double max_light_cone = 0.0;
};

struct PicardOutcome {
    Window samples;  ///< samples[0] is the frontier sample
    std::vector<double> distances;
    std::vector<std::vector<ChargeEval>> evals;  ///< per sample (index >= 1), per charge
};

/// One window [T, T + n_steps h] of Picard iteration. Throws NoConvergence when
/// picard_max_iter sweeps do not reach picard_tol, and propagates Collision,
/// SingularPhi, SpeedViolation from the inner evaluations.
PicardOutcome picard_window(const TrajectoryHistory& history, const RunConfig& cfg, std::size_t n_steps,
                            double step, WorkerPool& pool);

/// Guard check on one record: Collision, SingularPhi or SpeedCap, if any.
std::optional<Terminator> detect_events(const StepRecord& rec, const RunConfig& cfg, double r_min,
                                        double speed_limit);

/// Evaluates t = 0 without stepping. Throws InvalidInitial on a collision or a
/// determinant below the floor.
std::vector<ChargeEval> check_initial(const TrajectoryHistory& history, const RunConfig& cfg);

RunResult run(TrajectoryHistory initial, const RunConfig& cfg);

}  // namespace feynbody
