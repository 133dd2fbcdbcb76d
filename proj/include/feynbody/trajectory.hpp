#pragma once

// Charge specifications and the trajectory history y(t): a prescribed past
// for t <= 0 followed by committed solution samples on [0, T_front].

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "feynbody/linalg.hpp"
#include "feynbody/units.hpp"

namespace feynbody {

struct ChargeSpec {
    double q = 0.0;
    double m0 = 1.0;
    std::string label;
};

struct State {
    Vec3 r;
    Vec3 v;
};

namespace past {

struct Rest {
    Vec3 r;
};

/// r(t) = r0 + v t
struct Uniform {
    Vec3 r0;
    Vec3 v;
};

/// Circle in the xy-plane: r(t) = center + radius (cos(omega t + phase), sin(omega t + phase), 0).
struct Circular {
    Vec3 center;
    double radius = 1.0;
    double omega = 0.0;
    double phase = 0.0;
};

/// Sampled past. Times strictly increasing, last time must be 0.
/// Before the first sample the motion continues with the first velocity.
struct Table {
    std::vector<double> t;
    std::vector<State> states;
};

}  // namespace past

using PastSpec = std::variant<past::Rest, past::Uniform, past::Circular, past::Table>;

/// Parses the sampled-past CSV (`t,charge,rx,ry,rz,vx,vy,vz`). The `charge`
/// column holds a label or a zero-based index; rows are grouped by that key in
/// order of first appearance.
std::vector<std::pair<std::string, past::Table>> read_past_table(std::istream& in);

/// Evaluator for one charge's prescribed motion on t <= 0.
class PastMotion {
public:
    /// `max_jump` bounds |v_{i+1} - v_i| / c between adjacent table samples.
    PastMotion(PastSpec spec, double c, double max_jump = 0.05);

    State state(double t) const;
    /// Exact for analytic forms. Tables: three-point (nonuniform) differences of
    /// the sampled velocities at each node, linear in between, zero before the
    /// first sample.
    Vec3 acc(double t) const;
    /// Time derivative of acc(); zero for tables.
    Vec3 jerk(double t) const;
    /// Largest speed over the whole half-line t <= 0.
    double max_speed() const;

    const PastSpec& spec() const { return spec_; }

private:
    PastSpec spec_;
    std::vector<Vec3> table_acc_;
};

struct ChargeSample {
    Vec3 r;
    Vec3 v;
    Vec3 a;
    Vec3 jerk;
};

struct Sample {
    double t = 0.0;
    std::vector<ChargeSample> charges;
};

/// A run of consecutive samples; used for Picard iterates and appended windows.
using Window = std::vector<Sample>;

/// Cubic Hermite evaluation over consecutive samples of one charge:
/// position from (r, v), velocity from (v, a), acceleration from (a, jerk).
/// Grid points return the stored values exactly.
ChargeSample hermite_eval(const Sample& s0, const Sample& s1, std::size_t j, double t);

/// Locates the bracketing pair in [first, last) and evaluates; t must lie in
/// [first->t, (last-1)->t].
ChargeSample interpolate(std::span<const Sample> samples, std::size_t j, double t);

/// Derivative at the last node of the Lagrange polynomial through the given
/// nodes (all of them, so pass up to four for third order).
Vec3 backward_derivative(std::span<const double> t, std::span<const Vec3> y);

struct HistoryOptions {
    double v_cap = 0.999;      ///< speed fraction of c
    double max_jump = 0.05;    ///< table velocity jump tolerance, fraction of c
    double l_ref = 0.0;        ///< <= 0 selects the minimum pairwise distance at t = 0
};

class TrajectoryHistory {
public:
    static TrajectoryHistory make_initial(std::vector<ChargeSpec> charges, std::vector<PastSpec> pasts,
                                          const Constants& constants, const HistoryOptions& opts = {});

    std::size_t size() const { return charges_.size(); }
    const std::vector<ChargeSpec>& charges() const { return charges_; }
    const PastMotion& past(std::size_t j) const { return pasts_[j]; }
    const Constants& constants() const { return constants_; }
    double v_cap() const { return v_cap_; }
    double speed_limit() const { return v_cap_ * constants_.c; }
    double reference_length() const { return l_ref_; }

    double frontier() const { return committed_.back().t; }
    const std::vector<Sample>& committed() const { return committed_; }
    const Sample& frontier_sample() const { return committed_.back(); }

    State eval_state(std::size_t j, double t) const;
    Vec3 eval_acc(std::size_t j, double t) const;
    /// Full dense-output record (state, acceleration, jerk) at t.
    ChargeSample eval(std::size_t j, double t) const;

    /// Replaces the acceleration carried by the t = 0 sample with the solved
    /// one. Only allowed before the first append.
    void seed_frontier_acceleration(std::span<const Vec3> acc);

    /// Appends window[1..]; window[0] must reproduce the frontier sample.
    void append_window(std::span<const Sample> window);

private:
    TrajectoryHistory() = default;

    std::vector<ChargeSpec> charges_;
    std::vector<PastMotion> pasts_;
    std::vector<Sample> committed_;
    Constants constants_;
    double v_cap_ = 0.999;
    double l_ref_ = 1.0;
};

/// Read-only lookup over the committed history, optionally continued past the
/// frontier by a frozen iterate whose first sample is the frontier sample.
class TrajectoryView {
public:
    explicit TrajectoryView(const TrajectoryHistory& history, std::span<const Sample> overlay = {})
        : history_(&history), overlay_(overlay) {}

    const TrajectoryHistory& history() const { return *history_; }
    double horizon() const { return overlay_.empty() ? history_->frontier() : overlay_.back().t; }

    ChargeSample eval(std::size_t j, double t) const {
        if (t <= history_->frontier() || overlay_.empty()) return history_->eval(j, t);
        return interpolate(overlay_, j, t);
    }

private:
    const TrajectoryHistory* history_;
    std::span<const Sample> overlay_;
};

/// max over grid points and charges of |r_A - r_B| / l_ref + |v_A - v_B| / c.
double sup_distance(std::span<const Sample> a, std::span<const Sample> b, double l_ref, double c);

}  // namespace feynbody
