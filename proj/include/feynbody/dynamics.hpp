#pragma once

// Implicit equation of motion for each charge. With m_j = gamma_j m0_j,
//
//   Phi_j = Gamma(v_j) - sum_{k != j} [q_j q_k / (4 pi eps0 c^2 m_j)] H_jk o G_jk,
//   Phi_j(a_j) = (q_j / m_j) sum_{k != j} H_jk(E_hist_jk),
//
// which is the momentum balance D p_j = q_j sum_k (E_jk + (1/c) v_j x (e_jk x E_jk))
// rewritten for the unknown current acceleration a_j.

#include <cstddef>
#include <span>
#include <vector>

#include "feynbody/fields.hpp"
#include "feynbody/linalg.hpp"
#include "feynbody/retardation.hpp"
#include "feynbody/trajectory.hpp"
#include "feynbody/units.hpp"

namespace feynbody {

struct KinematicState {
    Vec3 v;
    Vec3 u;
    double gamma = 1.0;
    double m_rel = 0.0;
    Vec3 p;
};

KinematicState kinematics(const Vec3& v, double m0, double c);

/// h -> h + gamma^2 (u, h) u
LinMap3 gamma_map(const Vec3& v, double c);

struct PhiAssembly {
    LinMap3 phi;
    double det = 0.0;
    Vec3 rhs;
};

/// `geoms` and `splits` hold one entry per partner k != j, in ascending k.
PhiAssembly assemble(std::size_t j, std::span<const RetardedGeometry> geoms, const KinematicState& kin,
                     std::span<const FieldSplit> splits, std::span<const ChargeSpec> charges,
                     const Constants& k);

inline double det_phi(const PhiAssembly& a) { return a.det; }

/// |det| below this value is a singular point.
double singular_threshold(const PhiAssembly& a, double det_floor);

/// a = Phi^{-1}(rhs); throws SingularPhi when |det Phi| < singular_threshold.
Vec3 solve_accel(const PhiAssembly& a, double det_floor);

struct MomentumResidual {
    Vec3 dp;      ///< m0 gamma Gamma(v) a
    Vec3 force;   ///< q_j sum_k H_jk(E_jk(a_j)), unsplit field
    double abs = 0.0;
};

MomentumResidual momentum_residual(std::size_t j, std::span<const RetardedGeometry> geoms,
                                   const KinematicState& kin, const Vec3& a_j,
                                   std::span<const ChargeSpec> charges, const Constants& k);

struct EvalOptions {
    CouplingForm coupling = CouplingForm::Derived;
    double det_floor = 1e-8;
    RetardationOptions retardation;
    bool residual = false;  ///< also evaluate the momentum residual
};

/// Everything the integrator records about one charge at one time.
struct ChargeEval {
    Vec3 a;
    double det = 0.0;
    double det_other = 0.0;  ///< det Phi with the other coupling form
    double min_rho = 0.0;    ///< smallest retarded distance to a partner
    double speed = 0.0;
    double residual = 0.0;   ///< |Dp - F| / (m0 c^2 / l_ref), when requested
    int clamped = 0;         ///< partner speeds clamped to the cap
    std::vector<RetardedGeometry> geoms;
};

/// Full pipeline for charge j at time t: retardation, field split, Phi
/// assembly and solve. `states` are the current states of all charges;
/// delayed lookups go through `view`.
/// Throws Collision, SingularPhi, SpeedViolation (|v_j| at the cap) or
/// NoConvergence.
ChargeEval evaluate_charge(const TrajectoryView& view, std::size_t j, double t, std::span<const State> states,
                           const EvalOptions& opts);

}  // namespace feynbody
