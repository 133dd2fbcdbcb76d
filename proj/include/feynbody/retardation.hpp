#pragma once

// Retarded time t_jk(t) from the light-cone equation c (t - s) = |r_j(t) - r_k(s)|
// and the per-pair geometry used by the field and operator formulas.

#include <cstddef>

#include "feynbody/linalg.hpp"
#include "feynbody/trajectory.hpp"

namespace feynbody {

struct RetardedGeometry {
    std::size_t j = 0;
    std::size_t k = 0;
    double t = 0.0;       ///< observation time
    double s = 0.0;       ///< retarded time t_jk
    Vec3 R;               ///< r_j(t) - r_k(s)
    double rho = 0.0;     ///< |R|
    Vec3 e;               ///< R / rho
    Vec3 w;               ///< v_k(s)
    Vec3 b;               ///< a_k(s)
    double kappa = 0.0;   ///< c - (e, w)
    double tprime = 0.0;  ///< d t_jk / dt
    Vec3 Rdot;            ///< v_j - w tprime
    double rhodot = 0.0;  ///< (e, Rdot) = c (1 - tprime)
    Vec3 edot;            ///< (Rdot - rhodot e) / rho
    bool clamped = false; ///< source speed was clamped to the cap
};

struct RetardationOptions {
    double tol_lc = 0.0;  ///< <= 0 selects 1e-12 max(c |t|, l_ref)
    double r_min = 0.0;   ///< <= 0 selects 1e-9 l_ref
    int max_iter = 200;
};

/// Light-cone tolerance actually used at time t.
double light_cone_tolerance(const TrajectoryView& view, double t, const RetardationOptions& opts);
double collision_radius(const TrajectoryView& view, const RetardationOptions& opts);

/// Unique s < t with c (t - s) = |r_obs - r_k(s)|. Bracketed by exponential
/// back-off from s = t, refined by Newton steps that fall back to bisection
/// whenever they leave the bracket.
double solve_retarded_time(const TrajectoryView& view, std::size_t j, std::size_t k, double t,
                           const Vec3& r_obs, const RetardationOptions& opts = {});

/// Observer state supplied explicitly (the integrator passes stage states).
RetardedGeometry geometry(const TrajectoryView& view, std::size_t j, std::size_t k, double t,
                          const State& observer, const RetardationOptions& opts = {});

/// Observer state read from the view.
RetardedGeometry geometry(const TrajectoryView& view, std::size_t j, std::size_t k, double t,
                          const RetardationOptions& opts = {});

}  // namespace feynbody
