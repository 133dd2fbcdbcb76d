#include "feynbody/retardation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "feynbody/errors.hpp"

namespace feynbody {

double light_cone_tolerance(const TrajectoryView& view, double t, const RetardationOptions& opts) {
    if (opts.tol_lc > 0.0) return opts.tol_lc;
    const auto& h = view.history();
    return 1e-12 * std::max(h.constants().c * std::abs(t), h.reference_length());
}

double collision_radius(const TrajectoryView& view, const RetardationOptions& opts) {
    return opts.r_min > 0.0 ? opts.r_min : 1e-9 * view.history().reference_length();
}

double solve_retarded_time(const TrajectoryView& view, std::size_t j, std::size_t k, double t,
                           const Vec3& r_obs, const RetardationOptions& opts) {
    const double c = view.history().constants().c;
    const double tol = light_cone_tolerance(view, t, opts);

    const double d_now = norm(r_obs - view.eval(k, t).r);
    if (d_now < collision_radius(view, opts))
        throw Error(ErrorKind::Collision, "charges collide").at(t).pair(int(j), int(k)).value(d_now);

    // f(s) = c (t - s) - |r_obs - r_k(s)|, decreasing with slope -kappa(s).
    struct Probe {
        double f;
        double kappa;
    };
    auto probe = [&](double s) -> Probe {
        const ChargeSample src = view.eval(k, s);
        const Vec3 R = r_obs - src.r;
        const double rho = norm(R);
        const double kappa = rho > 0.0 ? c - dot(R, src.v) / rho : c;
        return {c * (t - s) - rho, kappa};
    };

    double hi = t;
    double lo = t;
    double delay = d_now / c;
    Probe p_lo{};
    int back = 0;
    for (;; ++back) {
        lo = t - delay;
        p_lo = probe(lo);
        if (p_lo.f >= 0.0) break;
        if (back >= opts.max_iter)
            throw Error(ErrorKind::NoConvergence, "retarded time not bracketed").at(t).pair(int(j), int(k));
        hi = lo;
        delay *= 2.0;
    }
    if (p_lo.f == 0.0) return lo;

    // Newton from the far end of the bracket, safeguarded by bisection.
    const double tight = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max({c * std::abs(t), c * std::abs(lo), d_now, norm(r_obs)});
    double s = lo;
    Probe p = p_lo;
    for (int it = 0; it < opts.max_iter; ++it) {
        double next = s + p.f / p.kappa;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == s) break;
        s = next;
        p = probe(s);
        if (p.f == 0.0) return s;
        if (p.f > 0.0)
            lo = s;
        else
            hi = s;
        if (std::abs(p.f) <= tight || (hi - lo) * c <= tight) break;
    }
    if (!(std::abs(p.f) <= tol))
        throw Error(ErrorKind::NoConvergence, "light-cone residual above tolerance")
            .at(t)
            .pair(int(j), int(k))
            .value(p.f);
    return s;
}

RetardedGeometry geometry(const TrajectoryView& view, std::size_t j, std::size_t k, double t,
                          const State& observer, const RetardationOptions& opts) {
    const auto& h = view.history();
    const double c = h.constants().c;

    RetardedGeometry g;
    g.j = j;
    g.k = k;
    g.t = t;
    g.s = solve_retarded_time(view, j, k, t, observer.r, opts);
    const ChargeSample src = view.eval(k, g.s);
    g.R = observer.r - src.r;
    g.rho = norm(g.R);
    g.e = g.R / g.rho;
    g.w = src.v;
    g.b = src.a;
    const double cap = h.speed_limit();
    const double ws = norm(g.w);
    if (ws >= cap) {
        g.w *= cap / ws;
        g.clamped = true;
    }
    g.kappa = c - dot(g.e, g.w);
    g.tprime = (c - dot(g.e, observer.v)) / g.kappa;
    g.Rdot = observer.v - g.tprime * g.w;
    g.rhodot = dot(g.e, g.Rdot);
    g.edot = (g.Rdot - g.rhodot * g.e) / g.rho;
    return g;
}

RetardedGeometry geometry(const TrajectoryView& view, std::size_t j, std::size_t k, double t,
                          const RetardationOptions& opts) {
    const auto obs = view.eval(j, t);
    return geometry(view, j, k, t, State{obs.r, obs.v}, opts);
}

}  // namespace feynbody
