#include "feynbody/dynamics.hpp"

#include <cmath>
#include <limits>

#include "feynbody/errors.hpp"

namespace feynbody {

KinematicState kinematics(const Vec3& v, double m0, double c) {
    KinematicState s;
    s.v = v;
    s.u = v / c;
    s.gamma = 1.0 / std::sqrt(1.0 - dot(s.u, s.u));
    s.m_rel = s.gamma * m0;
    s.p = s.m_rel * v;
    return s;
}

LinMap3 gamma_map(const Vec3& v, double c) {
    const Vec3 u = v / c;
    const double g2 = 1.0 / (1.0 - dot(u, u));
    return LinMap3::identity() + g2 * LinMap3::outer(u, u);
}

PhiAssembly assemble(std::size_t j, std::span<const RetardedGeometry> geoms, const KinematicState& kin,
                     std::span<const FieldSplit> splits, std::span<const ChargeSpec> charges,
                     const Constants& k) {
    PhiAssembly out;
    out.phi = gamma_map(kin.v, k.c);
    const double q_over_m = charges[j].q / kin.m_rel;
    Vec3 force;
    for (std::size_t i = 0; i < geoms.size(); ++i) {
        const LinMap3 H = lorentz_map(kin.v, geoms[i].e, k.c);
        // splits[i].couple already carries q_k / (4 pi eps0 c^2)
        out.phi -= q_over_m * compose(H, splits[i].couple);
        force += H(splits[i].E_hist);
    }
    out.rhs = q_over_m * force;
    out.det = out.phi.det();
    return out;
}

double singular_threshold(const PhiAssembly& a, double det_floor) {
    const double scale = a.phi.max_abs();
    return det_floor * std::max(1.0, scale * scale * scale);
}

Vec3 solve_accel(const PhiAssembly& a, double det_floor) {
    const double floor = singular_threshold(a, det_floor);
    if (!(std::abs(a.det) >= floor))
        throw Error(ErrorKind::SingularPhi, "det Phi below the singular threshold").value(a.det);
    return solve(a.phi, a.rhs);
}

MomentumResidual momentum_residual(std::size_t j, std::span<const RetardedGeometry> geoms,
                                   const KinematicState& kin, const Vec3& a_j,
                                   std::span<const ChargeSpec> charges, const Constants& k) {
    MomentumResidual r;
    r.dp = (charges[j].m0 * kin.gamma) * gamma_map(kin.v, k.c)(a_j);
    for (const auto& g : geoms) {
        const Vec3 E = full_field(g, kin.v, a_j, charges[g.k].q, k);
        r.force += E + (1.0 / k.c) * cross(kin.v, cross(g.e, E));
    }
    r.force *= charges[j].q;
    r.abs = norm(r.dp - r.force);
    return r;
}

ChargeEval evaluate_charge(const TrajectoryView& view, std::size_t j, double t, std::span<const State> states,
                           const EvalOptions& opts) {
    const auto& hist = view.history();
    const auto& charges = hist.charges();
    const Constants& k = hist.constants();
    const double r_min = collision_radius(view, opts.retardation);

    ChargeEval out;
    out.speed = norm(states[j].v);
    if (!(out.speed < hist.speed_limit()))
        throw Error(ErrorKind::SpeedViolation, "speed reaches the cap").at(t).charge(int(j)).value(out.speed);

    const KinematicState kin = kinematics(states[j].v, charges[j].m0, k.c);
    out.geoms.reserve(charges.size() - 1);
    std::vector<FieldSplit> splits;
    std::vector<FieldSplit> other;
    splits.reserve(charges.size() - 1);
    other.reserve(charges.size() - 1);
    out.min_rho = std::numeric_limits<double>::infinity();
    const CouplingForm alt =
        opts.coupling == CouplingForm::Derived ? CouplingForm::PaperLiteral : CouplingForm::Derived;
    for (std::size_t kk = 0; kk < charges.size(); ++kk) {
        if (kk == j) continue;
        const double d = norm(states[j].r - states[kk].r);
        if (d < r_min) throw Error(ErrorKind::Collision, "charges collide").at(t).pair(int(j), int(kk)).value(d);
        auto g = geometry(view, j, kk, t, states[j], opts.retardation);
        out.clamped += g.clamped ? 1 : 0;
        out.min_rho = std::min(out.min_rho, g.rho);
        splits.push_back(field_split(g, kin.v, charges[kk].q, k, opts.coupling));
        FieldSplit o = splits.back();
        o.couple = (k.coulomb * charges[kk].q / (k.c * k.c)) * accel_coupling(g, alt, k.c);
        other.push_back(o);
        out.geoms.push_back(std::move(g));
    }

    const PhiAssembly asm_ = assemble(j, out.geoms, kin, splits, charges, k);
    out.det = asm_.det;
    out.det_other = assemble(j, out.geoms, kin, other, charges, k).det;
    try {
        out.a = solve_accel(asm_, opts.det_floor);
    } catch (Error& e) {
        e.at(t).charge(int(j));
        throw;
    }
    if (opts.residual) {
        const auto res = momentum_residual(j, out.geoms, kin, out.a, charges, k);
        out.residual = res.abs / (charges[j].m0 * k.c * k.c / hist.reference_length());
    }
    return out;
}

}  // namespace feynbody
