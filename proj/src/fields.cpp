#include "feynbody/fields.hpp"

namespace feynbody {

namespace {

Vec3 three_term_field(const RetardedGeometry& g, const Vec3& eddot, double q_k, const Constants& k) {
    const double c = k.c;
    const double rho2 = g.rho * g.rho;
    const Vec3 coulomb = g.e / rho2;
    const Vec3 extrapolation = (1.0 / c) * (g.edot / g.rho - (2.0 * g.rhodot / rho2) * g.e);
    const Vec3 wave = (1.0 / (c * c)) * eddot;
    return (k.coulomb * q_k) * (coulomb + extrapolation + wave);
}

}  // namespace

SecondOrderRates history_rates(const RetardedGeometry& g, const Vec3& v_j, double c) {
    SecondOrderRates r;
    r.kappadot = -dot(g.edot, g.w) - dot(g.e, g.b) * g.tprime;
    r.tsecond = -dot(g.edot, v_j) / g.kappa - (c - dot(g.e, v_j)) * r.kappadot / (g.kappa * g.kappa);
    r.Rddot = -(g.tprime * g.tprime) * g.b - r.tsecond * g.w;
    r.rhoddot = dot(g.edot, g.Rdot) + dot(g.e, r.Rddot);
    r.eddot = (r.Rddot - r.rhoddot * g.e) / g.rho - (2.0 * g.rhodot / g.rho) * g.edot;
    return r;
}

Vec3 field_history_part(const RetardedGeometry& g, const Vec3& v_j, double q_k, const Constants& k) {
    return three_term_field(g, history_rates(g, v_j, k.c).eddot, q_k, k);
}

LinMap3 accel_coupling(const RetardedGeometry& g, CouplingForm form, double c) {
    const Vec3 bracket = form == CouplingForm::Derived ? g.w - c * g.e : c * g.e + g.w;
    LinMap3 G = LinMap3::identity() + (1.0 / g.kappa) * LinMap3::outer(bracket, g.e);
    G *= 1.0 / g.rho;
    return G;
}

FieldSplit field_split(const RetardedGeometry& g, const Vec3& v_j, double q_k, const Constants& k,
                       CouplingForm form) {
    FieldSplit out;
    out.E_hist = field_history_part(g, v_j, q_k, k);
    out.couple = (k.coulomb * q_k / (k.c * k.c)) * accel_coupling(g, form, k.c);
    return out;
}

LinMap3 lorentz_map(const Vec3& v_j, const Vec3& e, double c) {
    return LinMap3::identity() +
           (1.0 / c) * compose(LinMap3::cross_matrix(v_j), LinMap3::cross_matrix(e));
}

Vec3 full_field(const RetardedGeometry& g, const Vec3& v_j, const Vec3& a_j, double q_k, const Constants& k) {
    // kappa * t' = c - (e, v_j), differentiated with a_j kept.
    const double kappadot = -dot(g.edot, g.w) - dot(g.e, g.b) * g.tprime;
    const double tsecond = (-dot(g.edot, v_j) - dot(g.e, a_j) - g.tprime * kappadot) / g.kappa;
    const Vec3 Rddot = a_j - (g.tprime * g.tprime) * g.b - tsecond * g.w;
    const double rhoddot = dot(g.edot, g.Rdot) + dot(g.e, Rddot);
    const Vec3 eddot = (Rddot - rhoddot * g.e) / g.rho - (2.0 * g.rhodot / g.rho) * g.edot;
    return three_term_field(g, eddot, q_k, k);
}

}  // namespace feynbody
