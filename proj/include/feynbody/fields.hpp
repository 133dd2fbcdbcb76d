#pragma once

// Feynman's three-term field of a moving point charge, evaluated on the
// observer's trajectory and split into a part fixed by the history and a part
// linear in the observer's current acceleration:
//
//   E_jk = (q_k / 4 pi eps0) [ e/rho^2 + (rho/c) D(e/rho^2) + (1/c^2) D^2 e ]
//        = E_hist + C_jk(a_j(t)),
//
// with D the total time derivative along both trajectories.

#include <string_view>

#include "feynbody/linalg.hpp"
#include "feynbody/retardation.hpp"
#include "feynbody/units.hpp"

namespace feynbody {

/// Which acceleration-coupling bracket to use. `Derived` is (w - c e), the
/// coefficient obtained by differentiating e_jk twice; `PaperLiteral` is the
/// alternative bracket (c e + w).
enum class CouplingForm { Derived, PaperLiteral };

constexpr std::string_view to_string(CouplingForm f) {
    return f == CouplingForm::Derived ? "derived" : "paper_literal";
}

struct FieldSplit {
    Vec3 E_hist;
    LinMap3 couple;  ///< C_jk = (q_k / 4 pi eps0 c^2) G_jk
};

/// Second-order rates of the pair geometry with every a_j(t) term removed.
struct SecondOrderRates {
    double kappadot = 0.0;
    double tsecond = 0.0;   ///< d^2 t_jk / dt^2 without -(e, a_j)/kappa
    Vec3 Rddot;             ///< -b t'^2 - w t''
    double rhoddot = 0.0;   ///< (edot, Rdot) + (e, Rddot)
    Vec3 eddot;             ///< (Rddot - rhoddot e)/rho - 2 rhodot edot / rho
};

SecondOrderRates history_rates(const RetardedGeometry& g, const Vec3& v_j, double c);

Vec3 field_history_part(const RetardedGeometry& g, const Vec3& v_j, double q_k, const Constants& k);

/// G(h) = (1/rho) [ h + (e, h) bracket / kappa ], bracket per `form`.
LinMap3 accel_coupling(const RetardedGeometry& g, CouplingForm form, double c);

FieldSplit field_split(const RetardedGeometry& g, const Vec3& v_j, double q_k, const Constants& k,
                       CouplingForm form);

/// h -> h + (1/c) v_j x (e x h)
LinMap3 lorentz_map(const Vec3& v_j, const Vec3& e, double c);

/// The same field evaluated without the split: the second derivatives are
/// formed with a_j included from the start.
Vec3 full_field(const RetardedGeometry& g, const Vec3& v_j, const Vec3& a_j, double q_k, const Constants& k);

}  // namespace feynbody
