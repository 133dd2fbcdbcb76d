#pragma once

// Independent oracles for the closed-form derivative and field formulas.
// All oracles run in dimensionless units (c = 1, 4 pi eps0 = 1).

#include <cstdint>
#include <string>
#include <vector>

#include "feynbody/fields.hpp"
#include "feynbody/trajectory.hpp"
#include "json.hpp"

namespace feynbody {

struct OracleLevel {
    double h = 0.0;
    double error = 0.0;
};

/// One measured quantity: errors per refinement level and the observed
/// orders log2(err(h) / err(h/2)), or a single error against `tolerance`.
struct OracleCheck {
    std::string name;
    std::vector<OracleLevel> levels;
    std::vector<double> orders;
    double tolerance = 0.0;
    double measured = 0.0;
    bool pass = false;
};

struct OracleReport {
    std::string name;
    nlohmann::json inputs;
    std::vector<OracleCheck> checks;
    bool pass = false;
    nlohmann::json extra;  ///< oracle-specific verdicts

    nlohmann::json to_json() const;
};

/// Orders from successive levels; empty when errors sit at the exactness floor.
std::vector<double> observed_orders(const std::vector<OracleLevel>& levels);

struct DerivativeOracleInput {
    PastSpec observer = past::Circular{{0.0, 0.0, 0.0}, 1.0, 0.5, 0.0};
    PastSpec source = past::Rest{{2.0, 0.5, 0.3}};
    double q_source = 1.0;
    double t = -4.0;
    std::vector<double> h_levels = {1e-2, 5e-3, 2.5e-3};
    double order_lo = 1.5;
    double order_hi = 2.5;
    CouplingForm form_in_use = CouplingForm::Derived;
};

/// Central differences of e_jk(t), e_jk/rho^2 and the second difference of
/// e_jk against edot, D(e/rho^2) and eddot_hist + G(a_j). Both coupling forms
/// are measured; the report passes iff the form in use does.
OracleReport fd_derivative_oracle(const DerivativeOracleInput& in = {});

/// Field of a uniformly moving source at an observer at rest versus the
/// present-position closed form, for broadside and along-track observers
/// (plus an oblique one) at each distance.
OracleReport uniform_motion_oracle(const std::vector<double>& betas = {0.0, 0.1, 0.5, 0.9},
                                   const std::vector<double>& distances = {1.0, 2.0, 4.0},
                                   double tolerance = 1e-8);

/// Closed-form field of a uniformly moving charge in present-position
/// variables (dimensionless). `rel` is observer minus present source position.
Vec3 uniform_motion_field(double q, const Vec3& rel, const Vec3& beta);

/// det Gamma = gamma^2, Gamma^-1(h) = h - (u, h) u on random admissible v, and
/// finite differences of m0 gamma v against m0 gamma Gamma(v)(a) along two
/// analytic motions.
OracleReport gamma_identity_oracle(std::size_t samples = 1000, std::uint64_t seed = 20261018,
                                   double tolerance = 1e-12);

/// Names accepted by run_oracle: "derivative", "uniform", "gamma".
std::vector<std::string> oracle_names();
OracleReport run_oracle(const std::string& name, CouplingForm form = CouplingForm::Derived);

}  // namespace feynbody
