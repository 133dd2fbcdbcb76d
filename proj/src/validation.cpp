#include "feynbody/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "feynbody/dynamics.hpp"
#include "feynbody/errors.hpp"
#include "feynbody/retardation.hpp"

namespace feynbody {

namespace {

using nlohmann::json;

// Errors below this are treated as exact (no order can be measured).
constexpr double exact_floor = 1e-13;

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json past_json(const PastSpec& p) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, past::Rest>) {
                return {{"kind", "rest"}, {"r", vec_json(s.r)}};
            } else if constexpr (std::is_same_v<T, past::Uniform>) {
                return {{"kind", "uniform"}, {"r0", vec_json(s.r0)}, {"v", vec_json(s.v)}};
            } else if constexpr (std::is_same_v<T, past::Circular>) {
                return {{"kind", "circular"}, {"center", vec_json(s.center)}, {"radius", s.radius},
                        {"omega", s.omega}, {"phase", s.phase}};
            } else {
                return {{"kind", "table"}, {"samples", s.t.size()}};
            }
        },
        p);
}

OracleCheck order_check(std::string name, std::vector<OracleLevel> levels, double lo, double hi) {
    OracleCheck c;
    c.name = std::move(name);
    c.levels = std::move(levels);
    c.orders = observed_orders(c.levels);
    const bool exact = std::all_of(c.levels.begin(), c.levels.end(),
                                   [](const OracleLevel& l) { return l.error <= exact_floor; });
    c.measured = c.orders.empty() ? 0.0 : *std::min_element(c.orders.begin(), c.orders.end());
    c.tolerance = lo;
    c.pass = exact || (!c.orders.empty() && std::all_of(c.orders.begin(), c.orders.end(),
                                                        [&](double o) { return o >= lo && o <= hi; }));
    return c;
}

OracleCheck bound_check(std::string name, double measured, double tolerance) {
    OracleCheck c;
    c.name = std::move(name);
    c.measured = measured;
    c.tolerance = tolerance;
    c.pass = measured <= tolerance;
    return c;
}

}  // namespace

json OracleReport::to_json() const {
    json checks_json = json::array();
    for (const auto& c : checks) {
        json levels = json::array();
        for (const auto& l : c.levels) levels.push_back({{"h", l.h}, {"error", l.error}});
        checks_json.push_back({{"name", c.name},
                               {"levels", levels},
                               {"orders", c.orders},
                               {"measured", c.measured},
                               {"tolerance", c.tolerance},
                               {"pass", c.pass}});
    }
    json out = {{"name", name}, {"inputs", inputs}, {"checks", checks_json}, {"pass", pass}};
    if (!extra.is_null()) out["verdict"] = extra;
    return out;
}

std::vector<double> observed_orders(const std::vector<OracleLevel>& levels) {
    std::vector<double> out;
    if (std::all_of(levels.begin(), levels.end(), [](const OracleLevel& l) { return l.error <= exact_floor; }))
        return out;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        const double ratio = levels[i].error / levels[i + 1].error;
        const double hr = levels[i].h / levels[i + 1].h;
        out.push_back(std::log(ratio) / std::log(hr));
    }
    return out;
}

// ---------------------------------------------------------------------------

OracleReport fd_derivative_oracle(const DerivativeOracleInput& in) {
    const Constants k = Constants::dimensionless();
    auto hist = TrajectoryHistory::make_initial({{-1.0, 1.0, "observer"}, {in.q_source, 1.0, "source"}},
                                                {in.observer, in.source}, k);
    const TrajectoryView view(hist);
    // Converge the light cone to round-off so second differences stay clean.
    RetardationOptions ropts;
    ropts.tol_lc = 1e-14;

    auto e_at = [&](double t) { return geometry(view, 0, 1, t, ropts); };

    const RetardedGeometry g0 = e_at(in.t);
    const Vec3 v_obs = hist.eval_state(0, in.t).v;
    const Vec3 a_obs = hist.eval_acc(0, in.t);
    const SecondOrderRates rates = history_rates(g0, v_obs, k.c);
    const Vec3 d_e_over_rho2 = g0.edot / (g0.rho * g0.rho) - (2.0 * g0.rhodot / (g0.rho * g0.rho * g0.rho)) * g0.e;

    std::vector<OracleLevel> edot_lv;
    std::vector<OracleLevel> ext_lv;
    std::vector<OracleLevel> derived_lv;
    std::vector<OracleLevel> literal_lv;
    for (double h : in.h_levels) {
        const auto gp = e_at(in.t + h);
        const auto gm = e_at(in.t - h);
        const Vec3 fd1 = (gp.e - gm.e) / (2.0 * h);
        const Vec3 fd2 = (gp.e - 2.0 * g0.e + gm.e) / (h * h);
        const Vec3 fq = (gp.e / (gp.rho * gp.rho) - gm.e / (gm.rho * gm.rho)) / (2.0 * h);
        edot_lv.push_back({h, norm(fd1 - g0.edot)});
        ext_lv.push_back({h, norm(fq - d_e_over_rho2)});
        const Vec3 ed_derived = rates.eddot + accel_coupling(g0, CouplingForm::Derived, k.c)(a_obs);
        const Vec3 ed_literal = rates.eddot + accel_coupling(g0, CouplingForm::PaperLiteral, k.c)(a_obs);
        derived_lv.push_back({h, norm(fd2 - ed_derived)});
        literal_lv.push_back({h, norm(fd2 - ed_literal)});
    }

    OracleReport rep;
    rep.name = "derivative";
    rep.inputs = {{"observer", past_json(in.observer)},
                  {"source", past_json(in.source)},
                  {"t", in.t},
                  {"h_levels", in.h_levels},
                  {"order_window", {in.order_lo, in.order_hi}},
                  {"coupling_form", to_string(in.form_in_use)}};
    rep.checks.push_back(order_check("edot", edot_lv, in.order_lo, in.order_hi));
    rep.checks.push_back(order_check("d_e_over_rho2", ext_lv, in.order_lo, in.order_hi));
    rep.checks.push_back(order_check("eddot_derived", derived_lv, in.order_lo, in.order_hi));
    rep.checks.push_back(order_check("eddot_paper_literal", literal_lv, in.order_lo, in.order_hi));

    const bool derived_ok = rep.checks[2].pass;
    const bool literal_ok = rep.checks[3].pass;
    json passing = json::array();
    if (derived_ok) passing.push_back("derived");
    if (literal_ok) passing.push_back("paper_literal");
    const bool in_use_ok = in.form_in_use == CouplingForm::Derived ? derived_ok : literal_ok;
    rep.extra = {{"passing_forms", passing}, {"form_in_use", to_string(in.form_in_use)}, {"form_in_use_passed", in_use_ok}};
    rep.pass = rep.checks[0].pass && rep.checks[1].pass && in_use_ok;
    return rep;
}

// ---------------------------------------------------------------------------

Vec3 uniform_motion_field(double q, const Vec3& rel, const Vec3& beta) {
    const double R = norm(rel);
    const Vec3 n = rel / R;
    const double b2 = dot(beta, beta);
    const Vec3 bxn = cross(beta, n);
    const double s2 = dot(bxn, bxn);  // beta^2 sin^2(theta)
    return (q * (1.0 - b2) / (R * R * std::pow(1.0 - s2, 1.5))) * n;
}

OracleReport uniform_motion_oracle(const std::vector<double>& betas, const std::vector<double>& distances,
                                   double tolerance) {
    const Constants k = Constants::dimensionless();
    OracleReport rep;
    rep.name = "uniform";
    rep.inputs = {{"betas", betas}, {"distances", distances}, {"tolerance", tolerance}};
    rep.pass = true;
    json ratios = json::array();
    struct Placement {
        const char* name;
        double angle;  // from the direction of motion
    };
    const Placement placements[] = {{"along_track", 0.0}, {"broadside", std::numbers::pi / 2}, {"oblique", 1.0}};
    for (double beta : betas) {
        for (const auto& pl : placements) {
            double worst = 0.0;
            for (double d : distances) {
                const Vec3 obs{d * std::cos(pl.angle), d * std::sin(pl.angle), 0.0};
                auto hist = TrajectoryHistory::make_initial(
                    {{1.0, 1.0, "observer"}, {1.0, 1.0, "source"}},
                    {past::Rest{obs}, past::Uniform{{0.0, 0.0, 0.0}, {beta, 0.0, 0.0}}}, k);
                const TrajectoryView view(hist);
                const auto g = geometry(view, 0, 1, 0.0);
                const Vec3 E = field_history_part(g, {}, 1.0, k);
                const Vec3 ref = uniform_motion_field(1.0, obs, {beta, 0.0, 0.0});
                worst = std::max(worst, norm(E - ref) / norm(ref));
                if (d == distances.front())
                    ratios.push_back({{"beta", beta}, {"placement", pl.name},
                                      {"field_over_coulomb", norm(E) * d * d}});
            }
            auto c = bound_check("beta=" + std::to_string(beta) + "/" + pl.name, worst, tolerance);
            rep.pass = rep.pass && c.pass;
            rep.checks.push_back(std::move(c));
        }
    }
    rep.extra = {{"present_distance_ratios", ratios}};
    return rep;
}

// ---------------------------------------------------------------------------

OracleReport gamma_identity_oracle(std::size_t samples, std::uint64_t seed, double tolerance) {
    const double c = 1.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> speed(0.0, 0.99);

    double det_err = 0.0;
    double inv_err = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        Vec3 dir{unit(rng), unit(rng), unit(rng)};
        while (norm(dir) < 1e-3) dir = {unit(rng), unit(rng), unit(rng)};
        const Vec3 v = (speed(rng) / norm(dir)) * dir;
        const Vec3 h{unit(rng), unit(rng), unit(rng)};
        const Vec3 u = v / c;
        const double g2 = 1.0 / (1.0 - dot(u, u));
        const LinMap3 G = gamma_map(v, c);
        det_err = std::max(det_err, std::abs(G.det() - g2) / g2);
        const Vec3 inv = h - dot(u, h) * u;
        inv_err = std::max(inv_err, norm(G(inv) - h) / std::max(1.0, norm(h)));
    }

    // Analytic motions: r, v, a as closures.
    struct Motion {
        const char* name;
        std::function<Vec3(double)> v;
        std::function<Vec3(double)> a;
    };
    const double w = 0.5;
    const Motion motions[] = {
        {"circular", [&](double t) { return Vec3{-w * std::sin(w * t), w * std::cos(w * t), 0.0}; },
         [&](double t) { return Vec3{-w * w * std::cos(w * t), -w * w * std::sin(w * t), 0.0}; }},
        {"drifting_circle", [&](double t) { return Vec3{0.3 - w * std::sin(w * t), w * std::cos(w * t), 0.0}; },
         [&](double t) { return Vec3{-w * w * std::cos(w * t), -w * w * std::sin(w * t), 0.0}; }},
    };
    const double m0 = 1.0;
    auto momentum = [&](const Vec3& v) { return (m0 / std::sqrt(1.0 - dot(v, v) / (c * c))) * v; };

    OracleReport rep;
    rep.name = "gamma";
    rep.inputs = {{"samples", samples}, {"seed", seed}, {"tolerance", tolerance}, {"max_speed", 0.99}};
    rep.checks.push_back(bound_check("det_gamma_equals_gamma_squared", det_err, tolerance));
    rep.checks.push_back(bound_check("closed_form_inverse", inv_err, tolerance));
    const double t0 = 0.7;
    for (const auto& m : motions) {
        std::vector<OracleLevel> lv;
        const Vec3 v0 = m.v(t0);
        const auto kin = kinematics(v0, m0, c);
        const Vec3 dp = (m0 * kin.gamma) * gamma_map(v0, c)(m.a(t0));
        for (double h : {1e-2, 5e-3, 2.5e-3}) {
            const Vec3 fd = (momentum(m.v(t0 + h)) - momentum(m.v(t0 - h))) / (2.0 * h);
            lv.push_back({h, norm(fd - dp)});
        }
        rep.checks.push_back(order_check(std::string("momentum_derivative_") + m.name, lv, 1.5, 2.5));
    }
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const OracleCheck& c) { return c.pass; });
    return rep;
}

// ---------------------------------------------------------------------------

std::vector<std::string> oracle_names() { return {"derivative", "uniform", "gamma"}; }

OracleReport run_oracle(const std::string& name, CouplingForm form) {
    if (name == "derivative") {
        DerivativeOracleInput in;
        in.form_in_use = form;
        return fd_derivative_oracle(in);
    }
    if (name == "uniform") return uniform_motion_oracle();
    if (name == "gamma") return gamma_identity_oracle();
    throw Error(ErrorKind::InvalidConfig, "unknown oracle suite '" + name + "'");
}

}  // namespace feynbody
