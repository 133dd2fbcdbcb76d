#include <cmath>
#include <random>

#include "doctest.h"
#include "feynbody/fields.hpp"

using namespace feynbody;

namespace {

constexpr Constants unit = Constants::dimensionless();

RetardedGeometry static_geometry(double rho, const Vec3& e) {
    RetardedGeometry g;
    g.rho = rho;
    g.e = e;
    g.R = rho * e;
    g.kappa = 1.0;
    g.tprime = 1.0;
    return g;
}

/// Geometry for a pair with both charges on circles, observed at t < 0.
RetardedGeometry moving_geometry(double t = -2.0) {
    static const auto h = TrajectoryHistory::make_initial(
        {{1.0, 1.0, "j"}, {0.7, 1.0, "k"}},
        {past::Circular{{0, 0, 0}, 0.8, 0.5, 0.2}, past::Circular{{2.0, 1.0, -0.5}, 0.6, -0.9, 1.1}}, unit);
    return geometry(TrajectoryView(h), 0, 1, t);
}

bool close(const Vec3& a, const Vec3& b, double tol) { return norm(a - b) <= tol * std::max(1.0, norm(b)); }

}  // namespace

TEST_CASE("coupling forms with the source at rest") {
    const Vec3 e{1, 0, 0};
    const auto g = static_geometry(2.0, e);
    const Vec3 perp{0, 1, 0};
    CHECK(close(accel_coupling(g, CouplingForm::Derived, 1.0)(perp), perp / 2.0, 1e-15));
    CHECK(close(accel_coupling(g, CouplingForm::PaperLiteral, 1.0)(perp), perp / 2.0, 1e-15));
    CHECK(norm(accel_coupling(g, CouplingForm::Derived, 1.0)(e)) < 1e-15);
    CHECK(close(accel_coupling(g, CouplingForm::PaperLiteral, 1.0)(e), e, 1e-15));
}

TEST_CASE("coupling map is linear") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto g = moving_geometry();
    for (auto form : {CouplingForm::Derived, CouplingForm::PaperLiteral}) {
        const LinMap3 G = accel_coupling(g, form, 1.0);
        for (int i = 0; i < 100; ++i) {
            const Vec3 h1{u(rng), u(rng), u(rng)};
            const Vec3 h2{u(rng), u(rng), u(rng)};
            const double a = u(rng);
            const double b = u(rng);
            CHECK(close(G(a * h1 + b * h2), a * G(h1) + b * G(h2), 1e-13));
        }
    }
}

TEST_CASE("Lorentz map") {
    const Vec3 e{1, 0, 0};
    const Vec3 h{0, 1, 0};
    CHECK(lorentz_map({}, e, 1.0) == LinMap3::identity());
    CHECK(close(lorentz_map({0.3, -0.2, 0.4}, e, 1.0)(2.0 * e), 2.0 * e, 1e-15));
    CHECK(close(lorentz_map({0, 0.5, 0}, e, 1.0)(h), {0.5, 1, 0}, 1e-15));
}

TEST_CASE("static pair gives the pure Coulomb field with exact inverse-square scaling") {
    const Vec3 e{0, 0, 1};
    const double q = 0.37;
    const double E1 = norm(field_history_part(static_geometry(1.0, e), {}, q, unit));
    for (double d : {1.0, 2.0, 4.0, 8.0}) {
        const Vec3 E = field_history_part(static_geometry(d, e), {}, q, unit);
        CHECK(close(E, (q / (d * d)) * e, 1e-15));
        CHECK(norm(E) * d * d == doctest::Approx(E1).epsilon(1e-15));
    }
}

TEST_CASE("field is affine in the observer acceleration") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto g = moving_geometry();
    const Vec3 v_j = TrajectoryHistory::make_initial({{1.0, 1.0, "j"}}, {past::Circular{{0, 0, 0}, 0.8, 0.5, 0.2}}, unit)
                         .eval_state(0, g.t)
                         .v;
    const double q = 0.7;
    const FieldSplit split = field_split(g, v_j, q, unit, CouplingForm::Derived);
    CHECK(close(full_field(g, v_j, {}, q, unit), split.E_hist, 1e-13));
    for (int i = 0; i < 100; ++i) {
        const Vec3 a1{u(rng), u(rng), u(rng)};
        const Vec3 a2{u(rng), u(rng), u(rng)};
        const Vec3 lhs = full_field(g, v_j, a1, q, unit) - full_field(g, v_j, a2, q, unit);
        CHECK(close(lhs, split.couple(a1 - a2), 1e-12));
        CHECK(close(full_field(g, v_j, a1, q, unit), split.E_hist + split.couple(a1), 1e-12));
    }
}

TEST_CASE("history rates vanish for a static pair") {
    const auto r = history_rates(static_geometry(1.5, {0, 1, 0}), {}, 1.0);
    CHECK(r.kappadot == 0.0);
    CHECK(r.tsecond == 0.0);
    CHECK(r.eddot == Vec3{});
}
