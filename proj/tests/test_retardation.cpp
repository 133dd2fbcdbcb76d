#include <cmath>
#include <random>

#include "doctest.h"
#include "feynbody/errors.hpp"
#include "feynbody/retardation.hpp"

using namespace feynbody;

namespace {

constexpr Constants unit = Constants::dimensionless();

TrajectoryHistory pair(PastSpec observer, PastSpec source) {
    return TrajectoryHistory::make_initial({{1.0, 1.0, "j"}, {1.0, 1.0, "k"}}, {std::move(observer), std::move(source)},
                                           unit);
}

/// Smaller root of c^2 (t - s)^2 = |r - u s|^2 for a source r_k(s) = u s.
double uniform_retarded_time(const Vec3& r, const Vec3& u, double t, double c) {
    const double A = c * c - dot(u, u);
    const double B = c * c * t - dot(r, u);
    const double C = c * c * t * t - dot(r, r);
    return (B - std::sqrt(B * B - A * C)) / A;
}

PastSpec random_past(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    const Vec3 center{3 * u(rng), 3 * u(rng), 3 * u(rng)};
    if (pos(rng) < 0.5) {
        const Vec3 v{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
        return past::Uniform{center, v};
    }
    const double radius = 0.2 + pos(rng);
    const double omega = (0.1 + 0.8 * pos(rng)) / radius;
    return past::Circular{center, radius, omega, 6.0 * pos(rng)};
}

}  // namespace

TEST_CASE("static light cone") {
    const double d = 2.5;
    const auto h = pair(past::Rest{{d, 0, 0}}, past::Rest{{0, 0, 0}});
    const TrajectoryView view(h);
    for (double t : {-7.0, -1.0, 0.0}) CHECK(solve_retarded_time(view, 0, 1, t, {d, 0, 0}) == doctest::Approx(t - d));

    const auto g = geometry(view, 0, 1, -3.0);
    CHECK(g.e.x == doctest::Approx(1.0));
    CHECK(g.kappa == 1.0);
    CHECK(g.tprime == 1.0);
    CHECK(g.rhodot == 0.0);
    CHECK(g.edot == Vec3{});
}

TEST_CASE("uniformly moving source matches the quadratic closed form") {
    const Vec3 u{0.4, 0.3, -0.2};
    const Vec3 r{1.5, -0.5, 0.75};
    const auto h = pair(past::Rest{r}, past::Uniform{{0, 0, 0}, u});
    const TrajectoryView view(h);
    for (double t : {-6.0, -2.0, -0.5, 0.0}) {
        const double s = solve_retarded_time(view, 0, 1, t, r);
        CHECK(std::abs(s - uniform_retarded_time(r, u, t, 1.0)) < 1e-12);
    }
}

TEST_CASE("co-located charges collide") {
    const auto h = pair(past::Rest{{0, 0, 0}}, past::Rest{{0, 0, 0}});
    const TrajectoryView view(h);
    try {
        solve_retarded_time(view, 0, 1, -1.0, {0, 0, 0});
        FAIL("expected Collision");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Collision);
    }
}

TEST_CASE("observer receding radially from a source at rest") {
    const double v = 0.3;
    const auto h = pair(past::Uniform{{2, 0, 0}, {v, 0, 0}}, past::Rest{{0, 0, 0}});
    const auto g = geometry(TrajectoryView(h), 0, 1, -1.0);
    CHECK(g.tprime == doctest::Approx((1.0 - v) / 1.0));
    CHECK(g.rhodot == doctest::Approx(v));
}

TEST_CASE("tprime matches central differences of s(t) at second order") {
    const auto h = pair(past::Circular{{0, 0, 0}, 1.0, 0.6, 0.0}, past::Circular{{2.5, 0.3, 0.2}, 0.5, -0.9, 1.0});
    const TrajectoryView view(h);
    const double t = -3.0;
    RetardationOptions opts;
    opts.tol_lc = 1e-15;
    const double tp = geometry(view, 0, 1, t, opts).tprime;
    std::vector<double> err;
    for (double step : {4e-2, 2e-2, 1e-2}) {
        const double sp = geometry(view, 0, 1, t + step, opts).s;
        const double sm = geometry(view, 0, 1, t - step, opts).s;
        err.push_back(std::abs((sp - sm) / (2 * step) - tp));
    }
    CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("random admissible configurations: unit e, light-cone residual, unique root, causality") {
    std::mt19937_64 rng(20261018);
    std::uniform_real_distribution<double> when(-8.0, -0.1);
    int checked = 0;
    while (checked < 1000) {
        const PastSpec a = random_past(rng);
        const PastSpec b = random_past(rng);
        const auto h = pair(a, b);
        const TrajectoryView view(h);
        const double t = when(rng);
        const State obs = h.eval_state(0, t);
        if (norm(obs.r - h.eval_state(1, t).r) < 0.05) continue;
        const auto g = geometry(view, 0, 1, t);
        CHECK(std::abs(norm(g.e) - 1.0) < 1e-14);
        CHECK(std::abs(g.rho - (t - g.s)) <= light_cone_tolerance(view, t, {}));
        CHECK(g.s < t);
        CHECK(g.kappa > 0.0);
        CHECK(g.tprime > 0.0);

        if (checked % 50 == 0) {
            // f(s) = c (t - s) - |r_j(t) - r_k(s)| changes sign exactly once over a wide scan.
            int changes = 0;
            double prev = 0.0;
            for (int i = 0; i <= 20000; ++i) {
                const double s = t - 200.0 + 200.0 * i / 20000.0;
                const double f = (t - s) - norm(obs.r - h.eval_state(1, s).r);
                if (i > 0 && ((prev > 0) != (f > 0))) ++changes;
                prev = f;
            }
            CHECK(changes == 1);
            CHECK(geometry(view, 0, 1, t + 0.01).s >= g.s);
        }
        ++checked;
    }
}
