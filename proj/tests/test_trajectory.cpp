#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "feynbody/errors.hpp"
#include "feynbody/trajectory.hpp"

using namespace feynbody;

namespace {

constexpr Constants unit = Constants::dimensionless();

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::OracleFailure;
}

TrajectoryHistory one_uniform(const Vec3& v) {
    return TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {past::Uniform{{0, 0, 0}, v}}, unit);
}

/// Exact uniform-motion window from t0 with n steps of h.
Window uniform_window(const Vec3& v, double t0, int n, double h) {
    Window w;
    for (int i = 0; i <= n; ++i) {
        const double t = t0 + i * h;
        w.push_back({t, {{t * v, v, {}, {}}}});
    }
    return w;
}

Window sine_samples(double h, double t_end) {
    Window w;
    const int n = static_cast<int>(std::lround(t_end / h));
    for (int i = 0; i <= n; ++i) {
        const double t = i * h;
        w.push_back({t, {{{std::sin(t), 0, 0}, {std::cos(t), 0, 0}, {-std::sin(t), 0, 0}, {-std::cos(t), 0, 0}}}});
    }
    return w;
}

double sine_error(double h) {
    const Window w = sine_samples(h, 2.0);
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        for (double f : {0.25, 0.5, 0.75}) {
            const double t = w[i].t + f * h;
            err = std::max(err, std::abs(interpolate(w, 0, t).r.x - std::sin(t)));
        }
    return err;
}

}  // namespace

TEST_CASE("make_initial validates its input") {
    CHECK(kind_of([] { TrajectoryHistory::make_initial({}, {}, unit); }) == ErrorKind::EmptySystem);
    CHECK(kind_of([] {
              TrajectoryHistory::make_initial({{1.0, 0.0, "a"}}, {past::Rest{}}, unit);
          }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] {
              TrajectoryHistory::make_initial({{1.0, 1.0, "a"}, {1.0, 1.0, "a"}},
                                              {past::Rest{{0, 0, 0}}, past::Rest{{1, 0, 0}}}, unit);
          }) == ErrorKind::InvalidConfig);
}

TEST_CASE("analytic pasts evaluate exactly") {
    const auto rest = TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {past::Rest{{0, 0, 0}}}, unit);
    const State s = rest.eval_state(0, -5.0);
    CHECK(s.r == Vec3{});
    CHECK(s.v == Vec3{});
    CHECK(rest.eval_acc(0, -3.0) == Vec3{});

    const auto uni = TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {past::Uniform{{1, 0, 0}, {0.5, 0, 0}}}, unit);
    CHECK(uni.eval_state(0, -2.0).r == Vec3{1.0 - unit.c, 0, 0});
    CHECK(uni.eval_acc(0, -2.0) == Vec3{});

    const double radius = 0.7;
    const double omega = 0.9;
    const auto circ = TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {past::Circular{{0, 0, 0}, radius, omega, 0.3}}, unit);
    for (double t : {-4.0, -1.3, -0.2})
        CHECK(norm(circ.eval_acc(0, t)) == doctest::Approx(radius * omega * omega).epsilon(1e-14));
}

TEST_CASE("table past speed and continuity checks") {
    past::Table fast{{-1.0, 0.0}, {{{-0.999, 0, 0}, {0.999, 0, 0}}, {{0, 0, 0}, {0.999, 0, 0}}}};
    HistoryOptions opts;
    opts.v_cap = 0.99;
    CHECK(kind_of([&] { TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {fast}, unit, opts); }) ==
          ErrorKind::SpeedViolation);

    past::Table jump{{-1.0, 0.0}, {{{0, 0, 0}, {0.0, 0, 0}}, {{0.1, 0, 0}, {0.2, 0, 0}}}};
    CHECK(kind_of([&] { TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {jump}, unit); }) ==
          ErrorKind::DiscontinuousPast);
}

TEST_CASE("table past extends before the first sample at constant velocity") {
    past::Table tab{{-1.0, -0.5, 0.0},
                    {{{-0.1, 0, 0}, {0.1, 0, 0}}, {{-0.05, 0, 0}, {0.1, 0, 0}}, {{0, 0, 0}, {0.1, 0, 0}}}};
    const auto h = TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {tab}, unit);
    CHECK(h.eval_state(0, -11.0).r.x == doctest::Approx(-1.1));
    CHECK(h.eval_state(0, -0.75).r.x == doctest::Approx(-0.075));
    CHECK(norm(h.eval_acc(0, -0.3)) < 1e-15);
}

TEST_CASE("past table CSV groups rows by charge") {
    std::istringstream in(
        "t,charge,rx,ry,rz,vx,vy,vz\n"
        "-1,a,0,0,0,0,0,0\n"
        "-1,b,1,0,0,0,0,0\n"
        "0,a,0,0,0,0,0,0\n"
        "0,b,1,0,0,0,0,0\n");
    const auto tables = read_past_table(in);
    REQUIRE(tables.size() == 2);
    CHECK(tables[0].first == "a");
    CHECK(tables[1].second.states[1].r.x == 1.0);

    std::istringstream bad("t,charge,x\n");
    CHECK(kind_of([&] { read_past_table(bad); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("Hermite dense output") {
    SUBCASE("exact on uniform motion") {
        const Window w = uniform_window({0.3, -0.2, 0.1}, 0.0, 4, 0.5);
        for (double t : {0.1, 0.77, 1.9}) CHECK(norm(interpolate(w, 0, t).r - t * Vec3{0.3, -0.2, 0.1}) < 1e-15);
    }
    SUBCASE("grid points reproduce stored values") {
        const Window w = sine_samples(0.1, 1.0);
        for (const auto& s : w) CHECK(interpolate(w, 0, s.t).r == s.charges[0].r);
    }
    SUBCASE("fourth-order convergence on a sine") {
        const double e1 = sine_error(0.2);
        const double e2 = sine_error(0.1);
        const double e3 = sine_error(0.05);
        CHECK(std::log2(e1 / e2) >= 3.5);
        CHECK(std::log2(e2 / e3) >= 3.5);
    }
}

TEST_CASE("backward derivative is exact on cubics") {
    const std::vector<double> t = {0.0, 0.3, 0.5, 1.0};
    std::vector<Vec3> y;
    for (double s : t) y.push_back({s * s * s, 2 * s, 1.0});
    const Vec3 d = backward_derivative(t, y);
    CHECK(d.x == doctest::Approx(3.0));
    CHECK(d.y == doctest::Approx(2.0));
    CHECK(std::abs(d.z) < 1e-14);
}

TEST_CASE("append_window") {
    const Vec3 v{0.5, 0, 0};
    auto h = one_uniform(v);
    CHECK(h.frontier() == 0.0);
    CHECK(kind_of([&] { h.eval_state(0, 0.1); }) == ErrorKind::OutOfRange);

    h.append_window(uniform_window(v, 0.0, 4, 0.25));
    CHECK(h.frontier() == 1.0);
    std::vector<State> before;
    for (double t : {-0.5, 0.1, 0.6, 0.99}) before.push_back(h.eval_state(0, t));

    h.append_window(uniform_window(v, 1.0, 4, 0.25));
    CHECK(h.frontier() == 2.0);
    std::size_t i = 0;
    for (double t : {-0.5, 0.1, 0.6, 0.99}) {
        const State s = h.eval_state(0, t);
        CHECK(s.r == before[i].r);
        CHECK(s.v == before[i].v);
        ++i;
    }
    CHECK(norm(h.eval_state(0, 1.7).r - 1.7 * v) < 1e-15);

    Window off = uniform_window(v, 2.0, 2, 0.25);
    off[0].charges[0].r.x += 1e-9;
    CHECK(kind_of([&] { h.append_window(off); }) == ErrorKind::JunctionMismatch);

    Window fast = uniform_window(v, 2.0, 2, 0.25);
    fast[2].charges[0].v = {0.9995, 0, 0};
    CHECK(kind_of([&] { h.append_window(fast); }) == ErrorKind::SpeedViolation);
    CHECK(h.frontier() == 2.0);
}

TEST_CASE("sup_distance") {
    const Window a = uniform_window({0.1, 0, 0}, 0.0, 3, 0.5);
    CHECK(sup_distance(a, a, 1.0, 1.0) == 0.0);
    Window b = a;
    b[2].charges[0].v.x += 0.01;
    CHECK(sup_distance(a, b, 1.0, 1.0) == doctest::Approx(0.01).epsilon(1e-12));
    const Window shorter(a.begin(), a.end() - 1);
    CHECK(kind_of([&] { sup_distance(a, shorter, 1.0, 1.0); }) == ErrorKind::GridMismatch);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto random_window = [&] {
        Window w = a;
        for (auto& s : w)
            for (auto& c : s.charges) {
                c.r = {u(rng), u(rng), u(rng)};
                c.v = {0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
            }
        return w;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const Window x = random_window();
        const Window y = random_window();
        const Window z = random_window();
        CHECK(sup_distance(x, z, 2.0, 1.0) <= sup_distance(x, y, 2.0, 1.0) + sup_distance(y, z, 2.0, 1.0) + 1e-15);
    }
}
