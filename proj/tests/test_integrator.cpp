#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "feynbody/errors.hpp"
#include "feynbody/integrator.hpp"
#include "feynbody/worker_pool.hpp"

using namespace feynbody;

namespace {

constexpr Constants unit = Constants::dimensionless();

TrajectoryHistory weak_pair(const Constants& k = unit, double q = std::sqrt(1e-3), double d = 1.0, double m0 = 1.0) {
    return TrajectoryHistory::make_initial({{q, m0, "a"}, {q, m0, "b"}},
                                           {past::Rest{{-0.5 * d, 0, 0}}, past::Rest{{0.5 * d, 0, 0}}}, k);
}

RunConfig weak_config() {
    RunConfig cfg;
    cfg.t_end = 3.0;
    cfg.window = 2.0;
    cfg.inner_step = 0.05;
    return cfg;
}

}  // namespace

TEST_CASE("RunConfig invariants") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.window = 0.001;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.picard_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.t_end = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("free particle moves uniformly") {
    const Vec3 v0{0.5, 0, 0};
    const Vec3 r0{0.25, -1.0, 2.0};
    auto h = TrajectoryHistory::make_initial({{1.0, 1.0, "a"}}, {past::Uniform{r0, v0}}, unit);
    RunConfig cfg;
    cfg.t_end = 10.0;
    cfg.inner_step = 0.05;
    const auto res = run(std::move(h), cfg);
    CHECK(res.terminator.kind == TerminatorKind::Completed);
    CHECK(res.T_max == 10.0);
    const State s = res.history.eval_state(0, 10.0);
    CHECK(norm(s.r - (r0 + 10.0 * v0)) < 1e-12);
    CHECK(norm(s.v - v0) < 1e-12);
    for (const auto& w : res.windows) CHECK(w.iterations() <= 2);
    for (const auto& r : res.steps) CHECK(std::abs(r.det_phi - 4.0 / 3.0) < 1e-12);
}

TEST_CASE("weakly coupled pair: Picard contracts and the run satisfies the momentum balance") {
    const auto res = run(weak_pair(), weak_config());
    CHECK(res.terminator.kind == TerminatorKind::Completed);
    CHECK(res.max_residual < 1e-8);
    for (const auto& w : res.windows) {
        CHECK(w.iterations() <= 10);
        for (std::size_t m = 2; m < w.distances.size(); ++m) CHECK(w.distances[m] <= w.distances[m - 1]);
    }
    const auto& first = res.windows.front().distances;
    REQUIRE(first.size() >= 3);
    CHECK(first[1] / first[0] < 1.0);
    // Like charges repel symmetrically.
    const State a = res.history.eval_state(0, 3.0);
    const State b = res.history.eval_state(1, 3.0);
    CHECK(a.r.x < -0.5);
    CHECK(std::abs(a.r.x + b.r.x) < 1e-14);
}

TEST_CASE("results do not depend on the worker count") {
    auto cfg = weak_config();
    const auto serial = run(weak_pair(), cfg);
    cfg.workers = 3;
    const auto parallel = run(weak_pair(), cfg);
    const auto& s = serial.history.committed();
    const auto& p = parallel.history.committed();
    REQUIRE(s.size() == p.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(s[i].charges[j].r == p[i].charges[j].r);
            CHECK(s[i].charges[j].v == p[i].charges[j].v);
            CHECK(s[i].charges[j].a == p[i].charges[j].a);
        }
}

TEST_CASE("singular initial data is rejected") {
    RunConfig cfg = weak_config();
    cfg.r_min = 0.1;
    auto close_pair = TrajectoryHistory::make_initial({{0.1, 1.0, "a"}, {0.1, 1.0, "b"}},
                                                      {past::Rest{{0, 0, 0}}, past::Rest{{0.05, 0, 0}}}, unit);
    try {
        run(std::move(close_pair), cfg);
        FAIL("expected InvalidInitial");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInitial);
    }
    CHECK_THROWS_AS(run(weak_pair(unit, 1.0), weak_config()), Error);
}

TEST_CASE("detect_events maps guard violations") {
    RunConfig cfg;
    StepRecord rec;
    rec.det_phi = 1.0;
    rec.min_distance = 1.0;
    rec.speed = 0.5;
    CHECK_FALSE(detect_events(rec, cfg, 1e-9, 0.999).has_value());
    rec.det_phi = 1e-12;
    CHECK(detect_events(rec, cfg, 1e-9, 0.999)->kind == TerminatorKind::SingularPhi);
    rec.det_phi = 1.0;
    rec.speed = 0.9995;
    CHECK(detect_events(rec, cfg, 1e-9, 0.999)->kind == TerminatorKind::SpeedCap);
    rec.speed = 0.5;
    rec.min_distance = 1e-10;
    CHECK(detect_events(rec, cfg, 1e-9, 0.999)->kind == TerminatorKind::Collision);
}

TEST_CASE("SI and dimensionless runs agree after scaling") {
    const Constants si = Constants::si();
    const double L = 1e-3;
    const double M = 9.1093837015e-31;
    const double T0 = L / si.c;
    const double Q = std::sqrt(M * si.c * si.c * L / si.coulomb);
    const double q = 0.1;

    const auto ref = run(weak_pair(unit, q), weak_config());

    RunConfig cfg = weak_config();
    cfg.t_end *= T0;
    cfg.window *= T0;
    cfg.inner_step *= T0;
    cfg.units = UnitSystem::SI;
    const auto scaled = run(weak_pair(si, q * Q, L, M), cfg);

    REQUIRE(ref.history.committed().size() == scaled.history.committed().size());
    for (std::size_t i = 0; i < ref.history.committed().size(); ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const auto& a = ref.history.committed()[i].charges[j];
            const auto& b = scaled.history.committed()[i].charges[j];
            CHECK(norm(a.r - b.r / L) < 1e-10);
            CHECK(norm(a.v - b.v / si.c) < 1e-10);
        }
}

TEST_CASE("worker pool rethrows the lowest failing index") {
    WorkerPool pool(4);
    std::vector<int> out(100, 0);
    pool.parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
    try {
        pool.parallel_for(50, [](std::size_t i) {
            if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "7");
    }
}
