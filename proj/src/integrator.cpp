#include "feynbody/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "feynbody/errors.hpp"
#include "feynbody/worker_pool.hpp"

namespace feynbody {

EvalOptions RunConfig::eval_options() const {
    EvalOptions o;
    o.coupling = coupling_form;
    o.det_floor = det_floor;
    o.retardation.tol_lc = tol_lc;
    o.retardation.r_min = r_min;
    return o;
}

void RunConfig::validate() const {
    if (!(inner_step > 0.0)) throw Error(ErrorKind::InvalidConfig, "inner_step must be > 0");
    if (!(window >= inner_step)) throw Error(ErrorKind::InvalidConfig, "window must be >= inner_step");
    if (!(picard_tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "picard_tol must be > 0");
    if (picard_max_iter < 1) throw Error(ErrorKind::InvalidConfig, "picard_max_iter must be >= 1");
    if (!(t_end > 0.0)) throw Error(ErrorKind::InvalidConfig, "t_end must be > 0");
    if (!(det_floor > 0.0)) throw Error(ErrorKind::InvalidConfig, "det_floor must be > 0");
    if (!(v_cap > 0.0 && v_cap < 1.0)) throw Error(ErrorKind::InvalidConfig, "v_cap must lie in (0, 1)");
}

namespace {

std::vector<ChargeEval> evaluate_all(const TrajectoryView& view, double t, std::span<const State> states,
                                     const EvalOptions& opts, WorkerPool& pool) {
    std::vector<ChargeEval> out(states.size());
    pool.parallel_for(states.size(), [&](std::size_t j) { out[j] = evaluate_charge(view, j, t, states, opts); });
    return out;
}

std::vector<State> advance(std::span<const State> y, std::span<const State> slope, double dt) {
    std::vector<State> out(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) out[j] = {y[j].r + dt * slope[j].r, y[j].v + dt * slope[j].v};
    return out;
}

std::vector<State> derivative(std::span<const State> y, std::span<const ChargeEval> ev) {
    std::vector<State> out(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) out[j] = {y[j].v, ev[j].a};
    return out;
}

/// Jerk at the newest sample from backward differences over at most four
/// nodes drawn from the committed tail followed by the window so far.
Vec3 sample_jerk(const TrajectoryHistory& hist, std::span<const Sample> window, std::size_t upto, std::size_t j) {
    std::array<double, 4> t{};
    std::array<Vec3, 4> a{};
    std::size_t n = 0;
    // window[0] duplicates the committed frontier, so the committed tail
    // continues from committed().size() - 2.
    for (std::size_t i = upto + 1; i-- > 0 && n < 4;) {
        t[3 - n] = window[i].t;
        a[3 - n] = window[i].charges[j].a;
        ++n;
    }
    const auto& com = hist.committed();
    for (std::size_t i = com.size() - 1; i-- > 0 && n < 4;) {
        t[3 - n] = com[i].t;
        a[3 - n] = com[i].charges[j].a;
        ++n;
    }
    return backward_derivative(std::span(t).subspan(4 - n), std::span<const Vec3>(a).subspan(4 - n));
}

}  // namespace

PicardOutcome picard_window(const TrajectoryHistory& history, const RunConfig& cfg, std::size_t n_steps,
                            double t_final, WorkerPool& pool) {
    const Sample& front = history.frontier_sample();
    const double T = front.t;
    const std::size_t n = history.size();
    const double c = history.constants().c;
    const double step = (t_final - T) / static_cast<double>(n_steps);
    auto time_at = [&](std::size_t i) { return i == n_steps ? t_final : T + static_cast<double>(i) * step; };
    const EvalOptions opts = cfg.eval_options();

    Window prev(n_steps + 1);
    prev[0] = front;
    for (std::size_t i = 1; i <= n_steps; ++i) {
        prev[i].t = time_at(i);
        prev[i].charges.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& f = front.charges[j];
            prev[i].charges[j] = {f.r + (prev[i].t - T) * f.v, f.v, {}, {}};
        }
    }

    PicardOutcome out;
    for (int iter = 0; iter < cfg.picard_max_iter; ++iter) {
        const TrajectoryView view(history, prev);
        Window next(n_steps + 1);
        next[0] = front;
        std::vector<std::vector<ChargeEval>> evals(n_steps + 1);

        std::vector<State> y(n);
        for (std::size_t j = 0; j < n; ++j) y[j] = {front.charges[j].r, front.charges[j].v};
        std::vector<ChargeEval> e1 = evaluate_all(view, T, y, opts, pool);

        for (std::size_t i = 0; i < n_steps; ++i) {
            const double t0 = time_at(i);
            const double t1 = time_at(i + 1);
            const double h = t1 - t0;
            const double tm = t0 + 0.5 * h;

            const auto k1 = derivative(y, e1);
            const auto y2 = advance(y, k1, 0.5 * h);
            const auto k2 = derivative(y2, evaluate_all(view, tm, y2, opts, pool));
            const auto y3 = advance(y, k2, 0.5 * h);
            const auto k3 = derivative(y3, evaluate_all(view, tm, y3, opts, pool));
            const auto y4 = advance(y, k3, h);
            const auto k4 = derivative(y4, evaluate_all(view, t1, y4, opts, pool));

            for (std::size_t j = 0; j < n; ++j) {
                y[j].r += (h / 6.0) * (k1[j].r + 2.0 * k2[j].r + 2.0 * k3[j].r + k4[j].r);
                y[j].v += (h / 6.0) * (k1[j].v + 2.0 * k2[j].v + 2.0 * k3[j].v + k4[j].v);
            }
            e1 = evaluate_all(view, t1, y, opts, pool);

            next[i + 1].t = t1;
            next[i + 1].charges.resize(n);
            for (std::size_t j = 0; j < n; ++j) next[i + 1].charges[j] = {y[j].r, y[j].v, e1[j].a, {}};
            for (std::size_t j = 0; j < n; ++j) next[i + 1].charges[j].jerk = sample_jerk(history, next, i + 1, j);
            evals[i + 1] = e1;
        }

        const double d = sup_distance(next, prev, history.reference_length(), c);
        out.distances.push_back(d);
        if (d <= cfg.picard_tol) {
            out.samples = std::move(next);
            out.evals = std::move(evals);
            return out;
        }
        prev = std::move(next);
    }
    throw Error(ErrorKind::NoConvergence, "Picard iteration did not converge")
        .at(T)
        .value(out.distances.empty() ? 0.0 : out.distances.back());
}

std::optional<Terminator> detect_events(const StepRecord& rec, const RunConfig& cfg, double r_min,
                                        double speed_limit) {
    const int j = static_cast<int>(rec.charge);
    if (rec.min_distance < r_min) return Terminator{TerminatorKind::Collision, rec.t, j, -1, rec.min_distance};
    if (std::abs(rec.det_phi) < cfg.det_floor) return Terminator{TerminatorKind::SingularPhi, rec.t, j, -1, rec.det_phi};
    if (rec.speed >= speed_limit) return Terminator{TerminatorKind::SpeedCap, rec.t, j, -1, rec.speed};
    return std::nullopt;
}

std::vector<ChargeEval> check_initial(const TrajectoryHistory& history, const RunConfig& cfg) {
    const TrajectoryView view(history);
    const Sample& s0 = history.frontier_sample();
    std::vector<State> y;
    for (const auto& c : s0.charges) y.push_back({c.r, c.v});
    std::vector<ChargeEval> out(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        try {
            out[j] = evaluate_charge(view, j, s0.t, y, cfg.eval_options());
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Collision && e.kind() != ErrorKind::SingularPhi) throw;
            Error err(ErrorKind::InvalidInitial, std::string("t = 0 is singular: ") + e.what());
            err.at(0.0).pair(e.charge_index(), e.other_index()).value(e.offending_value());
            throw err;
        }
    }
    return out;
}

namespace {

TerminatorKind terminator_of(ErrorKind k) {
    switch (k) {
        case ErrorKind::Collision: return TerminatorKind::Collision;
        case ErrorKind::SingularPhi: return TerminatorKind::SingularPhi;
        case ErrorKind::SpeedViolation: return TerminatorKind::SpeedCap;
        default: return TerminatorKind::NoConvergence;
    }
}

EventKind event_of(TerminatorKind k) {
    switch (k) {
        case TerminatorKind::Collision: return EventKind::Collision;
        case TerminatorKind::SingularPhi: return EventKind::SingularPhi;
        case TerminatorKind::SpeedCap: return EventKind::SpeedCap;
        default: return EventKind::NoConvergence;
    }
}

double min_distance(const Sample& s, std::size_t j) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.charges.size(); ++k)
        if (k != j) d = std::min(d, norm(s.charges[j].r - s.charges[k].r));
    return d;
}

double light_cone_metric(std::span<const RetardedGeometry> geoms, double c) {
    double m = 0.0;
    for (const auto& g : geoms)
        m = std::max(m, std::abs(g.rho - c * (g.t - g.s)) / std::max(1.0, c * std::abs(g.t)));
    return m;
}

StepRecord make_record(const Sample& s, std::size_t j, const ChargeEval& ev, double c) {
    StepRecord r;
    r.t = s.t;
    r.charge = j;
    r.det_phi = ev.det;
    r.det_other = ev.det_other;
    r.min_rho = ev.min_rho;
    r.min_distance = min_distance(s, j);
    r.speed = ev.speed;
    r.light_cone = light_cone_metric(ev.geoms, c);
    return r;
}

}  // namespace

RunResult run(TrajectoryHistory initial, const RunConfig& cfg) {
    cfg.validate();
    WorkerPool pool(cfg.workers);
    const double c = initial.constants().c;
    const std::size_t n = initial.size();
    const EvalOptions opts = cfg.eval_options();
    const double r_min = collision_radius(TrajectoryView(initial), opts.retardation);

    const auto init = check_initial(initial, cfg);
    {
        std::vector<Vec3> a0;
        for (const auto& e : init) a0.push_back(e.a);
        initial.seed_frontier_acceleration(a0);
    }

    RunResult res{std::move(initial), 0.0, {}, {}, {}, {}, 0.0, 0.0};
    TrajectoryHistory& hist = res.history;
    const auto& charges = hist.charges();

    std::vector<double> last_det(n);
    for (std::size_t j = 0; j < n; ++j) {
        StepRecord r = make_record(hist.frontier_sample(), j, init[j], c);
        const auto kin = kinematics(hist.frontier_sample().charges[j].v, charges[j].m0, c);
        const auto mr = momentum_residual(j, init[j].geoms, kin, init[j].a, charges, hist.constants());
        r.residual = mr.abs / (charges[j].m0 * c * c / hist.reference_length());
        res.max_residual = std::max(res.max_residual, r.residual);
        res.max_light_cone = std::max(res.max_light_cone, r.light_cone);
        last_det[j] = r.det_phi;
        res.steps.push_back(r);
    }

    const double h = cfg.inner_step;
    const std::size_t nominal = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.window / h)));
    const std::size_t min_steps = std::min<std::size_t>(4, nominal);
    std::size_t cur = nominal;

    while (hist.frontier() < cfg.t_end) {
        const double T = hist.frontier();
        const auto rem_steps =
            static_cast<std::size_t>(std::max(1.0, std::ceil((cfg.t_end - T) / h - 1e-9)));
        const std::size_t steps = std::min(cur, rem_steps);
        const double t_final = steps == rem_steps ? cfg.t_end : T + static_cast<double>(steps) * h;

        PicardOutcome win;
        try {
            win = picard_window(hist, cfg, steps, t_final, pool);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::OutOfRange || e.kind() == ErrorKind::InvalidConfig) throw;
            if (steps > min_steps) {
                cur = std::max(min_steps, steps / 2);
                res.events.push_back({T, EventKind::WindowHalved, -1, -1, static_cast<double>(cur) * h});
                continue;
            }
            const TerminatorKind kind = terminator_of(e.kind());
            const double t = std::isnan(e.time()) ? T : e.time();
            res.terminator = {kind, t, e.charge_index(), e.other_index(), e.offending_value()};
            Event ev{t, event_of(kind), e.charge_index(), e.other_index(), std::nullopt};
            if (!std::isnan(e.offending_value())) ev.value = e.offending_value();
            res.events.push_back(ev);
            break;
        }

        hist.append_window(win.samples);

        WindowRecord wr{T, t_final, win.distances};
        const int iters = wr.iterations();
        double ratio = 0.0;
        if (win.distances.size() >= 2 && win.distances[win.distances.size() - 2] > 0.0)
            ratio = win.distances.back() / win.distances[win.distances.size() - 2];
        res.windows.push_back(std::move(wr));

        // Momentum-force residual on the committed history with the stored accelerations.
        const TrajectoryView view(hist);
        std::optional<Terminator> stop;
        for (std::size_t i = 1; i < win.samples.size() && !stop; ++i) {
            const Sample& s = win.samples[i];
            std::vector<double> resid(n);
            std::vector<double> lc(n);
            pool.parallel_for(n, [&](std::size_t j) {
                std::vector<RetardedGeometry> geoms;
                const State obs{s.charges[j].r, s.charges[j].v};
                for (std::size_t k = 0; k < n; ++k)
                    if (k != j) geoms.push_back(geometry(view, j, k, s.t, obs, opts.retardation));
                const auto kin = kinematics(obs.v, charges[j].m0, c);
                const auto mr = momentum_residual(j, geoms, kin, s.charges[j].a, charges, hist.constants());
                resid[j] = mr.abs / (charges[j].m0 * c * c / hist.reference_length());
                lc[j] = light_cone_metric(geoms, c);
            });
            for (std::size_t j = 0; j < n; ++j) {
                const ChargeEval& ev = win.evals[i][j];
                StepRecord r = make_record(s, j, ev, c);
                r.residual = resid[j];
                r.light_cone = std::max(r.light_cone, lc[j]);
                r.picard_iters = iters;
                r.contraction_ratio = ratio;
                res.max_residual = std::max(res.max_residual, r.residual);
                res.max_light_cone = std::max(res.max_light_cone, r.light_cone);
                if (ev.clamped > 0) res.events.push_back({s.t, EventKind::WarningClamp, int(j), -1, double(ev.clamped)});
                if (std::abs(r.det_phi - last_det[j]) > 0.5 * std::abs(last_det[j]))
                    res.events.push_back({s.t, EventKind::DetJump, int(j), -1, r.det_phi});
                last_det[j] = r.det_phi;
                if (!stop) stop = detect_events(r, cfg, r_min, hist.speed_limit());
                res.steps.push_back(r);
            }
        }
        if (stop) {
            res.terminator = *stop;
            res.events.push_back({stop->t, event_of(stop->kind), stop->charge, stop->other, stop->value});
            break;
        }
        cur = std::min(nominal, cur * 2);
    }

    res.T_max = hist.frontier();
    if (res.terminator.kind == TerminatorKind::Completed) res.terminator.t = res.T_max;
    return res;
}

}  // namespace feynbody
