#include "feynbody/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "feynbody/errors.hpp"
#include "feynbody/validation.hpp"

namespace feynbody {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::InvalidConfig, (path.empty() ? std::string("config") : path) + ": " + msg);
}

/// Typed access to one JSON object, tracking its path and rejecting keys
/// that are never read.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) config_error(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key) {
        const json& v = get(key);
        if (!v.is_number()) config_error(sub(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key, long long fallback) {
        if (!has(key)) return fallback;
        const json& v = get(key);
        if (!v.is_number_integer()) config_error(sub(key), "expected an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = get(key);
        if (!v.is_boolean()) config_error(sub(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key) {
        const json& v = get(key);
        if (!v.is_string()) config_error(sub(key), "expected a string");
        return v.get<std::string>();
    }
    std::string text(const std::string& key, const std::string& fallback) {
        return has(key) ? text(key) : fallback;
    }

    Vec3 vec(const std::string& key) {
        const json& v = get(key);
        if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
            config_error(sub(key), "expected an array of three numbers");
        return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }
    Vec3 vec(const std::string& key, Vec3 fallback) { return has(key) ? vec(key) : fallback; }

    Node object(const std::string& key) { return Node(get(key), sub(key)); }

    const json& array(const std::string& key) {
        const json& v = get(key);
        if (!v.is_array()) config_error(sub(key), "expected an array");
        return v;
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const std::string& path() const { return path_; }

    void finish() const {
        for (const auto& [key, _] : j_.items())
            if (!used_.count(key)) config_error(sub(key), "unknown key");
    }

private:
    const json& get(const std::string& key) {
        if (!j_.contains(key)) config_error(sub(key), "required key is missing");
        used_.insert(key);
        return j_.at(key);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

PastSpec parse_past(Node node, const std::string& label, const std::filesystem::path& base_dir) {
    const std::string kind = node.text("kind");
    PastSpec out;
    if (kind == "rest") {
        out = past::Rest{node.vec("r")};
    } else if (kind == "uniform") {
        out = past::Uniform{node.vec("r0"), node.vec("v")};
    } else if (kind == "circular") {
        past::Circular c;
        c.center = node.vec("center", {});
        c.radius = node.number("radius");
        c.omega = node.number("omega");
        c.phase = node.number("phase", 0.0);
        if (!(c.radius > 0.0)) config_error(node.sub("radius"), "must be > 0");
        out = c;
    } else if (kind == "table") {
        const auto path = base_dir / node.text("path");
        const std::string key = node.text("charge", label);
        std::ifstream in(path);
        if (!in) config_error(node.sub("path"), "cannot open '" + path.string() + "'");
        bool found = false;
        for (auto& [name, table] : read_past_table(in)) {
            if (name == key) {
                out = std::move(table);
                found = true;
            }
        }
        if (!found) config_error(node.sub("charge"), "no rows for charge '" + key + "' in " + path.string());
    } else {
        config_error(node.sub("kind"), "expected rest, uniform, circular or table");
    }
    node.finish();
    return out;
}

std::string csv_real(double x) { return format_real(x); }

}  // namespace

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidConfig, "config syntax error at " + line_col(text, e.byte) + ": " + e.what());
    }

    ScenarioConfig cfg;
    cfg.echo = doc;
    Node root(doc, "");
    RunConfig& r = cfg.run;

    const std::string units = root.text("units", "dimensionless");
    if (units == "dimensionless")
        r.units = UnitSystem::Dimensionless;
    else if (units == "SI")
        r.units = UnitSystem::SI;
    else
        config_error("units", "expected dimensionless or SI");

    const std::string form = root.text("coupling_form", "derived");
    if (form == "derived")
        r.coupling_form = CouplingForm::Derived;
    else if (form == "paper_literal")
        r.coupling_form = CouplingForm::PaperLiteral;
    else
        config_error("coupling_form", "expected derived or paper_literal");

    r.t_end = root.number("t_end");
    r.window = root.number("window", r.window);
    r.inner_step = root.number("inner_step", r.inner_step);
    r.picard_tol = root.number("picard_tol", r.picard_tol);
    r.picard_max_iter = static_cast<int>(root.integer("picard_max_iter", r.picard_max_iter));
    r.det_floor = root.number("det_floor", r.det_floor);
    r.r_min = root.number("r_min", r.r_min);
    r.v_cap = root.number("v_cap", r.v_cap);
    r.tol_lc = root.number("tol_lc", r.tol_lc);
    r.tol_res = root.number("tol_res", r.tol_res);
    const long long workers = root.integer("workers", 1);
    if (workers < 1) config_error("workers", "must be >= 1");
    r.workers = static_cast<unsigned>(workers);
    cfg.history.v_cap = r.v_cap;
    cfg.history.l_ref = root.number("l_ref", 0.0);
    cfg.history.max_jump = root.number("max_velocity_jump", cfg.history.max_jump);
    try {
        r.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("config: ") + e.what());
    }

    const json& charges = root.array("charges");
    if (charges.empty()) config_error("charges", "at least one charge is required");
    for (std::size_t i = 0; i < charges.size(); ++i) {
        Node ch(charges[i], "charges[" + std::to_string(i) + "]");
        ChargeSpec spec;
        spec.label = ch.text("label", "q" + std::to_string(i));
        spec.q = ch.number("q");
        spec.m0 = ch.number("m0");
        if (!(spec.m0 > 0.0)) config_error(ch.sub("m0"), "must be > 0");
        cfg.pasts.push_back(parse_past(ch.object("past"), spec.label, base_dir));
        cfg.charges.push_back(std::move(spec));
        ch.finish();
    }

    if (root.has("output")) {
        Node out = root.object("output");
        cfg.out_dir = out.text("dir", "out");
        const long long stride = out.integer("stride", 1);
        if (stride < 1) config_error(out.sub("stride"), "must be >= 1");
        cfg.stride = static_cast<std::size_t>(stride);
        cfg.diagnostics = out.boolean("diagnostics", true);
        out.finish();
    }
    root.finish();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.parent_path());
}

TrajectoryHistory build_history(const ScenarioConfig& cfg) {
    return TrajectoryHistory::make_initial(cfg.charges, cfg.pasts, Constants::of(cfg.run.units), cfg.history);
}

// ---------------------------------------------------------------------------
// Output

void write_trajectory_csv(std::ostream& out, const RunResult& res, std::size_t stride) {
    out << "t,charge,rx,ry,rz,vx,vy,vz,ax,ay,az\n";
    const auto& samples = res.history.committed();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i % stride != 0 && i + 1 != samples.size()) continue;
        const Sample& s = samples[i];
        for (std::size_t j = 0; j < s.charges.size(); ++j) {
            const auto& c = s.charges[j];
            out << csv_real(s.t) << ',' << res.history.charges()[j].label;
            for (const Vec3* v : {&c.r, &c.v, &c.a})
                out << ',' << csv_real(v->x) << ',' << csv_real(v->y) << ',' << csv_real(v->z);
            out << '\n';
        }
    }
}

void write_diagnostics_csv(std::ostream& out, const RunResult& res, std::size_t stride) {
    out << "t,charge,det_phi,min_rho,speed,picard_iters,contraction_ratio\n";
    const std::size_t n = res.history.size();
    for (std::size_t idx = 0; idx < res.steps.size(); ++idx) {
        const std::size_t sample = idx / n;
        const bool last = idx + n >= res.steps.size();
        if (sample % stride != 0 && !last) continue;
        const StepRecord& r = res.steps[idx];
        out << csv_real(r.t) << ',' << res.history.charges()[r.charge].label << ',' << csv_real(r.det_phi) << ','
            << csv_real(r.min_rho) << ',' << csv_real(r.speed) << ',' << r.picard_iters << ','
            << csv_real(r.contraction_ratio) << '\n';
    }
}

void write_events_jsonl(std::ostream& out, const RunResult& res) {
    for (const Event& e : res.events) {
        json j = {{"t", e.t}, {"kind", to_string(e.kind)}};
        if (e.other >= 0)
            j["pair"] = {e.charge, e.other};
        else if (e.charge >= 0)
            j["charge"] = e.charge;
        if (e.value) j["value"] = *e.value;
        out << j.dump() << '\n';
    }
}

json summary_json(const RunResult& res, const ScenarioConfig& cfg, double wall_seconds) {
    json term = {{"kind", to_string(res.terminator.kind)}, {"t", res.terminator.t}};
    if (res.terminator.charge >= 0) term["charge"] = res.terminator.charge;
    if (res.terminator.other >= 0) term["other"] = res.terminator.other;
    if (res.terminator.kind != TerminatorKind::Completed && std::isfinite(res.terminator.value))
        term["value"] = res.terminator.value;
    double min_det = std::numeric_limits<double>::infinity();
    double min_det_other = std::numeric_limits<double>::infinity();
    for (const auto& s : res.steps) {
        min_det = std::min(min_det, std::abs(s.det_phi));
        min_det_other = std::min(min_det_other, std::abs(s.det_other));
    }
    return {{"terminator", term},
            {"T_max", res.T_max},
            {"wall_time_s", wall_seconds},
            {"coupling_form", to_string(cfg.run.coupling_form)},
            {"units", to_string(cfg.run.units)},
            {"windows", res.windows.size()},
            {"max_momentum_residual", res.max_residual},
            {"max_light_cone_residual", res.max_light_cone},
            {"min_abs_det_phi", min_det},
            {"min_abs_det_phi_other_form", min_det_other},
            {"config", cfg.echo}};
}

void write_outputs(const std::filesystem::path& dir, const RunResult& res, const ScenarioConfig& cfg,
                   double wall_seconds) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "trajectory.csv");
        write_trajectory_csv(f, res, cfg.stride);
    }
    if (cfg.diagnostics) {
        std::ofstream f(dir / "diagnostics.csv");
        write_diagnostics_csv(f, res, cfg.stride);
    }
    {
        std::ofstream f(dir / "events.jsonl");
        write_events_jsonl(f, res);
    }
    {
        std::ofstream f(dir / "summary.json");
        f << summary_json(res, cfg, wall_seconds).dump(2) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Commands

InspectReport inspect(const ScenarioConfig& cfg) {
    const auto hist = build_history(cfg);
    const auto& s0 = hist.frontier_sample();
    const double c = hist.constants().c;
    InspectReport rep;
    rep.min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < s0.charges.size(); ++a) {
        rep.speeds.push_back(norm(s0.charges[a].v) / c);
        for (std::size_t b = a + 1; b < s0.charges.size(); ++b)
            rep.min_distance = std::min(rep.min_distance, norm(s0.charges[a].r - s0.charges[b].r));
    }
    try {
        for (const auto& e : check_initial(hist, cfg.run)) rep.det_phi.push_back(e.det);
        rep.verdict = "nonsingular";
    } catch (const Error& e) {
        rep.singular = true;
        const std::string what = e.what();
        rep.verdict = what.find("collide") != std::string::npos ? "singular: collision at t=0"
                                                                 : "singular: det Phi below floor at t=0";
    }
    return rep;
}

int cmd_run(const std::filesystem::path& config, std::optional<unsigned> workers,
            std::optional<std::filesystem::path> out_dir, std::ostream& log) {
    ScenarioConfig cfg;
    std::optional<TrajectoryHistory> hist;
    try {
        cfg = load_scenario(config);
        if (workers) cfg.run.workers = *workers;
        if (out_dir) cfg.out_dir = *out_dir;
        hist.emplace(build_history(cfg));
    } catch (const Error& e) {
        log << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return 1;
    }

    const auto start = std::chrono::steady_clock::now();
    std::optional<RunResult> out;
    try {
        out.emplace(run(std::move(*hist), cfg.run));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidInitial) throw;
        log << "error: " << e.what() << '\n';
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream(cfg.out_dir / "summary.json")
            << json{{"terminator", {{"kind", "invalid_initial"}, {"t", 0.0}, {"message", e.what()}}},
                    {"T_max", 0.0},
                    {"coupling_form", to_string(cfg.run.coupling_form)},
                    {"config", cfg.echo}}
                   .dump(2)
            << '\n';
        return 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const RunResult& res = *out;
    write_outputs(cfg.out_dir, res, cfg, wall);
    log << "terminator: " << to_string(res.terminator.kind) << " T_max = " << format_real(res.T_max)
        << " coupling_form = " << to_string(cfg.run.coupling_form) << '\n';
    return res.terminator.kind == TerminatorKind::Completed ? 0 : 2;
}

int cmd_validate(const std::string& suite, const std::filesystem::path& out_dir, CouplingForm form,
                 std::ostream& log) {
    std::vector<std::string> names;
    if (suite == "all") {
        names = oracle_names();
    } else {
        const auto known = oracle_names();
        if (std::find(known.begin(), known.end(), suite) == known.end()) {
            log << "error: unknown suite '" << suite << "' (expected all, derivative, uniform or gamma)\n";
            return 1;
        }
        names = {suite};
    }
    std::filesystem::create_directories(out_dir);
    bool ok = true;
    for (const auto& name : names) {
        const OracleReport rep = run_oracle(name, form);
        std::ofstream(out_dir / (name + ".json")) << rep.to_json().dump(2) << '\n';
        log << (rep.pass ? "PASS " : "FAIL ") << name << '\n';
        ok = ok && rep.pass;
    }
    return ok ? 0 : 3;
}

int cmd_inspect(const std::filesystem::path& config, std::ostream& log) {
    ScenarioConfig cfg;
    InspectReport rep;
    try {
        cfg = load_scenario(config);
        rep = inspect(cfg);
    } catch (const Error& e) {
        log << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return 1;
    }
    log << "min pairwise distance: " << format_real(rep.min_distance) << '\n';
    for (std::size_t j = 0; j < cfg.charges.size(); ++j) {
        log << cfg.charges[j].label << ": speed " << format_real(rep.speeds[j]) << " c";
        if (j < rep.det_phi.size()) log << ", det Phi " << format_real(rep.det_phi[j]);
        log << '\n';
    }
    log << rep.verdict << '\n';
    return rep.singular ? 2 : 0;
}

}  // namespace feynbody
