#include "feynbody/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "feynbody/errors.hpp"

namespace feynbody {

namespace {

struct HermiteBasis {
    double h00, h10, h01, h11;
};

HermiteBasis hermite_basis(double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return {2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2};
}

Vec3 hermite(const HermiteBasis& b, double span, const Vec3& p0, const Vec3& m0, const Vec3& p1,
             const Vec3& m1) {
    return b.h00 * p0 + (b.h10 * span) * m0 + b.h01 * p1 + (b.h11 * span) * m1;
}

/// Derivative at node `at` of the Lagrange polynomial through all nodes.
Vec3 lagrange_derivative(std::span<const double> t, std::span<const Vec3> y, std::size_t at) {
    const std::size_t n = t.size();
    Vec3 out;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.0;
        if (i == at) {
            for (std::size_t m = 0; m < n; ++m)
                if (m != at) w += 1.0 / (t[at] - t[m]);
        } else {
            double num = 1.0;
            double den = 1.0;
            for (std::size_t m = 0; m < n; ++m) {
                if (m != i) den *= t[i] - t[m];
                if (m != i && m != at) num *= t[at] - t[m];
            }
            w = num / den;
        }
        out += w * y[i];
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidConfig,
                    "past table line " + std::to_string(line) + ": not a number: '" + s + "'");
    }
}

}  // namespace

std::vector<std::pair<std::string, past::Table>> read_past_table(std::istream& in) {
    static const std::vector<std::string> header = {"t", "charge", "rx", "ry", "rz", "vx", "vy", "vz"};
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw Error(ErrorKind::InvalidConfig, "past table: empty input");
    ++lineno;
    if (split_csv(line) != header)
        throw Error(ErrorKind::InvalidConfig, "past table: header must be t,charge,rx,ry,rz,vx,vy,vz");

    std::vector<std::pair<std::string, past::Table>> out;
    std::map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw Error(ErrorKind::InvalidConfig,
                        "past table line " + std::to_string(lineno) + ": expected 8 columns");
        const double t = parse_double(cells[0], lineno);
        if (t > 0.0)
            throw Error(ErrorKind::InvalidConfig,
                        "past table line " + std::to_string(lineno) + ": time must be <= 0");
        auto [it, inserted] = index.try_emplace(cells[1], out.size());
        if (inserted) out.emplace_back(cells[1], past::Table{});
        auto& table = out[it->second].second;
        if (!table.t.empty() && !(t > table.t.back()))
            throw Error(ErrorKind::InvalidConfig, "past table line " + std::to_string(lineno) +
                                                      ": times must increase strictly per charge");
        table.t.push_back(t);
        table.states.push_back({{parse_double(cells[2], lineno), parse_double(cells[3], lineno),
                                 parse_double(cells[4], lineno)},
                                {parse_double(cells[5], lineno), parse_double(cells[6], lineno),
                                 parse_double(cells[7], lineno)}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// PastMotion

PastMotion::PastMotion(PastSpec spec, double c, double max_jump) : spec_(std::move(spec)) {
    if (const auto* table = std::get_if<past::Table>(&spec_)) {
        const std::size_t n = table->t.size();
        if (n == 0 || table->states.size() != n)
            throw Error(ErrorKind::InvalidConfig, "past table: no samples");
        if (table->t.back() != 0.0)
            throw Error(ErrorKind::InvalidConfig, "past table: last sample must be at t = 0");
        for (std::size_t i = 1; i < n; ++i) {
            if (!(table->t[i] > table->t[i - 1]))
                throw Error(ErrorKind::InvalidConfig, "past table: times must increase strictly");
            const double jump = norm(table->states[i].v - table->states[i - 1].v) / c;
            if (jump > max_jump)
                throw Error(ErrorKind::DiscontinuousPast, "past table: velocity jump of " +
                                                              std::to_string(jump) + " c at t = " +
                                                              std::to_string(table->t[i]))
                    .at(table->t[i])
                    .value(jump);
        }
        std::vector<Vec3> vel(n);
        for (std::size_t i = 0; i < n; ++i) vel[i] = table->states[i].v;
        table_acc_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (n == 1) break;
            const std::size_t lo = i == 0 ? 0 : (i + 1 == n ? (n >= 3 ? n - 3 : 0) : i - 1);
            const std::size_t cnt = std::min<std::size_t>(3, n);
            table_acc_[i] = lagrange_derivative(std::span(table->t).subspan(lo, cnt),
                                                std::span<const Vec3>(vel).subspan(lo, cnt), i - lo);
        }
    }
}

State PastMotion::state(double t) const {
    return std::visit(
        [t, this](const auto& p) -> State {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, past::Rest>) {
                return {p.r, {}};
            } else if constexpr (std::is_same_v<T, past::Uniform>) {
                return {p.r0 + t * p.v, p.v};
            } else if constexpr (std::is_same_v<T, past::Circular>) {
                const double ph = p.omega * t + p.phase;
                const double c = std::cos(ph);
                const double s = std::sin(ph);
                return {p.center + Vec3{p.radius * c, p.radius * s, 0.0},
                        {-p.radius * p.omega * s, p.radius * p.omega * c, 0.0}};
            } else {
                if (t <= p.t.front()) {
                    const State& f = p.states.front();
                    return {f.r + (t - p.t.front()) * f.v, f.v};
                }
                const auto it = std::lower_bound(p.t.begin(), p.t.end(), t);
                const std::size_t i1 = static_cast<std::size_t>(it - p.t.begin());
                if (p.t[i1] == t) return p.states[i1];
                const std::size_t i0 = i1 - 1;
                const double span = p.t[i1] - p.t[i0];
                const auto b = hermite_basis((t - p.t[i0]) / span);
                const State& a = p.states[i0];
                const State& z = p.states[i1];
                return {hermite(b, span, a.r, a.v, z.r, z.v),
                        hermite(b, span, a.v, table_acc_[i0], z.v, table_acc_[i1])};
            }
        },
        spec_);
}

Vec3 PastMotion::acc(double t) const {
    return std::visit(
        [t, this](const auto& p) -> Vec3 {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, past::Rest> || std::is_same_v<T, past::Uniform>) {
                return {};
            } else if constexpr (std::is_same_v<T, past::Circular>) {
                const double ph = p.omega * t + p.phase;
                const double w2 = p.omega * p.omega;
                return {-p.radius * w2 * std::cos(ph), -p.radius * w2 * std::sin(ph), 0.0};
            } else {
                if (t < p.t.front()) return {};
                const auto it = std::lower_bound(p.t.begin(), p.t.end(), t);
                const std::size_t i1 = static_cast<std::size_t>(it - p.t.begin());
                if (p.t[i1] == t) return table_acc_[i1];
                const std::size_t i0 = i1 - 1;
                const double s = (t - p.t[i0]) / (p.t[i1] - p.t[i0]);
                return (1.0 - s) * table_acc_[i0] + s * table_acc_[i1];
            }
        },
        spec_);
}

Vec3 PastMotion::jerk(double t) const {
    if (const auto* p = std::get_if<past::Circular>(&spec_)) {
        const double ph = p->omega * t + p->phase;
        const double w3 = p->omega * p->omega * p->omega;
        return {p->radius * w3 * std::sin(ph), -p->radius * w3 * std::cos(ph), 0.0};
    }
    return {};
}

double PastMotion::max_speed() const {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, past::Rest>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, past::Uniform>) {
                return norm(p.v);
            } else if constexpr (std::is_same_v<T, past::Circular>) {
                return std::abs(p.radius * p.omega);
            } else {
                double m = 0.0;
                for (const auto& s : p.states) m = std::max(m, norm(s.v));
                return m;
            }
        },
        spec_);
}

// ---------------------------------------------------------------------------
// Dense output

ChargeSample hermite_eval(const Sample& s0, const Sample& s1, std::size_t j, double t) {
    if (t == s0.t) return s0.charges[j];
    if (t == s1.t) return s1.charges[j];
    const double span = s1.t - s0.t;
    const auto b = hermite_basis((t - s0.t) / span);
    const ChargeSample& a = s0.charges[j];
    const ChargeSample& z = s1.charges[j];
    // Jerk is the derivative of the acceleration cubic.
    const double s = (t - s0.t) / span;
    const double d00 = (6.0 * s * s - 6.0 * s) / span;
    const double d10 = 3.0 * s * s - 4.0 * s + 1.0;
    const double d01 = -d00;
    const double d11 = 3.0 * s * s - 2.0 * s;
    return {hermite(b, span, a.r, a.v, z.r, z.v), hermite(b, span, a.v, a.a, z.v, z.a),
            hermite(b, span, a.a, a.jerk, z.a, z.jerk),
            d00 * a.a + d10 * a.jerk + d01 * z.a + d11 * z.jerk};
}

ChargeSample interpolate(std::span<const Sample> samples, std::size_t j, double t) {
    const auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                     [](const Sample& s, double x) { return s.t < x; });
    if (it == samples.end() || (it == samples.begin() && it->t != t))
        throw Error(ErrorKind::OutOfRange, "interpolation time outside sampled range").at(t);
    if (it->t == t) return it->charges[j];
    return hermite_eval(*(it - 1), *it, j, t);
}

Vec3 backward_derivative(std::span<const double> t, std::span<const Vec3> y) {
    if (t.size() < 2) return {};
    return lagrange_derivative(t, y, t.size() - 1);
}

// ---------------------------------------------------------------------------
// TrajectoryHistory

TrajectoryHistory TrajectoryHistory::make_initial(std::vector<ChargeSpec> charges, std::vector<PastSpec> pasts,
                                                  const Constants& constants, const HistoryOptions& opts) {
    if (charges.empty()) throw Error(ErrorKind::EmptySystem, "no charges");
    if (pasts.size() != charges.size())
        throw Error(ErrorKind::InvalidConfig, "one past trajectory per charge required");
    if (!(opts.v_cap > 0.0 && opts.v_cap < 1.0))
        throw Error(ErrorKind::InvalidConfig, "v_cap must lie in (0, 1)");

    std::set<std::string> labels;
    for (std::size_t j = 0; j < charges.size(); ++j) {
        const auto& ch = charges[j];
        if (!(ch.m0 > 0.0) || !std::isfinite(ch.m0))
            throw Error(ErrorKind::InvalidConfig, "charge '" + ch.label + "': m0 must be > 0").charge(int(j));
        if (!std::isfinite(ch.q))
            throw Error(ErrorKind::InvalidConfig, "charge '" + ch.label + "': q must be finite").charge(int(j));
        if (!labels.insert(ch.label).second)
            throw Error(ErrorKind::InvalidConfig, "duplicate charge label '" + ch.label + "'").charge(int(j));
    }

    TrajectoryHistory h;
    h.constants_ = constants;
    h.v_cap_ = opts.v_cap;
    h.charges_ = std::move(charges);
    h.pasts_.reserve(pasts.size());
    for (std::size_t j = 0; j < pasts.size(); ++j) {
        h.pasts_.emplace_back(std::move(pasts[j]), constants.c, opts.max_jump);
        const double vmax = h.pasts_.back().max_speed();
        if (vmax >= h.speed_limit())
            throw Error(ErrorKind::SpeedViolation, "charge '" + h.charges_[j].label + "': past speed " +
                                                       std::to_string(vmax / constants.c) +
                                                       " c reaches the cap")
                .charge(int(j))
                .value(vmax);
    }

    Sample s0;
    s0.t = 0.0;
    for (const auto& p : h.pasts_) {
        const State st = p.state(0.0);
        s0.charges.push_back({st.r, st.v, p.acc(0.0), p.jerk(0.0)});
    }
    h.committed_.push_back(std::move(s0));

    if (opts.l_ref > 0.0) {
        h.l_ref_ = opts.l_ref;
    } else {
        double dmin = std::numeric_limits<double>::infinity();
        double dmax = 0.0;
        const auto& cs = h.committed_.front().charges;
        for (std::size_t a = 0; a < cs.size(); ++a)
            for (std::size_t b = a + 1; b < cs.size(); ++b) {
                const double d = norm(cs[a].r - cs[b].r);
                dmin = std::min(dmin, d);
                dmax = std::max(dmax, d);
            }
        // Single charge: unit length. Co-located charges: fall back to the
        // largest separation so the collision radius stays meaningful.
        h.l_ref_ = std::isfinite(dmin) && dmin > 0.0 ? dmin : (dmax > 0.0 ? dmax : 1.0);
    }
    return h;
}

ChargeSample TrajectoryHistory::eval(std::size_t j, double t) const {
    if (t > frontier())
        throw Error(ErrorKind::OutOfRange, "evaluation beyond the frontier").at(t).charge(int(j));
    if (t < 0.0) {
        const auto& p = pasts_[j];
        const State s = p.state(t);
        return {s.r, s.v, p.acc(t), p.jerk(t)};
    }
    return interpolate(committed_, j, t);
}

State TrajectoryHistory::eval_state(std::size_t j, double t) const {
    const auto s = eval(j, t);
    return {s.r, s.v};
}

Vec3 TrajectoryHistory::eval_acc(std::size_t j, double t) const { return eval(j, t).a; }

void TrajectoryHistory::seed_frontier_acceleration(std::span<const Vec3> acc) {
    if (committed_.size() != 1)
        throw Error(ErrorKind::JunctionMismatch, "initial acceleration can only be seeded before stepping");
    if (acc.size() != size()) throw Error(ErrorKind::GridMismatch, "acceleration count mismatch");
    for (std::size_t j = 0; j < size(); ++j) {
        committed_.front().charges[j].a = acc[j];
        committed_.front().charges[j].jerk = {};
    }
}

void TrajectoryHistory::append_window(std::span<const Sample> window) {
    if (window.size() < 2) throw Error(ErrorKind::GridMismatch, "window needs at least two samples");
    const Sample& junction = window.front();
    const Sample& front = frontier_sample();
    const double T = front.t;
    if (std::abs(junction.t - T) > 1e-12 * std::max(1.0, std::abs(T)))
        throw Error(ErrorKind::JunctionMismatch, "window does not start at the frontier").at(junction.t);
    for (const auto& s : window) {
        if (s.charges.size() != size()) throw Error(ErrorKind::GridMismatch, "charge count mismatch").at(s.t);
    }
    for (std::size_t j = 0; j < size(); ++j) {
        const double gap = norm(junction.charges[j].r - front.charges[j].r) / l_ref_ +
                           norm(junction.charges[j].v - front.charges[j].v) / constants_.c;
        if (gap > 1e-12)
            throw Error(ErrorKind::JunctionMismatch, "window state differs from the frontier state")
                .at(T)
                .charge(int(j))
                .value(gap);
    }
    double prev = T;
    for (std::size_t i = 1; i < window.size(); ++i) {
        if (!(window[i].t > prev))
            throw Error(ErrorKind::GridMismatch, "window times must increase strictly").at(window[i].t);
        prev = window[i].t;
        for (std::size_t j = 0; j < size(); ++j) {
            const double sp = norm(window[i].charges[j].v);
            if (!(sp < speed_limit()))
                throw Error(ErrorKind::SpeedViolation, "window sample reaches the speed cap")
                    .at(window[i].t)
                    .charge(int(j))
                    .value(sp);
        }
    }
    committed_.insert(committed_.end(), window.begin() + 1, window.end());
}

double sup_distance(std::span<const Sample> a, std::span<const Sample> b, double l_ref, double c) {
    if (a.size() != b.size()) throw Error(ErrorKind::GridMismatch, "iterates have different lengths");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].t != b[i].t || a[i].charges.size() != b[i].charges.size())
            throw Error(ErrorKind::GridMismatch, "iterates are on different grids").at(a[i].t);
        for (std::size_t j = 0; j < a[i].charges.size(); ++j) {
            const auto& x = a[i].charges[j];
            const auto& y = b[i].charges[j];
            d = std::max(d, norm(x.r - y.r) / l_ref + norm(x.v - y.v) / c);
        }
    }
    return d;
}

}  // namespace feynbody
