#ifndef IRSOOB_EXPERIMENT_HPP
#define IRSOOB_EXPERIMENT_HPP

#include <algorithm>
#include <boost/version.hpp>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "irsoob/analytic_models.hpp"
#include "irsoob/simulation.hpp"
#include "json.hpp"

#define IRSOOB_VERSION "1.0.0"

namespace irsoob::exp {

using json = nlohmann::json;
using sim::Regime;
using sim::SchedulerKind;

class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Output { sumse, outage, ccdf, dominance, correlation_response, pf_gap };
enum class Summary { slope, peak };

inline std::string_view to_string(Output o) {
    switch (o) {
        case Output::sumse: return "sumse";
        case Output::outage: return "outage";
        case Output::ccdf: return "ccdf";
        case Output::dominance: return "dominance";
        case Output::correlation_response: return "correlation_response";
        case Output::pf_gap: return "pf_gap";
    }
    return "sumse";
}

inline std::string_view to_string(Summary s) { return s == Summary::slope ? "slope" : "peak"; }

inline std::string_view scheduler_token(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::round_robin: return "rr";
        case SchedulerKind::proportional_fair: return "pf";
        case SchedulerKind::max_rate: return "mr";
    }
    return "rr";
}

inline double default_c0_db(Regime r) { return r == Regime::sub6 ? -30.0 : -60.0; }

struct ExperimentSpec {
    Regime regime = Regime::sub6;
    SchedulerKind scheduler_x = SchedulerKind::round_robin;
    SchedulerKind scheduler_y = SchedulerKind::round_robin;
    channel::NodeGeometry geometry;
    channel::PathLossParams path_loss;
    std::vector<std::size_t> n{64};
    std::vector<double> snr_db{130.0};
    std::size_t l1 = 1;
    std::vector<std::size_t> l2{1};
    std::size_t k = 10;
    std::vector<std::size_t> q{10};
    std::size_t slots = 5000;
    std::size_t trials = 1;
    std::optional<std::uint64_t> seed;
    std::vector<double> tau{100.0, 1000.0, 10000.0};
    sim::AngleRedraw angles = sim::AngleRedraw::per_slot;
    std::vector<Output> outputs{Output::sumse};
    std::vector<Summary> summaries;
    std::vector<double> thresholds_db{-10.0};
    std::vector<double> ccdf_grid{0.0, 0.1, 0.2, 0.5, 1.0, 2.0};
    std::vector<std::vector<double>> correlation_angles{{0.52}};
    std::size_t correlation_trials = 1000;
    irs::GainModel correlation_gains = irs::GainModel::unit_modulus_random_phase;
    std::vector<channel::Point2> ues_x;
    std::vector<channel::Point2> ues_y;
    std::size_t n_cap = 1024;
    double budget = 1e7;
    std::size_t workers = 0;

    bool wants(Output o) const { return std::find(outputs.begin(), outputs.end(), o) != outputs.end(); }
    bool wants(Summary s) const { return std::find(summaries.begin(), summaries.end(), s) != summaries.end(); }
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw SpecError("spec: field '" + path + "' " + what);
}

inline std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

inline void check_keys(const json& j, const std::string& prefix, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) fail(prefix.empty() ? "<root>" : prefix, "must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw SpecError("spec: unknown field '" + join(prefix, it.key()) + "'");
        }
    }
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

inline std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "must be a non-negative integer");
    if (j.is_number_integer() && j.get<std::int64_t>() < 0) fail(path, "must be a non-negative integer");
    return j.get<std::size_t>();
}

inline std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "must be a string");
    return j.get<std::string>();
}

template <class F>
auto list_of(const json& j, const std::string& path, F item) {
    using T = decltype(item(j, path));
    std::vector<T> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], path + "[" + std::to_string(i) + "]"));
    } else {
        out.push_back(item(j, path));
    }
    return out;
}

inline channel::Point2 point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "must be a [x, y] pair");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline std::vector<channel::Point2> points(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "must be a list of [x, y] pairs");
    std::vector<channel::Point2> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline json point_json(channel::Point2 p) { return json::array({p.x, p.y}); }

inline json points_json(const std::vector<channel::Point2>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back(point_json(p));
    return a;
}

inline SchedulerKind scheduler(const json& j, const std::string& path) {
    const auto s = text(j, path);
    if (s == "rr") return SchedulerKind::round_robin;
    if (s == "pf") return SchedulerKind::proportional_fair;
    if (s == "mr") return SchedulerKind::max_rate;
    fail(path, "must be one of rr, pf, mr (got '" + s + "')");
}

inline Output output(const json& j, const std::string& path) {
    const auto s = text(j, path);
    for (auto o : {Output::sumse, Output::outage, Output::ccdf, Output::dominance, Output::correlation_response,
                   Output::pf_gap}) {
        if (s == to_string(o)) return o;
    }
    fail(path, "unknown output '" + s + "'");
}

inline Summary summary(const json& j, const std::string& path) {
    const auto s = text(j, path);
    if (s == "slope") return Summary::slope;
    if (s == "peak") return Summary::peak;
    fail(path, "must be slope or peak (got '" + s + "')");
}

inline void validate(const ExperimentSpec& s) {
    auto need = [](bool ok, const std::string& path, const std::string& what) {
        if (!ok) fail(path, what);
    };
    need(!s.n.empty(), "n", "must not be empty");
    need(!s.snr_db.empty(), "snr_db", "must not be empty");
    need(!s.l2.empty(), "l2", "must not be empty");
    need(!s.q.empty(), "q", "must not be empty");
    need(!s.outputs.empty(), "outputs", "must not be empty");
    need(!s.tau.empty(), "tau", "must not be empty");
    for (double g : s.snr_db) need(g >= 0.0 && g <= 200.0, "snr_db", "must lie in [0, 200] dB");
    for (auto n : s.n) {
        need(n <= s.n_cap, "n", "exceeds n_cap (" + std::to_string(s.n_cap) + ")");
        if (s.regime != Regime::sub6) need(n % 2 == 0, "n", "must be even in mmWave regimes");
    }
    need(s.l1 >= 1, "l1", "must be >= 1");
    for (auto l : s.l2) need(l >= 1, "l2", "must be >= 1");
    need(s.k >= 1, "k", "must be >= 1");
    for (auto q : s.q) need(q >= 1, "q", "must be >= 1");
    need(s.slots >= 1, "slots", "must be >= 1");
    need(s.trials >= 1, "trials", "must be >= 1");
    need(static_cast<double>(s.slots) * static_cast<double>(s.trials) <= s.budget, "slots",
         "times trials exceeds budget (" + std::to_string(s.budget) + ")");
    for (double t : s.tau) need(t >= 1.0, "tau", "must be >= 1");
    need(s.correlation_trials >= 100, "correlation_trials", "must be >= 100");
    for (const auto& set : s.correlation_angles) {
        need(!set.empty(), "correlation_angles", "sets must not be empty");
        for (double a : set) need(a >= -1.0 && a < 1.0, "correlation_angles", "angles must lie in [-1, 1)");
    }
    if (s.wants(Output::pf_gap)) need(s.regime == Regime::sub6, "outputs", "pf_gap is defined for sub6 only");
    try {
        s.path_loss.validate();
    } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("spec: field 'path_loss' invalid: ") + e.what());
    }
    const auto& r = s.geometry.ue_region;
    need(r.hi.x > r.lo.x && r.hi.y > r.lo.y, "geometry.ue_region", "must have hi > lo");
}

}  // namespace detail

// Parses a config object; absent fields take the defaults above.
inline ExperimentSpec parse_spec(const json& j) {
    using namespace detail;
    check_keys(j, "",
               {"regime", "scheduler", "scheduler_x", "geometry", "path_loss", "n", "snr_db", "l1", "l2", "k", "q",
                "slots", "trials", "seed", "tau", "angles", "outputs", "summaries", "thresholds_db", "ccdf_grid",
                "correlation_angles", "correlation_trials", "correlation_gains", "ues", "n_cap", "budget", "workers"});
    ExperimentSpec s;
    if (j.contains("regime")) {
        try {
            s.regime = sim::regime_from_string(text(j["regime"], "regime"));
        } catch (const std::invalid_argument& e) {
            fail("regime", e.what());
        }
    }
    if (j.contains("scheduler")) s.scheduler_y = scheduler(j["scheduler"], "scheduler");
    if (j.contains("scheduler_x")) s.scheduler_x = scheduler(j["scheduler_x"], "scheduler_x");
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        check_keys(g, "geometry", {"bs_x", "bs_y", "irs", "ue_region"});
        if (g.contains("bs_x")) s.geometry.bs_x = point(g["bs_x"], "geometry.bs_x");
        if (g.contains("bs_y")) s.geometry.bs_y = point(g["bs_y"], "geometry.bs_y");
        if (g.contains("irs")) s.geometry.irs = point(g["irs"], "geometry.irs");
        if (g.contains("ue_region")) {
            const auto& r = g["ue_region"];
            check_keys(r, "geometry.ue_region", {"lo", "hi"});
            if (r.contains("lo")) s.geometry.ue_region.lo = point(r["lo"], "geometry.ue_region.lo");
            if (r.contains("hi")) s.geometry.ue_region.hi = point(r["hi"], "geometry.ue_region.hi");
        }
    }
    s.path_loss.c0_db = default_c0_db(s.regime);
    if (j.contains("path_loss")) {
        const auto& p = j["path_loss"];
        check_keys(p, "path_loss", {"c0_db", "d0", "alpha_bs_irs", "alpha_irs_ue", "alpha_direct"});
        if (p.contains("c0_db")) s.path_loss.c0_db = number(p["c0_db"], "path_loss.c0_db");
        if (p.contains("d0")) s.path_loss.d0 = number(p["d0"], "path_loss.d0");
        if (p.contains("alpha_bs_irs")) s.path_loss.alpha_bs_irs = number(p["alpha_bs_irs"], "path_loss.alpha_bs_irs");
        if (p.contains("alpha_irs_ue")) s.path_loss.alpha_irs_ue = number(p["alpha_irs_ue"], "path_loss.alpha_irs_ue");
        if (p.contains("alpha_direct")) s.path_loss.alpha_direct = number(p["alpha_direct"], "path_loss.alpha_direct");
    }
    if (j.contains("n")) s.n = list_of(j["n"], "n", count);
    if (j.contains("snr_db")) s.snr_db = list_of(j["snr_db"], "snr_db", number);
    if (j.contains("l1")) s.l1 = count(j["l1"], "l1");
    if (j.contains("l2")) s.l2 = list_of(j["l2"], "l2", count);
    if (j.contains("k")) s.k = count(j["k"], "k");
    if (j.contains("q")) s.q = list_of(j["q"], "q", count);
    if (j.contains("slots")) s.slots = count(j["slots"], "slots");
    if (j.contains("trials")) s.trials = count(j["trials"], "trials");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0)) {
            fail("seed", "must be an unsigned 64-bit integer");
        }
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tau")) s.tau = list_of(j["tau"], "tau", number);
    if (j.contains("angles")) {
        const auto a = text(j["angles"], "angles");
        if (a == "per_slot") s.angles = sim::AngleRedraw::per_slot;
        else if (a == "per_trial") s.angles = sim::AngleRedraw::per_trial;
        else fail("angles", "must be per_slot or per_trial");
    }
    if (j.contains("outputs")) s.outputs = list_of(j["outputs"], "outputs", output);
    if (j.contains("summaries")) {
        s.summaries = j["summaries"].is_array() && j["summaries"].empty()
                          ? std::vector<Summary>{}
                          : list_of(j["summaries"], "summaries", summary);
    }
    if (j.contains("thresholds_db")) s.thresholds_db = list_of(j["thresholds_db"], "thresholds_db", number);
    if (j.contains("ccdf_grid")) s.ccdf_grid = list_of(j["ccdf_grid"], "ccdf_grid", number);
    if (j.contains("correlation_angles")) {
        const auto& c = j["correlation_angles"];
        if (!c.is_array()) fail("correlation_angles", "must be a list of angle lists");
        s.correlation_angles.clear();
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::string path = "correlation_angles[" + std::to_string(i) + "]";
            s.correlation_angles.push_back(list_of(c[i], path, number));
        }
    }
    if (j.contains("correlation_trials")) s.correlation_trials = count(j["correlation_trials"], "correlation_trials");
    if (j.contains("correlation_gains")) {
        const auto g = text(j["correlation_gains"], "correlation_gains");
        if (g == "equal") s.correlation_gains = irs::GainModel::unit_modulus_random_phase;
        else if (g == "rayleigh") s.correlation_gains = irs::GainModel::rayleigh;
        else fail("correlation_gains", "must be equal or rayleigh");
    }
    if (j.contains("ues")) {
        const auto& u = j["ues"];
        check_keys(u, "ues", {"x", "y"});
        if (u.contains("x")) s.ues_x = points(u["x"], "ues.x");
        if (u.contains("y")) s.ues_y = points(u["y"], "ues.y");
    }
    if (j.contains("n_cap")) s.n_cap = count(j["n_cap"], "n_cap");
    if (j.contains("budget")) s.budget = number(j["budget"], "budget");
    if (j.contains("workers")) s.workers = count(j["workers"], "workers");
    validate(s);
    return s;
}

inline json parse_spec_text(std::string_view body) {
    const bool blank = std::all_of(body.begin(), body.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (blank) return json::object();
    try {
        return json::parse(body, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("spec: parse error: ") + e.what());
    }
}

inline ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("spec: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(parse_spec_text(ss.str()));
}

// Canonical form: every field written, so equal specs serialize identically.
inline json spec_to_json(const ExperimentSpec& s) {
    json j;
    j["regime"] = std::string(sim::to_string(s.regime));
    j["scheduler"] = std::string(scheduler_token(s.scheduler_y));
    j["scheduler_x"] = std::string(scheduler_token(s.scheduler_x));
    j["geometry"] = {{"bs_x", detail::point_json(s.geometry.bs_x)},
                     {"bs_y", detail::point_json(s.geometry.bs_y)},
                     {"irs", detail::point_json(s.geometry.irs)},
                     {"ue_region",
                      {{"lo", detail::point_json(s.geometry.ue_region.lo)},
                       {"hi", detail::point_json(s.geometry.ue_region.hi)}}}};
    j["path_loss"] = {{"c0_db", s.path_loss.c0_db},
                      {"d0", s.path_loss.d0},
                      {"alpha_bs_irs", s.path_loss.alpha_bs_irs},
                      {"alpha_irs_ue", s.path_loss.alpha_irs_ue},
                      {"alpha_direct", s.path_loss.alpha_direct}};
    j["n"] = s.n;
    j["snr_db"] = s.snr_db;
    j["l1"] = s.l1;
    j["l2"] = s.l2;
    j["k"] = s.k;
    j["q"] = s.q;
    j["slots"] = s.slots;
    j["trials"] = s.trials;
    if (s.seed) j["seed"] = *s.seed;
    j["tau"] = s.tau;
    j["angles"] = s.angles == sim::AngleRedraw::per_slot ? "per_slot" : "per_trial";
    j["outputs"] = json::array();
    for (auto o : s.outputs) j["outputs"].push_back(std::string(to_string(o)));
    j["summaries"] = json::array();
    for (auto m : s.summaries) j["summaries"].push_back(std::string(to_string(m)));
    j["thresholds_db"] = s.thresholds_db;
    j["ccdf_grid"] = s.ccdf_grid;
    j["correlation_angles"] = s.correlation_angles;
    j["correlation_trials"] = s.correlation_trials;
    j["correlation_gains"] = s.correlation_gains == irs::GainModel::rayleigh ? "rayleigh" : "equal";
    j["ues"] = {{"x", detail::points_json(s.ues_x)}, {"y", detail::points_json(s.ues_y)}};
    j["n_cap"] = s.n_cap;
    j["budget"] = s.budget;
    j["workers"] = s.workers;
    return j;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string spec_hash(const ExperimentSpec& s) {
    char buf[17];
    const auto h = fnv1a64(spec_to_json(s).dump());
    auto [p, ec] = std::to_chars(buf, buf + 16, h, 16);
    std::string out(buf, p);
    return std::string(16 - out.size(), '0') + out;
}

// Dotted-path override; the value is parsed as JSON and otherwise kept as a
// string, so `regime=sub6` and `n=[4,16]` both work.
inline void apply_override(json& j, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw SpecError("override: expected key=value, got '" + std::string(assignment) + "'");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw SpecError("override: empty path segment in '" + key + "'");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

// ---- results ---------------------------------------------------------------

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct ResultRow {
    std::string stat;
    std::size_t n = 0;
    double snr_db = 0.0;
    std::size_t l = 0;
    std::size_t q = 0;
    double x = 0.0;
    double empirical = nan;
    double analytic = nan;
    double std_error = nan;

    auto key() const { return std::tie(stat, n, snr_db, l, q, x); }
};

inline bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

inline bool operator==(const ResultRow& a, const ResultRow& b) {
    return a.key() == b.key() && same_value(a.empirical, b.empirical) && same_value(a.analytic, b.analytic) &&
           same_value(a.std_error, b.std_error);
}

inline void sort_rows(std::vector<ResultRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });
}

inline constexpr std::string_view csv_header = "stat,n,snr_db,l,q,x,empirical,analytic,stderr";

inline std::string format_number(double v) {
    if (std::isnan(v)) return {};
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    if (ec != std::errc{}) throw std::runtime_error("format_number: to_chars failed");
    return {buf, p};
}

inline std::string format_csv(std::vector<ResultRow> rows) {
    sort_rows(rows);
    std::string out(csv_header);
    out += '\n';
    for (const auto& r : rows) {
        out += r.stat;
        out += ',' + std::to_string(r.n);
        out += ',' + format_number(r.snr_db);
        out += ',' + std::to_string(r.l);
        out += ',' + std::to_string(r.q);
        out += ',' + format_number(r.x);
        out += ',' + format_number(r.empirical);
        out += ',' + format_number(r.analytic);
        out += ',' + format_number(r.std_error);
        out += '\n';
    }
    return out;
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("emit_csv: cannot write '" + path + "'");
    out << format_csv(rows);
    if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

namespace detail {

inline double parse_number(std::string_view s) {
    if (s.empty()) return nan;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw std::runtime_error("parse_csv: bad number '" + std::string(s) + "'");
    return v;
}

inline std::size_t parse_count(std::string_view s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw std::runtime_error("parse_csv: bad integer '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

inline std::vector<ResultRow> parse_csv(std::string_view body) {
    std::vector<ResultRow> rows;
    std::size_t pos = 0;
    bool header = true;
    while (pos < body.size()) {
        auto end = body.find('\n', pos);
        if (end == std::string_view::npos) end = body.size();
        const auto line = body.substr(pos, end - pos);
        pos = end + 1;
        if (header) {
            if (line != csv_header) throw std::runtime_error("parse_csv: unexpected header");
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::size_t s = 0;
        while (true) {
            const auto c = line.find(',', s);
            f.push_back(line.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
            if (c == std::string_view::npos) break;
            s = c + 1;
        }
        if (f.size() != 9) throw std::runtime_error("parse_csv: expected 9 fields");
        ResultRow r;
        r.stat = std::string(f[0]);
        r.n = detail::parse_count(f[1]);
        r.snr_db = detail::parse_number(f[2]);
        r.l = detail::parse_count(f[3]);
        r.q = detail::parse_count(f[4]);
        r.x = detail::parse_number(f[5]);
        r.empirical = detail::parse_number(f[6]);
        r.analytic = detail::parse_number(f[7]);
        r.std_error = detail::parse_number(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- execution -------------------------------------------------------------

struct TrialPositions {
    std::vector<channel::Point2> x;
    std::vector<channel::Point2> y;
};

struct RunOptions {
    bool analytic_only = false;
};

struct RunResult {
    std::vector<ResultRow> rows;
    std::vector<TrialPositions> positions;
};

namespace detail {

inline std::vector<channel::Point2> cyclic(const std::vector<channel::Point2>& v, std::size_t count) {
    std::vector<channel::Point2> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = v[i % v.size()];
    return out;
}

inline TrialPositions place(const ExperimentSpec& s, std::uint64_t seed, std::size_t trial, std::size_t q_max) {
    auto rng = sim::make_stream(seed, {1, trial});
    TrialPositions t;
    t.x = s.ues_x.empty() ? channel::place_ues(rng, s.geometry, s.k, s.path_loss.d0) : cyclic(s.ues_x, s.k);
    t.y = s.ues_y.empty() ? channel::place_ues(rng, s.geometry, q_max, s.path_loss.d0) : cyclic(s.ues_y, q_max);
    return t;
}

inline sim::TrialLayout layout_for(const ExperimentSpec& s, const TrialPositions& pos, std::size_t q) {
    const std::vector<channel::Point2> y(pos.y.begin(), pos.y.begin() + static_cast<std::ptrdiff_t>(q));
    try {
        return {channel::link_budget(s.path_loss, s.geometry.bs_x, s.geometry.irs, pos.x),
                channel::link_budget(s.path_loss, s.geometry.bs_y, s.geometry.irs, y)};
    } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("spec: UE placement invalid: ") + e.what());
    }
}

inline std::vector<analytic::UeBetas> betas(const channel::OperatorLosses& ol) {
    std::vector<analytic::UeBetas> out;
    for (const auto& u : ol.ues) out.push_back({ol.beta_f * u.beta_g, u.beta_d});
    return out;
}

struct PointKey {
    std::size_t n;
    double snr_db;
    std::size_t l;
    std::size_t q;
};

struct Samples {
    std::vector<double> inband_sumse;
    std::vector<double> oob_sumse;
    std::vector<double> oob_sumse_direct;
    std::vector<double> inband_gain;
    std::vector<double> inband_gain_direct;
    std::vector<double> oob_gain;
    std::vector<double> oob_gain_direct;
};

inline ResultRow row(std::string stat, const PointKey& k, double x = 0.0) {
    ResultRow r;
    r.stat = std::move(stat);
    r.n = k.n;
    r.snr_db = k.snr_db;
    r.l = k.l;
    r.q = k.q;
    r.x = x;
    return r;
}

template <class F>
double mean_over(const std::vector<analytic::UeBetas>& ues, F f) {
    double s = 0.0;
    for (const auto& u : ues) s += f(u);
    return s / static_cast<double>(ues.size());
}

inline double fraction(const std::vector<double>& v, auto pred) {
    std::size_t c = 0;
    for (double e : v) c += pred(e) ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(v.size());
}

inline double binomial_stderr(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

struct AnalyticContext {
    const ExperimentSpec& spec;
    PointKey key;
    double snr;
    std::vector<analytic::UeBetas> x;
    std::vector<analytic::UeBetas> y;

    analytic::AnalyticParams params(const std::vector<analytic::UeBetas>& ues) const {
        analytic::AnalyticParams p;
        p.n_elements = key.n;
        p.tx_snr = snr;
        p.ues = ues;
        p.l1 = spec.l1;
        p.l2 = key.l / spec.l1;
        return p;
    }

    double sumse_x() const {
        if (spec.scheduler_x != SchedulerKind::round_robin) return nan;
        switch (spec.regime) {
            case Regime::sub6: return analytic::theorem1_sumse_x(params(x));
            case Regime::mmwave_los: return analytic::theorem3_sumse_x(params(x));
            case Regime::mmwave_nlos: return analytic::theorem5_sumse_x(params(x));
        }
        return nan;
    }

    double sumse_y() const {
        if (spec.scheduler_y == SchedulerKind::max_rate) {
            if (spec.regime != Regime::sub6) return nan;
            return mean_over(y, [&](const auto& u) { return analytic::mr_asymptotic_se(key.q, key.n, snr, u); });
        }
        if (spec.scheduler_y != SchedulerKind::round_robin) return nan;
        switch (spec.regime) {
            case Regime::sub6: return analytic::theorem1_sumse_y(params(y));
            case Regime::mmwave_los: return analytic::theorem3_sumse_y(params(y));
            case Regime::mmwave_nlos: return analytic::theorem5_sumse_y(params(y));
        }
        return nan;
    }

    double sumse_y_direct() const {
        auto p = params(y);
        p.n_elements = 0;
        return analytic::theorem1_sumse_y(p);
    }

    bool rr_y() const { return spec.scheduler_y == SchedulerKind::round_robin; }
    bool rr_x() const { return spec.scheduler_x == SchedulerKind::round_robin; }

    double outage_y(double rho) const {
        if (!rr_y()) return nan;
        if (spec.regime == Regime::sub6) {
            return mean_over(y, [&](const auto& u) { return analytic::outage_oob_sub6(rho, key.n, u); });
        }
        if (spec.regime == Regime::mmwave_los) {
            return mean_over(y, [&](const auto& u) { return analytic::theorem4_cdf(rho, key.n, key.l, u); });
        }
        return nan;
    }

    double outage_x(double rho) const {
        if (!rr_x() || spec.regime != Regime::sub6 || key.n == 0) return nan;
        return mean_over(x, [&](const auto& u) { return analytic::inband_outage_clt(rho, key.n, u.beta_r); });
    }

    double ccdf_y(double z) const {
        if (!rr_y()) return nan;
        if (spec.regime == Regime::sub6) {
            return mean_over(y, [&](const auto& u) { return analytic::ccdf_offset_sub6(z, key.n, u); });
        }
        if (spec.regime == Regime::mmwave_los) {
            if (z < 0.0) return 1.0;
            return mean_over(y, [&](const auto& u) { return 1.0 - analytic::theorem4_cdf(z, key.n, key.l, u); });
        }
        return nan;
    }

    double ccdf_offset_x(double z) const {
        if (!rr_x() || key.n == 0) return nan;
        return mean_over(x, [&](const auto& u) {
            return std::clamp(analytic::inband_offset_ccdf_bound(z, key.n, u), 0.0, 1.0);
        });
    }
};

inline void sumse_rows(std::vector<ResultRow>& out, const AnalyticContext& a, const Samples* s) {
    auto add = [&](std::string stat, double analytic_value, const std::vector<double>* v) {
        auto r = row(std::move(stat), a.key);
        r.analytic = analytic_value;
        if (v != nullptr) {
            const auto m = sim::mean_stderr(*v);
            r.empirical = m.mean;
            r.std_error = m.std_error;
        }
        out.push_back(std::move(r));
    };
    add("sumse_x", a.sumse_x(), s ? &s->inband_sumse : nullptr);
    add("sumse_y", a.sumse_y(), s ? &s->oob_sumse : nullptr);
    add("sumse_y_noirs", a.rr_y() ? a.sumse_y_direct() : nan, s ? &s->oob_sumse_direct : nullptr);
}

inline void outage_rows(std::vector<ResultRow>& out, const AnalyticContext& a, const Samples* s) {
    for (double t : a.spec.thresholds_db) {
        const double rho = math::db_to_linear(t) / a.snr;
        auto ry = row("outage_y", a.key, t);
        auto rx = row("outage_x", a.key, t);
        ry.analytic = a.outage_y(rho);
        rx.analytic = a.outage_x(rho);
        if (s) {
            ry.empirical = fraction(s->oob_gain, [&](double g) { return g < rho; });
            ry.std_error = binomial_stderr(ry.empirical, s->oob_gain.size());
            rx.empirical = fraction(s->inband_gain, [&](double g) { return g < rho; });
            rx.std_error = binomial_stderr(rx.empirical, s->inband_gain.size());
        }
        out.push_back(std::move(ry));
        out.push_back(std::move(rx));
    }
}

inline void ccdf_rows(std::vector<ResultRow>& out, const AnalyticContext& a, const Samples* s) {
    const bool sub6 = a.spec.regime == Regime::sub6;
    std::vector<double> zy;
    std::vector<double> zx;
    if (s) {
        for (std::size_t i = 0; i < s->oob_gain.size(); ++i) {
            // Without an IRS the offset vanishes; the curve is the direct gain law.
            const bool offset = a.key.n > 0;
            zy.push_back(sub6 && offset ? s->oob_gain[i] - s->oob_gain_direct[i] : s->oob_gain[i]);
            zx.push_back(offset ? s->inband_gain[i] - s->inband_gain_direct[i] : s->inband_gain[i]);
        }
    }
    for (double x : a.spec.ccdf_grid) {
        const double z = x / a.snr;
        auto ry = row(sub6 ? "ccdf_offset_y" : "ccdf_gain_y", a.key, x);
        ry.analytic = a.ccdf_y(z);
        auto rx = row("ccdf_offset_x", a.key, x);
        rx.analytic = sub6 ? a.ccdf_offset_x(z) : nan;
        if (s) {
            ry.empirical = fraction(zy, [&](double v) { return v > z; });
            ry.std_error = binomial_stderr(ry.empirical, zy.size());
            rx.empirical = fraction(zx, [&](double v) { return v > z; });
            rx.std_error = binomial_stderr(rx.empirical, zx.size());
        }
        out.push_back(std::move(ry));
        out.push_back(std::move(rx));
    }
}

inline void dominance_rows(std::vector<ResultRow>& out, const PointKey& key, const Samples& s) {
    const sim::EmpiricalDistribution with(s.oob_gain);
    const sim::EmpiricalDistribution without(s.oob_gain_direct);
    std::vector<double> grid;
    const std::size_t points = 256;
    for (std::size_t i = 0; i < points; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(points);
        grid.push_back(with.quantile(p));
        grid.push_back(without.quantile(p));
    }
    const auto rep = sim::dominance_test(with, without, grid);
    auto add = [&](std::string stat, double v) {
        auto r = row(std::move(stat), key);
        r.empirical = v;
        out.push_back(std::move(r));
    };
    add("dominance_y_min_diff", rep.min_difference);
    add("dominance_y_ks", rep.ks_one_sided);
    add("dominance_y_epsilon", rep.epsilon);
    add("dominance_y_pass", rep.pass ? 1.0 : 0.0);
}

inline void correlation_rows(std::vector<ResultRow>& out, const ExperimentSpec& s, std::uint64_t seed, bool analytic_only) {
    for (std::size_t ni = 0; ni < s.n.size(); ++ni) {
        const std::size_t n = s.n[ni];
        if (n == 0) continue;
        const math::ResolvableAngleBook book(n);
        for (std::size_t si = 0; si < s.correlation_angles.size(); ++si) {
            irs::CorrelationEnsemble ens{n, {}, s.correlation_gains};
            for (double a : s.correlation_angles[si]) ens.path_angles.push_back(book.nearest(a));
            const std::size_t l = ens.path_angles.size();
            std::vector<double> curve;
            if (!analytic_only) {
                auto rng = sim::make_stream(seed, {3, n, si});
                curve = irs::correlation_response_curve(ens, book.angles(), s.correlation_trials, rng);
            }
            for (std::size_t i = 0; i < n; ++i) {
                ResultRow r;
                r.stat = "correlation";
                r.n = n;
                r.l = l;
                r.x = book[i];
                const bool on_path =
                    std::find(ens.path_angles.begin(), ens.path_angles.end(), book[i]) != ens.path_angles.end();
                r.analytic = on_path ? 1.0 / std::sqrt(static_cast<double>(l)) : 0.0;
                if (!analytic_only) r.empirical = curve[i];
                out.push_back(std::move(r));
            }
        }
    }
}

inline void pf_rows(std::vector<ResultRow>& out, const ExperimentSpec& s, std::uint64_t seed,
                    const std::vector<TrialPositions>& pos) {
    for (double snr_db : s.snr_db) {
        for (auto n : s.n) {
            for (double tau : s.tau) {
                sim::PfProbeConfig cfg;
                cfg.n = n;
                cfg.tau = tau;
                cfg.slots = s.slots;
                cfg.trials = s.trials;
                cfg.tx_snr = math::db_to_linear(snr_db);
                cfg.seed = seed;
                cfg.workers = s.workers;
                cfg.layout = [&](std::size_t q, std::size_t trial) { return layout_for(s, pos[trial], q); };
                for (const auto& pt : sim::pf_convergence_probe(s.q, cfg)) {
                    const PointKey key{n, snr_db, 0, pt.q};
                    auto g = row("pf_gap", key, tau);
                    g.empirical = pt.gap;
                    g.std_error = pt.std_error;
                    auto a = row("pf_sumse", key, tau);
                    a.empirical = pt.pf_sumse;
                    auto b = row("pf_beamforming_se", key, tau);
                    b.empirical = pt.beamforming_se;
                    out.push_back(std::move(g));
                    out.push_back(std::move(a));
                    out.push_back(std::move(b));
                }
            }
        }
    }
}

// Derived rows: slope of sum-SE against log2 N and the N maximizing it.
inline void summary_rows(std::vector<ResultRow>& rows, const ExperimentSpec& s) {
    std::map<std::tuple<std::string, double, std::size_t, std::size_t>, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows) {
        if (r.stat.rfind("sumse_", 0) == 0 && r.stat != "sumse_y_noirs" && r.n > 0) groups[{r.stat, r.snr_db, r.l, r.q}].push_back(&r);
    }
    std::vector<ResultRow> extra;
    for (const auto& [key, members] : groups) {
        const auto& [stat, snr_db, l, q] = key;
        ResultRow base;
        base.snr_db = snr_db;
        base.l = l;
        base.q = q;
        auto column = [&](auto field) {
            std::vector<double> v;
            for (const auto* m : members) v.push_back(m->*field);
            return v;
        };
        std::vector<double> log_n;
        for (const auto* m : members) log_n.push_back(std::log2(static_cast<double>(m->n)));
        const auto emp = column(&ResultRow::empirical);
        const auto ana = column(&ResultRow::analytic);
        auto finite = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
        };
        if (s.wants(Summary::slope) && members.size() >= 2) {
            ResultRow r = base;
            r.stat = "slope_" + stat;
            if (finite(emp)) r.empirical = sim::least_squares(log_n, emp).slope;
            if (finite(ana)) r.analytic = sim::least_squares(log_n, ana).slope;
            extra.push_back(std::move(r));
        }
        if (s.wants(Summary::peak)) {
            ResultRow r = base;
            r.stat = "peak_" + stat;
            auto argmax = [&](const std::vector<double>& v) {
                const auto it = std::max_element(v.begin(), v.end());
                return static_cast<double>(members[static_cast<std::size_t>(it - v.begin())]->n);
            };
            if (finite(emp)) r.empirical = argmax(emp);
            if (finite(ana)) r.analytic = argmax(ana);
            extra.push_back(std::move(r));
        }
    }
    rows.insert(rows.end(), extra.begin(), extra.end());
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& opt = {}) {
    detail::validate(spec);
    if (!spec.seed) throw SpecError("spec: field 'seed' is mandatory (set it in the config or pass --seed)");
    const std::uint64_t seed = *spec.seed;
    RunResult res;
    const std::size_t q_max = *std::max_element(spec.q.begin(), spec.q.end());
    for (std::size_t t = 0; t < spec.trials; ++t) res.positions.push_back(detail::place(spec, seed, t, q_max));

    const bool per_point = spec.wants(Output::sumse) || spec.wants(Output::outage) || spec.wants(Output::ccdf) ||
                           spec.wants(Output::dominance);
    const bool keep_gains = spec.wants(Output::outage) || spec.wants(Output::ccdf) || spec.wants(Output::dominance);
    const bool mmwave = spec.regime != Regime::sub6;

    if (per_point) {
        for (auto q : spec.q) {
            std::vector<sim::TrialLayout> layouts;
            std::vector<analytic::UeBetas> bx;
            std::vector<analytic::UeBetas> by;
            for (const auto& p : res.positions) {
                layouts.push_back(detail::layout_for(spec, p, q));
                for (const auto& b : detail::betas(layouts.back().x)) bx.push_back(b);
                for (const auto& b : detail::betas(layouts.back().y)) by.push_back(b);
            }
            for (auto n : spec.n) {
                for (auto l2 : spec.l2) {
                    const std::size_t l = mmwave ? spec.l1 * l2 : 0;
                    for (double snr_db : spec.snr_db) {
                        const detail::PointKey key{n, snr_db, l, q};
                        const double snr = math::db_to_linear(snr_db);
                        const detail::AnalyticContext ctx{spec, {n, snr_db, mmwave ? l : spec.l1 * l2, q}, snr, bx, by};
                        std::optional<detail::Samples> samples;
                        if (!opt.analytic_only) {
                            sim::SimulationPoint p;
                            p.regime = spec.regime;
                            p.scheduler_x = spec.scheduler_x;
                            p.scheduler_y = spec.scheduler_y;
                            p.n = n;
                            p.tx_snr = snr;
                            p.l1 = spec.l1;
                            p.l2 = l2;
                            p.slots = spec.slots;
                            p.tau = spec.tau.front();
                            p.angles = spec.angles;
                            std::vector<std::vector<sim::SlotOutcome>> traces(spec.trials);
                            sim::parallel_for(spec.trials, spec.workers, [&](std::size_t t) {
                                auto rng = sim::make_stream(seed, {2, t, n, l2, q});
                                traces[t] = sim::run_simulation(p, layouts[t], rng);
                            });
                            detail::Samples s;
                            for (const auto& tr : traces) {
                                const auto sum = sim::summarize(tr, snr);
                                s.inband_sumse.push_back(sum.inband_sumse);
                                s.oob_sumse.push_back(sum.oob_sumse);
                                s.oob_sumse_direct.push_back(sum.oob_sumse_direct);
                                if (!keep_gains) continue;
                                for (const auto& o : tr) {
                                    s.inband_gain.push_back(o.inband_gain);
                                    s.inband_gain_direct.push_back(o.inband_gain_direct);
                                    s.oob_gain.push_back(o.oob_gain);
                                    s.oob_gain_direct.push_back(o.oob_gain_direct);
                                }
                            }
                            samples = std::move(s);
                        }
                        const detail::Samples* sp = samples ? &*samples : nullptr;
                        // Analytic forms take the total path count; rows report it
                        // only in mmWave regimes.
                        auto emit = [&](auto fn) {
                            std::vector<ResultRow> tmp;
                            fn(tmp, ctx, sp);
                            for (auto& r : tmp) r.l = l;
                            res.rows.insert(res.rows.end(), tmp.begin(), tmp.end());
                        };
                        if (spec.wants(Output::sumse)) emit(detail::sumse_rows);
                        if (spec.wants(Output::outage)) emit(detail::outage_rows);
                        if (spec.wants(Output::ccdf)) emit(detail::ccdf_rows);
                        if (spec.wants(Output::dominance) && sp) detail::dominance_rows(res.rows, key, *sp);
                    }
                }
            }
        }
    }
    if (spec.wants(Output::correlation_response)) detail::correlation_rows(res.rows, spec, seed, opt.analytic_only);
    if (spec.wants(Output::pf_gap) && !opt.analytic_only) detail::pf_rows(res.rows, spec, seed, res.positions);
    if (!spec.summaries.empty()) detail::summary_rows(res.rows, spec);
    sort_rows(res.rows);
    return res;
}

// ---- presets ---------------------------------------------------------------

struct PresetPart {
    std::string label;  // prefixes stat names when a preset has several parts
    json config;
};

struct Preset {
    std::string name;
    std::string description;
    std::vector<PresetPart> parts;
};

namespace detail {

inline std::vector<std::size_t> powers_of_two(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> v;
    for (std::size_t n = lo; n <= hi; n *= 2) v.push_back(n);
    return v;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t points) {
    std::vector<double> v(points);
    for (std::size_t i = 0; i < points; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return v;
}

inline std::vector<double> logspace(double lo_db, double hi_db, std::size_t points) {
    std::vector<double> v;
    for (double d : linspace(lo_db, hi_db, points)) v.push_back(math::db_to_linear(d));
    return v;
}

}  // namespace detail

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = [] {
        using detail::powers_of_two;
        std::vector<Preset> v;
        const json base = {{"seed", 20240101}};
        auto with = [&](json extra) {
            json j = base;
            j.update(extra);
            return j;
        };
        v.push_back({"fig2", "IRS correlation response over the anglebook, LoS and L = 2, 3 path alignment",
                     {{"", with({{"regime", "mmwave_nlos"},
                                 {"n", {50, 500}},
                                 {"outputs", {"correlation_response"}},
                                 {"correlation_angles", {{0.52}, {-0.23, 0.54}, {-0.23, 0.06, 0.54}}},
                                 {"correlation_trials", 1000}})}}});
        v.push_back({"fig3", "Sub-6 ergodic sum-SE of both operators vs transmit SNR",
                     {{"", with({{"n", {16, 64, 256}},
                                 {"snr_db", {110, 120, 130, 140, 150, 160}},
                                 {"trials", 5},
                                 {"outputs", {"sumse"}}})}}});
        v.push_back({"fig4", "Sub-6 ergodic sum-SE vs log2 N with slope summary",
                     {{"", with({{"n", powers_of_two(8, 512)},
                                 {"snr_db", {130, 150}},
                                 {"trials", 5},
                                 {"outputs", {"sumse"}},
                                 {"summaries", {"slope"}}})}}});
        v.push_back({"fig5", "Sub-6 SNR-offset CCDF, outage decay and in-band offset CCDF",
                     {{"", with({{"n", {0, 4, 8, 16, 32, 64}},
                                 {"snr_db", 130},
                                 {"trials", 5},
                                 {"outputs", {"ccdf", "outage", "dominance"}},
                                 {"thresholds_db", {-30, -20, -10}},
                                 {"ccdf_grid", detail::linspace(-0.1, 1.5, 33)}})}}});
        v.push_back({"fig6", "mmWave LoS ergodic sum-SE vs N at C0 gamma = 90 dB",
                     {{"", with({{"regime", "mmwave_los"},
                                 {"n", powers_of_two(4, 1024)},
                                 {"snr_db", 150},
                                 {"l2", {1, 5, 20, 50}},
                                 {"trials", 3},
                                 {"outputs", {"sumse"}}})}}});
        v.push_back({"fig7", "mmWave LoS ergodic sum-SE vs N at the 200 dB transmit SNR cap",
                     {{"", with({{"regime", "mmwave_los"},
                                 {"n", powers_of_two(4, 1024)},
                                 {"snr_db", 200},
                                 {"l2", {1, 5, 20, 50}},
                                 {"trials", 3},
                                 {"outputs", {"sumse"}}})}}});
        v.push_back({"fig8", "mmWave LoS CCDF of the OOB channel gain for L = 5, 20, 50",
                     {{"", with({{"regime", "mmwave_los"},
                                 {"n", {0, 16, 64, 256, 1024}},
                                 {"snr_db", 200},
                                 {"l2", {5, 20, 50}},
                                 {"trials", 4},
                                 {"outputs", {"ccdf", "dominance"}},
                                 {"ccdf_grid", detail::logspace(-20.0, 60.0, 41)}})}}});
        v.push_back({"fig9", "mmWave (L+)NLoS ergodic sum-SE vs N with peak location",
                     {{"", with({{"regime", "mmwave_nlos"},
                                 {"n", powers_of_two(4, 1024)},
                                 {"snr_db", 200},
                                 {"l2", {2, 4, 8}},
                                 {"trials", 3},
                                 {"outputs", {"sumse"}},
                                 {"summaries", {"peak"}}})}}});
        const json cmp = {{"n", powers_of_two(4, 1024)}, {"snr_db", 200}, {"l2", {4, 8}}, {"trials", 3}, {"outputs", {"sumse"}}};
        json los = with(cmp);
        los["regime"] = "mmwave_los";
        json nlos = with(cmp);
        nlos["regime"] = "mmwave_nlos";
        v.push_back({"fig10", "OOB sum-SE in LoS vs (L+)NLoS optimized mmWave", {{"los", los}, {"nlos", nlos}}});
        const json vs_q = {{"n", {4, 16}}, {"q", {1, 2, 5, 10, 20, 50, 100}}, {"snr_db", 150}, {"trials", 2},
                           {"outputs", {"sumse"}}};
        std::vector<PresetPart> fig11;
        for (const char* s : {"rr", "pf", "mr"}) {
            json j = with(vs_q);
            j["scheduler"] = s;
            j["tau"] = {1000};
            fig11.push_back({s, j});
        }
        fig11.push_back({"gap", with({{"n", {4, 16}},
                                      {"q", {1, 10, 100}},
                                      {"snr_db", 150},
                                      {"trials", 2},
                                      {"tau", {100, 1000, 10000}},
                                      {"outputs", {"pf_gap"}}})});
        v.push_back({"fig11", "OOB sum-SE vs number of OOB UEs under RR, PF and MR, with PF gap", fig11});
        std::vector<PresetPart> fig12;
        for (const char* s : {"rr", "pf", "mr"}) {
            json j = with({{"n", powers_of_two(4, 256)},
                           {"q", {10, 100}},
                           {"snr_db", 150},
                           {"trials", 2},
                           {"tau", {1000}},
                           {"outputs", {"sumse"}},
                           {"summaries", {"slope"}}});
            j["scheduler"] = s;
            fig12.push_back({s, j});
        }
        v.push_back({"fig12", "OOB sum-SE vs log2 N under RR, PF and MR with slope summary", fig12});
        return v;
    }();
    return all;
}

inline const Preset& find_preset(std::string_view name) {
    for (const auto& p : presets()) {
        if (p.name == name) return p;
    }
    std::string known;
    for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
    throw SpecError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

struct PresetRun {
    std::vector<ResultRow> rows;
    std::vector<std::pair<std::string, ExperimentSpec>> specs;
    std::vector<std::vector<TrialPositions>> positions;
};

// Overrides apply to every part; `label.key=value` targets one part.
inline std::vector<std::pair<std::string, ExperimentSpec>> resolve_preset(const Preset& p,
                                                                          const std::vector<std::string>& overrides,
                                                                          std::optional<std::uint64_t> seed) {
    std::vector<std::pair<std::string, ExperimentSpec>> out;
    for (const auto& part : p.parts) {
        json j = part.config;
        for (const auto& o : overrides) {
            const auto dot = o.find('.');
            const auto eq = o.find('=');
            if (dot != std::string::npos && dot < eq) {
                const std::string head = o.substr(0, dot);
                const bool labelled = std::any_of(p.parts.begin(), p.parts.end(),
                                                  [&](const PresetPart& x) { return !x.label.empty() && x.label == head; });
                if (labelled) {
                    if (head == part.label) apply_override(j, o.substr(dot + 1));
                    continue;
                }
            }
            apply_override(j, o);
        }
        if (seed) j["seed"] = *seed;
        out.emplace_back(part.label, parse_spec(j));
    }
    return out;
}

inline PresetRun run_preset(const Preset& p, const std::vector<std::string>& overrides,
                            std::optional<std::uint64_t> seed, const RunOptions& opt = {}) {
    PresetRun run;
    run.specs = resolve_preset(p, overrides, seed);
    for (const auto& [label, spec] : run.specs) {
        auto r = run_experiment(spec, opt);
        for (auto& row : r.rows) {
            if (!label.empty()) row.stat = label + "." + row.stat;
            run.rows.push_back(std::move(row));
        }
        run.positions.push_back(std::move(r.positions));
    }
    sort_rows(run.rows);
    return run;
}

// ---- manifest --------------------------------------------------------------

inline json positions_json(const std::vector<TrialPositions>& pos) {
    json a = json::array();
    for (std::size_t t = 0; t < pos.size(); ++t) {
        a.push_back({{"trial", t}, {"x", detail::points_json(pos[t].x)}, {"y", detail::points_json(pos[t].y)}});
    }
    return a;
}

inline json versions_json() {
    return {{"irsoob", IRSOOB_VERSION},
            {"compiler", __VERSION__},
            {"cplusplus", __cplusplus},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

struct ManifestPart {
    std::string label;
    const ExperimentSpec* spec;
    const std::vector<TrialPositions>* positions;
};

inline json make_manifest(std::string_view name, const std::vector<ManifestPart>& parts, bool analytic_only,
                          const std::vector<std::string>& overrides, std::string_view csv_file) {
    json m;
    m["name"] = std::string(name);
    m["csv"] = std::string(csv_file);
    m["analytic_only"] = analytic_only;
    m["overrides"] = overrides;
    m["versions"] = versions_json();
    m["parts"] = json::array();
    std::string joined;
    for (const auto& p : parts) {
        const auto hash = spec_hash(*p.spec);
        joined += hash;
        m["parts"].push_back({{"label", p.label},
                              {"spec_hash", hash},
                              {"seed", p.spec->seed ? json(*p.spec->seed) : json(nullptr)},
                              {"spec", spec_to_json(*p.spec)},
                              {"ue_positions", positions_json(*p.positions)}});
    }
    char buf[17];
    auto [e, ec] = std::to_chars(buf, buf + 16, fnv1a64(joined), 16);
    const std::string h(buf, e);
    m["spec_hash"] = std::string(16 - h.size(), '0') + h;
    if (!parts.empty() && parts.front().spec->seed) m["seed"] = *parts.front().spec->seed;
    return m;
}

}  // namespace irsoob::exp

#endif
