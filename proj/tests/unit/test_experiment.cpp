#include <gtest/gtest.h>

#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <locale>
#include <map>
#include <set>
#include <sstream>

#include "irsoob/experiment.hpp"

using namespace irsoob;
using namespace irsoob::exp;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
    const auto p = std::filesystem::temp_directory_path() / ("irsoob_test_" + name);
    std::ofstream(p, std::ios::binary) << body;
    return p;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& body) {
    try {
        parse_spec(parse_spec_text(body));
    } catch (const SpecError& e) {
        return e.what();
    }
    return {};
}

ExperimentSpec small_spec() {
    ExperimentSpec s;
    s.n = {0, 8};
    s.snr_db = {130.0, 140.0};
    s.k = 3;
    s.q = {2};
    s.slots = 200;
    s.trials = 2;
    s.seed = 5;
    s.workers = 1;
    s.outputs = {Output::sumse, Output::outage, Output::ccdf, Output::dominance};
    return s;
}

}  // namespace

TEST(LoadSpec, EmptyFileGivesDefaults) {
    const auto s = load_spec(temp_file("empty.json", "  \n").string());
    EXPECT_EQ(s.regime, Regime::sub6);
    EXPECT_EQ(s.k, 10u);
    EXPECT_EQ(s.q, std::vector<std::size_t>{10});
    EXPECT_EQ(s.slots, 5000u);
    EXPECT_DOUBLE_EQ(s.path_loss.c0_db, -30.0);
    EXPECT_DOUBLE_EQ(s.path_loss.d0, 1.0);
    EXPECT_DOUBLE_EQ(s.path_loss.alpha_bs_irs, 2.0);
    EXPECT_DOUBLE_EQ(s.path_loss.alpha_irs_ue, 2.0);
    EXPECT_DOUBLE_EQ(s.path_loss.alpha_direct, 4.5);
    EXPECT_EQ(s.geometry.bs_x, (channel::Point2{0.0, 50.0}));
    EXPECT_EQ(s.geometry.bs_y, (channel::Point2{50.0, 0.0}));
    EXPECT_EQ(s.geometry.irs, (channel::Point2{1025.0, 1025.0}));
    EXPECT_EQ(s.geometry.ue_region.lo, (channel::Point2{950.0, 950.0}));
    EXPECT_EQ(s.geometry.ue_region.hi, (channel::Point2{1100.0, 1100.0}));
    EXPECT_FALSE(s.seed.has_value());
    const auto mm = parse_spec(parse_spec_text(R"({"regime": "mmwave_los"})"));
    EXPECT_DOUBLE_EQ(mm.path_loss.c0_db, -60.0);
}

TEST(LoadSpec, UnknownFieldsNamedWithPath) {
    EXPECT_NE(error_of(R"({"slotz": 3})").find("'slotz'"), std::string::npos);
    EXPECT_NE(error_of(R"({"path_loss": {"c0": -30}})").find("'path_loss.c0'"), std::string::npos);
    EXPECT_NE(error_of(R"({"geometry": {"ue_region": {"mid": [0, 0]}}})").find("'geometry.ue_region.mid'"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"n": [4, -2]})").find("'n[1]'"), std::string::npos);
    EXPECT_NE(error_of(R"({"scheduler": "fifo"})").find("'scheduler'"), std::string::npos);
    EXPECT_NE(error_of("{ not json").find("parse error"), std::string::npos);
    EXPECT_THROW(load_spec("/nonexistent/spec.json"), SpecError);
}

TEST(LoadSpec, SnrBoundsAndOtherValidation) {
    EXPECT_TRUE(error_of(R"({"snr_db": [0, 200]})").empty());
    EXPECT_NE(error_of(R"({"snr_db": 200.5})").find("'snr_db'"), std::string::npos);
    EXPECT_NE(error_of(R"({"snr_db": [-1]})").find("'snr_db'"), std::string::npos);
    EXPECT_NE(error_of(R"({"n": [2048]})").find("n_cap"), std::string::npos);
    EXPECT_TRUE(error_of(R"({"n": [2048], "n_cap": 4096})").empty());
    EXPECT_NE(error_of(R"({"regime": "mmwave_nlos", "n": [5]})").find("even"), std::string::npos);
    EXPECT_NE(error_of(R"({"slots": 5000, "trials": 3000})").find("budget"), std::string::npos);
    EXPECT_NE(error_of(R"({"n": []})").find("empty"), std::string::npos);
    EXPECT_NE(error_of(R"({"outputs": ["pf_gap"], "regime": "mmwave_los"})").find("sub6"), std::string::npos);
}

TEST(LoadSpec, CanonicalFormRoundTrips) {
    auto s = small_spec();
    s.ues_y = {{1000.0, 1000.0}};
    s.summaries = {Summary::slope};
    const auto j = spec_to_json(s);
    const auto back = parse_spec(j);
    EXPECT_EQ(spec_to_json(back), j);
    EXPECT_EQ(spec_hash(back), spec_hash(s));
    auto t = s;
    t.slots = 201;
    EXPECT_NE(spec_hash(t), spec_hash(s));
}

TEST(Overrides, DottedPathsAndValueTypes) {
    json j = json::object();
    apply_override(j, "path_loss.c0_db=-40");
    apply_override(j, "n=[4,16]");
    apply_override(j, "regime=mmwave_los");
    EXPECT_EQ(j["path_loss"]["c0_db"], -40);
    EXPECT_EQ(j["n"], json::array({4, 16}));
    EXPECT_EQ(j["regime"], "mmwave_los");
    EXPECT_THROW(apply_override(j, "novalue"), SpecError);
}

TEST(Csv, EmptyRowsGiveHeaderOnly) {
    const auto p = std::filesystem::temp_directory_path() / "irsoob_test_empty.csv";
    emit_csv({}, p.string());
    EXPECT_EQ(read_file(p), "stat,n,snr_db,l,q,x,empirical,analytic,stderr\n");
}

TEST(Csv, RoundTripAndSortedOrder) {
    std::vector<ResultRow> rows;
    rows.push_back({"sumse_y", 64, 130.0, 0, 10, 0.0, 0.123456789012, 1.0 / 3.0, 1e-5});
    rows.push_back({"outage_y", 4, 130.0, 0, 10, -20.0, 0.5, exp::nan, exp::nan});
    rows.push_back({"outage_y", 4, 130.0, 0, 10, -30.0, 1e-300, 2.5e-7, 0.0});
    const auto text = format_csv(rows);
    const auto back = parse_csv(text);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[0].x, -30.0);
    EXPECT_EQ(back[1].x, -20.0);
    EXPECT_EQ(back[2].stat, "sumse_y");
    EXPECT_EQ(format_csv(back), text);
    EXPECT_TRUE(std::isnan(back[1].analytic));
    // Nine significant digits.
    EXPECT_NE(text.find("0.123456789,"), std::string::npos);
    EXPECT_NE(text.find("0.333333333,"), std::string::npos);
}

TEST(Csv, LocaleIndependentDecimalPoint) {
    const std::vector<ResultRow> rows{{"sumse_x", 1, 110.5, 0, 1, 0.25, 3.75, 1.5, 0.125}};
    const auto plain = format_csv(rows);
    for (const char* name : {"de_DE.UTF-8", "fr_FR.UTF-8", "C.UTF-8"}) {
        if (std::setlocale(LC_ALL, name) == nullptr) continue;
        try {
            std::locale::global(std::locale(name));
        } catch (const std::runtime_error&) {
        }
        EXPECT_EQ(format_csv(rows), plain);
        EXPECT_EQ(parse_csv(plain), rows);
    }
    // A global C++ locale with a comma decimal separator must not leak in either.
    struct Comma : std::numpunct<char> {
        char do_decimal_point() const override { return ','; }
    };
    std::locale::global(std::locale(std::locale::classic(), new Comma));
    EXPECT_EQ(format_csv(rows), plain);
    EXPECT_EQ(parse_csv(plain), rows);
    std::setlocale(LC_ALL, "C");
    std::locale::global(std::locale::classic());
    EXPECT_NE(plain.find("110.5,"), std::string::npos);
    EXPECT_EQ(plain.find(';'), std::string::npos);
}

TEST(RunExperiment, DeterministicRows) {
    const auto s = small_spec();
    const auto a = format_csv(run_experiment(s).rows);
    const auto b = format_csv(run_experiment(s).rows);
    EXPECT_EQ(a, b);
    auto t = s;
    t.seed = 6;
    EXPECT_NE(format_csv(run_experiment(t).rows), a);
    auto w = s;
    w.workers = 3;
    EXPECT_EQ(format_csv(run_experiment(w).rows), a);
}

TEST(RunExperiment, SeedIsMandatory) {
    auto s = small_spec();
    s.seed.reset();
    EXPECT_THROW(run_experiment(s), SpecError);
}

TEST(RunExperiment, AnalyticOnlyMatchesAnalyticColumn) {
    const auto s = small_spec();
    const auto full = run_experiment(s).rows;
    const auto pure = run_experiment(s, {true}).rows;
    std::map<std::tuple<std::string, std::size_t, double, std::size_t, std::size_t, double>, double> analytic;
    for (const auto& r : full) analytic[{r.stat, r.n, r.snr_db, r.l, r.q, r.x}] = r.analytic;
    std::size_t with_value = 0;
    for (const auto& r : pure) {
        EXPECT_TRUE(std::isnan(r.empirical));
        const auto it = analytic.find({r.stat, r.n, r.snr_db, r.l, r.q, r.x});
        ASSERT_NE(it, analytic.end()) << r.stat;
        EXPECT_TRUE(same_value(it->second, r.analytic)) << r.stat;
        with_value += std::isfinite(r.analytic) ? 1 : 0;
    }
    EXPECT_GT(with_value, 10u);
}

TEST(RunExperiment, RowsCarryExpectedStatistics) {
    const auto res = run_experiment(small_spec());
    std::set<std::string> stats;
    for (const auto& r : res.rows) stats.insert(r.stat);
    for (const char* s : {"sumse_x", "sumse_y", "sumse_y_noirs", "outage_x", "outage_y", "ccdf_offset_y",
                          "ccdf_offset_x", "dominance_y_pass", "dominance_y_min_diff"}) {
        EXPECT_TRUE(stats.count(s)) << s;
    }
    ASSERT_EQ(res.positions.size(), 2u);
    EXPECT_EQ(res.positions[0].x.size(), 3u);
    EXPECT_EQ(res.positions[0].y.size(), 2u);
    std::map<double, double> with0, without0;
    for (const auto& r : res.rows) {
        if (r.n == 0 && r.stat == "sumse_y") with0[r.snr_db] = r.empirical;
        if (r.n == 0 && r.stat == "sumse_y_noirs") without0[r.snr_db] = r.empirical;
        if (r.stat == "dominance_y_pass") {
            EXPECT_EQ(r.empirical, 1.0);
        }
    }
    ASSERT_EQ(with0.size(), 2u);
    EXPECT_EQ(with0, without0);
}

TEST(RunExperiment, ExplicitPositionsAreUsedCyclically) {
    auto s = small_spec();
    s.ues_y = {{1000.0, 1000.0}};
    s.q = {3};
    const auto res = run_experiment(s, {true});
    for (const auto& p : res.positions) {
        ASSERT_EQ(p.y.size(), 3u);
        for (const auto& u : p.y) EXPECT_EQ(u, (channel::Point2{1000.0, 1000.0}));
    }
}

TEST(Presets, AllResolveAndAnalyticOnlyRuns) {
    ASSERT_GE(presets().size(), 11u);
    for (const auto& p : presets()) {
        const auto specs = resolve_preset(p, {}, std::nullopt);
        EXPECT_FALSE(specs.empty()) << p.name;
        for (const auto& [label, s] : specs) EXPECT_TRUE(s.seed.has_value()) << p.name;
    }
    const auto run = run_preset(find_preset("fig4"), {"n=[16,32,64]"}, 9, {true});
    bool slope = false;
    for (const auto& r : run.rows) {
        if (r.stat == "slope_sumse_x" && r.snr_db == 150.0) {
            slope = true;
            EXPECT_NEAR(r.analytic, 2.0, 0.2);
        }
    }
    EXPECT_TRUE(slope);
    EXPECT_THROW(find_preset("fig99"), SpecError);
    EXPECT_THROW(resolve_preset(find_preset("fig3"), {"bogus=1"}, std::nullopt), SpecError);
}

TEST(Presets, LabelledOverrideTargetsOnePart) {
    const auto specs = resolve_preset(find_preset("fig10"), {"los.n=[8]", "trials=1"}, 3);
    ASSERT_EQ(specs.size(), 2u);
    EXPECT_EQ(specs[0].second.n, std::vector<std::size_t>{8});
    EXPECT_GT(specs[1].second.n.size(), 1u);
    EXPECT_EQ(specs[0].second.trials, 1u);
    EXPECT_EQ(specs[1].second.trials, 1u);
    EXPECT_EQ(*specs[1].second.seed, 3u);
}

TEST(Manifest, RecordsHashSeedAndPositions) {
    const auto s = small_spec();
    const auto res = run_experiment(s, {true});
    const auto m = make_manifest("x", {{"", &s, &res.positions}}, true, {}, "x.csv");
    EXPECT_EQ(m["parts"][0]["spec_hash"], spec_hash(s));
    EXPECT_EQ(m["seed"], 5);
    EXPECT_EQ(m["parts"][0]["ue_positions"].size(), 2u);
    EXPECT_EQ(m["versions"]["irsoob"], IRSOOB_VERSION);
    EXPECT_EQ(m.dump(), make_manifest("x", {{"", &s, &res.positions}}, true, {}, "x.csv").dump());
}
