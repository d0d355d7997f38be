#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "tsc/experiment.hpp"

namespace fs = std::filesystem;
using tsc::MeasureSpec;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("tsc_test_exp_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

tsc::SyntheticParams small_params(std::uint64_t seed) {
    tsc::SyntheticParams p;
    p.seed = seed;
    p.train_size = 16;
    p.test_size = 16;
    return p;
}

tsc::DatasetSource synthetic_source(const std::string& name, std::uint64_t seed) {
    auto p = small_params(seed);
    p.name = name;
    return {name, p, false};
}

tsc::ClassifierSpec clf(std::string id, MeasureSpec m, std::vector<tsc::TuneTarget> tune = {}, std::size_t k = 1) {
    return {std::move(id), {k, m}, std::move(tune)};
}

}  // namespace

TEST(ParseGrid, ListsAndRanges) {
    EXPECT_EQ(tsc::parse_grid("0.1, 0.5,1").values(), (std::vector<double>{0.1, 0.5, 1.0}));
    const auto g = tsc::parse_grid("0:0.01:1");
    ASSERT_EQ(g.size(), 101u);
    EXPECT_EQ(g[37], 0.37);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_THROW((void)tsc::parse_grid("1:0:2"), tsc::Error);
    EXPECT_THROW((void)tsc::parse_grid("0.5,0.1"), tsc::Error);
}

TEST(ParseConfig, FullExample) {
    const auto cfg = tsc::parse_config(R"(
# comment
out = res
workers = 4
normalize = true
grid.r = 0:0.1:0.5
seed = 9

[dataset Files]
train = a_TRAIN.txt
test = /abs/a_TEST.txt

[dataset Syn]
synthetic = warp-noise
length = 30
noise = 0.2

[classifier DTWRN]
measure = dtw
tune = r

[classifier LCSS-k]
measure = lcss
eps = 0.5
k = 3
)",
                                       "/base");
    EXPECT_EQ(cfg.out, fs::path("/base/res"));
    EXPECT_EQ(cfg.workers, 4u);
    EXPECT_TRUE(cfg.normalize);
    EXPECT_EQ(cfg.seed, 9u);
    ASSERT_TRUE(cfg.grids.window.has_value());
    EXPECT_EQ(cfg.grids.window->size(), 6u);
    ASSERT_EQ(cfg.datasets.size(), 2u);
    const auto& files = std::get<tsc::FileSplit>(cfg.datasets[0].source);
    EXPECT_EQ(files.train, fs::path("/base/a_TRAIN.txt"));
    EXPECT_EQ(files.test, fs::path("/abs/a_TEST.txt"));
    const auto& syn = std::get<tsc::SyntheticParams>(cfg.datasets[1].source);
    EXPECT_EQ(syn.kind, tsc::SyntheticKind::WarpNoise);
    EXPECT_EQ(syn.length, 30u);
    EXPECT_TRUE(cfg.datasets[1].inherit_seed);
    ASSERT_EQ(cfg.classifiers.size(), 2u);
    EXPECT_EQ(cfg.classifiers[0].tune, (std::vector<tsc::TuneTarget>{tsc::TuneTarget::Window}));
    EXPECT_EQ(cfg.classifiers[1].knn.k, 3u);
    EXPECT_EQ(cfg.classifiers[1].knn.measure, MeasureSpec::lcss(0.5));
}

TEST(ParseConfig, Errors) {
    EXPECT_THROW((void)tsc::parse_config("bogus = 1\n[dataset a]\nsynthetic=phase-shift\n[classifier c]\nmeasure=dtw\n"),
                 tsc::Error);
    EXPECT_THROW((void)tsc::parse_config("[dataset a]\nsynthetic=phase-shift\n"), tsc::Error);
    EXPECT_THROW((void)tsc::parse_config("[dataset a]\ntrain=x\n[classifier c]\nmeasure=dtw\n"), tsc::Error);
    EXPECT_THROW((void)tsc::parse_config("[dataset a]\nsynthetic=phase-shift\n[classifier c]\nmeasure=dtw\nr=2\n"),
                 tsc::Error);
    EXPECT_THROW((void)tsc::parse_config("[thing a]\n"), tsc::Error);
}

TEST(Synthetic, DeterministicAndValidated) {
    const auto a = tsc::generate_synthetic(small_params(4));
    const auto b = tsc::generate_synthetic(small_params(4));
    ASSERT_EQ(a.train.size(), b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        EXPECT_EQ(a.train[i].label, b.train[i].label);
        for (std::size_t t = 0; t < a.train.series_length(); ++t) EXPECT_EQ(a.train[i].series[t], b.train[i].series[t]);
    }
    const auto c = tsc::generate_synthetic(small_params(5));
    EXPECT_NE(a.train[0].series[0], c.train[0].series[0]);
    auto bad = small_params(1);
    bad.length = 3;
    EXPECT_THROW((void)tsc::generate_synthetic(bad), tsc::Error);
    bad = small_params(1);
    bad.max_shift = 5;
    EXPECT_THROW((void)tsc::generate_synthetic(bad), tsc::Error);
    bad = small_params(1);
    bad.train_size = 1;
    EXPECT_THROW((void)tsc::generate_synthetic(bad), tsc::Error);
}

TEST(Synthetic, NoShiftNoNoiseIsPerfect) {
    for (auto kind : {tsc::SyntheticKind::PhaseShift, tsc::SyntheticKind::WarpNoise}) {
        auto p = small_params(6);
        p.kind = kind;
        p.max_shift = 0;
        p.noise = 0;
        const auto data = tsc::generate_synthetic(p);
        for (std::size_t i = 2; i < data.train.size(); ++i) {
            const auto& same = data.train[i % 2];
            for (std::size_t t = 0; t < data.train.series_length(); ++t) EXPECT_EQ(data.train[i].series[t], same.series[t]);
        }
        for (const auto& m : {MeasureSpec::euclidean(), MeasureSpec::dtw(0.1), MeasureSpec::ddtw(1.0),
                              MeasureSpec::wdtw(0.1), MeasureSpec::wddtw(1.0), MeasureSpec::lcss(0.05)}) {
            EXPECT_EQ(tsc::evaluate(data.train, data.test, {1, m}).accuracy, 1.0) << to_string(m.kind);
        }
    }
}

TEST(RunExperiment, SingleFixedCellMatchesEvaluate) {
    tsc::ExperimentConfig cfg;
    cfg.datasets = {synthetic_source("S", 7)};
    cfg.classifiers = {clf("ED", MeasureSpec::euclidean())};
    const auto report = tsc::run_experiment(cfg);
    ASSERT_EQ(report.records.size(), 1u);
    const auto data = tsc::generate_synthetic(small_params(7));
    EXPECT_EQ(report.records[0].test_accuracy, tsc::evaluate(data.train, data.test, {1, MeasureSpec::euclidean()}).accuracy);
    EXPECT_EQ(report.records[0].train_accuracy, tsc::loocv_accuracy(data.train, {1, MeasureSpec::euclidean()}));
    EXPECT_GE(report.records[0].seconds, 0.0);
}

TEST(RunExperiment, TunedWindowMatchesTuneModule) {
    tsc::ExperimentConfig cfg;
    cfg.datasets = {synthetic_source("S", 8)};
    cfg.classifiers = {clf("DTWRN", MeasureSpec::dtw(1.0), {tsc::TuneTarget::Window})};
    const auto report = tsc::run_experiment(cfg);
    ASSERT_EQ(report.records.size(), 1u);
    const auto data = tsc::generate_synthetic(small_params(8));
    const auto want = tsc::tune_window(data.train, tsc::default_window_grid());
    const auto& rec = report.records[0];
    EXPECT_EQ(rec.spec.measure.window, want.best);
    ASSERT_EQ(rec.tuning.size(), 1u);
    EXPECT_EQ(rec.tuning[0].first, "r");
    EXPECT_EQ(rec.tuning[0].second, want);
    // replay with the fixed tuned parameter
    EXPECT_EQ(rec.test_accuracy, tsc::evaluate(data.train, data.test, {1, MeasureSpec::dtw(want.best)}).accuracy);
}

TEST(RunExperiment, TunedParametersReplay) {
    tsc::ExperimentConfig cfg;
    cfg.datasets = {synthetic_source("S", 9)};
    cfg.classifiers = {clf("WDTW", MeasureSpec::wdtw(0), {tsc::TuneTarget::Penalty}),
                       clf("LCSS", MeasureSpec::lcss(0), {tsc::TuneTarget::Threshold}),
                       clf("DTWk", MeasureSpec::dtw(0.1), {tsc::TuneTarget::K})};
    const auto report = tsc::run_experiment(cfg);
    const auto data = tsc::generate_synthetic(small_params(9));
    ASSERT_EQ(report.records.size(), 3u);
    for (const auto& rec : report.records) {
        EXPECT_EQ(rec.test_accuracy, tsc::evaluate(data.train, data.test, rec.spec).accuracy) << rec.classifier;
        EXPECT_EQ(rec.train_accuracy, rec.tuning.back().second.best_accuracy);
    }
}

TEST(RunExperiment, OrderingAndWorkerDeterminism) {
    tsc::ExperimentConfig cfg;
    cfg.datasets = {synthetic_source("B", 10), synthetic_source("A", 11)};
    cfg.classifiers = {clf("ED", MeasureSpec::euclidean()), clf("DTW", MeasureSpec::dtw(1.0), {tsc::TuneTarget::Window}),
                       clf("LCSS", MeasureSpec::lcss(0.2), {tsc::TuneTarget::K})};
    const auto dir = scratch("determinism");
    cfg.workers = 1;
    const auto one = tsc::run_experiment(cfg);
    tsc::write_outputs(one, dir / "w1");
    cfg.workers = 8;
    const auto eight = tsc::run_experiment(cfg);
    tsc::write_outputs(eight, dir / "w8");
    ASSERT_EQ(one.records.size(), 6u);
    const char* order[6][2] = {{"B", "ED"}, {"B", "DTW"}, {"B", "LCSS"}, {"A", "ED"}, {"A", "DTW"}, {"A", "LCSS"}};
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(one.records[i].dataset, order[i][0]);
        EXPECT_EQ(one.records[i].classifier, order[i][1]);
    }
    EXPECT_EQ(slurp(dir / "w1" / "accuracy.csv"), slurp(dir / "w8" / "accuracy.csv"));
    const auto table = tsc::io::read_accuracy_csv(dir / "w1" / "accuracy.csv");
    EXPECT_EQ(table.datasets(), (std::vector<std::string>{"B", "A"}));
    EXPECT_EQ(table.classifiers(), (std::vector<std::string>{"ED", "DTW", "LCSS"}));
}

TEST(RunExperiment, CacheGivesSameResults) {
    tsc::ExperimentConfig cfg;
    cfg.datasets = {synthetic_source("S", 12)};
    cfg.classifiers = {clf("DTW", MeasureSpec::dtw(1.0), {tsc::TuneTarget::Window})};
    const auto plain = tsc::run_experiment(cfg);
    const auto dir = scratch("cache");
    cfg.cache_dir = dir / "cache";
    const auto cold = tsc::run_experiment(cfg);
    const auto warm = tsc::run_experiment(cfg);
    EXPECT_FALSE(fs::is_empty(dir / "cache"));
    EXPECT_EQ(plain.records[0].tuning, cold.records[0].tuning);
    EXPECT_EQ(plain.records[0].tuning, warm.records[0].tuning);
    EXPECT_EQ(plain.records[0].test_accuracy, warm.records[0].test_accuracy);
}

TEST(RunExperiment, BadDatasetIsIsolated) {
    const auto dir = scratch("failure");
    {
        std::ofstream(dir / "bad_TRAIN.txt") << "1,0,1\n2,0\n";
        std::ofstream(dir / "bad_TEST.txt") << "1,0,1\n";
    }
    tsc::ExperimentConfig cfg;
    cfg.datasets = {{"Bad", tsc::FileSplit{dir / "bad_TRAIN.txt", dir / "bad_TEST.txt"}, false},
                    {"Missing", tsc::FileSplit{dir / "nope_TRAIN.txt", dir / "nope_TEST.txt"}, false},
                    synthetic_source("Good", 13)};
    cfg.classifiers = {clf("ED", MeasureSpec::euclidean())};
    const auto report = tsc::run_experiment(cfg);
    ASSERT_EQ(report.records.size(), 1u);
    EXPECT_EQ(report.records[0].dataset, "Good");
    ASSERT_EQ(report.failures.size(), 2u);
    EXPECT_EQ(report.failures[0].dataset, "Bad");
    EXPECT_NE(report.failures[0].message.find("line 2"), std::string::npos);
    tsc::write_outputs(report, dir / "out");
    const auto manifest = slurp(dir / "out" / "manifest.txt");
    EXPECT_NE(manifest.find("failed Bad"), std::string::npos);
    EXPECT_NE(manifest.find("failed Missing"), std::string::npos);
    EXPECT_NE(manifest.find("ok Good ED"), std::string::npos);
}

TEST(RunExperiment, TestLabelsNeverReachTuning) {
    auto data = tsc::generate_synthetic(small_params(14));
    tsc::ExperimentConfig cfg;
    cfg.classifiers = {clf("DTW", MeasureSpec::dtw(1.0), {tsc::TuneTarget::Window, tsc::TuneTarget::K}),
                       clf("LCSS", MeasureSpec::lcss(0), {tsc::TuneTarget::Threshold})};
    cfg.datasets = {{"S", data, false}};
    const auto before = tsc::run_experiment(cfg);
    std::vector<std::string> flipped;
    for (const auto& inst : data.test) flipped.push_back(inst.label == "1" ? "2" : "zzz");
    data.test = tsc::relabel(data.test, flipped);
    cfg.datasets = {{"S", data, false}};
    const auto after = tsc::run_experiment(cfg);
    for (std::size_t i = 0; i < before.records.size(); ++i) {
        EXPECT_EQ(before.records[i].tuning, after.records[i].tuning);
        EXPECT_EQ(before.records[i].spec.k, after.records[i].spec.k);
    }
}

TEST(AccuracyTable, InconsistentClassifierSets) {
    tsc::ResultsRecord a{"d1", "x", {}, 0.5, 0.5, {}, 0};
    tsc::ResultsRecord b{"d2", "y", {}, 0.5, 0.5, {}, 0};
    EXPECT_THROW((void)tsc::accuracy_table({a, b}), tsc::Error);
    EXPECT_THROW((void)tsc::accuracy_table({}), tsc::Error);
    const auto dir = scratch("csv");
    tsc::emit_accuracy_csv({a}, dir / "a.csv");
    EXPECT_EQ(slurp(dir / "a.csv"), "dataset,x\nd1,0.500000\n");
}
