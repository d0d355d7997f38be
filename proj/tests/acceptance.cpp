// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Oracles come from oracles.hpp and never share code with the
// library paths under test.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "tsc/tsc.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void run(const char* name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %-28s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", name, secs, out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

Outcome dtw_oracle() {
    const auto start = std::chrono::steady_clock::now();
    oracle::Gen gen(1001);
    std::size_t mismatches = 0, total = 0;
    for (std::size_t m = 2; m <= 8; ++m) {
        for (double r : {0.0, 0.25, 0.5, 1.0}) {
            for (int p = 0; p < 200; ++p) {
                const auto a = gen.ints(m, -9, 9);
                const auto b = gen.ints(m, -9, 9);
                const double got = tsc::dtw(tsc::TimeSeries(a), tsc::TimeSeries(b), r);
                mismatches += got != oracle::min_path_cost(a, b, tsc::band(r, m));
                ++total;
            }
        }
    }
    const double secs = seconds_since(start);
    return {mismatches == 0 && secs < 60.0,
            fmt("%.0f/%.0f pairs exact, %.1fs", static_cast<double>(total - mismatches), static_cast<double>(total), secs)};
}

Outcome lcss_anchor() {
    auto encode = [](const std::string& s) {
        std::vector<double> v;
        for (char c : s) v.push_back(static_cast<double>(c - 'A'));
        return tsc::TimeSeries(v);
    };
    const auto a = encode("ABCADACDAB");
    const auto b = encode("BCDADBCACB");
    const auto len = tsc::lcss_length(a, b, 0.0);
    const double dist = tsc::lcss_distance(a, b, 0.0);
    oracle::Gen gen(1002);
    std::size_t mismatches = 0;
    for (int p = 0; p < 200; ++p) {
        const auto m = static_cast<std::size_t>(gen.integer(1, 10));
        const auto x = gen.ints(m, 0, 4);
        const auto y = gen.ints(m, 0, 4);
        const double eps = p % 2 ? 1.0 : 0.0;
        mismatches += tsc::lcss_length(tsc::TimeSeries(x), tsc::TimeSeries(y), eps) != oracle::naive_lcss(x, y, eps);
    }
    return {len == 7 && dist == 0.3 && mismatches == 0,
            fmt("length %.0f, distance %.17g, %.0f/200 oracle mismatches", static_cast<double>(len), dist,
                static_cast<double>(mismatches))};
}

Outcome boundary_identities() {
    oracle::Gen gen(1003);
    std::size_t ed_bad = 0, wdtw_bad = 0;
    double worst = 0.0;
    for (int p = 0; p < 1000; ++p) {
        const auto m = static_cast<std::size_t>(gen.integer(1, 40));
        const tsc::TimeSeries a(gen.reals(m, -5, 5));
        const tsc::TimeSeries b(gen.reals(m, -5, 5));
        ed_bad += tsc::dtw(a, b, 0.0) != tsc::squared_euclidean(a, b);
        const double w = tsc::wdtw(a, b, 0.0);
        const double d = 0.5 * tsc::dtw(a, b, 1.0);
        const double rel = d == 0.0 ? std::fabs(w) : std::fabs(w - d) / d;
        worst = std::max(worst, rel);
        wdtw_bad += rel > 1e-9;
    }
    return {ed_bad == 0 && wdtw_bad == 0,
            fmt("dtw(r=0) != ed on %.0f/1000; wdtw(g=0) worst rel err %.3g", static_cast<double>(ed_bad), worst)};
}

Outcome window_monotonicity() {
    oracle::Gen gen(1004);
    const auto grid = tsc::default_window_grid();
    std::size_t violations = 0;
    for (int p = 0; p < 500; ++p) {
        const auto m = static_cast<std::size_t>(gen.integer(2, 40));
        const tsc::TimeSeries a(gen.reals(m));
        const tsc::TimeSeries b(gen.reals(m));
        double prev = tsc::dtw(a, b, grid[0]);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double cur = tsc::dtw(a, b, grid[i]);
            violations += cur > prev;
            prev = cur;
        }
    }
    return {violations == 0, fmt("%.0f violations over 500 pairs x 101 windows", static_cast<double>(violations))};
}

Outcome derivative_anchor() {
    oracle::Gen gen(1005);
    std::size_t bad = 0;
    for (int p = 0; p < 200; ++p) {
        // dyadic slope and intercept keep every step exact in binary
        const double slope = gen.integer(-64, 64) / 8.0;
        const double c1 = gen.integer(-64, 64) / 4.0;
        double c2 = gen.integer(-64, 64) / 4.0;
        if (c2 == c1) c2 += 1.0;
        const auto m = static_cast<std::size_t>(gen.integer(3, 30));
        std::vector<double> x(m), y(m);
        for (std::size_t i = 0; i < m; ++i) {
            x[i] = c1 + slope * static_cast<double>(i);
            y[i] = c2 + slope * static_cast<double>(i);
        }
        const auto dx = tsc::derivative_transform(tsc::TimeSeries(x));
        for (double v : dx) bad += v != slope;
        bad += tsc::ddtw(tsc::TimeSeries(x), tsc::TimeSeries(y), gen.real(0, 1)) != 0.0;
    }
    return {bad == 0, fmt("%.0f inexact values over 200 linear pairs", static_cast<double>(bad))};
}

Outcome cd_anchors() {
    const double cd9 = tsc::stats::nemenyi_cd(9, 77, 0.05);
    const double cd7 = tsc::stats::nemenyi_cd(7, 77, 0.05);
    return {std::fabs(cd9 - 1.3691) <= 0.001 && std::fabs(cd7 - 1.0264) <= 0.001,
            fmt("cd(9,77)=%.5f cd(7,77)=%.5f", cd9, cd7)};
}

Outcome wilcoxon_exact() {
    oracle::Gen gen(1006);
    std::size_t bad = 0;
    std::size_t total = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int s = 0; s < 30; ++s) {
            std::vector<double> d(n);
            for (auto& x : d) x = s % 2 ? gen.integer(-5, 5) * 0.1 : gen.normal();
            if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) d[0] = 1.0;
            const auto want = oracle::wilcoxon_enumerate(d);
            using tsc::stats::Alternative;
            bad += tsc::stats::wilcoxon_signed_rank(d).p != std::min(1.0, want.two_sided);
            bad += tsc::stats::wilcoxon_signed_rank(d, Alternative::Greater).p != want.greater;
            bad += tsc::stats::wilcoxon_signed_rank(d, Alternative::Less).p != want.less;
            total += 3;
        }
    }
    const std::vector<double> five{0.1, 0.2, 0.3, 0.4, 0.5};
    const double p5 = tsc::stats::wilcoxon_signed_rank(five).p;
    return {bad == 0 && p5 == 0.0625,
            fmt("%.0f/%.0f p-values differ from enumeration; n=5 all-positive p=%.17g", static_cast<double>(bad),
                static_cast<double>(total), p5)};
}

Outcome t_and_ols() {
    oracle::Gen gen(1007);
    double worst_t = 0.0, worst_ols = 0.0;
    for (int s = 0; s < 50; ++s) {
        const auto n = static_cast<std::size_t>(gen.integer(3, 60));
        std::vector<double> d(n), x(n), y(n);
        const double shift = gen.real(-0.8, 0.8);
        const double slope = gen.real(-0.3, 0.3);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = shift + gen.normal();
            x[i] = gen.real(0, 10);
            y[i] = 2.0 + slope * x[i] + gen.normal();
        }
        worst_t = std::max(worst_t, std::fabs(tsc::stats::paired_t_test(d).p - oracle::t_test_p(d)));
        worst_ols = std::max(worst_ols, std::fabs(tsc::stats::ols_slope_test(x, y).p - oracle::ols(x, y).p));
    }
    return {worst_t <= 1e-6 && worst_ols <= 1e-6, fmt("max |dp| t-test %.3g, ols %.3g", worst_t, worst_ols)};
}

Outcome synthetic_claim() {
    const auto start = std::chrono::steady_clock::now();
    int wins = 0;
    double sum = 0.0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        tsc::SyntheticParams p;
        p.seed = seed;
        const auto data = tsc::generate_synthetic(p);
        const double ed = tsc::evaluate(data.train, data.test, {1, tsc::MeasureSpec::euclidean()}).accuracy;
        const auto tuned = tsc::tune_window(data.train, tsc::default_window_grid());
        const double dtw = tsc::evaluate(data.train, data.test, {1, tsc::MeasureSpec::dtw(tuned.best)}).accuracy;
        wins += dtw >= ed;
        sum += dtw - ed;
        per_seed += fmt(" %.2f/%.2f", dtw, ed);
    }
    const double secs = seconds_since(start);
    return {wins >= 9 && sum / 10.0 > 0.0 && secs < 120.0,
            fmt("dtw>=ed in %.0f/10 seeds, mean improvement %.4f, %.1fs;", wins, sum / 10.0, secs) + per_seed};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

constexpr const char* kBenchConfig = R"(
seed = 5
grid.r = 0:0.05:1

[dataset PhaseA]
synthetic = phase-shift
train_size = 30
test_size = 30

[dataset Warp]
synthetic = warp-noise
seed = 2
train_size = 30
test_size = 30

[dataset PhaseB]
synthetic = phase-shift
seed = 9
train_size = 30
test_size = 30

[classifier ED]
measure = euclidean

[classifier DTWRN]
measure = dtw
tune = r

[classifier DDTW]
measure = ddtw
tune = r

[classifier WDTW]
measure = wdtw
tune = g

[classifier LCSS]
measure = lcss
tune = eps

[classifier DTWk]
measure = dtw
r = 0.1
tune = k
)";

Outcome bench_determinism() {
    const auto dir = fs::temp_directory_path() / "tsc_acceptance_bench";
    fs::remove_all(dir);
    auto cfg = tsc::parse_config(kBenchConfig);
    cfg.workers = 1;
    tsc::write_outputs(tsc::run_experiment(cfg), dir / "w1");
    cfg.workers = 8;
    tsc::write_outputs(tsc::run_experiment(cfg), dir / "w8");
    const auto a = slurp(dir / "w1" / "accuracy.csv");
    const auto b = slurp(dir / "w8" / "accuracy.csv");
    const bool same = !a.empty() && a == b;
    return {same, fmt("%.0f-byte CSVs ", static_cast<double>(a.size())) + (same ? "identical" : "differ")};
}

Outcome tuning_isolation() {
    auto cfg = tsc::parse_config(kBenchConfig);
    cfg.workers = 4;
    // materialize the datasets so the test split can be relabelled in place
    for (auto& ds : cfg.datasets) ds.source = tsc::load_dataset(ds, cfg);
    const auto before = tsc::run_experiment(cfg);
    oracle::Gen gen(1008);
    for (auto& ds : cfg.datasets) {
        auto data = std::get<tsc::SyntheticData>(ds.source);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < data.test.size(); ++i) labels.push_back(gen.integer(0, 1) ? "1" : "mutant");
        data.test = tsc::relabel(data.test, labels);
        ds.source = data;
    }
    const auto after = tsc::run_experiment(cfg);
    std::size_t changed = 0, compared = 0;
    for (std::size_t i = 0; i < before.records.size() && i < after.records.size(); ++i) {
        changed += before.records[i].tuning != after.records[i].tuning;
        compared += before.records[i].tuning.size();
    }
    const bool ok = before.records.size() == after.records.size() && changed == 0 && compared > 0;
    return {ok, fmt("%.0f tuning results compared, %.0f cells changed", static_cast<double>(compared),
                    static_cast<double>(changed))};
}

}  // namespace

int main() {
    run("dtw-oracle-equivalence", dtw_oracle);
    run("lcss-anchor-and-oracle", lcss_anchor);
    run("boundary-identities", boundary_identities);
    run("window-monotonicity", window_monotonicity);
    run("derivative-anchor", derivative_anchor);
    run("critical-difference-anchors", cd_anchors);
    run("wilcoxon-exactness", wilcoxon_exact);
    run("t-test-ols-numerics", t_and_ols);
    run("synthetic-dtw-vs-euclidean", synthetic_claim);
    run("bench-determinism", bench_determinism);
    run("tuning-isolation", tuning_isolation);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
