// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 partial failure (see the run manifest).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tsc/tsc.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kPartial = 3;

struct Common {
    bool normalize = false;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string grid_r, grid_k, grid_g, grid_eps;
    std::string cache_dir;
    std::string out;
};

void add_grids(CLI::App* cmd, Common& c) {
    cmd->add_option("--grid-r", c.grid_r, "window grid, a,b,c or start:step:stop");
    cmd->add_option("--grid-k", c.grid_k, "k grid");
    cmd->add_option("--grid-g", c.grid_g, "WDTW penalty grid");
    cmd->add_option("--grid-eps", c.grid_eps, "LCSS threshold grid");
}

struct MeasureArgs {
    std::string name = "euclidean";
    std::optional<double> r, g, eps;
};

void add_measure(CLI::App* cmd, MeasureArgs& m) {
    cmd->add_option("-m,--measure", m.name, "euclidean, dtw, ddtw, wdtw, wddtw or lcss");
    cmd->add_option("--r", m.r, "window as a fraction of series length");
    cmd->add_option("--g", m.g, "WDTW penalty");
    cmd->add_option("--eps", m.eps, "LCSS matching threshold");
}

tsc::MeasureSpec to_spec(const MeasureArgs& m) {
    tsc::MeasureSpec spec;
    spec.kind = tsc::parse_measure_kind(m.name);
    if (m.r) spec.window = *m.r;
    if (m.g) spec.penalty = *m.g;
    if (m.eps) spec.threshold = *m.eps;
    return tsc::MeasureSpec::checked(spec);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    for (auto tok : tsc::io::detail::split(tsc::io::detail::trim(text), tsc::io::Delimiter::Auto)) {
        double v = 0.0;
        if (!tsc::io::detail::parse_double(tok, v)) throw tsc::Error("invalid number '" + std::string(tok) + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<double> read_values(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw tsc::DataError("cannot open '" + path.string() + "'");
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (tsc::io::detail::trim(line).empty()) continue;
        for (double v : parse_values(line)) out.push_back(v);
    }
    if (out.empty()) throw tsc::DataError("'" + path.string() + "' holds no values");
    return out;
}

tsc::LabeledDataset load(const std::string& path, tsc::Role role, bool normalize) {
    tsc::io::ParseOptions opts;
    opts.role = role;
    auto d = tsc::io::parse_dataset(path, opts);
    return normalize ? tsc::z_normalize(d) : d;
}

void print_tune(const std::string& target, const tsc::TuneResult& res) {
    std::printf("target %s\nbest %.6g\nloocv_accuracy %.6f\n", target.c_str(), res.best, res.best_accuracy);
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        std::printf("  %-10.6g %.6f\n", res.candidates[i], res.accuracies[i]);
    }
}

void print_outcome(const char* name, const tsc::stats::TestOutcome& t) {
    std::printf("%s statistic=%.6g p=%.6g n=%zu%s\n", name, t.statistic, t.p, t.n, t.degenerate ? " degenerate" : "");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nearest-neighbour time-series classification with elastic distance measures"};
    app.require_subcommand(1);
    Common common;

    // dist
    auto* dist = app.add_subcommand("dist", "distance between two series");
    MeasureArgs dist_m;
    std::string dist_a, dist_b;
    add_measure(dist, dist_m);
    dist->add_option("a", dist_a, "first series, comma or space separated")->required();
    dist->add_option("b", dist_b, "second series")->required();

    // classify
    auto* classify = app.add_subcommand("classify", "k-NN accuracy on a train/test pair");
    MeasureArgs cls_m;
    std::string cls_train, cls_test;
    std::size_t cls_k = 1;
    bool cls_predictions = false;
    add_measure(classify, cls_m);
    classify->add_option("--train", cls_train)->required();
    classify->add_option("--test", cls_test)->required();
    classify->add_option("-k", cls_k, "neighbours")->check(CLI::PositiveNumber);
    classify->add_flag("--predictions", cls_predictions, "print one line per test instance");
    classify->add_flag("--normalize", common.normalize, "z-normalize every series");
    classify->add_option("--workers", common.workers);

    // tune
    auto* tune = app.add_subcommand("tune", "leave-one-out tuning on a training file");
    MeasureArgs tune_m;
    std::string tune_train, tune_target;
    add_measure(tune, tune_m);
    tune->add_option("--train", tune_train)->required();
    tune->add_option("--target", tune_target, "r, g, eps or k")->required();
    tune->add_flag("--normalize", common.normalize);
    tune->add_option("--workers", common.workers);
    tune->add_option("--cache-dir", common.cache_dir);
    add_grids(tune, common);

    // bench
    auto* bench = app.add_subcommand("bench", "run an experiment config");
    std::string bench_config;
    bench->add_option("config", bench_config)->required()->check(CLI::ExistingFile);
    bench->add_flag("--normalize", common.normalize);
    auto* seed_opt = bench->add_option("--seed", common.seed);
    auto* workers_opt = bench->add_option("--workers", common.workers);
    bench->add_option("--cache-dir", common.cache_dir);
    bench->add_option("--out", common.out);
    add_grids(bench, common);

    // stats
    auto* stats = app.add_subcommand("stats", "ranks, critical difference and paired tests from an accuracy CSV");
    std::string stats_csv, stats_before, stats_after;
    double stats_alpha = 0.05;
    std::string stats_alt = "two-sided";
    stats->add_option("csv", stats_csv)->required()->check(CLI::ExistingFile);
    stats->add_option("--alpha", stats_alpha)->check(CLI::IsMember({0.05, 0.10}));
    stats->add_option("--before", stats_before, "baseline classifier for a paired comparison");
    stats->add_option("--after", stats_after, "compared classifier");
    stats->add_option("--alternative", stats_alt)->check(CLI::IsMember({"two-sided", "greater", "less"}));

    // plot
    auto* plot = app.add_subcommand("plot", "SVG figures");
    plot->require_subcommand(1);
    std::string plot_out;
    auto* plot_cd = plot->add_subcommand("cd", "critical-difference diagram from an accuracy CSV");
    std::string cd_csv;
    double cd_alpha = 0.05;
    plot_cd->add_option("csv", cd_csv)->required()->check(CLI::ExistingFile);
    plot_cd->add_option("--alpha", cd_alpha)->check(CLI::IsMember({0.05, 0.10}));
    plot_cd->add_option("--out", plot_out)->required();
    auto* plot_hist = plot->add_subcommand("hist", "histogram of values or of accuracy differences");
    std::string hist_values, hist_csv, hist_before, hist_after;
    double hist_width = 0.01, hist_origin = 0.0;
    plot_hist->add_option("--values", hist_values, "file of numbers");
    plot_hist->add_option("--csv", hist_csv, "accuracy CSV; plots after - before");
    plot_hist->add_option("--before", hist_before);
    plot_hist->add_option("--after", hist_after);
    plot_hist->add_option("--width", hist_width)->check(CLI::PositiveNumber);
    plot_hist->add_option("--origin", hist_origin);
    plot_hist->add_option("--out", plot_out)->required();
    auto* plot_scatter = plot->add_subcommand("scatter", "scatter with least-squares line");
    std::string scatter_points;
    plot_scatter->add_option("points", scatter_points, "file of x,y rows")->required()->check(CLI::ExistingFile);
    plot_scatter->add_option("--out", plot_out)->required();

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic train/test pair");
    tsc::SyntheticParams sp;
    std::string synth_kind = "phase-shift";
    synth->add_option("--kind", synth_kind)->check(CLI::IsMember({"phase-shift", "warp-noise"}));
    synth->add_option("--length", sp.length);
    synth->add_option("--train-size", sp.train_size);
    synth->add_option("--test-size", sp.test_size);
    synth->add_option("--max-shift", sp.max_shift);
    synth->add_option("--noise", sp.noise);
    synth->add_option("--seed", sp.seed);
    synth->add_option("--name", sp.name);
    synth->add_option("--out", common.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*dist) {
            const tsc::TimeSeries a(parse_values(dist_a));
            const tsc::TimeSeries b(parse_values(dist_b));
            std::printf("%.17g\n", tsc::distance(to_spec(dist_m), a, b));
        } else if (*classify) {
            const auto train = load(cls_train, tsc::Role::Train, common.normalize);
            const auto test = load(cls_test, tsc::Role::Test, common.normalize);
            const tsc::KnnSpec spec{cls_k, to_spec(cls_m)};
            const auto ev = tsc::evaluate(train, test, spec, common.workers);
            if (cls_predictions) {
                for (const auto& p : ev.predictions) {
                    std::printf("%zu %s %s\n", p.index, p.actual.c_str(), p.predicted.c_str());
                }
            }
            std::printf("%s accuracy %.6f\n", tsc::format_spec(spec).c_str(), ev.accuracy);
        } else if (*tune) {
            const auto train = load(tune_train, tsc::Role::Train, common.normalize);
            std::optional<tsc::io::MatrixCache> cache;
            tsc::TuneOptions opts;
            opts.workers = common.workers;
            if (!common.cache_dir.empty()) {
                cache.emplace(common.cache_dir);
                opts.matrices = cache->provider();
            }
            const auto target = tsc::parse_tune_target(tune_target);
            auto grid_or = [](const std::string& text, tsc::ParamGrid fallback) {
                return text.empty() ? fallback : tsc::parse_grid(text);
            };
            const auto kind = tsc::parse_measure_kind(tune_m.name);
            tsc::TuneResult res;
            switch (target) {
                case tsc::TuneTarget::Window:
                    if (kind != tsc::MeasureKind::DTW && kind != tsc::MeasureKind::DDTW) {
                        throw tsc::Error("window tuning needs --measure dtw or ddtw");
                    }
                    res = tsc::tune_window(train, grid_or(common.grid_r, tsc::default_window_grid()), opts,
                                           kind == tsc::MeasureKind::DDTW);
                    break;
                case tsc::TuneTarget::Penalty:
                    if (kind != tsc::MeasureKind::WDTW && kind != tsc::MeasureKind::WDDTW) {
                        throw tsc::Error("penalty tuning needs --measure wdtw or wddtw");
                    }
                    res = tsc::tune_g(train, grid_or(common.grid_g, tsc::default_penalty_grid()),
                                      kind == tsc::MeasureKind::WDDTW, opts);
                    break;
                case tsc::TuneTarget::Threshold:
                    res = tsc::tune_epsilon(train, grid_or(common.grid_eps, tsc::default_epsilon_grid(train)), opts);
                    break;
                case tsc::TuneTarget::K:
                    res = tsc::tune_k(train, to_spec(tune_m), grid_or(common.grid_k, tsc::default_k_grid(train.size())),
                                      opts);
                    break;
            }
            print_tune(std::string(tsc::tune_target_name(target)), res);
        } else if (*bench) {
            auto cfg = tsc::load_config(bench_config);
            if (common.normalize) cfg.normalize = true;
            if (seed_opt->count()) cfg.seed = common.seed;
            if (workers_opt->count()) cfg.workers = common.workers;
            if (!common.cache_dir.empty()) cfg.cache_dir = common.cache_dir;
            if (!common.out.empty()) cfg.out = common.out;
            if (!common.grid_r.empty()) cfg.grids.window = tsc::parse_grid(common.grid_r);
            if (!common.grid_k.empty()) cfg.grids.k = tsc::parse_grid(common.grid_k);
            if (!common.grid_g.empty()) cfg.grids.penalty = tsc::parse_grid(common.grid_g);
            if (!common.grid_eps.empty()) cfg.grids.threshold = tsc::parse_grid(common.grid_eps);
            const auto report = tsc::run_experiment(cfg);
            tsc::write_outputs(report, cfg.out);
            for (const auto& r : report.records) std::printf("%s\n", tsc::format_record(r).c_str());
            for (const auto& f : report.failures) {
                std::fprintf(stderr, "failed %s: %s\n", f.dataset.c_str(), f.message.c_str());
            }
            if (!report.failures.empty()) return report.records.empty() ? kData : kPartial;
        } else if (*stats) {
            const auto table = tsc::io::read_accuracy_csv(stats_csv);
            const auto ranks = tsc::stats::with_critical_difference(tsc::stats::average_ranks(table), stats_alpha);
            std::printf("datasets %zu classifiers %zu\n", table.rows(), table.cols());
            for (std::size_t c = 0; c < ranks.classifiers.size(); ++c) {
                std::printf("rank %-16s %.4f\n", ranks.classifiers[c].c_str(), ranks.average_ranks[c]);
            }
            std::printf("friedman_statistic %.6g\ncritical_difference %.4f (alpha %.2f)\n",
                        tsc::stats::friedman_statistic(ranks), ranks.critical_difference, stats_alpha);
            if (!stats_before.empty() || !stats_after.empty()) {
                if (stats_before.empty() || stats_after.empty()) throw tsc::Error("--before and --after go together");
                const auto alt = stats_alt == "greater" ? tsc::stats::Alternative::Greater
                                 : stats_alt == "less"  ? tsc::stats::Alternative::Less
                                                        : tsc::stats::Alternative::TwoSided;
                const auto before = table.column(table.column_index(stats_before));
                const auto after = table.column(table.column_index(stats_after));
                const auto imp = tsc::stats::mean_median_improvement(before, after, alt);
                std::printf("%s - %s: mean %.6f median %.6f\n", stats_after.c_str(), stats_before.c_str(), imp.mean,
                            imp.median);
                print_outcome("paired_t", imp.t_test);
                print_outcome("wilcoxon", imp.wilcoxon);
            }
        } else if (*plot) {
            if (*plot_cd) {
                const auto table = tsc::io::read_accuracy_csv(cd_csv);
                tsc::svg::emit_cd_diagram(
                    tsc::stats::with_critical_difference(tsc::stats::average_ranks(table), cd_alpha), plot_out);
            } else if (*plot_hist) {
                std::vector<double> values;
                if (!hist_values.empty()) {
                    values = read_values(hist_values);
                } else if (!hist_csv.empty() && !hist_before.empty() && !hist_after.empty()) {
                    const auto table = tsc::io::read_accuracy_csv(hist_csv);
                    const auto b = table.column(table.column_index(hist_before));
                    const auto a = table.column(table.column_index(hist_after));
                    for (std::size_t i = 0; i < a.size(); ++i) values.push_back(a[i] - b[i]);
                } else {
                    throw tsc::Error("plot hist needs --values or --csv with --before and --after");
                }
                tsc::svg::emit_histogram(values, hist_width, plot_out, hist_origin);
            } else {
                std::ifstream in(scatter_points);
                std::vector<double> x, y;
                std::string line;
                while (std::getline(in, line)) {
                    if (tsc::io::detail::trim(line).empty()) continue;
                    const auto v = parse_values(line);
                    if (v.size() != 2) throw tsc::DataError("scatter rows need exactly x and y");
                    x.push_back(v[0]);
                    y.push_back(v[1]);
                }
                tsc::svg::emit_scatter_regression(x, y, plot_out);
            }
            std::printf("wrote %s\n", plot_out.c_str());
        } else if (*synth) {
            sp.kind = tsc::parse_synthetic_kind(synth_kind);
            const auto data = tsc::generate_synthetic(sp);
            fs::create_directories(common.out);
            const fs::path dir(common.out);
            tsc::io::write_dataset(data.train, dir / (sp.name + "_TRAIN.txt"));
            tsc::io::write_dataset(data.test, dir / (sp.name + "_TEST.txt"));
            std::printf("wrote %s and %s\n", (dir / (sp.name + "_TRAIN.txt")).string().c_str(),
                        (dir / (sp.name + "_TEST.txt")).string().c_str());
        }
    } catch (const tsc::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kData;
    } catch (const tsc::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kData;
    }
    return 0;
}
