#pragma once

// Experiment runner: datasets x classifiers, tuning on the training split,
// evaluation on the test split, and persistence of records, the accuracy CSV
// and a run manifest.
//
// Config files are flat "key = value" text. Global keys come first; then one
// section per dataset ("[dataset NAME]") or classifier ("[classifier ID]").
//
//   out = results
//   workers = 4
//   normalize = false
//   grid.r = 0:0.01:1
//
//   [dataset GunPoint]
//   train = GunPoint_TRAIN.txt
//   test = GunPoint_TEST.txt
//
//   [dataset Shifted]
//   synthetic = phase-shift
//   seed = 3
//
//   [classifier DTWRN]
//   measure = dtw
//   tune = r

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tsc/classify.hpp"
#include "tsc/core.hpp"
#include "tsc/io.hpp"
#include "tsc/parallel.hpp"
#include "tsc/stats.hpp"
#include "tsc/synthetic.hpp"
#include "tsc/tune.hpp"

namespace tsc {

struct FileSplit {
    std::filesystem::path train;
    std::filesystem::path test;
};

struct DatasetSource {
    std::string name;
    std::variant<FileSplit, SyntheticParams, SyntheticData> source;
    /// Synthetic sources without their own seed use the config seed.
    bool inherit_seed = false;
};

enum class TuneTarget { Window, Penalty, Threshold, K };

struct ClassifierSpec {
    std::string id;
    KnnSpec knn;
    std::vector<TuneTarget> tune;
};

struct GridOverrides {
    std::optional<ParamGrid> window;
    std::optional<ParamGrid> k;
    std::optional<ParamGrid> penalty;
    std::optional<ParamGrid> threshold;
};

struct ExperimentConfig {
    std::vector<DatasetSource> datasets;
    std::vector<ClassifierSpec> classifiers;
    bool normalize = false;
    GridOverrides grids;
    std::filesystem::path out = "results";
    std::optional<std::filesystem::path> cache_dir;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    io::ParseOptions parse;
};

struct ResultsRecord {
    std::string dataset;
    std::string classifier;
    KnnSpec spec;
    double test_accuracy = 0.0;
    /// LOOCV accuracy of the final spec on the training split (NaN if n < 2).
    double train_accuracy = 0.0;
    std::vector<std::pair<std::string, TuneResult>> tuning;
    double seconds = 0.0;
};

struct Failure {
    std::string dataset;
    std::string message;
};

struct RunReport {
    std::vector<ResultsRecord> records;
    std::vector<Failure> failures;
};

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

[[nodiscard]] inline std::string_view tune_target_name(TuneTarget t) {
    switch (t) {
        case TuneTarget::Window: return "r";
        case TuneTarget::Penalty: return "g";
        case TuneTarget::Threshold: return "eps";
        case TuneTarget::K: return "k";
    }
    return "?";
}

[[nodiscard]] inline TuneTarget parse_tune_target(std::string_view s) {
    if (s == "r" || s == "window") return TuneTarget::Window;
    if (s == "g" || s == "penalty") return TuneTarget::Penalty;
    if (s == "eps" || s == "epsilon" || s == "threshold") return TuneTarget::Threshold;
    if (s == "k") return TuneTarget::K;
    throw Error("unknown tuning target '" + std::string(s) + "'");
}

namespace detail {

inline double parse_number(std::string_view s, const std::string& what) {
    double v = 0.0;
    if (!io::detail::parse_double(io::detail::trim(s), v)) {
        throw Error("invalid number '" + std::string(s) + "' for " + what);
    }
    return v;
}

inline bool parse_bool(std::string_view s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error("invalid boolean '" + std::string(s) + "'");
}

}  // namespace detail

/// "a,b,c" lists or "start:step:stop" ranges (inclusive, values rounded to 1e-12).
[[nodiscard]] inline ParamGrid parse_grid(std::string_view text) {
    text = io::detail::trim(text);
    if (text.find(':') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        for (;;) {
            const auto pos = text.find(':', start);
            parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        if (parts.size() != 3) throw Error("grid range must be start:step:stop");
        const double a = detail::parse_number(parts[0], "grid start");
        const double step = detail::parse_number(parts[1], "grid step");
        const double b = detail::parse_number(parts[2], "grid stop");
        if (!(step > 0.0) || b < a) throw Error("grid range needs step > 0 and stop >= start");
        std::vector<double> v;
        const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
        for (long i = 0; i <= count; ++i) {
            v.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
        }
        return ParamGrid(std::move(v));
    }
    std::vector<double> v;
    for (auto tok : io::detail::split(text, io::Delimiter::Comma)) v.push_back(detail::parse_number(tok, "grid"));
    return ParamGrid(std::move(v));
}

/// Parses the config format described at the top of this header. Relative
/// paths are resolved against `base`.
[[nodiscard]] inline ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base = {}) {
    ExperimentConfig cfg;
    enum class Section { Global, Dataset, Classifier } section = Section::Global;
    std::map<std::string, std::string> kv;
    std::string section_name;
    std::size_t line_no = 0;

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base.empty() ? base / path : path;
    };
    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto flush = [&] {
        if (section == Section::Dataset) {
            DatasetSource ds;
            ds.name = section_name;
            if (auto kind = take("synthetic")) {
                SyntheticParams p;
                p.kind = parse_synthetic_kind(*kind);
                p.name = section_name;
                if (auto v = take("length")) p.length = static_cast<std::size_t>(detail::parse_number(*v, "length"));
                if (auto v = take("train_size")) p.train_size = static_cast<std::size_t>(detail::parse_number(*v, "train_size"));
                if (auto v = take("test_size")) p.test_size = static_cast<std::size_t>(detail::parse_number(*v, "test_size"));
                if (auto v = take("max_shift")) p.max_shift = detail::parse_number(*v, "max_shift");
                if (auto v = take("noise")) p.noise = detail::parse_number(*v, "noise");
                if (auto v = take("seed")) {
                    p.seed = static_cast<std::uint64_t>(detail::parse_number(*v, "seed"));
                } else {
                    ds.inherit_seed = true;
                }
                ds.source = p;
            } else {
                auto train = take("train");
                auto test = take("test");
                if (!train || !test) throw Error("dataset '" + section_name + "' needs train and test paths");
                ds.source = FileSplit{resolve(*train), resolve(*test)};
            }
            if (!kv.empty()) throw Error("dataset '" + section_name + "': unknown key '" + kv.begin()->first + "'");
            cfg.datasets.push_back(std::move(ds));
        } else if (section == Section::Classifier) {
            ClassifierSpec c;
            c.id = section_name;
            auto measure = take("measure");
            if (!measure) throw Error("classifier '" + section_name + "' needs a measure");
            c.knn.measure.kind = parse_measure_kind(*measure);
            if (auto v = take("r")) c.knn.measure.window = detail::parse_number(*v, "r");
            if (auto v = take("g")) c.knn.measure.penalty = detail::parse_number(*v, "g");
            if (auto v = take("eps")) c.knn.measure.threshold = detail::parse_number(*v, "eps");
            if (auto v = take("k")) c.knn.k = static_cast<std::size_t>(detail::parse_number(*v, "k"));
            c.knn.measure = MeasureSpec::checked(c.knn.measure);
            if (auto v = take("tune")) {
                for (auto tok : io::detail::split(*v, io::Delimiter::Comma)) {
                    if (!tok.empty()) c.tune.push_back(parse_tune_target(tok));
                }
            }
            if (!kv.empty()) throw Error("classifier '" + section_name + "': unknown key '" + kv.begin()->first + "'");
            cfg.classifiers.push_back(std::move(c));
        } else {
            if (auto v = take("out")) cfg.out = resolve(*v);
            if (auto v = take("cache_dir")) cfg.cache_dir = resolve(*v);
            if (auto v = take("normalize")) cfg.normalize = detail::parse_bool(*v);
            if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(detail::parse_number(*v, "seed"));
            if (auto v = take("workers")) cfg.workers = static_cast<std::size_t>(detail::parse_number(*v, "workers"));
            if (auto v = take("grid.r")) cfg.grids.window = parse_grid(*v);
            if (auto v = take("grid.k")) cfg.grids.k = parse_grid(*v);
            if (auto v = take("grid.g")) cfg.grids.penalty = parse_grid(*v);
            if (auto v = take("grid.eps")) cfg.grids.threshold = parse_grid(*v);
            if (auto v = take("delimiter")) {
                if (*v == "comma") cfg.parse.delimiter = io::Delimiter::Comma;
                else if (*v == "whitespace") cfg.parse.delimiter = io::Delimiter::Whitespace;
                else if (*v == "auto") cfg.parse.delimiter = io::Delimiter::Auto;
                else throw Error("unknown delimiter '" + *v + "'");
            }
            if (auto v = take("label")) {
                if (*v == "first") cfg.parse.label = io::LabelPosition::First;
                else if (*v == "last") cfg.parse.label = io::LabelPosition::Last;
                else throw Error("unknown label position '" + *v + "'");
            }
            if (!kv.empty()) throw Error("config: unknown global key '" + kv.begin()->first + "'");
        }
        kv.clear();
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = io::detail::trim(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw Error(where + "unterminated section header");
            flush();
            const auto inner = io::detail::trim(line.substr(1, line.size() - 2));
            const auto space = inner.find(' ');
            if (space == std::string_view::npos) throw Error(where + "section needs a type and a name");
            const auto type = inner.substr(0, space);
            section_name = std::string(io::detail::trim(inner.substr(space + 1)));
            if (type == "dataset") section = Section::Dataset;
            else if (type == "classifier") section = Section::Classifier;
            else throw Error(where + "unknown section type '" + std::string(type) + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(where + "expected key = value");
        const std::string key(io::detail::trim(line.substr(0, eq)));
        if (kv.count(key)) throw Error(where + "duplicate key '" + key + "'");
        kv[key] = std::string(io::detail::trim(line.substr(eq + 1)));
    }
    flush();
    if (cfg.datasets.empty()) throw Error("config defines no datasets");
    if (cfg.classifiers.empty()) throw Error("config defines no classifiers");
    return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

[[nodiscard]] inline SyntheticData load_dataset(const DatasetSource& ds, const ExperimentConfig& cfg) {
    SyntheticData out;
    if (const auto* files = std::get_if<FileSplit>(&ds.source)) {
        auto opts = cfg.parse;
        opts.name = ds.name;
        opts.role = Role::Train;
        out.train = io::parse_dataset(files->train, opts);
        opts.role = Role::Test;
        out.test = io::parse_dataset(files->test, opts);
    } else if (const auto* params = std::get_if<SyntheticParams>(&ds.source)) {
        auto p = *params;
        p.name = ds.name;
        if (ds.inherit_seed) p.seed = cfg.seed;
        out = generate_synthetic(p);
    } else {
        out = std::get<SyntheticData>(ds.source);
    }
    if (out.train.series_length() != out.test.series_length()) {
        throw DataError(ds.name + ": train and test series lengths differ");
    }
    if (cfg.normalize) {
        out.train = z_normalize(out.train);
        out.test = z_normalize(out.test);
    }
    return out;
}

/// Tunes (if directed) on the training split only, then evaluates on test.
[[nodiscard]] inline ResultsRecord run_cell(const SyntheticData& data, const ClassifierSpec& clf,
                                           const ExperimentConfig& cfg, const TuneOptions& opts) {
    const auto started = std::chrono::steady_clock::now();
    ResultsRecord rec;
    rec.dataset = data.train.name();
    rec.classifier = clf.id;
    rec.spec = clf.knn;
    const auto& train = data.train;
    std::optional<double> last_tuned_accuracy;

    for (auto target : clf.tune) {
        if (target == TuneTarget::K) continue;
        TuneResult res;
        switch (target) {
            case TuneTarget::Window: {
                const auto kind = rec.spec.measure.kind;
                if (kind != MeasureKind::DTW && kind != MeasureKind::DDTW) {
                    throw Error(clf.id + ": window tuning needs dtw or ddtw");
                }
                res = tune_window(train, cfg.grids.window.value_or(default_window_grid()), opts,
                                  kind == MeasureKind::DDTW);
                rec.spec.measure.window = res.best;
                break;
            }
            case TuneTarget::Penalty: {
                const auto kind = rec.spec.measure.kind;
                if (kind != MeasureKind::WDTW && kind != MeasureKind::WDDTW) {
                    throw Error(clf.id + ": penalty tuning needs wdtw or wddtw");
                }
                res = tune_g(train, cfg.grids.penalty.value_or(default_penalty_grid()),
                             kind == MeasureKind::WDDTW, opts);
                rec.spec.measure.penalty = res.best;
                break;
            }
            case TuneTarget::Threshold: {
                if (rec.spec.measure.kind != MeasureKind::LCSS) throw Error(clf.id + ": epsilon tuning needs lcss");
                res = tune_epsilon(train, cfg.grids.threshold.value_or(default_epsilon_grid(train)), opts);
                rec.spec.measure.threshold = res.best;
                break;
            }
            case TuneTarget::K: break;
        }
        rec.spec.k = 1;
        last_tuned_accuracy = res.best_accuracy;
        rec.tuning.emplace_back(std::string(tune_target_name(target)), std::move(res));
    }
    if (std::find(clf.tune.begin(), clf.tune.end(), TuneTarget::K) != clf.tune.end()) {
        ParamGrid grid = cfg.grids.k.value_or(default_k_grid(train.size()));
        if (cfg.grids.k) {
            std::vector<double> capped;
            for (double k : grid) {
                if (k <= static_cast<double>(train.size() - 1)) capped.push_back(k);
            }
            grid = ParamGrid(std::move(capped));
        }
        auto res = tune_k(train, rec.spec.measure, grid, opts);
        rec.spec.k = static_cast<std::size_t>(res.best);
        last_tuned_accuracy = res.best_accuracy;
        rec.tuning.emplace_back("k", std::move(res));
    }

    if (last_tuned_accuracy) {
        rec.train_accuracy = *last_tuned_accuracy;
    } else if (train.size() >= 2 && rec.spec.k <= train.size() - 1) {
        rec.train_accuracy = loocv_accuracy(train, rec.spec, opts);
    } else {
        rec.train_accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    rec.test_accuracy = evaluate(train, data.test, rec.spec).accuracy;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rec;
}

/// Runs every (dataset, classifier) cell. Records come back ordered by dataset
/// then classifier, in config order, whatever the worker count. A dataset
/// that fails to load or run is reported as a failure; other datasets continue.
[[nodiscard]] inline RunReport run_experiment(const ExperimentConfig& cfg) {
    RunReport report;
    std::optional<io::MatrixCache> cache;
    if (cfg.cache_dir) cache.emplace(*cfg.cache_dir);
    TuneOptions opts;
    opts.workers = 1;
    if (cache) opts.matrices = cache->provider();

    std::vector<std::optional<SyntheticData>> loaded(cfg.datasets.size());
    std::vector<std::string> load_errors(cfg.datasets.size());
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        try {
            loaded[d] = load_dataset(cfg.datasets[d], cfg);
        } catch (const std::exception& e) {
            load_errors[d] = e.what();
        }
    }

    const std::size_t nc = cfg.classifiers.size();
    const std::size_t cells = cfg.datasets.size() * nc;
    std::vector<std::optional<ResultsRecord>> slots(cells);
    std::vector<std::string> cell_errors(cells);
    parallel_for(cells, cfg.workers, [&](std::size_t cell) {
        const std::size_t d = cell / nc;
        if (!loaded[d]) return;
        try {
            slots[cell] = run_cell(*loaded[d], cfg.classifiers[cell % nc], cfg, opts);
        } catch (const std::exception& e) {
            cell_errors[cell] = e.what();
        }
    });

    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        if (!loaded[d]) {
            report.failures.push_back({cfg.datasets[d].name, load_errors[d]});
            continue;
        }
        bool ok = true;
        for (std::size_t c = 0; c < nc; ++c) {
            if (!slots[d * nc + c]) {
                report.failures.push_back({cfg.datasets[d].name, cfg.classifiers[c].id + ": " + cell_errors[d * nc + c]});
                ok = false;
            }
        }
        // A dataset only reaches the CSV with every classifier present.
        if (!ok) continue;
        for (std::size_t c = 0; c < nc; ++c) report.records.push_back(std::move(*slots[d * nc + c]));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Outputs
// ---------------------------------------------------------------------------

/// Rows in first-appearance order of datasets, columns in first-appearance
/// order of classifiers; every dataset must have the same classifier set.
[[nodiscard]] inline stats::AccuracyTable accuracy_table(const std::vector<ResultsRecord>& records) {
    if (records.empty()) throw Error("no records to tabulate");
    std::vector<std::string> datasets;
    std::vector<std::string> classifiers;
    for (const auto& r : records) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
        if (r.dataset == records.front().dataset) classifiers.push_back(r.classifier);
    }
    std::vector<std::vector<double>> cells(datasets.size(), std::vector<double>(classifiers.size(), -1.0));
    std::vector<std::size_t> seen(datasets.size(), 0);
    for (const auto& r : records) {
        const auto d = static_cast<std::size_t>(std::find(datasets.begin(), datasets.end(), r.dataset) - datasets.begin());
        const auto it = std::find(classifiers.begin(), classifiers.end(), r.classifier);
        if (it == classifiers.end()) {
            throw Error("classifier '" + r.classifier + "' appears for dataset '" + r.dataset + "' only");
        }
        auto& cell = cells[d][static_cast<std::size_t>(it - classifiers.begin())];
        if (cell >= 0.0) throw Error("duplicate record for " + r.dataset + "/" + r.classifier);
        cell = r.test_accuracy;
        ++seen[d];
    }
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        if (seen[d] != classifiers.size()) throw Error("dataset '" + datasets[d] + "' is missing classifiers");
    }
    return stats::AccuracyTable(std::move(datasets), std::move(classifiers), std::move(cells));
}

[[nodiscard]] inline std::string format_spec(const KnnSpec& spec) {
    std::string out = "measure=" + std::string(to_string(spec.measure.kind));
    char buf[64];
    if (auto p = spec.measure.parameter()) {
        const char* key = spec.measure.kind == MeasureKind::LCSS ? "eps"
                          : (spec.measure.kind == MeasureKind::WDTW || spec.measure.kind == MeasureKind::WDDTW) ? "g"
                                                                                                                 : "r";
        std::snprintf(buf, sizeof buf, " %s=%.6g", key, *p);
        out += buf;
    }
    out += " k=" + std::to_string(spec.k);
    return out;
}

[[nodiscard]] inline std::string format_record(const ResultsRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, " test_acc=%.6f train_loocv=%.6f seconds=%.3f", r.test_accuracy, r.train_accuracy,
                  r.seconds);
    return "dataset=" + r.dataset + " classifier=" + r.classifier + " " + format_spec(r.spec) + buf;
}

inline void emit_accuracy_csv(const std::vector<ResultsRecord>& records, const std::filesystem::path& out) {
    io::write_text(out, io::format_accuracy_csv(accuracy_table(records)));
}

/// Writes accuracy.csv, records.txt and manifest.txt under cfg.out.
inline void write_outputs(const RunReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (!report.records.empty()) emit_accuracy_csv(report.records, out_dir / "accuracy.csv");
    std::string lines;
    for (const auto& r : report.records) lines += format_record(r) + '\n';
    io::write_text(out_dir / "records.txt", lines);
    std::string manifest = "cells_ok " + std::to_string(report.records.size()) + "\nfailures " +
                           std::to_string(report.failures.size()) + "\n";
    for (const auto& r : report.records) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
        manifest += "ok " + r.dataset + " " + r.classifier + " seconds=" + buf + "\n";
    }
    for (const auto& f : report.failures) manifest += "failed " + f.dataset + " " + f.message + "\n";
    io::write_text(out_dir / "manifest.txt", manifest);
}

}  // namespace tsc
