#pragma once

// File formats: UCR-style dataset text files, the accuracy CSV exchanged with
// the stats module, and the on-disk distance-matrix cache.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tsc/classify.hpp"
#include "tsc/core.hpp"
#include "tsc/stats.hpp"
#include "tsc/tune.hpp"

namespace tsc::io {

namespace fs = std::filesystem;

enum class Delimiter { Auto, Comma, Whitespace };
enum class LabelPosition { First, Last };

struct ParseOptions {
    Delimiter delimiter = Delimiter::Auto;
    LabelPosition label = LabelPosition::First;
    Role role = Role::Train;
    /// Dataset name; defaults to the file stem.
    std::string name;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, Delimiter d) {
    std::vector<std::string_view> out;
    if (d == Delimiter::Auto) d = line.find(',') != std::string_view::npos ? Delimiter::Comma : Delimiter::Whitespace;
    if (d == Delimiter::Comma) {
        std::size_t start = 0;
        for (;;) {
            const auto pos = line.find(',', start);
            out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        return out;
    }
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool parse_double(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto* end = tok.data() + tok.size();
    const auto res = std::from_chars(tok.data(), end, out);
    return res.ec == std::errc{} && res.ptr == end && std::isfinite(out);
}

inline std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace detail

/// Parses label-first (or label-last) rows, one instance per nonempty line.
/// The delimiter is detected from the first data line unless forced.
[[nodiscard]] inline LabeledDataset parse_dataset_text(std::string_view text, const ParseOptions& opts) {
    std::vector<Instance> instances;
    Delimiter delim = opts.delimiter;
    std::size_t fields = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    const std::string where = opts.name.empty() ? std::string("dataset") : opts.name;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = detail::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (delim == Delimiter::Auto) {
            delim = line.find(',') != std::string_view::npos ? Delimiter::Comma : Delimiter::Whitespace;
        }
        const auto toks = detail::split(line, delim);
        if (fields == 0) {
            fields = toks.size();
            if (fields < 2) {
                throw DataError(where + ": line " + std::to_string(line_no) +
                                ": need a label and at least one value");
            }
        } else if (toks.size() != fields) {
            throw DataError(where + ": line " + std::to_string(line_no) + ": has " + std::to_string(toks.size()) +
                            " fields, expected " + std::to_string(fields));
        }
        const std::size_t label_at = opts.label == LabelPosition::First ? 0 : toks.size() - 1;
        std::vector<double> values;
        values.reserve(toks.size() - 1);
        for (std::size_t t = 0; t < toks.size(); ++t) {
            if (t == label_at) continue;
            double v = 0.0;
            if (!detail::parse_double(toks[t], v)) {
                throw DataError(where + ": line " + std::to_string(line_no) + ": invalid value '" +
                                std::string(toks[t]) + "'");
            }
            values.push_back(v);
        }
        if (toks[label_at].empty()) {
            throw DataError(where + ": line " + std::to_string(line_no) + ": empty label");
        }
        instances.push_back({TimeSeries(std::move(values)), std::string(toks[label_at])});
    }
    if (instances.empty()) throw DataError(where + ": no instances");
    return LabeledDataset(opts.name, opts.role, std::move(instances));
}

[[nodiscard]] inline LabeledDataset parse_dataset(const fs::path& path, ParseOptions opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    if (opts.name.empty()) opts.name = path.stem().string();
    return parse_dataset_text(buf.str(), opts);
}

/// Comma-delimited, label-first, values printed with round-trip precision.
inline void write_dataset(const LabeledDataset& data, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset file '" + path.string() + "'");
    for (const auto& inst : data) {
        out << inst.label;
        for (double v : inst.series) out << ',' << detail::fmt("%.17g", v);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Accuracy CSV
// ---------------------------------------------------------------------------

/// Header "dataset,<classifiers...>", one row per dataset, 6 decimal places.
[[nodiscard]] inline std::string format_accuracy_csv(const stats::AccuracyTable& table) {
    auto check = [](const std::string& id) {
        if (id.empty() || id.find_first_of(",\n\r") != std::string::npos) {
            throw Error("identifier '" + id + "' cannot be written to CSV");
        }
    };
    std::string out = "dataset";
    for (const auto& c : table.classifiers()) {
        check(c);
        out += ',' + c;
    }
    out += '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        check(table.datasets()[r]);
        out += table.datasets()[r];
        for (std::size_t c = 0; c < table.cols(); ++c) out += ',' + detail::fmt("%.6f", table(r, c));
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline stats::AccuracyTable parse_accuracy_csv(std::string_view text) {
    std::vector<std::string> classifiers;
    std::vector<std::string> datasets;
    std::vector<std::vector<double>> cells;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool header = true;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = detail::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto toks = detail::split(line, Delimiter::Comma);
        if (header) {
            if (toks.size() < 2) throw DataError("accuracy CSV: header needs at least one classifier");
            for (std::size_t i = 1; i < toks.size(); ++i) classifiers.emplace_back(toks[i]);
            header = false;
            continue;
        }
        if (toks.size() != classifiers.size() + 1) {
            throw DataError("accuracy CSV: line " + std::to_string(line_no) + " has " +
                            std::to_string(toks.size()) + " fields, expected " +
                            std::to_string(classifiers.size() + 1));
        }
        datasets.emplace_back(toks[0]);
        std::vector<double> row;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            double v = 0.0;
            if (!detail::parse_double(toks[i], v) || v < 0.0 || v > 1.0) {
                throw DataError("accuracy CSV: line " + std::to_string(line_no) + ": invalid accuracy '" +
                                std::string(toks[i]) + "'");
            }
            row.push_back(v);
        }
        cells.push_back(std::move(row));
    }
    if (header) throw DataError("accuracy CSV is empty");
    return stats::AccuracyTable(std::move(datasets), std::move(classifiers), std::move(cells));
}

[[nodiscard]] inline stats::AccuracyTable read_accuracy_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open accuracy CSV '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_accuracy_csv(buf.str());
}

inline void write_text(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Distance-matrix cache
// ---------------------------------------------------------------------------

/// FNV-1a over the series length, count and raw value bits. Labels are not
/// hashed since they do not affect distances.
[[nodiscard]] inline std::uint64_t content_hash(const LabeledDataset& data) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    mix(data.series_length());
    mix(data.size());
    for (const auto& inst : data) {
        for (double v : inst.series) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &v, sizeof bits);
            mix(bits);
        }
    }
    return h;
}

/// Matrix files are "m n measure-id params hash" followed by n rows of n
/// space-separated decimals. A file whose header disagrees with the request is
/// ignored and rewritten.
class MatrixCache {
public:
    explicit MatrixCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    [[nodiscard]] static std::string params_of(const MeasureSpec& spec) {
        const auto p = spec.parameter();
        return p ? detail::fmt("%.17g", *p) : std::string("-");
    }

    [[nodiscard]] static std::string header(const LabeledDataset& data, const MeasureSpec& spec) {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(content_hash(data)));
        return std::to_string(data.series_length()) + " " + std::to_string(data.size()) + " " +
               std::string(to_string(spec.kind)) + " " + params_of(spec) + " " + hash;
    }

    [[nodiscard]] fs::path path_for(const LabeledDataset& data, const MeasureSpec& spec) const {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(content_hash(data)));
        return dir_ / (std::string(hash) + "-" + std::string(to_string(spec.kind)) + "-" + params_of(spec) + ".dm");
    }

    [[nodiscard]] std::optional<DistanceMatrix> load(const LabeledDataset& data, const MeasureSpec& spec) const {
        std::ifstream in(path_for(data, spec));
        if (!in) return std::nullopt;
        std::string line;
        if (!std::getline(in, line) || line != header(data, spec)) return std::nullopt;
        const std::size_t n = data.size();
        DistanceMatrix m(n, spec);
        std::vector<double> all(n * n);
        for (auto& v : all) {
            std::string tok;
            if (!(in >> tok) || !detail::parse_double(tok, v)) return std::nullopt;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (all[i * n + j] != all[j * n + i]) return std::nullopt;
                m.set(i, j, all[i * n + j]);
            }
        }
        return m;
    }

    void store(const LabeledDataset& data, const DistanceMatrix& m) const {
        std::string text = header(data, m.measure()) + '\n';
        for (std::size_t i = 0; i < m.size(); ++i) {
            for (std::size_t j = 0; j < m.size(); ++j) {
                if (j) text += ' ';
                text += detail::fmt("%.17g", m(i, j));
            }
            text += '\n';
        }
        // Write then rename so concurrent readers never see a partial file.
        const auto final_path = path_for(data, m.measure());
        auto tmp = final_path;
        tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
        write_text(tmp, text);
        fs::rename(tmp, final_path);
    }

    [[nodiscard]] MatrixProvider provider() const {
        return [this](const LabeledDataset& data, const MeasureSpec& spec, std::size_t workers) {
            if (auto hit = load(data, spec)) return *hit;
            auto m = distance_matrix(data, spec, workers);
            store(data, m);
            return m;
        };
    }

private:
    fs::path dir_;
};

}  // namespace tsc::io
