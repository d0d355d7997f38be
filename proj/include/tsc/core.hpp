#pragma once

// Domain types shared by every tsc module: series, labels, datasets and
// distance-measure specifications.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad files, ragged rows, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Ordered, finite, real-valued observations. Immutable after construction.
class TimeSeries {
public:
    TimeSeries() = default;

    explicit TimeSeries(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) {
            throw Error("time series must contain at least one value");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw Error("time series values must be finite");
            }
        }
    }

    TimeSeries(std::initializer_list<double> values)
        : TimeSeries(std::vector<double>(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] auto begin() const noexcept { return values_.begin(); }
    [[nodiscard]] auto end() const noexcept { return values_.end(); }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> values_;
};

using ClassLabel = std::string;

struct Instance {
    TimeSeries series;
    ClassLabel label;
};

enum class Role { Train, Test };

/// Labelled series of a common length. Instance order is significant: the
/// index is used for deterministic tie-breaking everywhere.
class LabeledDataset {
public:
    LabeledDataset() = default;

    LabeledDataset(std::string name, Role role, std::vector<Instance> instances)
        : name_(std::move(name)), role_(role), instances_(std::move(instances)) {
        if (instances_.empty()) {
            throw Error("dataset '" + name_ + "' has no instances");
        }
        const std::size_t m = instances_.front().series.size();
        for (std::size_t i = 0; i < instances_.size(); ++i) {
            if (instances_[i].series.size() != m) {
                throw Error("dataset '" + name_ + "': instance " + std::to_string(i) +
                            " has length " + std::to_string(instances_[i].series.size()) +
                            ", expected " + std::to_string(m));
            }
        }
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] Role role() const noexcept { return role_; }
    [[nodiscard]] std::size_t size() const noexcept { return instances_.size(); }
    [[nodiscard]] std::size_t series_length() const noexcept {
        return instances_.empty() ? 0 : instances_.front().series.size();
    }
    [[nodiscard]] const Instance& operator[](std::size_t i) const noexcept { return instances_[i]; }
    [[nodiscard]] const std::vector<Instance>& instances() const noexcept { return instances_; }
    [[nodiscard]] auto begin() const noexcept { return instances_.begin(); }
    [[nodiscard]] auto end() const noexcept { return instances_.end(); }

    /// Distinct labels in order of first appearance.
    [[nodiscard]] std::vector<ClassLabel> classes() const {
        std::vector<ClassLabel> out;
        for (const auto& inst : instances_) {
            bool seen = false;
            for (const auto& c : out) {
                if (c == inst.label) {
                    seen = true;
                    break;
                }
            }
            if (!seen) out.push_back(inst.label);
        }
        return out;
    }

    /// Copy of this dataset with one instance removed.
    [[nodiscard]] LabeledDataset without(std::size_t index) const {
        std::vector<Instance> rest;
        rest.reserve(instances_.size() - 1);
        for (std::size_t i = 0; i < instances_.size(); ++i) {
            if (i != index) rest.push_back(instances_[i]);
        }
        return LabeledDataset(name_, role_, std::move(rest));
    }

private:
    std::string name_;
    Role role_ = Role::Train;
    std::vector<Instance> instances_;
};

enum class MeasureKind { SquaredEuclidean, DTW, DDTW, WDTW, WDDTW, LCSS };

/// A distance measure and its parameter. Only the parameter relevant to the
/// kind is read: window for DTW/DDTW, penalty for WDTW/WDDTW, threshold for
/// LCSS.
struct MeasureSpec {
    MeasureKind kind = MeasureKind::SquaredEuclidean;
    double window = 1.0;
    double penalty = 0.0;
    double threshold = 0.0;

    static MeasureSpec euclidean() { return {}; }
    static MeasureSpec dtw(double r) { return checked({MeasureKind::DTW, r, 0.0, 0.0}); }
    static MeasureSpec ddtw(double r) { return checked({MeasureKind::DDTW, r, 0.0, 0.0}); }
    static MeasureSpec wdtw(double g) { return checked({MeasureKind::WDTW, 1.0, g, 0.0}); }
    static MeasureSpec wddtw(double g) { return checked({MeasureKind::WDDTW, 1.0, g, 0.0}); }
    static MeasureSpec lcss(double eps) { return checked({MeasureKind::LCSS, 1.0, 0.0, eps}); }

    static MeasureSpec checked(MeasureSpec s) {
        if (!(s.window >= 0.0 && s.window <= 1.0)) throw Error("window r must lie in [0,1]");
        if (!(s.penalty >= 0.0) || !std::isfinite(s.penalty)) throw Error("penalty g must be >= 0");
        if (!(s.threshold >= 0.0) || !std::isfinite(s.threshold)) throw Error("threshold epsilon must be >= 0");
        return s;
    }

    /// The parameter this kind actually uses, if any.
    [[nodiscard]] std::optional<double> parameter() const noexcept {
        switch (kind) {
            case MeasureKind::DTW:
            case MeasureKind::DDTW: return window;
            case MeasureKind::WDTW:
            case MeasureKind::WDDTW: return penalty;
            case MeasureKind::LCSS: return threshold;
            case MeasureKind::SquaredEuclidean: break;
        }
        return std::nullopt;
    }

    friend bool operator==(const MeasureSpec& a, const MeasureSpec& b) noexcept {
        return a.kind == b.kind && a.parameter() == b.parameter();
    }
};

[[nodiscard]] inline std::string_view to_string(MeasureKind kind) noexcept {
    switch (kind) {
        case MeasureKind::SquaredEuclidean: return "euclidean";
        case MeasureKind::DTW: return "dtw";
        case MeasureKind::DDTW: return "ddtw";
        case MeasureKind::WDTW: return "wdtw";
        case MeasureKind::WDDTW: return "wddtw";
        case MeasureKind::LCSS: return "lcss";
    }
    return "unknown";
}

[[nodiscard]] inline MeasureKind parse_measure_kind(std::string_view name) {
    for (auto k : {MeasureKind::SquaredEuclidean, MeasureKind::DTW, MeasureKind::DDTW,
                   MeasureKind::WDTW, MeasureKind::WDDTW, MeasureKind::LCSS}) {
        if (to_string(k) == name) return k;
    }
    if (name == "ed" || name == "euclid") return MeasureKind::SquaredEuclidean;
    throw Error("unknown measure '" + std::string(name) + "'");
}

/// Z-normalization with the population standard deviation. Constant series
/// map to all zeros.
[[nodiscard]] inline TimeSeries z_normalize(const TimeSeries& a) {
    const std::size_t m = a.size();
    if (m < 2) throw Error("series too short to normalize");
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : a) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m));
    std::vector<double> out(m, 0.0);
    if (sd > 0.0) {
        for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] - mean) / sd;
    }
    return TimeSeries(std::move(out));
}

[[nodiscard]] inline LabeledDataset z_normalize(const LabeledDataset& data) {
    std::vector<Instance> out;
    out.reserve(data.size());
    for (const auto& inst : data) out.push_back({z_normalize(inst.series), inst.label});
    return LabeledDataset(data.name(), data.role(), std::move(out));
}

/// Same series with the labels replaced, used to probe label independence.
[[nodiscard]] inline LabeledDataset relabel(const LabeledDataset& data,
                                            const std::vector<ClassLabel>& labels) {
    if (labels.size() != data.size()) throw Error("relabel: label count mismatch");
    std::vector<Instance> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.push_back({data[i].series, labels[i]});
    return LabeledDataset(data.name(), data.role(), std::move(out));
}

}  // namespace tsc
