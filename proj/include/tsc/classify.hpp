#pragma once

// k-nearest-neighbour classification over any MeasureSpec.
//
// Neighbour ties at equal distance go to the lower training index. Vote ties
// between classes go to whichever tied class has the nearest neighbour, so a
// tied k-NN vote degrades to 1-NN behaviour.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "tsc/core.hpp"
#include "tsc/measures.hpp"
#include "tsc/parallel.hpp"

namespace tsc {

struct KnnSpec {
    std::size_t k = 1;
    MeasureSpec measure;
};

struct Prediction {
    ClassLabel predicted;
    ClassLabel actual;
    std::size_t index = 0;
};

struct Evaluation {
    double accuracy = 0.0;
    std::vector<Prediction> predictions;
};

/// Symmetric n x n matrix of pairwise distances over one dataset.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(std::size_t n, MeasureSpec measure)
        : n_(n), measure_(measure), values_(n * n, 0.0) {}

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] const MeasureSpec& measure() const noexcept { return measure_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return std::span<const double>(values_).subspan(i * n_, n_);
    }

    void set(std::size_t i, std::size_t j, double v) noexcept {
        values_[i * n_ + j] = v;
        values_[j * n_ + i] = v;
    }

    friend bool operator==(const DistanceMatrix& a, const DistanceMatrix& b) {
        return a.n_ == b.n_ && a.measure_ == b.measure_ && a.values_ == b.values_;
    }

private:
    std::size_t n_ = 0;
    MeasureSpec measure_;
    std::vector<double> values_;
};

/// Majority vote among the k nearest entries of `distances`, optionally
/// skipping one index (the held-out instance in leave-one-out).
[[nodiscard]] inline ClassLabel knn_vote(std::span<const double> distances,
                                         std::span<const ClassLabel> labels, std::size_t k,
                                         std::optional<std::size_t> exclude = std::nullopt) {
    if (distances.size() != labels.size()) throw Error("knn_vote: distance/label count mismatch");
    std::vector<std::size_t> order;
    order.reserve(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (exclude && *exclude == i) continue;
        order.push_back(i);
    }
    if (k == 0) throw Error("k must be at least 1");
    if (k > order.size()) {
        throw Error("k = " + std::to_string(k) + " exceeds the " + std::to_string(order.size()) +
                    " available training instances");
    }
    auto nearer = [&](std::size_t x, std::size_t y) {
        return distances[x] < distances[y] || (distances[x] == distances[y] && x < y);
    };
    if (k == 1) {
        return labels[*std::min_element(order.begin(), order.end(), nearer)];
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), nearer);

    std::vector<std::pair<const ClassLabel*, std::size_t>> counts;
    for (std::size_t r = 0; r < k; ++r) {
        const ClassLabel& lab = labels[order[r]];
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return *c.first == lab; });
        if (it == counts.end()) {
            counts.emplace_back(&lab, 1);
        } else {
            ++it->second;
        }
    }
    // counts is in order of first appearance among the sorted neighbours, so the
    // first class reaching the maximum owns the nearest neighbour among the tied.
    std::size_t best = 0;
    for (const auto& c : counts) best = std::max(best, c.second);
    for (const auto& c : counts) {
        if (c.second == best) return *c.first;
    }
    return *counts.front().first;
}

/// Training set bound to a measure with every training series prepared once.
class KnnClassifier {
public:
    KnnClassifier(const LabeledDataset& train, KnnSpec spec)
        : spec_(spec), distance_(spec.measure, train.series_length()) {
        if (train.size() == 0) throw Error("training set is empty");
        if (spec.k == 0) throw Error("k must be at least 1");
        if (spec.k > train.size()) {
            throw Error("k = " + std::to_string(spec.k) + " exceeds training size " +
                        std::to_string(train.size()));
        }
        prepared_.reserve(train.size());
        labels_.reserve(train.size());
        for (const auto& inst : train) {
            prepared_.push_back(distance_.prepare(inst.series));
            labels_.push_back(inst.label);
        }
    }

    [[nodiscard]] std::vector<double> distances_to(const TimeSeries& query) const {
        const auto q = distance_.prepare(query);
        std::vector<double> d(prepared_.size());
        for (std::size_t i = 0; i < prepared_.size(); ++i) d[i] = distance_.prepared(q, prepared_[i]);
        return d;
    }

    [[nodiscard]] ClassLabel predict(const TimeSeries& query) const {
        return knn_vote(distances_to(query), labels_, spec_.k);
    }

    [[nodiscard]] const KnnSpec& spec() const noexcept { return spec_; }

private:
    KnnSpec spec_;
    Distance distance_;
    std::vector<std::vector<double>> prepared_;
    std::vector<ClassLabel> labels_;
};

[[nodiscard]] inline ClassLabel knn_predict(const LabeledDataset& train, const TimeSeries& query,
                                            const KnnSpec& spec) {
    if (query.size() != train.series_length()) throw Error("query length does not match training series");
    return KnnClassifier(train, spec).predict(query);
}

/// Test accuracy with predictions in test-set order.
[[nodiscard]] inline Evaluation evaluate(const LabeledDataset& train, const LabeledDataset& test,
                                         const KnnSpec& spec, std::size_t workers = 1) {
    if (test.size() == 0) throw Error("test set is empty");
    if (test.series_length() != train.series_length()) {
        throw Error("train and test series lengths differ");
    }
    const KnnClassifier clf(train, spec);
    Evaluation out;
    out.predictions.resize(test.size());
    parallel_for(test.size(), workers, [&](std::size_t i) {
        out.predictions[i] = {clf.predict(test[i].series), test[i].label, i};
    });
    std::size_t correct = 0;
    for (const auto& p : out.predictions) correct += p.predicted == p.actual ? 1 : 0;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    return out;
}

/// Pairwise distances over one dataset; the upper triangle is computed and mirrored.
[[nodiscard]] inline DistanceMatrix distance_matrix(const LabeledDataset& data, const MeasureSpec& measure,
                                                    std::size_t workers = 1) {
    const std::size_t n = data.size();
    if (n == 0) throw Error("dataset is empty");
    const Distance dist(measure, data.series_length());
    std::vector<std::vector<double>> prepared(n);
    parallel_for(n, workers, [&](std::size_t i) { prepared[i] = dist.prepare(data[i].series); });
    DistanceMatrix out(n, measure);
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) out.set(i, j, dist.prepared(prepared[i], prepared[j]));
    });
    return out;
}

[[nodiscard]] inline std::vector<ClassLabel> labels_of(const LabeledDataset& data) {
    std::vector<ClassLabel> out;
    out.reserve(data.size());
    for (const auto& inst : data) out.push_back(inst.label);
    return out;
}

}  // namespace tsc
