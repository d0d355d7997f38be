#pragma once

// Leave-one-out cross-validation on the training split for k, the DTW window
// r, the WDTW penalty g and the LCSS threshold epsilon. Nothing here ever
// sees a test set.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tsc/classify.hpp"
#include "tsc/core.hpp"
#include "tsc/measures.hpp"
#include "tsc/parallel.hpp"

namespace tsc {

/// Nonempty, strictly increasing candidate values.
class ParamGrid {
public:
    ParamGrid() = default;
    explicit ParamGrid(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw Error("parameter grid is empty");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) throw Error("parameter grid values must be finite");
            if (i > 0 && !(values_[i] > values_[i - 1])) {
                throw Error("parameter grid must be strictly increasing");
            }
        }
    }
    ParamGrid(std::initializer_list<double> values) : ParamGrid(std::vector<double>(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] double front() const noexcept { return values_.front(); }
    [[nodiscard]] double back() const noexcept { return values_.back(); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] auto begin() const noexcept { return values_.begin(); }
    [[nodiscard]] auto end() const noexcept { return values_.end(); }

private:
    std::vector<double> values_;
};

struct TuneResult {
    double best = 0.0;
    double best_accuracy = 0.0;
    std::vector<double> candidates;
    std::vector<double> accuracies;

    friend bool operator==(const TuneResult&, const TuneResult&) = default;
};

using MatrixProvider =
    std::function<DistanceMatrix(const LabeledDataset&, const MeasureSpec&, std::size_t workers)>;

struct TuneOptions {
    std::size_t workers = 1;
    /// Where distance matrices come from; empty means compute directly.
    MatrixProvider matrices;
};

namespace detail {

inline DistanceMatrix fetch_matrix(const LabeledDataset& train, const MeasureSpec& measure,
                                   const TuneOptions& opts) {
    if (opts.matrices) return opts.matrices(train, measure, opts.workers);
    return distance_matrix(train, measure, opts.workers);
}

inline TuneResult pick_best(const ParamGrid& grid, std::vector<double> accuracies) {
    TuneResult out;
    out.candidates = grid.values();
    out.accuracies = std::move(accuracies);
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.accuracies.size(); ++i) {
        if (out.accuracies[i] > out.accuracies[best]) best = i;
    }
    out.best = grid[best];
    out.best_accuracy = out.accuracies[best];
    return out;
}

inline void require_loocv_size(const LabeledDataset& train) {
    if (train.size() < 2) throw Error("leave-one-out needs at least two training instances");
}

}  // namespace detail

/// LOOCV accuracy from a precomputed training distance matrix.
[[nodiscard]] inline double loocv_accuracy(const DistanceMatrix& matrix, std::span<const ClassLabel> labels,
                                           std::size_t k) {
    const std::size_t n = matrix.size();
    if (n < 2) throw Error("leave-one-out needs at least two training instances");
    if (labels.size() != n) throw Error("label count does not match distance matrix");
    if (k == 0 || k > n - 1) throw Error("k must lie in [1, n-1] for leave-one-out");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (knn_vote(matrix.row(i), labels, k, i) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

[[nodiscard]] inline double loocv_accuracy(const LabeledDataset& train, const KnnSpec& spec,
                                           const TuneOptions& opts = {}) {
    detail::require_loocv_size(train);
    if (spec.k == 0 || spec.k > train.size() - 1) throw Error("k must lie in [1, n-1] for leave-one-out");
    const auto matrix = detail::fetch_matrix(train, spec.measure, opts);
    return loocv_accuracy(matrix, labels_of(train), spec.k);
}

/// Best DTW window (or DDTW window when `derivative`) for 1-NN.
[[nodiscard]] inline TuneResult tune_window(const LabeledDataset& train, const ParamGrid& grid,
                                            const TuneOptions& opts = {}, bool derivative = false) {
    detail::require_loocv_size(train);
    for (double r : grid) {
        if (r < 0.0 || r > 1.0) throw Error("window grid values must lie in [0,1]");
    }
    const auto labels = labels_of(train);
    const std::size_t m = derivative ? train.series_length() - 2 : train.series_length();
    if (derivative && train.series_length() < 3) throw Error("series too short for derivative");
    // dtw depends on r only through band(r, m): equal bands give identical matrices.
    std::map<std::size_t, double> by_band;
    std::vector<double> acc(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const std::size_t w = band(grid[c], m);
        auto it = by_band.find(w);
        if (it == by_band.end()) {
            const auto spec = derivative ? MeasureSpec::ddtw(grid[c]) : MeasureSpec::dtw(grid[c]);
            it = by_band.emplace(w, loocv_accuracy(detail::fetch_matrix(train, spec, opts), labels, 1)).first;
        }
        acc[c] = it->second;
    }
    return detail::pick_best(grid, std::move(acc));
}

/// Best k for k-NN under a fixed measure. Grid values are rounded to integers.
[[nodiscard]] inline TuneResult tune_k(const LabeledDataset& train, const MeasureSpec& measure,
                                       const ParamGrid& grid, const TuneOptions& opts = {}) {
    detail::require_loocv_size(train);
    for (double k : grid) {
        if (k < 1.0 || std::floor(k) != k) throw Error("k grid values must be positive integers");
        if (k > static_cast<double>(train.size() - 1)) {
            throw Error("k grid value " + std::to_string(static_cast<long>(k)) + " exceeds n-1 = " +
                        std::to_string(train.size() - 1));
        }
    }
    const auto labels = labels_of(train);
    const auto matrix = detail::fetch_matrix(train, measure, opts);
    std::vector<double> acc(grid.size());
    parallel_for(grid.size(), opts.workers, [&](std::size_t c) {
        acc[c] = loocv_accuracy(matrix, labels, static_cast<std::size_t>(grid[c]));
    });
    return detail::pick_best(grid, std::move(acc));
}

/// Best WDTW (or WDDTW when `derivative`) penalty for 1-NN.
[[nodiscard]] inline TuneResult tune_g(const LabeledDataset& train, const ParamGrid& grid,
                                       bool derivative = false, const TuneOptions& opts = {}) {
    detail::require_loocv_size(train);
    for (double g : grid) {
        if (g < 0.0) throw Error("penalty grid values must be >= 0");
    }
    const auto labels = labels_of(train);
    std::vector<double> acc(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto spec = derivative ? MeasureSpec::wddtw(grid[c]) : MeasureSpec::wdtw(grid[c]);
        acc[c] = loocv_accuracy(detail::fetch_matrix(train, spec, opts), labels, 1);
    }
    return detail::pick_best(grid, std::move(acc));
}

/// Best LCSS threshold for 1-NN.
[[nodiscard]] inline TuneResult tune_epsilon(const LabeledDataset& train, const ParamGrid& grid,
                                             const TuneOptions& opts = {}) {
    detail::require_loocv_size(train);
    for (double e : grid) {
        if (e < 0.0) throw Error("epsilon grid values must be >= 0");
    }
    const auto labels = labels_of(train);
    std::vector<double> acc(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        acc[c] = loocv_accuracy(detail::fetch_matrix(train, MeasureSpec::lcss(grid[c]), opts), labels, 1);
    }
    return detail::pick_best(grid, std::move(acc));
}

// Default grids ---------------------------------------------------------------

/// r in {0.00, 0.01, ..., 1.00}.
[[nodiscard]] inline ParamGrid default_window_grid() {
    std::vector<double> v(101);
    for (int i = 0; i <= 100; ++i) v[static_cast<std::size_t>(i)] = i / 100.0;
    return ParamGrid(std::move(v));
}

/// Odd k from 1 to 99, capped at n - 1.
[[nodiscard]] inline ParamGrid default_k_grid(std::size_t n) {
    if (n < 2) throw Error("k grid needs at least two training instances");
    std::vector<double> v;
    for (std::size_t k = 1; k <= 99 && k <= n - 1; k += 2) v.push_back(static_cast<double>(k));
    return ParamGrid(std::move(v));
}

[[nodiscard]] inline ParamGrid default_penalty_grid() {
    return ParamGrid{0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0};
}

/// {0.02, 0.04, ..., 1.0} scaled by the population standard deviation of all
/// training values (unscaled if that is zero).
[[nodiscard]] inline ParamGrid default_epsilon_grid(const LabeledDataset& train) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& inst : train) {
        for (double v : inst.series) sum += v;
        count += inst.series.size();
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& inst : train) {
        for (double v : inst.series) ss += (v - mean) * (v - mean);
    }
    double sd = std::sqrt(ss / static_cast<double>(count));
    if (!(sd > 0.0)) sd = 1.0;
    std::vector<double> v(50);
    for (int i = 1; i <= 50; ++i) v[static_cast<std::size_t>(i - 1)] = (i / 50.0) * sd;
    return ParamGrid(std::move(v));
}

}  // namespace tsc
