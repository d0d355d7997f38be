#pragma once

// Lock-step and elastic distance measures: squared Euclidean, windowed DTW,
// derivative DTW, logistic-weighted DTW and epsilon-threshold LCSS.
//
// All measures work on squared pointwise differences; no square root is taken
// anywhere. Every function is pure and reentrant.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "tsc/core.hpp"

namespace tsc {

namespace detail {

inline void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error("series length mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    }
    if (a.empty()) throw Error("series must be nonempty");
}

inline double sq(double x) noexcept { return x * x; }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace detail

/// Index pair (row into a, column into b), 0-based.
struct PathPoint {
    std::size_t i;
    std::size_t j;
    friend bool operator==(const PathPoint&, const PathPoint&) = default;
};

using WarpingPath = std::vector<PathPoint>;

// ---------------------------------------------------------------------------
// Squared Euclidean
// ---------------------------------------------------------------------------

[[nodiscard]] inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    detail::require_same_length(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += detail::sq(a[i] - b[i]);
    return sum;
}

[[nodiscard]] inline double squared_euclidean(const TimeSeries& a, const TimeSeries& b) {
    return squared_euclidean(a.values(), b.values());
}

// ---------------------------------------------------------------------------
// DTW
// ---------------------------------------------------------------------------

/// Maximum index displacement |i - j| allowed for window proportion r on
/// series of length m. The small slack absorbs binary representation error
/// of decimal r (0.29 * 100 is 28.999999999999996 in doubles).
[[nodiscard]] inline std::size_t band(double r, std::size_t m) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error("window r must lie in [0,1]");
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(m) + 1e-9));
}

namespace detail {

// Rolling-row DTW over an arbitrary pointwise cost. Cells with |i-j| > w are
// unreachable. The recursion is min over (diagonal, up, left) plus the cell
// cost, so the result is exactly symmetric under swapping the arguments.
template <class Cost>
double dtw_rows(std::size_t m, std::size_t w, Cost&& cost) {
    std::vector<double> prev(m, kInf);
    std::vector<double> curr(m, kInf);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t lo = i > w ? i - w : 0;
        const std::size_t hi = std::min(m - 1, i + w);
        std::fill(curr.begin(), curr.end(), kInf);
        for (std::size_t j = lo; j <= hi; ++j) {
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = kInf;
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
                if (i > 0) best = std::min(best, prev[j]);
                if (j > 0) best = std::min(best, curr[j - 1]);
            }
            curr[j] = cost(i, j) + best;
        }
        std::swap(prev, curr);
    }
    return prev[m - 1];
}

}  // namespace detail

[[nodiscard]] inline double dtw(std::span<const double> a, std::span<const double> b, double r) {
    detail::require_same_length(a, b);
    const std::size_t m = a.size();
    const std::size_t w = band(r, m);
    return detail::dtw_rows(m, w, [&](std::size_t i, std::size_t j) { return detail::sq(a[i] - b[j]); });
}

[[nodiscard]] inline double dtw(const TimeSeries& a, const TimeSeries& b, double r) {
    return dtw(a.values(), b.values(), r);
}

/// DTW with the optimal path. Keeps the full m x m matrix, so meant for
/// inspection and testing rather than bulk distance computation.
/// Traceback ties prefer the diagonal, then the step from (i-1, j), then (i, j-1).
[[nodiscard]] inline std::pair<WarpingPath, double> dtw_path(std::span<const double> a,
                                                             std::span<const double> b, double r) {
    detail::require_same_length(a, b);
    const std::size_t m = a.size();
    const std::size_t w = band(r, m);
    std::vector<double> acc(m * m, detail::kInf);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t lo = i > w ? i - w : 0;
        const std::size_t hi = std::min(m - 1, i + w);
        for (std::size_t j = lo; j <= hi; ++j) {
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = detail::kInf;
                if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
                if (i > 0) best = std::min(best, at(i - 1, j));
                if (j > 0) best = std::min(best, at(i, j - 1));
            }
            at(i, j) = detail::sq(a[i] - b[j]) + best;
        }
    }

    WarpingPath path;
    std::size_t i = m - 1;
    std::size_t j = m - 1;
    path.push_back({i, j});
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const double diag = at(i - 1, j - 1);
            const double up = at(i - 1, j);
            const double left = at(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        } else if (i > 0) {
            --i;
        } else {
            --j;
        }
        path.push_back({i, j});
    }
    std::reverse(path.begin(), path.end());
    return {std::move(path), at(m - 1, m - 1)};
}

[[nodiscard]] inline std::pair<WarpingPath, double> dtw_path(const TimeSeries& a, const TimeSeries& b,
                                                             double r) {
    return dtw_path(a.values(), b.values(), r);
}

// ---------------------------------------------------------------------------
// Derivative transform and DDTW
// ---------------------------------------------------------------------------

/// Average of the left slope and the centred slope at each interior point;
/// the result has length m - 2.
[[nodiscard]] inline std::vector<double> derivative_transform(std::span<const double> a) {
    const std::size_t m = a.size();
    if (m < 3) throw Error("series too short for derivative");
    std::vector<double> out(m - 2);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        out[i - 1] = ((a[i] - a[i - 1]) + (a[i + 1] - a[i - 1]) / 2.0) / 2.0;
    }
    return out;
}

[[nodiscard]] inline TimeSeries derivative_transform(const TimeSeries& a) {
    return TimeSeries(derivative_transform(a.values()));
}

[[nodiscard]] inline double ddtw(std::span<const double> a, std::span<const double> b, double r) {
    detail::require_same_length(a, b);
    return dtw(derivative_transform(a), derivative_transform(b), r);
}

[[nodiscard]] inline double ddtw(const TimeSeries& a, const TimeSeries& b, double r) {
    return ddtw(a.values(), b.values(), r);
}

// ---------------------------------------------------------------------------
// Weighted DTW
// ---------------------------------------------------------------------------

/// Logistic warping weight with w_max = 1 for displacement d on length m.
[[nodiscard]] inline double wdtw_weight(std::size_t d, double g, std::size_t m) {
    const double x = static_cast<double>(d) - static_cast<double>(m) / 2.0;
    return 1.0 / (1.0 + std::exp(-g * x));
}

/// Weights for every displacement 0..m on series of length m; pair-independent
/// so it is built once per (g, m) and shared.
class WeightTable {
public:
    WeightTable(double g, std::size_t m) : g_(g), weights_(m + 1) {
        if (!(g >= 0.0) || !std::isfinite(g)) throw Error("penalty g must be >= 0");
        for (std::size_t d = 0; d <= m; ++d) weights_[d] = wdtw_weight(d, g, m);
    }

    [[nodiscard]] double penalty() const noexcept { return g_; }
    [[nodiscard]] std::size_t length() const noexcept { return weights_.size() - 1; }
    [[nodiscard]] double operator[](std::size_t d) const noexcept { return weights_[d]; }

private:
    double g_;
    std::vector<double> weights_;
};

[[nodiscard]] inline double wdtw(std::span<const double> a, std::span<const double> b,
                                 const WeightTable& weights) {
    detail::require_same_length(a, b);
    const std::size_t m = a.size();
    if (weights.length() != m) throw Error("weight table built for a different series length");
    return detail::dtw_rows(m, m, [&](std::size_t i, std::size_t j) {
        const std::size_t d = i > j ? i - j : j - i;
        return weights[d] * detail::sq(a[i] - b[j]);
    });
}

[[nodiscard]] inline double wdtw(std::span<const double> a, std::span<const double> b, double g) {
    detail::require_same_length(a, b);
    return wdtw(a, b, WeightTable(g, a.size()));
}

[[nodiscard]] inline double wdtw(const TimeSeries& a, const TimeSeries& b, double g) {
    return wdtw(a.values(), b.values(), g);
}

[[nodiscard]] inline double wddtw(std::span<const double> a, std::span<const double> b, double g) {
    detail::require_same_length(a, b);
    return wdtw(derivative_transform(a), derivative_transform(b), g);
}

[[nodiscard]] inline double wddtw(const TimeSeries& a, const TimeSeries& b, double g) {
    return wddtw(a.values(), b.values(), g);
}

// ---------------------------------------------------------------------------
// LCSS
// ---------------------------------------------------------------------------

/// Full (m+1) x (m+1) table, filled from the bottom-right corner. Entry (i, j)
/// holds the LCSS length of the suffixes a[i..] and b[j..]; (0, 0) is the answer.
class LcssTable {
public:
    LcssTable(std::span<const double> a, std::span<const double> b, double eps)
        : m_(a.size()), cells_((a.size() + 1) * (a.size() + 1), 0) {
        detail::require_same_length(a, b);
        for (std::size_t i = m_; i-- > 0;) {
            for (std::size_t j = m_; j-- > 0;) {
                std::uint32_t v = at(i + 1, j + 1);
                if (std::fabs(a[i] - b[j]) <= eps) {
                    v += 1;
                } else {
                    v = std::max({v, at(i, j + 1), at(i + 1, j)});
                }
                cells_[i * (m_ + 1) + j] = v;
            }
        }
    }

    [[nodiscard]] std::size_t order() const noexcept { return m_ + 1; }
    [[nodiscard]] std::uint32_t at(std::size_t i, std::size_t j) const noexcept {
        return cells_[i * (m_ + 1) + j];
    }
    [[nodiscard]] std::size_t length() const noexcept { return at(0, 0); }

private:
    std::size_t m_;
    std::vector<std::uint32_t> cells_;
};

[[nodiscard]] inline std::size_t lcss_length(std::span<const double> a, std::span<const double> b,
                                             double eps) {
    detail::require_same_length(a, b);
    if (!(eps >= 0.0)) throw Error("threshold epsilon must be >= 0");
    const std::size_t m = a.size();
    // Two rows of the table: next = row i+1, curr = row i.
    std::vector<std::uint32_t> next(m + 1, 0);
    std::vector<std::uint32_t> curr(m + 1, 0);
    for (std::size_t i = m; i-- > 0;) {
        curr[m] = 0;
        for (std::size_t j = m; j-- > 0;) {
            if (std::fabs(a[i] - b[j]) <= eps) {
                curr[j] = next[j + 1] + 1;
            } else {
                curr[j] = std::max({next[j + 1], curr[j + 1], next[j]});
            }
        }
        std::swap(next, curr);
    }
    return next[0];
}

[[nodiscard]] inline std::size_t lcss_length(const TimeSeries& a, const TimeSeries& b, double eps) {
    return lcss_length(a.values(), b.values(), eps);
}

[[nodiscard]] inline double lcss_distance(std::span<const double> a, std::span<const double> b, double eps) {
    const std::size_t len = lcss_length(a, b, eps);
    // (m - L) / m is a single rounding; 1 - L/m would round twice.
    return static_cast<double>(a.size() - len) / static_cast<double>(a.size());
}

[[nodiscard]] inline double lcss_distance(const TimeSeries& a, const TimeSeries& b, double eps) {
    return lcss_distance(a.values(), b.values(), eps);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// A measure bound to a series length. Derivative kinds transform each series
/// once through prepare(); distance() then works on prepared series.
class Distance {
public:
    Distance(MeasureSpec spec, std::size_t m) : spec_(MeasureSpec::checked(spec)), m_(m) {
        if (m == 0) throw Error("series length must be positive");
        if (derivative() && m < 3) throw Error("series too short for derivative");
        if (spec_.kind == MeasureKind::WDTW) weights_.emplace(spec_.penalty, m);
        if (spec_.kind == MeasureKind::WDDTW) weights_.emplace(spec_.penalty, m - 2);
    }

    [[nodiscard]] const MeasureSpec& spec() const noexcept { return spec_; }

    [[nodiscard]] bool derivative() const noexcept {
        return spec_.kind == MeasureKind::DDTW || spec_.kind == MeasureKind::WDDTW;
    }

    [[nodiscard]] std::vector<double> prepare(const TimeSeries& s) const {
        if (s.size() != m_) throw Error("series length does not match measure length");
        if (derivative()) return derivative_transform(s.values());
        return {s.begin(), s.end()};
    }

    [[nodiscard]] double prepared(std::span<const double> a, std::span<const double> b) const {
        switch (spec_.kind) {
            case MeasureKind::SquaredEuclidean: return squared_euclidean(a, b);
            case MeasureKind::DTW:
            case MeasureKind::DDTW: return dtw(a, b, spec_.window);
            case MeasureKind::WDTW:
            case MeasureKind::WDDTW: return wdtw(a, b, *weights_);
            case MeasureKind::LCSS: return lcss_distance(a, b, spec_.threshold);
        }
        throw Error("unknown measure kind");
    }

    [[nodiscard]] double operator()(const TimeSeries& a, const TimeSeries& b) const {
        return prepared(prepare(a), prepare(b));
    }

private:
    MeasureSpec spec_;
    std::size_t m_;
    std::optional<WeightTable> weights_;
};

[[nodiscard]] inline double distance(const MeasureSpec& spec, const TimeSeries& a, const TimeSeries& b) {
    detail::require_same_length(a.values(), b.values());
    return Distance(spec, a.size())(a, b);
}

}  // namespace tsc
