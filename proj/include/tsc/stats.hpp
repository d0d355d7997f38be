#pragma once

// Classifier comparison statistics: paired t-test, Wilcoxon signed-rank test,
// average ranks with Nemenyi critical difference, OLS slope significance and
// fixed-width histograms.
//
// Degenerate inputs (zero variance, all-zero differences) yield a flagged
// outcome instead of an exception so that batch comparisons never abort.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsc/core.hpp"

namespace tsc::stats {

enum class Alternative { TwoSided, Greater, Less };

struct TestOutcome {
    double statistic = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    bool degenerate = false;
};

/// Datasets x classifiers grid of test accuracies in [0,1].
class AccuracyTable {
public:
    AccuracyTable() = default;
    AccuracyTable(std::vector<std::string> datasets, std::vector<std::string> classifiers,
                  std::vector<std::vector<double>> accuracies)
        : datasets_(std::move(datasets)), classifiers_(std::move(classifiers)), cells_(std::move(accuracies)) {
        if (cells_.size() != datasets_.size()) throw Error("accuracy table: row count mismatch");
        for (std::size_t r = 0; r < cells_.size(); ++r) {
            if (cells_[r].size() != classifiers_.size()) {
                throw Error("accuracy table: row '" + datasets_[r] + "' has a missing cell");
            }
            for (double a : cells_[r]) {
                if (!(a >= 0.0 && a <= 1.0)) {
                    throw Error("accuracy table: value outside [0,1] in row '" + datasets_[r] + "'");
                }
            }
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return datasets_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return classifiers_.size(); }
    [[nodiscard]] const std::vector<std::string>& datasets() const noexcept { return datasets_; }
    [[nodiscard]] const std::vector<std::string>& classifiers() const noexcept { return classifiers_; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const noexcept { return cells_[r][c]; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept { return cells_[r]; }

    [[nodiscard]] std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows());
        for (std::size_t r = 0; r < rows(); ++r) out[r] = cells_[r][c];
        return out;
    }

    [[nodiscard]] std::size_t column_index(const std::string& name) const {
        for (std::size_t c = 0; c < classifiers_.size(); ++c) {
            if (classifiers_[c] == name) return c;
        }
        throw Error("accuracy table has no classifier '" + name + "'");
    }

    friend bool operator==(const AccuracyTable&, const AccuracyTable&) = default;

private:
    std::vector<std::string> datasets_;
    std::vector<std::string> classifiers_;
    std::vector<std::vector<double>> cells_;
};

struct RankSummary {
    std::vector<std::string> classifiers;
    std::vector<double> average_ranks;
    std::size_t num_datasets = 0;
    double critical_difference = 0.0;
};

// ---------------------------------------------------------------------------
// Distribution functions
// ---------------------------------------------------------------------------

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double tol = 1e-10;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < tol * 1e-3) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
[[nodiscard]] inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw Error("incomplete_beta: shape parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(T > t) for Student's t with `df` degrees of freedom.
[[nodiscard]] inline double student_t_sf(double t, double df) {
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return t >= 0 ? tail : 1.0 - tail;
}

[[nodiscard]] inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace detail {

inline double p_from_tails(double upper, double lower, Alternative alt) {
    switch (alt) {
        case Alternative::Greater: return std::clamp(upper, 0.0, 1.0);
        case Alternative::Less: return std::clamp(lower, 0.0, 1.0);
        case Alternative::TwoSided: break;
    }
    return std::clamp(2.0 * std::min(upper, lower), 0.0, 1.0);
}

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Paired t-test
// ---------------------------------------------------------------------------

/// One-sample t-test that the mean of the paired differences is zero, with
/// n - 1 degrees of freedom. Zero variance is degenerate: p is 1 if the mean
/// is zero and 0 (or 1 against the wrong one-sided alternative) otherwise.
[[nodiscard]] inline TestOutcome paired_t_test(std::span<const double> differences,
                                               Alternative alt = Alternative::TwoSided) {
    const std::size_t n = differences.size();
    if (n < 2) throw Error("paired t-test needs at least two differences");
    const double mean = detail::mean_of(differences);
    double ss = 0.0;
    for (double d : differences) ss += (d - mean) * (d - mean);
    const double var = ss / static_cast<double>(n - 1);
    TestOutcome out;
    out.n = n;
    if (!(var > 0.0)) {
        out.degenerate = true;
        if (mean == 0.0) {
            out.statistic = 0.0;
            out.p = 1.0;
        } else {
            out.statistic = mean > 0 ? HUGE_VAL : -HUGE_VAL;
            const bool with = alt == Alternative::TwoSided || (alt == Alternative::Greater) == (mean > 0);
            out.p = with ? 0.0 : 1.0;
        }
        return out;
    }
    const double t = mean / std::sqrt(var / static_cast<double>(n));
    const double df = static_cast<double>(n - 1);
    out.statistic = t;
    out.p = detail::p_from_tails(student_t_sf(t, df), student_t_sf(-t, df), alt);
    return out;
}

// ---------------------------------------------------------------------------
// Ranking helpers
// ---------------------------------------------------------------------------

/// Ascending ranks starting at 1; tied values share the mean of their ranks.
[[nodiscard]] inline std::vector<double> mid_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank
// ---------------------------------------------------------------------------

inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Signed-rank test on paired differences. Zeros are dropped; tied magnitudes
/// get mid-ranks. The statistic is W+, the rank sum of positive differences.
/// For n <= 20 the p-value is exact: sign assignments are counted over doubled
/// (hence integral) ranks. Above that a normal approximation with the tie
/// correction to the variance is used.
[[nodiscard]] inline TestOutcome wilcoxon_signed_rank(std::span<const double> differences,
                                                      Alternative alt = Alternative::TwoSided) {
    std::vector<double> nonzero;
    for (double d : differences) {
        if (d != 0.0) nonzero.push_back(d);
    }
    TestOutcome out;
    out.n = nonzero.size();
    if (nonzero.empty()) {
        out.degenerate = true;
        out.p = 1.0;
        return out;
    }
    const std::size_t n = nonzero.size();
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::fabs(nonzero[i]);
    const auto ranks = mid_ranks(mags);

    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (nonzero[i] > 0) w_plus += ranks[i];
    }
    out.statistic = w_plus;

    if (n <= kWilcoxonExactLimit) {
        std::vector<std::uint32_t> doubled(n);
        std::uint32_t total = 0;
        std::uint32_t observed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::uint32_t>(std::lround(2.0 * ranks[i]));
            total += doubled[i];
            if (nonzero[i] > 0) observed += doubled[i];
        }
        // ways[s] = number of sign assignments whose doubled positive rank sum is s
        std::vector<std::uint64_t> ways(total + 1, 0);
        ways[0] = 1;
        for (std::uint32_t r : doubled) {
            for (std::uint32_t s = total; s >= r; --s) {
                ways[s] += ways[s - r];
                if (s == r) break;
            }
        }
        const double all = std::ldexp(1.0, static_cast<int>(n));
        std::uint64_t count = 0;
        if (alt == Alternative::TwoSided) {
            const auto dev = [&](std::uint32_t s) {
                return std::abs(2 * static_cast<std::int64_t>(s) - static_cast<std::int64_t>(total));
            };
            const auto obs = dev(observed);
            for (std::uint32_t s = 0; s <= total; ++s) {
                if (dev(s) >= obs) count += ways[s];
            }
        } else if (alt == Alternative::Greater) {
            for (std::uint32_t s = observed; s <= total; ++s) count += ways[s];
        } else {
            for (std::uint32_t s = 0; s <= observed; ++s) count += ways[s];
        }
        out.p = static_cast<double>(count) / all;
        return out;
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_sum = 0.0;
    {
        std::vector<double> sorted = ranks;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j < n && sorted[j] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_sum += t * t * t - t;
            i = j;
        }
    }
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_sum / 48.0;
    if (!(var > 0.0)) {
        out.degenerate = true;
        out.p = 1.0;
        return out;
    }
    const double z = (w_plus - mean) / std::sqrt(var);
    out.p = detail::p_from_tails(normal_sf(z), normal_sf(-z), alt);
    return out;
}

// ---------------------------------------------------------------------------
// Ranks and critical difference
// ---------------------------------------------------------------------------

/// Per-dataset ranks (1 = most accurate, ties share the mean rank) averaged
/// over datasets. critical_difference is left at zero; see with_critical_difference.
[[nodiscard]] inline RankSummary average_ranks(const AccuracyTable& table) {
    if (table.rows() < 1) throw Error("average_ranks needs at least one dataset");
    if (table.cols() < 2) throw Error("average_ranks needs at least two classifiers");
    RankSummary out;
    out.classifiers = table.classifiers();
    out.num_datasets = table.rows();
    out.average_ranks.assign(table.cols(), 0.0);
    std::vector<double> negated(table.cols());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) negated[c] = -table(r, c);
        const auto ranks = mid_ranks(negated);
        for (std::size_t c = 0; c < table.cols(); ++c) out.average_ranks[c] += ranks[c];
    }
    for (double& v : out.average_ranks) v /= static_cast<double>(table.rows());
    return out;
}

/// Friedman chi-square statistic over average ranks (no p-value).
[[nodiscard]] inline double friedman_statistic(const RankSummary& ranks) {
    const double k = static_cast<double>(ranks.average_ranks.size());
    const double n = static_cast<double>(ranks.num_datasets);
    double sum_sq = 0.0;
    for (double r : ranks.average_ranks) sum_sq += r * r;
    return 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
}

inline constexpr std::size_t kNemenyiMinClassifiers = 2;
inline constexpr std::size_t kNemenyiMaxClassifiers = 20;

/// Two-tailed Nemenyi critical values: the infinite-df studentized range
/// quantile divided by sqrt(2), for k = 2..20 classifiers.
[[nodiscard]] inline double nemenyi_q(std::size_t num_classifiers, double alpha) {
    static constexpr std::array<double, 19> q05 = {
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878,
        3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
        3.426041, 3.458425, 3.488685, 3.517073, 3.543799};
    static constexpr std::array<double, 19> q10 = {
        1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884,
        2.854606, 2.919889, 2.977768, 3.029694, 3.076733, 3.119693, 3.159199,
        3.195743, 3.229723, 3.261461, 3.291224, 3.319233};
    if (num_classifiers < kNemenyiMinClassifiers || num_classifiers > kNemenyiMaxClassifiers) {
        throw Error("Nemenyi table covers 2..20 classifiers, got " + std::to_string(num_classifiers));
    }
    const std::size_t idx = num_classifiers - kNemenyiMinClassifiers;
    if (std::fabs(alpha - 0.05) < 1e-12) return q05[idx];
    if (std::fabs(alpha - 0.10) < 1e-12) return q10[idx];
    throw Error("Nemenyi table covers alpha 0.05 and 0.10 only");
}

[[nodiscard]] inline double nemenyi_cd(std::size_t num_classifiers, std::size_t num_datasets, double alpha) {
    if (num_datasets < 2) throw Error("critical difference needs at least two datasets");
    const double k = static_cast<double>(num_classifiers);
    const double n = static_cast<double>(num_datasets);
    return nemenyi_q(num_classifiers, alpha) * std::sqrt(k * (k + 1.0) / (6.0 * n));
}

[[nodiscard]] inline RankSummary with_critical_difference(RankSummary ranks, double alpha) {
    ranks.critical_difference = nemenyi_cd(ranks.classifiers.size(), ranks.num_datasets, alpha);
    return ranks;
}

// ---------------------------------------------------------------------------
// Regression and histogram
// ---------------------------------------------------------------------------

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double p = 1.0;
    double t = 0.0;
};

/// OLS of y on x and a t-test (n - 2 df) that the slope is zero. A perfect fit
/// reports p = 0 for a nonzero slope and p = 1 for a zero slope.
[[nodiscard]] inline RegressionFit ols_slope_test(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw Error("ols: x and y lengths differ");
    if (n < 3) throw Error("ols: need at least three points");
    const double mx = detail::mean_of(x);
    const double my = detail::mean_of(y);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw Error("ols: x is constant");
    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += e * e;
    }
    const double df = static_cast<double>(n - 2);
    const double se = std::sqrt(sse / df / sxx);
    if (!(se > 0.0)) {
        fit.t = fit.slope == 0.0 ? 0.0 : (fit.slope > 0 ? HUGE_VAL : -HUGE_VAL);
        fit.p = fit.slope == 0.0 ? 1.0 : 0.0;
        return fit;
    }
    fit.t = fit.slope / se;
    fit.p = detail::p_from_tails(student_t_sf(fit.t, df), student_t_sf(-fit.t, df), Alternative::TwoSided);
    return fit;
}

struct HistogramBin {
    double lower = 0.0;
    std::size_t count = 0;
    friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// Index of the half-open bin [origin + i*width, origin + (i+1)*width) holding v.
[[nodiscard]] inline long histogram_bin_index(double v, double width, double origin) {
    auto idx = static_cast<long>(std::floor((v - origin) / width));
    // The division can land one bin off near an edge; settle against the edges.
    while (v < origin + static_cast<double>(idx) * width) --idx;
    while (v >= origin + static_cast<double>(idx + 1) * width) ++idx;
    return idx;
}

/// Contiguous bins from the lowest to the highest occupied bin, empty bins included.
[[nodiscard]] inline std::vector<HistogramBin> histogram(std::span<const double> values, double width,
                                                         double origin = 0.0) {
    if (values.empty()) throw Error("histogram of an empty sample");
    if (!(width > 0.0) || !std::isfinite(width)) throw Error("histogram bin width must be positive");
    std::vector<long> idx(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw Error("histogram values must be finite");
        idx[i] = histogram_bin_index(values[i], width, origin);
    }
    const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
    std::vector<HistogramBin> bins(static_cast<std::size_t>(*hi - *lo + 1));
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].lower = origin + static_cast<double>(*lo + static_cast<long>(b)) * width;
    }
    for (long i : idx) ++bins[static_cast<std::size_t>(i - *lo)].count;
    return bins;
}

// ---------------------------------------------------------------------------
// Paired improvement summary
// ---------------------------------------------------------------------------

struct Improvement {
    double mean = 0.0;
    double median = 0.0;
    TestOutcome t_test;
    TestOutcome wilcoxon;
};

[[nodiscard]] inline double median(std::vector<double> v) {
    if (v.empty()) throw Error("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

/// Summary of after - before over paired columns.
[[nodiscard]] inline Improvement mean_median_improvement(std::span<const double> before,
                                                         std::span<const double> after,
                                                         Alternative alt = Alternative::TwoSided) {
    if (before.size() != after.size()) throw Error("paired columns differ in length");
    if (before.empty()) throw Error("paired columns are empty");
    std::vector<double> diff(before.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = after[i] - before[i];
    Improvement out;
    out.mean = detail::mean_of(diff);
    out.median = median(diff);
    out.t_test = paired_t_test(diff, alt);
    out.wilcoxon = wilcoxon_signed_rank(diff, alt);
    return out;
}

}  // namespace tsc::stats
