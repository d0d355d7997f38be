#pragma once

// Plain-text SVG figures: critical-difference diagram, histogram and scatter
// plot with least-squares line. Elements carry a class and data-* attributes
// so the figures can be checked mechanically.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsc/io.hpp"
#include "tsc/stats.hpp"

namespace tsc::svg {

namespace detail {

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

class Document {
public:
    Document(double width, double height) {
        body_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    }

    void line(const std::string& cls, double x1, double y1, double x2, double y2, const std::string& extra = {},
              double stroke_width = 1.0) {
        body_ += "  <line class=\"" + cls + "\" x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
                 "\" y2=\"" + num(y2) + "\" stroke=\"black\" stroke-width=\"" + num(stroke_width) + "\"" + extra +
                 "/>\n";
    }

    void rect(const std::string& cls, double x, double y, double w, double h, const std::string& extra = {}) {
        body_ += "  <rect class=\"" + cls + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
                 "\" height=\"" + num(h) + "\" fill=\"steelblue\" stroke=\"black\"" + extra + "/>\n";
    }

    void circle(const std::string& cls, double cx, double cy, double r) {
        body_ += "  <circle class=\"" + cls + "\" cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
                 "\" fill=\"black\"/>\n";
    }

    void text(const std::string& cls, double x, double y, const std::string& s, const char* anchor = "middle") {
        body_ += "  <text class=\"" + cls + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
                 "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(s) + "</text>\n";
    }

    [[nodiscard]] std::string str() const { return body_ + "</svg>\n"; }

private:
    std::string body_;
};

}  // namespace detail

/// Groups of classifiers not significantly different: maximal runs (over
/// classifiers sorted by average rank) whose rank span is below the critical
/// difference. Returns [first, last] positions into `sorted_ranks`; runs of a
/// single classifier are omitted.
[[nodiscard]] inline std::vector<std::pair<std::size_t, std::size_t>> cd_groups(std::span<const double> sorted_ranks,
                                                                                 double cd) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t last_end = 0;
    for (std::size_t i = 0; i < sorted_ranks.size(); ++i) {
        std::size_t j = i;
        while (j + 1 < sorted_ranks.size() && sorted_ranks[j + 1] - sorted_ranks[i] < cd) ++j;
        if (j > i && (out.empty() || j > last_end)) {
            out.emplace_back(i, j);
            last_end = j;
        }
    }
    return out;
}

struct CdLayout {
    double width = 800.0;
    double margin = 60.0;
};

/// Critical-difference diagram: rank axis over [1, k], one tick per
/// classifier at its average rank, a CD bar and the no-difference groups.
[[nodiscard]] inline std::string cd_diagram(const stats::RankSummary& ranks, CdLayout layout = {}) {
    const std::size_t k = ranks.classifiers.size();
    if (k < 2) throw Error("critical-difference diagram needs at least two classifiers");
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks.average_ranks[a] < ranks.average_ranks[b]; });
    std::vector<double> sorted(k);
    for (std::size_t i = 0; i < k; ++i) sorted[i] = ranks.average_ranks[order[i]];

    const double scale = (layout.width - 2.0 * layout.margin) / static_cast<double>(k - 1);
    auto x_of = [&](double rank) { return layout.margin + (rank - 1.0) * scale; };
    const auto groups = cd_groups(sorted, ranks.critical_difference);
    const double axis_y = 70.0;
    const double height = axis_y + 40.0 + 20.0 * static_cast<double>(k) + 12.0 * static_cast<double>(groups.size());
    detail::Document doc(layout.width, height);

    doc.line("axis", x_of(1.0), axis_y, x_of(static_cast<double>(k)), axis_y,
             " data-min=\"1\" data-max=\"" + std::to_string(k) + "\" data-scale=\"" + detail::num(scale) + "\"");
    for (std::size_t r = 1; r <= k; ++r) {
        const double x = x_of(static_cast<double>(r));
        doc.line("tick", x, axis_y - 5.0, x, axis_y);
        doc.text("tick-label", x, axis_y - 8.0, std::to_string(r));
    }

    const double cd = ranks.critical_difference;
    doc.line("cd-bar", x_of(1.0), 20.0, x_of(1.0 + cd), 20.0, " data-length=\"" + detail::num(cd) + "\"", 2.0);
    doc.text("cd-label", (x_of(1.0) + x_of(1.0 + cd)) / 2.0, 14.0, "CD = " + detail::num(cd));

    for (std::size_t pos = 0; pos < k; ++pos) {
        const std::size_t c = order[pos];
        const double x = x_of(sorted[pos]);
        const double y = axis_y + 30.0 + 20.0 * static_cast<double>(pos);
        doc.line("marker", x, axis_y, x, y, " data-rank=\"" + detail::num(sorted[pos]) + "\"");
        const bool left = pos < (k + 1) / 2;
        const double tx = left ? x_of(1.0) - 8.0 : x_of(static_cast<double>(k)) + 8.0;
        doc.line("leader", x, y, tx + (left ? 4.0 : -4.0), y);
        doc.text("label", tx, y + 4.0, ranks.classifiers[c] + " (" + detail::num(sorted[pos]).substr(0, 4) + ")",
                 left ? "end" : "start");
    }

    double gy = axis_y + 12.0;
    for (const auto& [from, to] : groups) {
        doc.line("clique", x_of(sorted[from]) - 3.0, gy, x_of(sorted[to]) + 3.0, gy,
                 " data-from=\"" + detail::escape(ranks.classifiers[order[from]]) + "\" data-to=\"" +
                     detail::escape(ranks.classifiers[order[to]]) + "\"",
                 3.0);
        gy += 8.0;
    }
    return doc.str();
}

/// Bars come from stats::histogram; bar height is proportional to the count.
[[nodiscard]] inline std::string histogram_chart(std::span<const double> values, double bin_width, double origin = 0.0) {
    const auto bins = stats::histogram(values, bin_width, origin);
    const double width = 640.0;
    const double height = 400.0;
    const double margin = 40.0;
    std::size_t max_count = 0;
    for (const auto& b : bins) max_count = std::max(max_count, b.count);
    const double bar_w = (width - 2.0 * margin) / static_cast<double>(bins.size());
    const double unit_h = (height - 2.0 * margin) / static_cast<double>(max_count);
    detail::Document doc(width, height);
    doc.line("axis", margin, height - margin, width - margin, height - margin);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const double h = unit_h * static_cast<double>(bins[i].count);
        const double x = margin + bar_w * static_cast<double>(i);
        doc.rect("bar", x, height - margin - h, bar_w, h,
                 " data-lower=\"" + detail::num(bins[i].lower) + "\" data-count=\"" + std::to_string(bins[i].count) +
                     "\"");
        doc.text("bin-label", x + bar_w / 2.0, height - margin + 14.0, detail::num(bins[i].lower));
    }
    return doc.str();
}

/// Points plus the least-squares line drawn across the x range.
[[nodiscard]] inline std::string scatter_regression(std::span<const double> x, std::span<const double> y) {
    const auto fit = stats::ols_slope_test(x, y);
    const double width = 640.0;
    const double height = 400.0;
    const double margin = 40.0;
    const auto [xlo_it, xhi_it] = std::minmax_element(x.begin(), x.end());
    const double xlo = *xlo_it;
    const double xhi = *xhi_it;
    double ylo = *std::min_element(y.begin(), y.end());
    double yhi = *std::max_element(y.begin(), y.end());
    ylo = std::min({ylo, fit.intercept + fit.slope * xlo, fit.intercept + fit.slope * xhi});
    yhi = std::max({yhi, fit.intercept + fit.slope * xlo, fit.intercept + fit.slope * xhi});
    if (yhi == ylo) {
        yhi += 0.5;
        ylo -= 0.5;
    }
    auto px = [&](double v) { return margin + (v - xlo) / (xhi - xlo) * (width - 2.0 * margin); };
    auto py = [&](double v) { return height - margin - (v - ylo) / (yhi - ylo) * (height - 2.0 * margin); };
    detail::Document doc(width, height);
    doc.line("axis", margin, height - margin, width - margin, height - margin);
    doc.line("axis", margin, margin, margin, height - margin);
    for (std::size_t i = 0; i < x.size(); ++i) doc.circle("point", px(x[i]), py(y[i]), 3.0);
    doc.line("fit", px(xlo), py(fit.intercept + fit.slope * xlo), px(xhi), py(fit.intercept + fit.slope * xhi),
             " data-slope=\"" + detail::num(fit.slope) + "\" data-intercept=\"" + detail::num(fit.intercept) +
                 "\" data-p=\"" + detail::num(fit.p) + "\"",
             1.5);
    doc.text("caption", width / 2.0, margin / 2.0,
             "slope " + detail::num(fit.slope) + ", p = " + detail::num(fit.p));
    return doc.str();
}

inline void emit_cd_diagram(const stats::RankSummary& ranks, const std::filesystem::path& out) {
    io::write_text(out, cd_diagram(ranks));
}

inline void emit_histogram(std::span<const double> values, double bin_width, const std::filesystem::path& out,
                           double origin = 0.0) {
    io::write_text(out, histogram_chart(values, bin_width, origin));
}

inline void emit_scatter_regression(std::span<const double> x, std::span<const double> y,
                                    const std::filesystem::path& out) {
    io::write_text(out, scatter_regression(x, y));
}

}  // namespace tsc::svg
