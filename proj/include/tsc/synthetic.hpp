#pragma once

// Seeded two-class generators with noise on the values and noise in the time
// index, in the spirit of Cylinder-Bell-Funnel: class shape is fixed, but
// where each feature occurs varies from instance to instance.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tsc/core.hpp"

namespace tsc {

enum class SyntheticKind { PhaseShift, WarpNoise };

struct SyntheticParams {
    SyntheticKind kind = SyntheticKind::PhaseShift;
    std::size_t length = 20;
    std::size_t train_size = 50;
    std::size_t test_size = 50;
    double max_shift = 2.0;
    double noise = 0.1;
    std::uint64_t seed = 1;
    std::string name = "synthetic";
};

struct SyntheticData {
    LabeledDataset train;
    LabeledDataset test;
};

[[nodiscard]] inline SyntheticKind parse_synthetic_kind(const std::string& s) {
    if (s == "phase-shift") return SyntheticKind::PhaseShift;
    if (s == "warp-noise") return SyntheticKind::WarpNoise;
    throw Error("unknown synthetic kind '" + s + "' (expected phase-shift or warp-noise)");
}

namespace detail {

inline double spike(double t, double centre) {
    constexpr double width = 0.6;
    const double x = (t - centre) / width;
    return std::exp(-0.5 * x * x);
}

// Draws are made in a fixed order from one engine so a seed pins everything.
class SyntheticSampler {
public:
    explicit SyntheticSampler(const SyntheticParams& p) : p_(p), rng_(p.seed) {}

    Instance draw(std::size_t index) {
        const bool first_class = index % 2 == 0;
        const double len = static_cast<double>(p_.length);
        // Three spikes at 1/5, 1/2 and 4/5 of the series; class "2" lacks the
        // middle one. Phase-shift jitters every spike independently; warp-noise
        // applies one smooth stretch about the centre.
        const std::array<double, 3> centres = {std::round(len / 5.0), std::round(len / 2.0),
                                               std::round(4.0 * len / 5.0)};
        const std::array<double, 3> heights = {1.0, first_class ? 1.0 : 0.0, 1.0};
        std::array<double, 3> shifts{};
        if (p_.kind == SyntheticKind::PhaseShift) {
            for (auto& s : shifts) s = std::round(uniform(-p_.max_shift, p_.max_shift));
        } else {
            const double s = uniform(-p_.max_shift, p_.max_shift);
            shifts = {-s, 0.0, s};
        }
        std::vector<double> v(p_.length);
        for (std::size_t t = 0; t < p_.length; ++t) {
            const double tt = static_cast<double>(t);
            double x = 0.0;
            for (std::size_t e = 0; e < 3; ++e) x += heights[e] * spike(tt, centres[e] + shifts[e]);
            v[t] = x + gaussian() * p_.noise;
        }
        return {TimeSeries(std::move(v)), first_class ? "1" : "2"};
    }

private:
    double uniform(double lo, double hi) {
        if (hi <= lo) return lo;
        return lo + (hi - lo) * unit();
    }

    // 53-bit uniform in [0,1); avoids implementation-defined distributions.
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    // Box-Muller, one value per call.
    double gaussian() {
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    SyntheticParams p_;
    std::mt19937_64 rng_;
};

}  // namespace detail

/// Class labels alternate "1", "2" by instance index in both splits.
[[nodiscard]] inline SyntheticData generate_synthetic(const SyntheticParams& p) {
    if (p.length < 5) throw Error("synthetic series length must be at least 5");
    if (p.train_size < 2 || p.test_size < 1) throw Error("synthetic split sizes too small");
    if (!(p.max_shift >= 0.0) || !(p.noise >= 0.0)) throw Error("shift and noise must be nonnegative");
    if (2.0 * p.max_shift >= static_cast<double>(p.length) / 2.0) throw Error("max shift too large for length");
    detail::SyntheticSampler sampler(p);
    std::vector<Instance> train;
    std::vector<Instance> test;
    for (std::size_t i = 0; i < p.train_size; ++i) train.push_back(sampler.draw(i));
    for (std::size_t i = 0; i < p.test_size; ++i) test.push_back(sampler.draw(i));
    return {LabeledDataset(p.name, Role::Train, std::move(train)),
            LabeledDataset(p.name, Role::Test, std::move(test))};
}

}  // namespace tsc
