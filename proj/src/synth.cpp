#include "proqoi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace proqoi {

namespace {

// Smooth mixture of a few sinusoids with value in [-1, 1].
struct SinusoidMix {
    struct Term {
        double amplitude, frequency, phase;
    };
    std::vector<Term> terms;

    static SinusoidMix draw(std::mt19937_64& rng) {
        std::uniform_real_distribution<double> amp(0.2, 1.0);
        std::uniform_real_distribution<double> freq(0.5, 9.5);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        SinusoidMix mix;
        double total = 0.0;
        for (int k = 0; k < 5; ++k) {
            Term t{amp(rng), freq(rng), phase(rng)};
            total += t.amplitude;
            mix.terms.push_back(t);
        }
        for (Term& t : mix.terms)
            t.amplitude /= total;
        return mix;
    }

    double operator()(double x) const {
        double v = 0.0;
        for (const Term& t : terms)
            v += t.amplitude * std::sin(2.0 * std::numbers::pi * t.frequency * x + t.phase);
        return v;
    }
};

std::vector<double> render(const SinusoidMix& mix, std::size_t n, double offset, double scale) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = offset + scale * mix(x);
    }
    return out;
}

std::vector<SynthField> make_sinusoid_mix(std::size_t n, std::mt19937_64& rng) {
    std::vector<SynthField> fields;
    for (const char* name : {"Vx", "Vy", "Vz"})
        fields.push_back({name, render(SinusoidMix::draw(rng), n, 0.0, 450.0)});
    fields.push_back({"P", render(SinusoidMix::draw(rng), n, 1.0e5, 2.0e4)});
    fields.push_back({"D", render(SinusoidMix::draw(rng), n, 1.2, 0.5)});
    return fields;
}

std::vector<SynthField> make_smoothed_noise(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> values(n);
    for (double& v : values)
        v = uni(rng);
    // A few passes of a centered box filter leave band-limited, smooth data.
    std::vector<double> tmp(n);
    for (int pass = 0; pass < 4; ++pass) {
        constexpr std::ptrdiff_t kHalf = 4;
        const auto sn = static_cast<std::ptrdiff_t>(n);
        for (std::ptrdiff_t i = 0; i < sn; ++i) {
            double sum = 0.0;
            int count = 0;
            for (std::ptrdiff_t d = -kHalf; d <= kHalf; ++d) {
                const std::ptrdiff_t j = i + d;
                if (j >= 0 && j < sn) {
                    sum += values[static_cast<std::size_t>(j)];
                    ++count;
                }
            }
            tmp[static_cast<std::size_t>(i)] = sum / count;
        }
        values.swap(tmp);
    }
    return {{"F", std::move(values)}};
}

std::vector<SynthField> make_zero_patch(std::size_t n, std::mt19937_64& rng,
                                        double patch_fraction) {
    std::vector<SynthField> fields;
    for (const char* name : {"Vx", "Vy", "Vz"})
        fields.push_back({name, render(SinusoidMix::draw(rng), n, 0.0, 450.0)});
    const auto patch_len = static_cast<std::size_t>(
        std::llround(patch_fraction * static_cast<double>(n)));
    if (patch_len > 0) {
        const std::size_t len = std::min(patch_len, n);
        std::uniform_int_distribution<std::size_t> start_dist(0, n - len);
        const std::size_t start = start_dist(rng);
        for (SynthField& f : fields)
            std::fill(f.values.begin() + static_cast<std::ptrdiff_t>(start),
                      f.values.begin() + static_cast<std::ptrdiff_t>(start + len), 0.0);
    }
    return fields;
}

} // namespace

bool is_known_synth_kind(const std::string& kind) {
    return kind == "sinusoid-mix" || kind == "smoothed-noise" || kind == "zero-patch-velocity";
}

std::vector<SynthField> synthesize(const std::string& kind, std::size_t n, std::uint64_t seed,
                                   double patch_fraction) {
    if (n < 2)
        throw std::invalid_argument("synthetic fields need at least 2 elements");
    if (!(patch_fraction >= 0.0 && patch_fraction <= 1.0))
        throw std::invalid_argument("patch fraction must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    if (kind == "sinusoid-mix")
        return make_sinusoid_mix(n, rng);
    if (kind == "smoothed-noise")
        return make_smoothed_noise(n, rng);
    if (kind == "zero-patch-velocity")
        return make_zero_patch(n, rng, patch_fraction);
    throw std::invalid_argument("unknown synthetic kind '" + kind + "'");
}

} // namespace proqoi
