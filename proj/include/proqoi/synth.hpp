#pragma once

// Deterministic synthetic test fields: smooth multi-variable flow-like data,
// band-limited noise, and velocity fields carrying a contiguous patch of
// exact zeros (for exercising the outlier mask).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "proqoi/variable.hpp"

namespace proqoi {

struct SynthField {
    std::string name;
    std::vector<double> values;
};

// Kinds:
//   "sinusoid-mix"        five fields Vx, Vy, Vz, P, D: smooth mixtures of a
//                         few sinusoids, scaled to flow-like ranges
//                         (velocities within +/-500, P near 1e5, D near 1.2).
//   "smoothed-noise"      one field F: repeatedly box-smoothed uniform noise.
//   "zero-patch-velocity" three fields Vx, Vy, Vz: smooth mixtures with one
//                         shared contiguous run of exact 0.0 values covering
//                         about patch_fraction of the array.
//
// Output is fully determined by (kind, n, seed). Throws std::invalid_argument
// for an unknown kind or n < 2.
std::vector<SynthField> synthesize(const std::string& kind, std::size_t n, std::uint64_t seed,
                                   double patch_fraction = 0.1);

bool is_known_synth_kind(const std::string& kind);

} // namespace proqoi
