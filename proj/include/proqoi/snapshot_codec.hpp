#pragma once

#include "proqoi/codec.hpp"

namespace proqoi {

// Tolerance-ladder snapshot codecs over the uniform scalar quantizer.
//
// Both modes quantize midpoint-centered values against a ladder of relative
// tolerances (default 1e-1 .. 1e-10, fractions of the unmasked value range).
//
//   delta == true   rung 0 quantizes the centered values at the first
//                   tolerance; rung i quantizes the residual against the
//                   codec's own running reconstruction (closed loop), so a
//                   prefix of rungs 0..i is certified at the i-th tolerance.
//   delta == false  every rung is a standalone quantization of the centered
//                   values; retrieval picks the single loosest rung that
//                   satisfies the target, and tightening later requires a
//                   full new rung (the redundancy this codec exists to show).
//
// Each rung's certified bound is the ladder tolerance plus an explicit
// floating-point allowance (quantizer roundings, the closed-loop update,
// and the final midpoint re-add). The ladder is truncated where a rung can
// no longer improve on the previous certified bound or would need more than
// 63 bits per code.
const Codec& snapshot_codec(bool delta);

// The default relative ladder, 1e-1 .. 1e-10.
std::vector<double> default_snapshot_ladder();

} // namespace proqoi
