#pragma once

#include "proqoi/codec.hpp"

namespace proqoi {

// Multilevel hierarchical-basis bitplane codec.
//
// Values are centered on the stored midpoint and snapped to a fixed-point
// lattice of unit 2^(E-56), where 2^E is the smallest power of two above the
// largest centered magnitude; the lattice values fit comfortably in int64.
// An integer hierarchical-basis transform (floor-mean prediction, exactly
// invertible) decorrelates the lattice, then each level's coefficients are
// split into sign-magnitude bitplanes, MSB first. Segment k carries plane k
// of every level that still has planes (signs ride with plane 0), so every
// retrieval prefix has a certified sup-error bound computed in exact integer
// arithmetic:
//
//   bound(b planes) = ( sum over levels with m_l > b of 2^(m_l - b)
//                       + cushion ) * 2^(E-56)
//
// where m_l is the bit width of level l's largest coefficient magnitude and
// the cushion covers every floating-point rounding on the analog rim
// (centering, lattice snap, floor-mean jitter, int-to-double casts, and the
// final midpoint re-add). Retrieving all planes recovers the lattice
// exactly, leaving only the cushion.
const Codec& bitplane_codec();

} // namespace proqoi
