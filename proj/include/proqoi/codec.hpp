#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proqoi/store.hpp"
#include "proqoi/variable.hpp"

namespace proqoi {

class SegmentStore;

// Per-codec refactoring options. `kind` selects the codec:
//   "bitplane"             multilevel hierarchical-basis bitplane codec
//   "snapshot-delta"       tolerance-ladder snapshots storing inter-rung deltas
//   "snapshot-independent" tolerance-ladder snapshots, each rung standalone
struct CodecConfig {
    std::string kind = "bitplane";
    // Relative tolerance ladder for the snapshot codecs (fractions of the
    // value range, strictly decreasing). Empty selects 1e-1 .. 1e-10.
    std::vector<double> snapshot_ladder;
};

bool is_known_codec(std::string_view kind) noexcept;

// Codec-private decoding state; owned by a RetrievalState.
struct CodecScratch {
    virtual ~CodecScratch() = default;
};

// Progressive reconstruction state for one variable.
struct RetrievalState {
    std::vector<double> values;        // current reconstruction, length count
    double achieved_bound = 0.0;       // certified sup error of `values` at unmasked points
    std::uint32_t next_segment = 0;    // first unconsumed id (prefix-consuming codecs)
    std::uint64_t bytes_consumed = 0;  // cumulative payload bytes read so far
    bool full_fidelity = false;        // no further segment can tighten the bound
    bool has_mask = false;
    OutlierMask mask;                  // valid when has_mask
    std::unique_ptr<CodecScratch> scratch; // created lazily on first segment apply
};

class Codec {
  public:
    virtual ~Codec() = default;
    virtual std::string_view kind() const noexcept = 0;

    // Refactors a non-degenerate variable (unmasked range > 0). Fills the
    // record's metadata blob, the per-segment nominal bounds, and the
    // payloads. Callers use refactor_variable(), which screens degenerate
    // inputs first and fills the shared record fields.
    virtual void refactor(const VariableData& var, const OutlierMask* mask,
                          const MaskedStats& stats, const CodecConfig& config,
                          RefactoredVariable& out) const = 0;

    virtual std::unique_ptr<CodecScratch> make_scratch(const VarRecord& rec) const = 0;

    // Ids reconstruct_to would consume to reach `target_eps` from `st`; pure.
    // Default: walk the not-yet-consumed prefix until the bound is reached.
    virtual std::vector<std::uint32_t> plan(const VarRecord& rec, const RetrievalState& st,
                                            double target_eps) const;

    // Decodes one segment payload into the scratch and updates
    // achieved_bound / next_segment. Does not touch st.values.
    virtual void apply(const VarRecord& rec, RetrievalState& st, std::uint32_t id,
                       std::span<const std::uint8_t> payload) const = 0;

    // Rebuilds st.values from the scratch after one or more applies. Masked
    // positions are restored to the mask constant afterwards by the driver.
    virtual void finalize(const VarRecord& rec, RetrievalState& st) const = 0;
};

// Retrieval-side codec lookup by manifest tag; StoreError on unknown kind.
const Codec& codec_for(std::string_view kind);

// Refactors one variable end to end: computes masked stats, fills the shared
// record fields (name, codec, count, dims = {count}, min/max, mask fields),
// writes the packed mask, and dispatches to the codec. Degenerate inputs are
// handled here: all points masked -> zero segments; unmasked range zero ->
// one empty segment with nominal bound 0 (the midpoint is already exact).
RefactoredVariable refactor_variable(const VariableData& var, const OutlierMask* mask,
                                     const CodecConfig& config);

// Fresh state: values = stored midpoint (mask constant at masked points),
// achieved_bound = the record's initial bound, nothing consumed.
RetrievalState init_state(const SegmentStore& store, const VarRecord& rec);

// Consumes the minimal set of not-yet-consumed segments so that
// st.achieved_bound <= target_eps. Returns whether the target was met; when
// it cannot be met the whole store is consumed and st.full_fidelity is set.
// No-op (and true) when the target is already met.
bool reconstruct_to(const SegmentStore& store, const VarRecord& rec, RetrievalState& st,
                    double target_eps);

} // namespace proqoi
