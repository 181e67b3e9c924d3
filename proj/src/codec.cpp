#include "proqoi/codec.hpp"

#include <cmath>
#include <stdexcept>

#include "proqoi/bitplane_codec.hpp"
#include "proqoi/snapshot_codec.hpp"

namespace proqoi {

bool is_known_codec(std::string_view kind) noexcept {
    return kind == "bitplane" || kind == "snapshot-delta" || kind == "snapshot-independent";
}

std::vector<std::uint32_t> Codec::plan(const VarRecord& rec, const RetrievalState& st,
                                       double target_eps) const {
    std::vector<std::uint32_t> ids;
    if (st.achieved_bound <= target_eps)
        return ids;
    for (std::uint32_t id = st.next_segment; id < rec.segments.size(); ++id) {
        ids.push_back(id);
        if (rec.segments[id].nominal_bound <= target_eps)
            break;
    }
    return ids;
}

const Codec& codec_for(std::string_view kind) {
    if (kind == "bitplane")
        return bitplane_codec();
    if (kind == "snapshot-delta")
        return snapshot_codec(true);
    if (kind == "snapshot-independent")
        return snapshot_codec(false);
    throw StoreError("unknown codec kind '" + std::string(kind) + "'");
}

RefactoredVariable refactor_variable(const VariableData& var, const OutlierMask* mask,
                                     const CodecConfig& config) {
    if (!is_known_codec(config.kind))
        throw std::invalid_argument("unknown codec kind '" + config.kind + "'");
    if (mask && mask->size() != var.size())
        throw std::invalid_argument("mask length does not match variable length");

    const MaskedStats stats = masked_stats(var, mask);

    RefactoredVariable rv;
    VarRecord& rec = rv.record;
    rec.name = var.name;
    rec.codec = config.kind;
    rec.count = var.size();
    rec.dims = {var.size()};
    rec.vmin = stats.vmin;
    rec.vmax = stats.vmax;
    if (mask && mask->count() > 0) {
        rec.has_mask = true;
        rec.mask_constant = mask->constant;
        rec.masked_count = mask->count();
        rv.mask_packed = mask->packed();
    }

    if (stats.unmasked == 0) {
        // Every point is masked: the mask constant reconstructs the variable
        // exactly, so the store needs no segments at all.
        return rv;
    }
    if (stats.range() == 0.0) {
        // All unmasked values are equal: the stored midpoint is already the
        // exact value, so a single empty segment certifies error 0.
        rec.segments.push_back(SegmentMeta{0, 0, 0.0, 0});
        rv.payloads.emplace_back();
        return rv;
    }

    codec_for(config.kind).refactor(var, mask, stats, config, rv);
    if (rv.payloads.size() != rec.segments.size())
        throw std::logic_error("codec produced mismatched payload and segment counts");
    return rv;
}

RetrievalState init_state(const SegmentStore& store, const VarRecord& rec) {
    RetrievalState st;
    st.values.assign(rec.count, rec.midpoint());
    st.achieved_bound = rec.initial_bound();
    if (rec.has_mask) {
        st.has_mask = true;
        st.mask = store.read_mask(rec);
        for (std::size_t i = 0; i < rec.count; ++i)
            if (st.mask.test(i))
                st.values[i] = rec.mask_constant;
    }
    st.full_fidelity = st.achieved_bound <= rec.floor_bound();
    return st;
}

bool reconstruct_to(const SegmentStore& store, const VarRecord& rec, RetrievalState& st,
                    double target_eps) {
    if (std::isnan(target_eps) || target_eps < 0.0)
        throw std::invalid_argument("reconstruction target must be non-negative");
    if (st.achieved_bound <= target_eps)
        return true;

    const Codec& codec = codec_for(rec.codec);
    if (rec.metadata.empty()) {
        // Degenerate record: a constant unmasked value carries one empty
        // segment certifying the stored midpoint exactly; no codec state
        // is involved. (An all-masked record has no segments at all and
        // never reaches this point: its initial bound is already 0.)
        for (std::uint32_t id = st.next_segment;
             id < rec.segments.size() && st.achieved_bound > target_eps; ++id) {
            const auto payload = store.read_segment(rec, id);
            st.bytes_consumed += payload.size();
            st.next_segment = id + 1;
            st.achieved_bound = rec.segments[id].nominal_bound;
        }
        st.full_fidelity = st.achieved_bound <= rec.floor_bound();
        return st.achieved_bound <= target_eps;
    }
    const std::vector<std::uint32_t> ids = codec.plan(rec, st, target_eps);
    if (!ids.empty()) {
        if (!st.scratch)
            st.scratch = codec.make_scratch(rec);
        for (std::uint32_t id : ids) {
            const auto payload = store.read_segment(rec, id);
            codec.apply(rec, st, id, payload);
            st.bytes_consumed += payload.size();
        }
        codec.finalize(rec, st);
        if (st.has_mask)
            for (std::size_t i = 0; i < rec.count; ++i)
                if (st.mask.test(i))
                    st.values[i] = rec.mask_constant;
    }
    st.full_fidelity = st.achieved_bound <= rec.floor_bound();
    return st.achieved_bound <= target_eps;
}

} // namespace proqoi
