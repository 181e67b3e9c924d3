#include "proqoi/snapshot_codec.hpp"

#include <bit>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "json.hpp"
#include "proqoi/bitio.hpp"
#include "proqoi/quantizer.hpp"

namespace proqoi {

namespace {

using json = nlohmann::json;

constexpr std::size_t kHeaderBits = 256; // rung u32, width u32, count u64, eps f64, offset f64

std::uint64_t bits_of(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
}

double double_of(std::uint64_t u) {
    double v;
    std::memcpy(&v, &u, sizeof v);
    return v;
}

struct SnapshotMeta {
    bool delta = false;
    std::uint64_t n = 0;
    std::vector<double> ladder_rel; // as configured, for provenance
    std::vector<double> ladder_abs; // tolerance actually used per emitted rung
};

std::string meta_to_blob(const SnapshotMeta& m) {
    json j;
    j["mode"] = m.delta ? "delta" : "independent";
    j["n"] = m.n;
    j["ladder_rel"] = m.ladder_rel;
    j["ladder_abs"] = m.ladder_abs;
    return j.dump();
}

SnapshotMeta meta_from_blob(const std::string& blob, const VarRecord& rec) {
    SnapshotMeta m;
    std::string mode;
    try {
        const json j = json::parse(blob);
        mode = j.at("mode").get<std::string>();
        m.n = j.at("n").get<std::uint64_t>();
        m.ladder_rel = j.at("ladder_rel").get<std::vector<double>>();
        m.ladder_abs = j.at("ladder_abs").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw StoreError("variable '" + rec.name + "': corrupt codec metadata: " + e.what());
    }
    if (mode == "delta")
        m.delta = true;
    else if (mode != "independent")
        throw StoreError("variable '" + rec.name + "': inconsistent codec metadata");
    if (m.n != rec.count || m.ladder_abs.size() != rec.segments.size())
        throw StoreError("variable '" + rec.name + "': inconsistent codec metadata");
    return m;
}

std::vector<std::uint8_t> pack_rung(std::uint32_t rung, const QuantizedBlock& block) {
    BitWriter w;
    w.put(rung, 32);
    w.put(block.bit_width, 32);
    w.put(block.codes.size(), 64);
    w.put(bits_of(block.eps), 64);
    w.put(bits_of(block.offset), 64);
    for (std::uint64_t code : block.codes)
        w.put(code, block.bit_width);
    return w.take();
}

QuantizedBlock unpack_rung(const VarRecord& rec, std::uint32_t id,
                           std::span<const std::uint8_t> payload, std::uint64_t expect_count) {
    BitReader r(payload);
    QuantizedBlock block;
    std::uint32_t rung = 0;
    std::uint64_t count = 0;
    try {
        rung = static_cast<std::uint32_t>(r.get(32));
        block.bit_width = static_cast<unsigned>(r.get(32));
        count = r.get(64);
        block.eps = double_of(r.get(64));
        block.offset = double_of(r.get(64));
    } catch (const std::out_of_range&) {
        throw StoreError("variable '" + rec.name + "': segment " + std::to_string(id) +
                         " payload is truncated");
    }
    if (rung != id || count != expect_count || block.bit_width > 63 ||
        !std::isfinite(block.eps) || block.eps <= 0.0 || !std::isfinite(block.offset) ||
        r.bits_remaining() < count * block.bit_width)
        throw StoreError("variable '" + rec.name + "': segment " + std::to_string(id) +
                         " payload does not match the manifest metadata");
    block.codes.resize(count);
    for (std::uint64_t i = 0; i < count; ++i)
        block.codes[i] = r.get(block.bit_width);
    return block;
}

class SnapshotScratch final : public CodecScratch {
  public:
    SnapshotMeta meta;
    std::vector<double> recon; // centered reconstruction
    std::uint32_t rungs_applied = 0;

    explicit SnapshotScratch(SnapshotMeta m) : meta(std::move(m)), recon(meta.n, 0.0) {}
};

class SnapshotCodec final : public Codec {
  public:
    explicit SnapshotCodec(bool delta) : delta_(delta) {}

    std::string_view kind() const noexcept override {
        return delta_ ? "snapshot-delta" : "snapshot-independent";
    }

    void refactor(const VariableData& var, const OutlierMask* mask, const MaskedStats& stats,
                  const CodecConfig& config, RefactoredVariable& out) const override {
        const std::size_t n = var.size();
        const double mid = out.record.midpoint();
        const double range = stats.range();

        std::vector<double> ladder_rel =
            config.snapshot_ladder.empty() ? default_snapshot_ladder() : config.snapshot_ladder;
        validate_ladder(ladder_rel);

        std::vector<double> centered(n);
        for (std::size_t i = 0; i < n; ++i)
            centered[i] = (mask && mask->test(i)) ? 0.0 : var.values[i] - mid;

        // Allowance for the decoder-side roundings beyond the quantizer's
        // own: the closed-loop accumulate and the final midpoint re-add.
        const double decoder_slack = (2.0 * range + std::fabs(mid)) * 0x1p-51;

        SnapshotMeta meta;
        meta.delta = delta_;
        meta.n = n;
        meta.ladder_rel = ladder_rel;

        std::vector<double> recon(n, 0.0);
        std::vector<double> residual(n);
        double prev_bound = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ladder_rel.size(); ++k) {
            const double eps_abs = ladder_rel[k] * range;
            if (!(eps_abs > 0.0))
                break; // underflowed: deeper rungs cannot be certified

            const std::span<const double> source =
                (delta_ && k > 0) ? std::span<const double>(residual)
                                  : std::span<const double>(centered);
            QuantizedBlock block;
            try {
                block = quantize(source, eps_abs);
            } catch (const std::domain_error&) {
                break; // rung needs > 63 bits per code: ladder ends here
            }
            const double bound =
                (block.certified_eps + decoder_slack) * (1.0 + 4.0 * DBL_EPSILON);
            if (!(bound < prev_bound))
                break; // allowance now dominates: deeper rungs stop improving

            // Mirror the decoder bit for bit so the closed loop is exact.
            std::vector<double> deq = dequantize(block);
            if (delta_ && k > 0)
                for (std::size_t i = 0; i < n; ++i)
                    recon[i] = recon[i] + deq[i];
            else
                recon = std::move(deq);
            if (delta_)
                for (std::size_t i = 0; i < n; ++i)
                    residual[i] = centered[i] - recon[i];

            meta.ladder_abs.push_back(eps_abs);
            out.record.segments.push_back(
                SegmentMeta{static_cast<std::uint32_t>(k), 0, bound, 0});
            out.payloads.push_back(pack_rung(static_cast<std::uint32_t>(k), block));
            prev_bound = bound;
        }
        if (out.record.segments.empty())
            throw std::invalid_argument("variable '" + var.name +
                                        "': no ladder rung is representable for this data");
        out.record.metadata = meta_to_blob(meta);
    }

    std::unique_ptr<CodecScratch> make_scratch(const VarRecord& rec) const override {
        return std::make_unique<SnapshotScratch>(meta_from_blob(rec.metadata, rec));
    }

    std::vector<std::uint32_t> plan(const VarRecord& rec, const RetrievalState& st,
                                    double target_eps) const override {
        if (!delta_) {
            std::vector<std::uint32_t> ids;
            if (st.achieved_bound <= target_eps || st.achieved_bound <= rec.floor_bound())
                return ids;
            for (std::uint32_t id = 0; id < rec.segments.size(); ++id)
                if (rec.segments[id].nominal_bound <= target_eps) {
                    ids.push_back(id);
                    return ids;
                }
            ids.push_back(static_cast<std::uint32_t>(rec.segments.size()) - 1);
            return ids;
        }
        return Codec::plan(rec, st, target_eps);
    }

    void apply(const VarRecord& rec, RetrievalState& st, std::uint32_t id,
               std::span<const std::uint8_t> payload) const override {
        auto& sc = static_cast<SnapshotScratch&>(*st.scratch);
        if (delta_ && id != sc.rungs_applied)
            throw std::logic_error("delta rungs must be applied in order");

        const QuantizedBlock block = unpack_rung(rec, id, payload, sc.meta.n);
        if (delta_ && id > 0) {
            std::vector<double> deq = dequantize(block);
            for (std::size_t i = 0; i < sc.recon.size(); ++i)
                sc.recon[i] = sc.recon[i] + deq[i];
        } else {
            dequantize_into(block, std::span<double>(sc.recon));
        }
        sc.rungs_applied = id + 1;
        st.next_segment = id + 1;
        st.achieved_bound = rec.segments[id].nominal_bound;
    }

    void finalize(const VarRecord& rec, RetrievalState& st) const override {
        const auto& sc = static_cast<const SnapshotScratch&>(*st.scratch);
        const double mid = rec.midpoint();
        for (std::size_t i = 0; i < sc.recon.size(); ++i)
            st.values[i] = mid + sc.recon[i];
    }

  private:
    static void validate_ladder(const std::vector<double>& ladder) {
        double prev = std::numeric_limits<double>::infinity();
        for (double rel : ladder) {
            if (!std::isfinite(rel) || rel <= 0.0)
                throw std::invalid_argument("ladder tolerances must be positive and finite");
            if (!(rel < prev))
                throw std::invalid_argument("ladder tolerances must be strictly decreasing");
            prev = rel;
        }
    }

    bool delta_;
};

} // namespace

std::vector<double> default_snapshot_ladder() {
    std::vector<double> ladder(10);
    for (int i = 0; i < 10; ++i)
        ladder[static_cast<std::size_t>(i)] = std::pow(10.0, -(i + 1));
    return ladder;
}

const Codec& snapshot_codec(bool delta) {
    static const SnapshotCodec with_delta(true);
    static const SnapshotCodec standalone(false);
    return delta ? with_delta : standalone;
}

} // namespace proqoi
