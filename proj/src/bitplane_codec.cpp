#include "proqoi/bitplane_codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "proqoi/bitio.hpp"
#include "proqoi/hb_transform.hpp"

namespace proqoi {

namespace {

using json = nlohmann::json;

// Lattice resolution: centered values are scaled so the largest magnitude
// lands near 2^kLatticeBits. Chosen to leave int64 headroom for the
// transform's coefficient and prediction sums.
constexpr int kLatticeBits = 56;

struct BitplaneMeta {
    std::uint64_t n = 0;
    int depth = 0;
    int unit_exp = 0;                 // lattice unit is 2^unit_exp
    std::vector<int> level_bits;      // m_l: planes carried by each level
    std::uint32_t planes = 0;         // max over level_bits
    std::uint64_t cushion_units = 0;  // floating-point rim allowance
};

std::string meta_to_blob(const BitplaneMeta& m) {
    json j;
    j["n"] = m.n;
    j["depth"] = m.depth;
    j["unit_exp"] = m.unit_exp;
    j["level_bits"] = m.level_bits;
    j["planes"] = m.planes;
    j["cushion_units"] = m.cushion_units;
    return j.dump();
}

BitplaneMeta meta_from_blob(const std::string& blob, const VarRecord& rec) {
    BitplaneMeta m;
    try {
        const json j = json::parse(blob);
        m.n = j.at("n").get<std::uint64_t>();
        m.depth = j.at("depth").get<int>();
        m.unit_exp = j.at("unit_exp").get<int>();
        m.level_bits = j.at("level_bits").get<std::vector<int>>();
        m.planes = j.at("planes").get<std::uint32_t>();
        m.cushion_units = j.at("cushion_units").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw StoreError("variable '" + rec.name + "': corrupt codec metadata: " + e.what());
    }
    if (m.n != rec.count || m.depth < 0 || m.depth >= 62 ||
        m.level_bits.size() != static_cast<std::size_t>(m.depth) + 1)
        throw StoreError("variable '" + rec.name + "': inconsistent codec metadata");
    for (int b : m.level_bits)
        if (b < 0 || b > 63)
            throw StoreError("variable '" + rec.name + "': inconsistent codec metadata");
    return m;
}

// Bits in segment `plane`, excluding the 16-byte header.
std::uint64_t plane_payload_bits(const BitplaneMeta& m, const HbLayout& layout,
                                 std::uint32_t plane) {
    std::uint64_t bits = 0;
    for (int l = 0; l <= m.depth; ++l) {
        if (static_cast<std::uint32_t>(m.level_bits[l]) > plane) {
            const std::uint64_t count = layout.nodes_at(l);
            bits += plane == 0 ? 2 * count : count; // signs ride with plane 0
        }
    }
    return bits;
}

void put_header(BitWriter& w, std::uint32_t level_count, std::uint32_t plane,
                std::uint64_t payload_bits) {
    w.put(level_count, 32);
    w.put(plane, 32);
    w.put(payload_bits, 64);
}

// Smallest double that is >= the exact integer value.
double to_double_round_up(std::uint64_t units) {
    double d = static_cast<double>(units);
    if (d < 0x1p63 && static_cast<std::uint64_t>(d) < units)
        d = std::nextafter(d, std::numeric_limits<double>::infinity());
    return d;
}

// Certified sup error (in lattice units, before the cushion) of the lattice
// reconstruction after `planes_used` planes.
std::uint64_t truncation_units(const BitplaneMeta& m, std::uint32_t planes_used) {
    std::uint64_t units = 0;
    for (int b : m.level_bits)
        if (static_cast<std::uint32_t>(b) > planes_used)
            units += std::uint64_t{1} << (static_cast<std::uint32_t>(b) - planes_used);
    return units;
}

class BitplaneScratch final : public CodecScratch {
  public:
    BitplaneMeta meta;
    HbLayout layout;
    std::vector<std::uint64_t> mags; // accumulated coefficient magnitudes
    std::vector<std::uint8_t> negs; // coefficient signs (valid once plane 0 is in)
    std::uint32_t consumed = 0;     // planes applied so far

    explicit BitplaneScratch(const BitplaneMeta& m)
        : meta(m), layout(m.n, m.depth), mags(m.n, 0), negs(m.n, 0) {}
};

class BitplaneCodec final : public Codec {
  public:
    std::string_view kind() const noexcept override { return "bitplane"; }

    void refactor(const VariableData& var, const OutlierMask* mask, const MaskedStats& stats,
                  const CodecConfig&, RefactoredVariable& out) const override {
        const std::size_t n = var.size();
        const double mid = out.record.midpoint();

        // Center and snap to the lattice; masked points encode as the
        // midpoint (lattice zero) and are restored exactly on retrieval.
        double maxabs = 0.0;
        std::vector<double> centered(n);
        for (std::size_t i = 0; i < n; ++i) {
            const bool masked = mask && mask->test(i);
            centered[i] = masked ? 0.0 : var.values[i] - mid;
            maxabs = std::max(maxabs, std::fabs(centered[i]));
        }
        int e = 0;
        std::frexp(maxabs, &e); // maxabs in [2^(e-1), 2^e)
        const int unit_exp = e - kLatticeBits;

        std::vector<std::int64_t> lattice(n);
        for (std::size_t i = 0; i < n; ++i)
            lattice[i] = std::llround(std::ldexp(centered[i], -unit_exp));

        const HbLayout layout(n);
        hb_forward(std::span<std::int64_t>(lattice), layout);

        BitplaneMeta meta;
        meta.n = n;
        meta.depth = layout.depth;
        meta.unit_exp = unit_exp;
        meta.level_bits.assign(layout.level_count(), 0);
        for (int l = 0; l <= layout.depth; ++l) {
            std::uint64_t maxmag = 0;
            layout.for_each_node(l, [&](std::size_t idx) {
                const std::uint64_t mag =
                    lattice[idx] < 0 ? static_cast<std::uint64_t>(-lattice[idx])
                                     : static_cast<std::uint64_t>(lattice[idx]);
                maxmag = std::max(maxmag, mag);
            });
            meta.level_bits[l] = maxmag == 0 ? 0 : std::bit_width(maxmag);
        }
        meta.planes = 0;
        for (int b : meta.level_bits)
            meta.planes = std::max(meta.planes, static_cast<std::uint32_t>(b));

        // Rim allowance, in units: centering round-off (<=8), lattice snap
        // (<=1), floor-mean jitter (one per midpoint level), the int-to-
        // double cast of reconstructed nodes (<=9), and the final
        // fl(mid + x*unit) rounding (<= 8*kappa with kappa the ratio of the
        // result magnitude to the centered scale), plus slack.
        const double kappa = std::fabs(mid) * std::ldexp(1.0, -e) + 1.0;
        meta.cushion_units = static_cast<std::uint64_t>(meta.depth) + 20 +
                             static_cast<std::uint64_t>(std::ceil(8.0 * kappa));

        out.record.metadata = meta_to_blob(meta);

        if (meta.planes == 0) {
            // All coefficients are zero: the midpoint is exact up to the rim.
            const double bound =
                to_double_round_up(meta.cushion_units) * std::ldexp(1.0, unit_exp);
            out.record.segments.push_back(SegmentMeta{0, 0, bound, 0});
            out.payloads.emplace_back();
            return;
        }

        for (std::uint32_t k = 0; k < meta.planes; ++k) {
            BitWriter w;
            const std::uint64_t bits = plane_payload_bits(meta, layout, k);
            put_header(w, static_cast<std::uint32_t>(layout.level_count()), k, bits);
            for (int l = 0; l <= layout.depth; ++l) {
                const int ml = meta.level_bits[l];
                if (static_cast<std::uint32_t>(ml) <= k)
                    continue;
                if (k == 0)
                    layout.for_each_node(l, [&](std::size_t idx) {
                        w.put_bit(lattice[idx] < 0);
                    });
                const unsigned shift = static_cast<unsigned>(ml) - 1 - k;
                layout.for_each_node(l, [&](std::size_t idx) {
                    const std::uint64_t mag =
                        lattice[idx] < 0 ? static_cast<std::uint64_t>(-lattice[idx])
                                         : static_cast<std::uint64_t>(lattice[idx]);
                    w.put_bit((mag >> shift) & 1);
                });
            }
            const std::uint64_t units = truncation_units(meta, k + 1) + meta.cushion_units;
            const double bound = to_double_round_up(units) * std::ldexp(1.0, unit_exp);
            out.record.segments.push_back(
                SegmentMeta{k, 0, bound, 0}); // byte size and checksum set by write_store
            out.payloads.push_back(w.take());
        }
    }

    std::unique_ptr<CodecScratch> make_scratch(const VarRecord& rec) const override {
        return std::make_unique<BitplaneScratch>(meta_from_blob(rec.metadata, rec));
    }

    void apply(const VarRecord& rec, RetrievalState& st, std::uint32_t id,
               std::span<const std::uint8_t> payload) const override {
        auto& sc = static_cast<BitplaneScratch&>(*st.scratch);
        if (id != sc.consumed)
            throw std::logic_error("bitplane segments must be applied in order");

        BitReader r(payload);
        std::uint32_t level_count = 0, plane = 0;
        std::uint64_t bits = 0;
        try {
            level_count = static_cast<std::uint32_t>(r.get(32));
            plane = static_cast<std::uint32_t>(r.get(32));
            bits = r.get(64);
        } catch (const std::out_of_range&) {
            throw StoreError("variable '" + rec.name + "': segment " + std::to_string(id) +
                             " payload is truncated");
        }
        const std::uint64_t expect = plane_payload_bits(sc.meta, sc.layout, id);
        if (level_count != sc.layout.level_count() || plane != id || bits != expect ||
            r.bits_remaining() < expect)
            throw StoreError("variable '" + rec.name + "': segment " + std::to_string(id) +
                             " payload does not match the manifest metadata");

        for (int l = 0; l <= sc.meta.depth; ++l) {
            const int ml = sc.meta.level_bits[l];
            if (static_cast<std::uint32_t>(ml) <= id)
                continue;
            if (id == 0)
                sc.layout.for_each_node(l, [&](std::size_t idx) {
                    sc.negs[idx] = r.get_bit() ? 1 : 0;
                });
            const unsigned shift = static_cast<unsigned>(ml) - 1 - id;
            sc.layout.for_each_node(l, [&](std::size_t idx) {
                if (r.get_bit())
                    sc.mags[idx] |= std::uint64_t{1} << shift;
            });
        }
        sc.consumed = id + 1;
        st.next_segment = id + 1;
        st.achieved_bound = rec.segments[id].nominal_bound;
    }

    void finalize(const VarRecord& rec, RetrievalState& st) const override {
        auto& sc = static_cast<BitplaneScratch&>(*st.scratch);
        std::vector<std::int64_t> lattice(sc.meta.n);
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const auto mag = static_cast<std::int64_t>(sc.mags[i]);
            lattice[i] = sc.negs[i] ? -mag : mag;
        }
        hb_inverse(std::span<std::int64_t>(lattice), sc.layout);
        const double mid = rec.midpoint();
        for (std::size_t i = 0; i < lattice.size(); ++i)
            st.values[i] = mid + std::ldexp(static_cast<double>(lattice[i]), sc.meta.unit_exp);
    }
};

} // namespace

const Codec& bitplane_codec() {
    static const BitplaneCodec codec;
    return codec;
}

} // namespace proqoi
