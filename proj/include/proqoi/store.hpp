#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "proqoi/variable.hpp"

namespace proqoi {

// Thrown for any structural problem with an on-disk store: missing files,
// size mismatches, checksum failures, or non-monotone segment bounds.
class StoreError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// 64-bit FNV-1a over a byte span; used to fingerprint segment payloads.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Metadata for one progressive segment of one variable.
struct SegmentMeta {
    std::uint32_t id = 0;               // ordinal within the variable, 0-based
    std::uint64_t byte_size = 0;        // payload size of seg_<id>.bin
    double nominal_bound = 0.0;         // certified sup-error after consuming segments 0..id
    std::uint64_t checksum = 0;         // FNV-1a 64 of the payload
};

// Per-variable manifest record.
struct VarRecord {
    std::string name;
    std::string codec;                   // codec kind tag, e.g. "bitplane"
    std::uint64_t count = 0;             // element count of the linearized array
    std::vector<std::uint64_t> dims;     // original dimensions, provenance only
    double vmin = 0.0;                   // min over unmasked points
    double vmax = 0.0;                   // max over unmasked points
    bool has_mask = false;
    double mask_constant = 0.0;          // exact value of masked points
    std::uint64_t masked_count = 0;
    std::string metadata;                // codec-specific blob (base64 in the manifest)
    std::vector<SegmentMeta> segments;

    double range() const noexcept { return vmax - vmin; }
    double midpoint() const noexcept { return (vmin + vmax) / 2.0; }
    // Sup-error bound of the midpoint initialization, before any segment is
    // consumed. Slightly above range/2 to absorb the rounding of (min+max)/2.
    double initial_bound() const noexcept;
    // Tightest bound the store can deliver (last segment, or the initial
    // bound when the variable has no segments at all).
    double floor_bound() const noexcept {
        return segments.empty() ? initial_bound() : segments.back().nominal_bound;
    }
};

// A fully refactored variable ready to be written: its manifest record plus
// the raw segment payloads and (optionally) the packed outlier bitmap.
struct RefactoredVariable {
    VarRecord record;
    std::vector<std::vector<std::uint8_t>> payloads; // one per record.segments entry
    std::vector<std::uint8_t> mask_packed;           // empty unless record.has_mask
};

// Writes manifest.json, <var>/seg_<id>.bin, and <var>/mask.bin under dir,
// creating directories as needed. Fills in byte sizes and checksums.
void write_store(const std::filesystem::path& dir, std::vector<RefactoredVariable>& vars);

// Read-only handle to a store directory. Opening validates the manifest:
// JSON structure, format version, strictly decreasing finite segment bounds,
// file existence, exact byte sizes, payload checksums, and mask consistency.
class SegmentStore {
  public:
    static SegmentStore open(const std::filesystem::path& dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::span<const VarRecord> variables() const noexcept { return records_; }
    const VarRecord& variable(const std::string& name) const; // StoreError if absent
    bool has_variable(const std::string& name) const noexcept;

    // Reads one segment payload, re-verifying size and checksum.
    std::vector<std::uint8_t> read_segment(const VarRecord& rec, std::uint32_t id) const;
    // Reads the packed outlier bitmap for a masked variable.
    OutlierMask read_mask(const VarRecord& rec) const;

  private:
    std::filesystem::path dir_;
    std::vector<VarRecord> records_;
};

// Parses and validates manifest.json plus the files it references (sizes and
// checksums). SegmentStore::open is a thin wrapper over this.
std::vector<VarRecord> read_manifest(const std::filesystem::path& dir);

} // namespace proqoi
