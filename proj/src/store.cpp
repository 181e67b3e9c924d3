#include "proqoi/store.hpp"

#include <cfloat>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace proqoi {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kFormatTag = "proqoi-store";
constexpr int kFormatVersion = 1;

std::string checksum_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_checksum_hex(const std::string& s, const std::string& where) {
    if (s.size() != 16)
        throw StoreError("corrupt manifest: bad checksum string in " + where);
    std::uint64_t v = 0;
    for (char c : s) {
        int d;
        if (c >= '0' && c <= '9')
            d = c - '0';
        else if (c >= 'a' && c <= 'f')
            d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            d = c - 'A' + 10;
        else
            throw StoreError("corrupt manifest: bad checksum string in " + where);
        v = (v << 4) | static_cast<std::uint64_t>(d);
    }
    return v;
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw StoreError("cannot open file: " + p.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad())
        throw StoreError("read failure on file: " + p.string());
    return bytes;
}

void write_file(const fs::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw StoreError("cannot create file: " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
        throw StoreError("write failure on file: " + p.string());
}

void check_var_name(const std::string& name) {
    if (name.empty())
        throw StoreError("corrupt manifest: empty variable name");
    for (char c : name)
        if (c == '/' || c == '\\' || c == '\0')
            throw StoreError("corrupt manifest: unsafe variable name '" + name + "'");
    if (name == "." || name == "..")
        throw StoreError("corrupt manifest: unsafe variable name '" + name + "'");
}

// Validates the parts of a record that do not require touching payload files.
void check_record_shape(const VarRecord& rec) {
    check_var_name(rec.name);
    if (rec.count == 0)
        throw StoreError("corrupt manifest: variable '" + rec.name + "' has zero elements");
    if (std::isnan(rec.vmin) || std::isnan(rec.vmax) || rec.vmin > rec.vmax)
        throw StoreError("corrupt manifest: bad value range for variable '" + rec.name + "'");
    if (rec.masked_count > rec.count)
        throw StoreError("corrupt manifest: mask count exceeds element count for '" + rec.name +
                         "'");
    if (!rec.has_mask && rec.masked_count != 0)
        throw StoreError("corrupt manifest: mask count without mask for '" + rec.name + "'");
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.segments.size(); ++i) {
        const SegmentMeta& s = rec.segments[i];
        if (s.id != i)
            throw StoreError("corrupt manifest: non-consecutive segment ids for '" + rec.name +
                             "'");
        if (!std::isfinite(s.nominal_bound) || s.nominal_bound < 0.0)
            throw StoreError("corrupt manifest: non-finite segment bound for '" + rec.name + "'");
        if (!(s.nominal_bound < prev))
            throw StoreError("corrupt manifest: segment bounds not strictly decreasing for '" +
                             rec.name + "'");
        prev = s.nominal_bound;
    }
}

json record_to_json(const VarRecord& rec) {
    json j;
    j["name"] = rec.name;
    j["codec"] = rec.codec;
    j["count"] = rec.count;
    j["dims"] = rec.dims;
    j["min"] = rec.vmin;
    j["max"] = rec.vmax;
    j["mask"] = {{"present", rec.has_mask},
                 {"constant", rec.mask_constant},
                 {"count", rec.masked_count}};
    j["metadata"] = base64_encode(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(rec.metadata.data()), rec.metadata.size()));
    json segs = json::array();
    for (const SegmentMeta& s : rec.segments)
        segs.push_back({{"id", s.id},
                        {"bytes", s.byte_size},
                        {"bound", s.nominal_bound},
                        {"checksum", checksum_hex(s.checksum)}});
    j["segments"] = std::move(segs);
    return j;
}

VarRecord record_from_json(const json& j) {
    VarRecord rec;
    try {
        rec.name = j.at("name").get<std::string>();
        rec.codec = j.at("codec").get<std::string>();
        rec.count = j.at("count").get<std::uint64_t>();
        rec.dims = j.at("dims").get<std::vector<std::uint64_t>>();
        rec.vmin = j.at("min").get<double>();
        rec.vmax = j.at("max").get<double>();
        const json& m = j.at("mask");
        rec.has_mask = m.at("present").get<bool>();
        rec.mask_constant = m.at("constant").get<double>();
        rec.masked_count = m.at("count").get<std::uint64_t>();
        auto blob = base64_decode(j.at("metadata").get<std::string>());
        rec.metadata.assign(blob.begin(), blob.end());
        for (const json& s : j.at("segments")) {
            SegmentMeta meta;
            meta.id = s.at("id").get<std::uint32_t>();
            meta.byte_size = s.at("bytes").get<std::uint64_t>();
            meta.nominal_bound = s.at("bound").get<double>();
            meta.checksum = parse_checksum_hex(s.at("checksum").get<std::string>(),
                                               "variable '" + rec.name + "'");
            rec.segments.push_back(meta);
        }
    } catch (const json::exception& e) {
        throw StoreError(std::string("corrupt manifest: ") + e.what());
    }
    return rec;
}

} // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    static constexpr char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z')
            return c - 'A';
        if (c >= 'a' && c <= 'z')
            return c - 'a' + 26;
        if (c >= '0' && c <= '9')
            return c - '0' + 52;
        if (c == '+')
            return 62;
        if (c == '/')
            return 63;
        return -1;
    };
    if (text.size() % 4 != 0)
        throw StoreError("corrupt manifest: base64 blob length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2)
                    throw StoreError("corrupt manifest: malformed base64 padding");
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0)
                throw StoreError("corrupt manifest: malformed base64 padding");
            const int d = value_of(c);
            if (d < 0)
                throw StoreError("corrupt manifest: invalid base64 character");
            v = (v << 6) | static_cast<std::uint32_t>(d);
        }
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        if (pad < 2)
            out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        if (pad < 1)
            out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

double VarRecord::initial_bound() const noexcept {
    const double half = range() / 2.0;
    const double mid = midpoint();
    if (half == 0.0)
        return 0.0;
    // (vmin+vmax)/2 carries one rounding of the sum; cover it and guard up.
    const double raw = half + std::fabs(mid) * (2.0 * DBL_EPSILON);
    return raw * (1.0 + 4.0 * DBL_EPSILON);
}

void write_store(const fs::path& dir, std::vector<RefactoredVariable>& vars) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw StoreError("cannot create store directory " + dir.string() + ": " + ec.message());

    json manifest;
    manifest["format"] = kFormatTag;
    manifest["version"] = kFormatVersion;
    json jvars = json::array();

    for (RefactoredVariable& rv : vars) {
        VarRecord& rec = rv.record;
        if (rv.payloads.size() != rec.segments.size())
            throw StoreError("variable '" + rec.name +
                             "': payload count does not match segment metadata");
        const fs::path var_dir = dir / rec.name;
        fs::create_directories(var_dir, ec);
        if (ec)
            throw StoreError("cannot create directory " + var_dir.string() + ": " + ec.message());

        for (std::size_t i = 0; i < rv.payloads.size(); ++i) {
            SegmentMeta& meta = rec.segments[i];
            meta.id = static_cast<std::uint32_t>(i);
            meta.byte_size = rv.payloads[i].size();
            meta.checksum = fnv1a64(rv.payloads[i]);
            write_file(var_dir / ("seg_" + std::to_string(i) + ".bin"), rv.payloads[i]);
        }
        if (rec.has_mask) {
            if (rv.mask_packed.size() != (rec.count + 7) / 8)
                throw StoreError("variable '" + rec.name + "': packed mask has the wrong size");
            write_file(var_dir / "mask.bin", rv.mask_packed);
        }
        check_record_shape(rec);
        jvars.push_back(record_to_json(rec));
    }
    manifest["variables"] = std::move(jvars);

    const std::string text = manifest.dump(2);
    write_file(dir / "manifest.json",
               std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                             text.size()));
}

std::vector<VarRecord> read_manifest(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    std::error_code ec;
    if (!fs::exists(manifest_path, ec))
        throw StoreError("not a store: missing " + manifest_path.string());

    json manifest;
    try {
        std::ifstream in(manifest_path);
        if (!in)
            throw StoreError("cannot open " + manifest_path.string());
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw StoreError("corrupt manifest: " + std::string(e.what()));
    }
    if (!manifest.is_object() || manifest.value("format", "") != kFormatTag)
        throw StoreError("not a store: unrecognized manifest format in " + manifest_path.string());
    if (manifest.value("version", -1) != kFormatVersion)
        throw StoreError("unsupported store version in " + manifest_path.string());
    if (!manifest.contains("variables") || !manifest["variables"].is_array())
        throw StoreError("corrupt manifest: missing variables array");

    std::vector<VarRecord> records;
    for (const json& jv : manifest["variables"]) {
        VarRecord rec = record_from_json(jv);
        check_record_shape(rec);
        for (const VarRecord& prev : records)
            if (prev.name == rec.name)
                throw StoreError("corrupt manifest: duplicate variable '" + rec.name + "'");

        const fs::path var_dir = dir / rec.name;
        for (const SegmentMeta& s : rec.segments) {
            const fs::path seg = var_dir / ("seg_" + std::to_string(s.id) + ".bin");
            if (!fs::exists(seg, ec))
                throw StoreError("corrupt store: missing segment file " + seg.string());
            const auto actual = fs::file_size(seg, ec);
            if (ec)
                throw StoreError("corrupt store: cannot stat " + seg.string());
            if (actual != s.byte_size)
                throw StoreError("corrupt store: " + seg.string() + " has " +
                                 std::to_string(actual) + " bytes, manifest records " +
                                 std::to_string(s.byte_size));
            const auto bytes = read_file(seg);
            if (fnv1a64(bytes) != s.checksum)
                throw StoreError("corrupt store: checksum mismatch on " + seg.string());
        }
        if (rec.has_mask) {
            const fs::path mask = var_dir / "mask.bin";
            if (!fs::exists(mask, ec))
                throw StoreError("corrupt store: missing mask file " + mask.string());
            const auto actual = fs::file_size(mask, ec);
            if (ec)
                throw StoreError("corrupt store: cannot stat " + mask.string());
            if (actual != (rec.count + 7) / 8)
                throw StoreError("corrupt store: " + mask.string() + " has the wrong size");
            const auto bytes = read_file(mask);
            const OutlierMask m = OutlierMask::from_packed(bytes, rec.count);
            if (m.count() != rec.masked_count)
                throw StoreError("corrupt store: mask population of " + mask.string() +
                                 " disagrees with the manifest");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

SegmentStore SegmentStore::open(const fs::path& dir) {
    SegmentStore store;
    store.dir_ = dir;
    store.records_ = read_manifest(dir);
    return store;
}

const VarRecord& SegmentStore::variable(const std::string& name) const {
    for (const VarRecord& r : records_)
        if (r.name == name)
            return r;
    throw StoreError("store has no variable named '" + name + "'");
}

bool SegmentStore::has_variable(const std::string& name) const noexcept {
    for (const VarRecord& r : records_)
        if (r.name == name)
            return true;
    return false;
}

std::vector<std::uint8_t> SegmentStore::read_segment(const VarRecord& rec,
                                                     std::uint32_t id) const {
    if (id >= rec.segments.size())
        throw StoreError("segment id out of range for variable '" + rec.name + "'");
    const SegmentMeta& meta = rec.segments[id];
    const fs::path seg = dir_ / rec.name / ("seg_" + std::to_string(id) + ".bin");
    auto bytes = read_file(seg);
    if (bytes.size() != meta.byte_size)
        throw StoreError("corrupt store: " + seg.string() + " changed size after open");
    if (fnv1a64(bytes) != meta.checksum)
        throw StoreError("corrupt store: checksum mismatch on " + seg.string());
    return bytes;
}

OutlierMask SegmentStore::read_mask(const VarRecord& rec) const {
    if (!rec.has_mask)
        throw StoreError("variable '" + rec.name + "' has no mask");
    const fs::path mask = dir_ / rec.name / "mask.bin";
    auto bytes = read_file(mask);
    OutlierMask m = OutlierMask::from_packed(bytes, rec.count);
    m.constant = rec.mask_constant;
    return m;
}

} // namespace proqoi
