#include "proqoi/ingest.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace proqoi {

static_assert(std::endian::native == std::endian::little,
              "raw array I/O assumes a little-endian host");

std::uint64_t InputSpec::count() const noexcept {
    if (dims.empty())
        return 0;
    std::uint64_t n = 1;
    for (std::uint64_t d : dims)
        n *= d;
    return n;
}

InputSpec parse_input_spec(const std::string& spec) {
    InputSpec out;
    const std::size_t colon = spec.rfind(':');
    // A ':' introduces dims only when everything after it parses as DxDx...;
    // this keeps paths containing ':' usable without a suffix.
    if (colon == std::string::npos || colon + 1 == spec.size()) {
        out.path = spec;
        return out;
    }
    const std::string suffix = spec.substr(colon + 1);
    std::vector<std::uint64_t> dims;
    std::uint64_t current = 0;
    bool digits = false, ok = true;
    for (char ch : suffix) {
        if (ch >= '0' && ch <= '9') {
            current = current * 10 + static_cast<std::uint64_t>(ch - '0');
            digits = true;
        } else if (ch == 'x' && digits) {
            dims.push_back(current);
            current = 0;
            digits = false;
        } else {
            ok = false;
            break;
        }
    }
    if (ok && digits)
        dims.push_back(current);
    else if (ok)
        ok = false;
    if (!ok) {
        out.path = spec;
        return out;
    }
    for (std::uint64_t d : dims)
        if (d == 0)
            throw std::invalid_argument("input spec '" + spec + "' has a zero dimension");
    out.path = spec.substr(0, colon);
    out.dims = std::move(dims);
    return out;
}

int infer_width_bytes(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".f32") == 0 ? 4 : 8;
}

std::vector<double> read_raw_array(const InputSpec& spec, int width_bytes) {
    if (width_bytes != 4 && width_bytes != 8)
        throw std::invalid_argument("element width must be 4 or 8 bytes");
    std::ifstream in(spec.path, std::ios::binary | std::ios::ate);
    if (!in)
        throw std::runtime_error("cannot open '" + spec.path + "' for reading");
    const auto size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);

    const auto width = static_cast<std::uint64_t>(width_bytes);
    std::uint64_t count;
    if (!spec.dims.empty()) {
        count = spec.count();
        if (size != count * width)
            throw std::runtime_error("'" + spec.path + "': expected " +
                                     std::to_string(count * width) + " bytes for " +
                                     std::to_string(count) + " elements, file holds " +
                                     std::to_string(size) + " bytes");
    } else {
        if (size == 0 || size % width != 0)
            throw std::runtime_error("'" + spec.path + "': file size " + std::to_string(size) +
                                     " bytes is not a positive multiple of the element width " +
                                     std::to_string(width_bytes));
        count = size / width;
    }

    std::vector<char> raw(static_cast<std::size_t>(size));
    if (!in.read(raw.data(), static_cast<std::streamsize>(size)))
        throw std::runtime_error("failed to read '" + spec.path + "'");

    std::vector<double> values(static_cast<std::size_t>(count));
    if (width_bytes == 8) {
        std::memcpy(values.data(), raw.data(), raw.size());
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            float f;
            std::memcpy(&f, raw.data() + i * 4, 4);
            values[i] = static_cast<double>(f); // binary32 -> binary64 is exact
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] != values[i])
            throw std::runtime_error("'" + spec.path + "': NaN at element " + std::to_string(i));
    return values;
}

void write_raw_array(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!out)
        throw std::runtime_error("failed to write '" + path + "'");
}

VariableData ingest_variable(const std::string& name, const InputSpec& spec, int width_bytes) {
    return VariableData::from_values(name, read_raw_array(spec, width_bytes));
}

} // namespace proqoi
