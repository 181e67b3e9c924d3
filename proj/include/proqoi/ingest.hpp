#pragma once

// Loading raw little-endian floating-point arrays from disk, and the
// "path[:dims]" spec syntax used by the command-line tools.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "proqoi/variable.hpp"

namespace proqoi {

struct InputSpec {
    std::string path;
    std::vector<std::uint64_t> dims; // empty when the spec carries no ":dims" suffix
    std::uint64_t count() const noexcept; // product of dims, 0 when dims is empty
};

// Parses "path" or "path:DxDx..." (e.g. "field.f64:512x512"). Dimensions are
// positive decimal integers separated by 'x'. Throws std::invalid_argument on
// a malformed suffix.
InputSpec parse_input_spec(const std::string& spec);

// Reads a raw array of IEEE-754 little-endian values. Width is 4 (binary32,
// widened exactly to double) or 8 (binary64). When dims is non-empty the file
// must hold exactly count() elements; otherwise the file size must be a
// multiple of the width and determines the count. Files containing NaN are
// rejected. Errors name the file and the expected/actual byte counts.
std::vector<double> read_raw_array(const InputSpec& spec, int width_bytes);

// Width inference from the file name: ".f32" selects 4 bytes, anything else
// selects 8.
int infer_width_bytes(const std::string& path);

// Writes values as raw little-endian binary64.
void write_raw_array(const std::string& path, const std::vector<double>& values);

// read_raw_array + VariableData::from_values. Any dims in the spec only
// size-check the file here; callers that persist the variable copy them onto
// the stored record.
VariableData ingest_variable(const std::string& name, const InputSpec& spec, int width_bytes);

} // namespace proqoi
