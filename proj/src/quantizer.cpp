#include "proqoi/quantizer.hpp"

#include <bit>
#include <cfloat>
#include <cmath>
#include <stdexcept>

namespace proqoi {

QuantizedBlock quantize(std::span<const double> values, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("quantizer tolerance must be positive and finite");
    if (values.empty())
        throw std::invalid_argument("cannot quantize an empty block");

    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double width = 2.0 * eps; // exact: scaling by 2
    const double spread = hi - lo;
    if (spread / width >= 0x1p62)
        throw std::domain_error("quantizer tolerance requires more than 63 bits per code");

    QuantizedBlock block;
    block.eps = eps;
    block.offset = lo;
    block.codes.resize(values.size());
    std::uint64_t max_code = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto code = static_cast<std::uint64_t>(std::llround((values[i] - lo) / width));
        block.codes[i] = code;
        max_code = std::max(max_code, code);
    }
    block.bit_width = max_code == 0 ? 0 : static_cast<unsigned>(std::bit_width(max_code));
    if (block.bit_width > 63)
        throw std::domain_error("quantizer tolerance requires more than 63 bits per code");

    // Roundings on the way in (subtract, divide) and out (multiply, add)
    // each cost at most half an ulp of a quantity no larger than
    // |offset| + spread + eps; four of them are covered with headroom.
    const double slack = (4.0 * (spread + eps) + 2.0 * std::fabs(lo)) * 0x1p-52;
    block.certified_eps = (eps + slack) * (1.0 + 4.0 * DBL_EPSILON);
    return block;
}

void dequantize_into(const QuantizedBlock& block, std::span<double> out) {
    if (out.size() != block.codes.size())
        throw std::invalid_argument("dequantize output size mismatch");
    const double width = 2.0 * block.eps;
    for (std::size_t i = 0; i < block.codes.size(); ++i)
        out[i] = block.offset + static_cast<double>(block.codes[i]) * width;
}

std::vector<double> dequantize(const QuantizedBlock& block) {
    std::vector<double> out(block.codes.size());
    dequantize_into(block, std::span<double>(out));
    return out;
}

} // namespace proqoi
