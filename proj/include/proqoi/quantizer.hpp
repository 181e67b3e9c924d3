#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace proqoi {

// Uniform scalar quantization with nearest-bin rounding. Codes are
// non-negative because the offset is the block minimum:
//   code = round((v - offset) / (2*eps)),  dequantized = offset + code*2*eps
// so the per-point reconstruction error is eps plus a small floating-point
// allowance reported as certified_eps.
struct QuantizedBlock {
    double eps = 0.0;          // requested half bin width
    double certified_eps = 0.0; // eps plus the rounding allowance actually guaranteed
    double offset = 0.0;       // block minimum
    unsigned bit_width = 0;    // bits per stored code (0 when every code is 0)
    std::vector<std::uint64_t> codes;
};

// Throws std::invalid_argument when eps <= 0 or not finite, and
// std::domain_error when the required code width exceeds 63 bits (eps
// degenerately small for the block's spread).
QuantizedBlock quantize(std::span<const double> values, double eps);

void dequantize_into(const QuantizedBlock& block, std::span<double> out);
std::vector<double> dequantize(const QuantizedBlock& block);

} // namespace proqoi
