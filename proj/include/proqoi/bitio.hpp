#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace proqoi {

// Bit-level serialization, LSB-first within each byte. A value written with
// put(v, w) occupies the next w bit positions starting at the current cursor,
// least-significant bit first, so the byte stream is independent of host
// endianness.
class BitWriter {
  public:
    void put(std::uint64_t value, unsigned width) {
        if (width > 64)
            throw std::invalid_argument("bit width exceeds 64");
        if (width < 64)
            value &= (std::uint64_t{1} << width) - 1;
        while (width > 0) {
            if (fill_ == 0)
                bytes_.push_back(0);
            const unsigned take = std::min<unsigned>(width, 8 - fill_);
            bytes_.back() |= static_cast<std::uint8_t>((value & ((1u << take) - 1u)) << fill_);
            value >>= take;
            fill_ = (fill_ + take) % 8;
            width -= take;
        }
    }

    void put_bit(bool b) { put(b ? 1 : 0, 1); }

    std::size_t bit_count() const noexcept {
        return bytes_.empty() ? 0 : (bytes_.size() - 1) * 8 + (fill_ == 0 ? 8 : fill_);
    }

    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
    std::vector<std::uint8_t> take() noexcept {
        fill_ = 0;
        return std::move(bytes_);
    }

  private:
    std::vector<std::uint8_t> bytes_;
    unsigned fill_ = 0; // bits used in the last byte; 0 means the last byte is full
};

class BitReader {
  public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t get(unsigned width) {
        if (width > 64)
            throw std::invalid_argument("bit width exceeds 64");
        std::uint64_t out = 0;
        unsigned got = 0;
        while (got < width) {
            if (pos_ >= bytes_.size() * 8)
                throw std::out_of_range("bit stream exhausted");
            const unsigned offset = pos_ % 8;
            const unsigned take = std::min<unsigned>(width - got, 8 - offset);
            const std::uint64_t chunk =
                (static_cast<std::uint64_t>(bytes_[pos_ / 8]) >> offset) & ((1u << take) - 1u);
            out |= chunk << got;
            got += take;
            pos_ += take;
        }
        return out;
    }

    bool get_bit() { return get(1) != 0; }

    std::size_t bits_remaining() const noexcept { return bytes_.size() * 8 - pos_; }
    std::size_t position() const noexcept { return pos_; }

  private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace proqoi
