#include "adpcm/bitio.hpp"

#include <stdexcept>

namespace adpcm {

void BitWriter::put(std::uint32_t code, int bits) {
    if (bits < 1 || bits > 32) throw std::invalid_argument("bit width out of range");
    if (bits < 32 && code >> bits) throw std::invalid_argument("code does not fit in bit width");
    for (int i = bits - 1; i >= 0; --i) {
        const std::size_t byte = bit_count_ / 8;
        if (byte == bytes_.size()) bytes_.push_back(0);
        const int shift = 7 - static_cast<int>(bit_count_ % 8);
        bytes_[byte] |= static_cast<std::uint8_t>(((code >> i) & 1u) << shift);
        ++bit_count_;
    }
}

std::uint32_t BitReader::get(int bits) {
    if (bits < 1 || bits > 32) throw std::invalid_argument("bit width out of range");
    if (bits_left() < static_cast<std::size_t>(bits))
        throw std::out_of_range("bitstream exhausted");
    std::uint32_t value = 0;
    for (int i = 0; i < bits; ++i) {
        const std::size_t byte = bit_pos_ / 8;
        const int shift = 7 - static_cast<int>(bit_pos_ % 8);
        value = (value << 1) | ((bytes_[byte] >> shift) & 1u);
        ++bit_pos_;
    }
    return value;
}

std::vector<std::uint8_t> pack_codes(std::span<const std::uint32_t> codes, int bits_each) {
    BitWriter w;
    for (std::uint32_t c : codes) w.put(c, bits_each);
    return w.take();
}

std::vector<std::uint32_t> unpack_codes(std::span<const std::uint8_t> bytes, int bits_each,
                                        std::size_t count) {
    BitReader r(bytes);
    std::vector<std::uint32_t> codes(count);
    for (std::size_t i = 0; i < count; ++i) codes[i] = r.get(bits_each);
    return codes;
}

} // namespace adpcm
