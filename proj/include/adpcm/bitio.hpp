#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace adpcm {

// MSB-first bit packer. The final partial byte is zero-padded.
class BitWriter {
public:
    void put(std::uint32_t code, int bits);
    std::size_t bit_count() const { return bit_count_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bit_count_ = 0;
};

// MSB-first bit reader over a fixed buffer. get() throws when the buffer
// runs out, so truncation surfaces as an error instead of garbage.
class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
    std::uint32_t get(int bits);
    std::size_t bits_consumed() const { return bit_pos_; }
    std::size_t bits_left() const { return bytes_.size() * 8 - bit_pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t bit_pos_ = 0;
};

std::vector<std::uint8_t> pack_codes(std::span<const std::uint32_t> codes, int bits_each);
std::vector<std::uint32_t> unpack_codes(std::span<const std::uint8_t> bytes, int bits_each,
                                        std::size_t count);

} // namespace adpcm
