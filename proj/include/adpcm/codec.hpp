#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adpcm/mlp.hpp"
#include "adpcm/quantizer.hpp"
#include "adpcm/signal.hpp"

namespace adpcm {

enum class Scheme : std::uint8_t {
    BackwardLms = 0, // linear, NLMS-updated every sample
    BackwardLd = 1,  // linear, Levinson-Durbin on the previous reconstructed frame
    BackwardNl = 2,  // MLP retrained on reconstructed history every nl_update_period samples
    ForwardNl = 3,   // MLP trained per frame on the original signal, weights transmitted
};

const char* scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct LmsParams {
    double step_size = 0.005;
    double leakage = 0.9999;
    double epsilon = 1e-6;
};

struct ResidualQuantizerParams {
    double initial_step = 0.02;
    double step_min = 1e-5;
    double step_max = 1.0;
    std::vector<double> multipliers; // empty selects the default table for nq
};

// Encoder-side diagnostic for the forward scheme. The wire format is the
// same either way; UnquantizedLoop makes the encoder predict from the raw
// trained weights while still transmitting quantized ones, so the decoder
// disagrees with the encoder on purpose.
enum class ForwardWeightMode : std::uint8_t { QuantizedInLoop = 0, UnquantizedLoop = 1 };

struct CodecConfig {
    Scheme scheme = Scheme::BackwardLd;
    int nq = 5;                      // residual bits per sample, 2..5
    std::size_t frame_len = 200;
    int order = 10;                  // linear schemes only
    double lambda = 1.0;             // bandwidth expansion, BackwardLd only
    std::size_t nl_update_period = 200; // BackwardNl: 1 = sample adaptive
    BitAllocation allocation;        // ForwardNl only
    TrainConfig train;
    int sample_rate_hz = 8000;
    LmsParams lms;
    ResidualQuantizerParams rq;
    ForwardWeightMode weight_mode = ForwardWeightMode::QuantizedInLoop;
};

// Range-checks every field and canonicalizes lambda to the wire precision
// (1e-4 steps) so encoder and decoder compute with the identical value.
CodecConfig validate_config(CodecConfig config);

/// Parsed bitstream: fixed header plus one continuous MSB-first bit payload
/// holding, per frame, the parameter codes (ForwardNl only) followed by the
/// frame's residual codes.
struct Bitstream {
    Scheme scheme = Scheme::BackwardLd;
    int nq = 5;
    std::size_t frame_len = 200;
    int order = 10;
    double lambda = 1.0;
    std::size_t nl_update_period = 200;
    BitAllocation allocation;
    int sample_rate_hz = 8000;
    std::size_t sample_count = 0;
    std::uint32_t codebook_checksum = 0;
    std::vector<std::uint8_t> payload;

    std::size_t frame_count() const;
    std::size_t param_bits_per_frame() const;
    std::size_t payload_bit_count() const; // closed form, not the padded byte size

    std::vector<std::uint8_t> serialize() const;
    static Bitstream parse(std::span<const std::uint8_t> bytes);
};

inline constexpr std::size_t kBitstreamHeaderSize = 30;

struct EncodeResult {
    Bitstream stream;
    PcmSignal reconstruction;              // encoder-local decoded signal
    std::vector<double> prediction_errors; // unquantized e(n), for prediction gain
};

// bank is required for ForwardNl and must match config.allocation.
EncodeResult encode(const CodecConfig& config, const PcmSignal& signal,
                    const WeightQuantizerBank* bank = nullptr);

// Adaptation parameters the wire header does not carry; they are part of the
// codec definition and must match the encoder's (defaults usually do).
struct DecodeParams {
    TrainConfig train;
    LmsParams lms;
    ResidualQuantizerParams rq;
};

// The decoder-side adaptation parameters matching an encoder config.
DecodeParams params_of(const CodecConfig& config);

PcmSignal decode(const Bitstream& stream, const WeightQuantizerBank* bank = nullptr,
                 const DecodeParams& params = {});

} // namespace adpcm
