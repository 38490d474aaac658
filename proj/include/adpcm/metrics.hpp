#pragma once

#include <span>
#include <vector>

#include "adpcm/codec.hpp"
#include "adpcm/signal.hpp"

namespace adpcm {

struct SegSnrResult {
    double segsnr_db = 0.0;
    std::vector<double> per_segment_db;
};

// Per-segment 10*log10(sum x^2 / sum (x - xr)^2), clamped to [0, 60] dB,
// averaged over full segments with nonzero signal energy. The segment length
// is independent of the codec frame length on purpose, so frame sweeps stay
// comparable.
SegSnrResult segsnr(const PcmSignal& original, const PcmSignal& reconstructed,
                    std::size_t segment_len = 80);

// Global prediction gain 10*log10(sum x^2 / sum e^2) over the unquantized
// prediction errors recorded by the encoder. Returns +inf when the error
// energy is exactly zero.
double prediction_gain_db(std::span<const double> original, std::span<const double> errors);

// Same ratio averaged per frame instead of globally.
double prediction_gain_per_frame_db(std::span<const double> original,
                                    std::span<const double> errors, std::size_t frame_len);

// nq * rate + side-information bits: param_bits_per_frame * rate / frame_len,
// zero for backward schemes.
double overall_bitrate_bps(const CodecConfig& config);

struct MetricsReport {
    double segsnr_db = 0.0;
    double gp_db = 0.0;
    double bitrate_bps = 0.0;
    std::vector<double> per_segment_snr;
};

} // namespace adpcm
