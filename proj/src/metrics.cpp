#include "adpcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adpcm {

namespace {
constexpr double kSegSnrFloorDb = 0.0;
constexpr double kSegSnrCeilDb = 60.0;
} // namespace

SegSnrResult segsnr(const PcmSignal& original, const PcmSignal& reconstructed,
                    std::size_t segment_len) {
    if (segment_len < 1) throw std::invalid_argument("segment_len must be positive");
    if (original.samples.size() != reconstructed.samples.size())
        throw std::invalid_argument("signal length mismatch");
    if (original.samples.size() < segment_len)
        throw std::invalid_argument("signal shorter than one segment");

    SegSnrResult out;
    const std::size_t full_segments = original.samples.size() / segment_len;
    double sum = 0.0;
    for (std::size_t s = 0; s < full_segments; ++s) {
        double sig = 0.0, noise = 0.0;
        for (std::size_t i = s * segment_len; i < (s + 1) * segment_len; ++i) {
            const double x = original.samples[i];
            const double d = x - reconstructed.samples[i];
            sig += x * x;
            noise += d * d;
        }
        if (sig == 0.0) continue; // silent segment, skip
        double snr_db = noise == 0.0 ? kSegSnrCeilDb : 10.0 * std::log10(sig / noise);
        snr_db = std::clamp(snr_db, kSegSnrFloorDb, kSegSnrCeilDb);
        out.per_segment_db.push_back(snr_db);
        sum += snr_db;
    }
    if (out.per_segment_db.empty())
        throw std::invalid_argument("no usable segments (all silent)");
    out.segsnr_db = sum / static_cast<double>(out.per_segment_db.size());
    return out;
}

double prediction_gain_db(std::span<const double> original, std::span<const double> errors) {
    if (original.size() != errors.size()) throw std::invalid_argument("length mismatch");
    if (original.empty()) throw std::invalid_argument("empty input");
    double sig = 0.0, err = 0.0;
    for (double x : original) sig += x * x;
    for (double e : errors) err += e * e;
    if (sig == 0.0) throw std::invalid_argument("zero signal energy");
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(sig / err);
}

double prediction_gain_per_frame_db(std::span<const double> original,
                                    std::span<const double> errors, std::size_t frame_len) {
    if (frame_len < 1) throw std::invalid_argument("frame_len must be positive");
    if (original.size() != errors.size()) throw std::invalid_argument("length mismatch");
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t start = 0; start + frame_len <= original.size(); start += frame_len) {
        double sig = 0.0, err = 0.0;
        for (std::size_t i = start; i < start + frame_len; ++i) {
            sig += original[i] * original[i];
            err += errors[i] * errors[i];
        }
        if (sig == 0.0 || err == 0.0) continue;
        sum += 10.0 * std::log10(sig / err);
        ++used;
    }
    if (used == 0) throw std::invalid_argument("no usable frames");
    return sum / static_cast<double>(used);
}

double overall_bitrate_bps(const CodecConfig& config_in) {
    const CodecConfig config = validate_config(config_in);
    const double rate = static_cast<double>(config.sample_rate_hz);
    double bps = static_cast<double>(config.nq) * rate;
    if (config.scheme == Scheme::ForwardNl)
        bps += static_cast<double>(allocation_bits_per_frame(config.allocation)) * rate /
               static_cast<double>(config.frame_len);
    return bps;
}

} // namespace adpcm
