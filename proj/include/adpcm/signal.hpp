#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace adpcm {

/// Mono PCM signal with samples normalized to [-1, 1).
struct PcmSignal {
    std::vector<double> samples;
    int sample_rate_hz = 8000;
};

/// Half-open window [start, start + length) into a PcmSignal.
struct FrameView {
    std::size_t start = 0;
    std::size_t length = 0;
};

enum class PcmFormat { Wav16Mono, Raw16Le };

// Loads a 16-bit PCM file and scales samples by 1/32768. Wav input must be
// mono 16-bit; its fmt-chunk rate wins over `sample_rate_hz`, which is only
// used for headerless raw input.
PcmSignal load_pcm(const std::string& path, PcmFormat format, int sample_rate_hz = 8000);

// Writes samples as int16 (round to nearest, clamped to [-32768, 32767]).
void save_pcm(const PcmSignal& signal, const std::string& path, PcmFormat format);

// Concatenation in order; all inputs must share a sample rate.
PcmSignal concat_corpus(const std::vector<PcmSignal>& signals);

// Non-overlapping contiguous frames; the final partial frame keeps its true length.
std::vector<FrameView> frames(const PcmSignal& signal, std::size_t frame_len);

// Throws if samples contain NaN/Inf or the rate is not positive.
void validate_signal(const PcmSignal& signal);

} // namespace adpcm
