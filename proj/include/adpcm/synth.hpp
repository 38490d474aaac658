#pragma once

#include <cstdint>

#include "adpcm/signal.hpp"

namespace adpcm {

// Deterministic speech-like test signal: alternating voiced stretches
// (impulse-train excitation through drifting formant resonators), fricative
// noise bursts, and near-silent gaps, peak-normalized to 0.5. Good enough to
// exercise prediction and adaptation the way real speech does when no corpus
// is at hand; it is not a vocoder.
PcmSignal synth_speech(double seconds, std::uint64_t seed, int sample_rate_hz = 8000);

} // namespace adpcm
