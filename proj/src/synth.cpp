#include "adpcm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "adpcm/rng.hpp"

namespace adpcm {

namespace {

// Two-pole resonator with per-sample retuning.
struct Resonator {
    double y1 = 0.0, y2 = 0.0;

    double step(double x, double freq_hz, double bw_hz, double fs) {
        const double r = std::exp(-std::numbers::pi * bw_hz / fs);
        const double c = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq_hz / fs);
        const double y = x * (1.0 - r) + c * y1 - r * r * y2;
        y2 = y1;
        y1 = y;
        return y;
    }
};

// One-pole lowpass, used to round the excitation pulses off the way a
// glottal pulse is rounded; raw unit impulses leave residual spikes no
// sample predictor can touch.
struct OnePole {
    double y = 0.0;
    double step(double x, double a) { return y = a * y + (1.0 - a) * x; }
};

double lerp(double a, double b, double t) { return a + (b - a) * t; }

void append_segment(std::vector<double>& out, std::vector<double> seg, double target_amp,
                    double fs) {
    double peak = 0.0;
    for (double v : seg) peak = std::max(peak, std::abs(v));
    const double gain = peak > 0.0 ? target_amp / peak : 0.0;
    const std::size_t ramp = std::min<std::size_t>(seg.size() / 2,
                                                   static_cast<std::size_t>(0.008 * fs));
    for (std::size_t i = 0; i < seg.size(); ++i) {
        double env = 1.0;
        if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
        const std::size_t from_end = seg.size() - 1 - i;
        if (from_end < ramp)
            env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * from_end / ramp));
        out.push_back(seg[i] * gain * env);
    }
}

} // namespace

PcmSignal synth_speech(double seconds, std::uint64_t seed, int sample_rate_hz) {
    const double fs = static_cast<double>(sample_rate_hz);
    const std::size_t total = static_cast<std::size_t>(seconds * fs);
    SplitMix64 rng(seed);

    std::vector<double> out;
    out.reserve(total);

    while (out.size() < total) {
        const double what = rng.next_unit();
        if (what < 0.6) {
            // Voiced: rounded pulse train through three drifting formant
            // resonators plus a weak aspiration floor.
            const std::size_t len = static_cast<std::size_t>(lerp(0.08, 0.22, rng.next_unit()) * fs);
            const double f0_a = lerp(140.0, 290.0, rng.next_unit());
            const double f0_b = f0_a * lerp(0.8, 1.25, rng.next_unit());
            double f_a[3], f_b[3], bw[3];
            const double ranges[3][2] = {{250.0, 850.0}, {900.0, 2000.0}, {2100.0, 3200.0}};
            for (int k = 0; k < 3; ++k) {
                // Vowel-like: formants hold near an anchor and glide a little,
                // rather than sweeping the whole band.
                f_a[k] = lerp(ranges[k][0], ranges[k][1], rng.next_unit());
                f_b[k] = f_a[k] * lerp(0.85, 1.15, rng.next_unit());
                bw[k] = lerp(40.0, 120.0, rng.next_unit());
            }
            double wobble_rate[3], wobble_phase[3];
            for (int k = 0; k < 3; ++k) {
                // Articulator-speed wiggle so frames are never quite stationary.
                wobble_rate[k] = lerp(8.0, 25.0, rng.next_unit());
                wobble_phase[k] = 2.0 * std::numbers::pi * rng.next_unit();
            }
            Resonator res[3];
            OnePole glottal[2];
            std::vector<double> seg(len);
            double phase = 1.0; // fire a pulse at segment start
            double period_scale = 1.0;
            for (std::size_t i = 0; i < len; ++i) {
                const double t = static_cast<double>(i) / static_cast<double>(len);
                phase += lerp(f0_a, f0_b, t) / fs / period_scale;
                double v = 0.0;
                if (phase >= 1.0) {
                    phase -= 1.0;
                    v = 1.0 + 0.4 * rng.next_symmetric();
                    period_scale = 1.0 + 0.08 * rng.next_symmetric();
                }
                v = glottal[1].step(glottal[0].step(v, 0.75), 0.75);
                v += 0.012 * rng.next_symmetric();
                for (int k = 0; k < 3; ++k) {
                    const double f =
                        lerp(f_a[k], f_b[k], t) *
                        (1.0 + 0.03 * std::sin(2.0 * std::numbers::pi * wobble_rate[k] *
                                                   static_cast<double>(i) / fs +
                                               wobble_phase[k]));
                    v = res[k].step(v, f, bw[k], fs);
                }
                seg[i] = v;
            }
            append_segment(out, std::move(seg), lerp(0.6, 1.0, rng.next_unit()), fs);
        } else if (what < 0.85) {
            // Unvoiced: shaped noise burst.
            const std::size_t len = static_cast<std::size_t>(lerp(0.04, 0.12, rng.next_unit()) * fs);
            const double f = lerp(1800.0, 3400.0, rng.next_unit());
            const double b = lerp(400.0, 1000.0, rng.next_unit());
            Resonator res;
            std::vector<double> seg(len);
            for (std::size_t i = 0; i < len; ++i) seg[i] = res.step(rng.next_symmetric(), f, b, fs);
            append_segment(out, std::move(seg), lerp(0.1, 0.25, rng.next_unit()), fs);
        } else {
            // Silent pause; segment-energy metrics skip these.
            const std::size_t len = static_cast<std::size_t>(lerp(0.02, 0.08, rng.next_unit()) * fs);
            out.insert(out.end(), len, 0.0);
        }
    }
    out.resize(total);

    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double& v : out) v *= 0.5 / peak;

    PcmSignal signal;
    signal.sample_rate_hz = sample_rate_hz;
    signal.samples = std::move(out);
    return signal;
}

} // namespace adpcm
