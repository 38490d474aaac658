#include "adpcm/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace adpcm {

namespace {

void check_rq(const AdaptiveResidualQuantizer& q) {
    if (q.bits < 2 || q.bits > 5) throw std::invalid_argument("residual quantizer needs 2..5 bits");
    if (!(q.step_min > 0.0) || !(q.step_min <= q.step_max))
        throw std::invalid_argument("bad step bounds");
    if (q.step < q.step_min || q.step > q.step_max)
        throw std::invalid_argument("step outside [step_min, step_max]");
    if (q.multipliers.size() != static_cast<std::size_t>(q.magnitude_levels()))
        throw std::invalid_argument("multiplier table size must be 2^(bits-1)");
    bool any_expand = false, any_shrink = false;
    for (double m : q.multipliers) {
        if (!(m > 0.0)) throw std::invalid_argument("multipliers must be positive");
        any_expand |= m > 1.0;
        any_shrink |= m < 1.0;
    }
    if (!any_expand || !any_shrink)
        throw std::invalid_argument("multiplier table needs at least one entry <1 and one >1");
}

double adapt_step(const AdaptiveResidualQuantizer& q, int magnitude) {
    const double next = q.step * q.multipliers[static_cast<std::size_t>(magnitude)];
    return std::clamp(next, q.step_min, q.step_max);
}

void check_sorted(const std::vector<double>& samples) {
    if (!std::is_sorted(samples.begin(), samples.end()))
        throw std::invalid_argument("design input must be sorted");
}

void check_interleaving(const WeightQuantizer& q) {
    for (std::size_t i = 0; i + 1 < q.levels.size(); ++i) {
        if (!(q.levels[i] < q.levels[i + 1]))
            throw std::runtime_error("designed levels not strictly increasing");
        if (!(q.levels[i] <= q.thresholds[i] && q.thresholds[i] <= q.levels[i + 1]))
            throw std::runtime_error("levels do not interleave thresholds");
    }
    for (std::size_t i = 0; i + 1 < q.thresholds.size(); ++i)
        if (!(q.thresholds[i] < q.thresholds[i + 1]))
            throw std::runtime_error("designed thresholds not strictly increasing");
}

} // namespace

std::vector<double> default_multipliers(int bits) {
    switch (bits) {
        case 2: return {0.8, 1.6};
        case 3: return {0.9, 0.9, 1.25, 1.75};
        case 4: return {0.9, 0.9, 0.9, 0.9, 1.2, 1.6, 2.0, 2.4};
        case 5:
            // Inner decay gentler than at 4 bits: a 0.9 shrink per quiet
            // sample leaves the step unguarded against the next pitch pulse,
            // and at 5 bits those overload spikes dominate the error budget.
            return {0.93, 0.93, 0.93, 0.93, 0.93, 0.93, 0.93, 0.93,
                    1.2, 1.2, 1.6, 1.6, 2.0, 2.0, 2.4, 2.4};
        default: throw std::invalid_argument("residual quantizer needs 2..5 bits");
    }
}

AdaptiveResidualQuantizer make_residual_quantizer(int bits, double step, double step_min,
                                                  double step_max,
                                                  std::vector<double> multipliers) {
    AdaptiveResidualQuantizer q;
    q.bits = bits;
    q.step = step;
    q.step_min = step_min;
    q.step_max = step_max;
    q.multipliers = multipliers.empty() ? default_multipliers(bits) : std::move(multipliers);
    check_rq(q);
    return q;
}

RqEncodeResult rq_quantize(const AdaptiveResidualQuantizer& q, double error) {
    check_rq(q);
    const int max_mag = q.magnitude_levels() - 1;
    const bool negative = error < 0.0; // sign of zero treated as positive
    const double ratio = std::floor(std::abs(error) / q.step);
    const int m = ratio >= static_cast<double>(max_mag) ? max_mag : static_cast<int>(ratio);

    RqEncodeResult out;
    out.code = 2 * m + (negative ? 1 : 0);
    out.reconstructed = (negative ? -1.0 : 1.0) * (m + 0.5) * q.step;
    out.next = q;
    out.next.step = adapt_step(q, m);
    return out;
}

RqDecodeResult rq_dequantize(const AdaptiveResidualQuantizer& q, int code) {
    check_rq(q);
    if (code < 0 || code >= q.levels()) throw std::out_of_range("residual code out of range");
    const int m = code >> 1;
    const bool negative = (code & 1) != 0;

    RqDecodeResult out;
    out.reconstructed = (negative ? -1.0 : 1.0) * (m + 0.5) * q.step;
    out.next = q;
    out.next.step = adapt_step(q, m);
    return out;
}

WeightQuantizer design_uniform(const std::vector<double>& sorted_samples, int bits,
                               double clip_fraction) {
    check_sorted(sorted_samples);
    if (bits < 1 || bits > 16) throw std::invalid_argument("weight quantizer needs 1..16 bits");
    if (clip_fraction < 0.0 || clip_fraction >= 1.0)
        throw std::invalid_argument("clip_fraction must be in [0, 1)");
    if (sorted_samples.size() < 2 || sorted_samples.front() == sorted_samples.back())
        throw std::invalid_argument("need at least 2 distinct sample values");

    // Interpolated order-statistic quantiles of the clipped range.
    const std::size_t n = sorted_samples.size();
    auto quantile = [&](double f) {
        const double pos = f * static_cast<double>(n - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= n) return sorted_samples.back();
        const double frac = pos - static_cast<double>(i);
        return sorted_samples[i] * (1.0 - frac) + sorted_samples[i + 1] * frac;
    };
    const double lo = quantile(clip_fraction / 2.0);
    const double hi = quantile(1.0 - clip_fraction / 2.0);
    if (!(hi > lo)) throw std::invalid_argument("degenerate range after clipping");

    WeightQuantizer q;
    q.kind = WeightQuantizerKind::Uniform;
    q.bits = bits;
    const int cells = 1 << bits;
    const double cell = (hi - lo) / cells;
    for (int i = 1; i < cells; ++i) q.thresholds.push_back(lo + cell * i);
    for (int i = 0; i < cells; ++i) q.levels.push_back(lo + cell * (i + 0.5));
    check_interleaving(q);
    return q;
}

WeightQuantizer design_equal_occupancy(const std::vector<double>& sorted_samples, int bits) {
    check_sorted(sorted_samples);
    if (bits < 1 || bits > 16) throw std::invalid_argument("weight quantizer needs 1..16 bits");
    const std::size_t cells = std::size_t{1} << bits;

    std::size_t distinct = sorted_samples.empty() ? 0 : 1;
    for (std::size_t i = 1; i < sorted_samples.size(); ++i)
        if (sorted_samples[i] != sorted_samples[i - 1]) ++distinct;
    if (distinct < cells)
        throw std::invalid_argument("too few distinct values for equal-occupancy design");

    WeightQuantizer q;
    q.kind = WeightQuantizerKind::EqualOccupancy;
    q.bits = bits;

    // Cell boundaries at sorted index i*N/K: exactly i*N/K samples fall below
    // threshold i, so cell counts differ by at most one. A boundary landing
    // inside a run of repeated values is snapped to the run's edge (downward
    // when possible) so no tied value straddles a threshold; occupancy then
    // holds only up to ties, which is the contract.
    const std::size_t n = sorted_samples.size();
    std::vector<std::size_t> boundaries(cells + 1);
    boundaries[0] = 0;
    boundaries[cells] = n;
    for (std::size_t i = 1; i < cells; ++i) {
        std::size_t b = i * n / cells;
        if (sorted_samples[b - 1] == sorted_samples[b]) {
            std::size_t lo = b, hi = b;
            while (lo > 0 && sorted_samples[lo - 1] == sorted_samples[b]) --lo;
            while (hi < n && sorted_samples[hi] == sorted_samples[b]) ++hi;
            b = (lo > boundaries[i - 1]) ? lo : hi;
            q.tie_adjusted = true;
        }
        if (b <= boundaries[i - 1]) b = boundaries[i - 1] + 1;
        if (b > n - 1) b = n - 1;
        boundaries[i] = b;
    }

    q.thresholds.resize(cells - 1);
    for (std::size_t i = 1; i < cells; ++i) {
        const double below = sorted_samples[boundaries[i] - 1];
        const double above = sorted_samples[boundaries[i]];
        double t = 0.5 * (below + above);
        if (!(t > below)) { // forced split of a tied run; keep thresholds strictly ordered
            t = std::nextafter(above, std::numeric_limits<double>::infinity());
            q.tie_adjusted = true;
        }
        q.thresholds[i - 1] = t;
    }
    for (std::size_t i = 1; i < q.thresholds.size(); ++i)
        while (q.thresholds[i] <= q.thresholds[i - 1]) {
            q.thresholds[i] = std::nextafter(q.thresholds[i],
                                             std::numeric_limits<double>::infinity());
            q.tie_adjusted = true;
        }

    q.levels.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        double sum = 0.0;
        const std::size_t count = boundaries[c + 1] - boundaries[c];
        for (std::size_t i = boundaries[c]; i < boundaries[c + 1]; ++i) sum += sorted_samples[i];
        q.levels[c] = sum / static_cast<double>(count);
    }
    if (!q.tie_adjusted) check_interleaving(q);
    return q;
}

int wq_encode(const WeightQuantizer& q, double value) {
    const auto it = std::upper_bound(q.thresholds.begin(), q.thresholds.end(), value);
    return static_cast<int>(it - q.thresholds.begin());
}

double wq_decode(const WeightQuantizer& q, int code) {
    if (code < 0 || code >= static_cast<int>(q.levels.size()))
        throw std::out_of_range("weight code out of range");
    return q.levels[static_cast<std::size_t>(code)];
}

int BitAllocation::bits_for(ParamGroupKind kind) const {
    switch (kind) {
        case ParamGroupKind::HiddenWeights: return hidden_weights_bits;
        case ParamGroupKind::HiddenBias: return hidden_bias_bits;
        case ParamGroupKind::OutputWeights: return output_weights_bits;
        case ParamGroupKind::OutputBias: return output_bias_bits;
    }
    return 0;
}

int allocation_bits_per_frame(const BitAllocation& a) {
    return 20 * a.hidden_weights_bits + 2 * a.hidden_bias_bits + 2 * a.output_weights_bits +
           1 * a.output_bias_bits;
}

BitAllocation WeightQuantizerBank::allocation() const {
    return {groups[0].bits, groups[1].bits, groups[2].bits, groups[3].bits};
}

WeightQuantizerBank design_bank(const std::array<GroupDistribution, 4>& pooled,
                                WeightQuantizerKind kind, const BitAllocation& allocation,
                                double clip_fraction) {
    WeightQuantizerBank bank;
    for (std::size_t g = 0; g < 4; ++g) {
        const int bits = allocation.bits_for(static_cast<ParamGroupKind>(g));
        try {
            bank.groups[g] = kind == WeightQuantizerKind::Uniform
                                 ? design_uniform(pooled[g].sorted_values, bits, clip_fraction)
                                 : design_equal_occupancy(pooled[g].sorted_values, bits);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(
                std::string(group_name(static_cast<ParamGroupKind>(g))) + ": " + e.what());
        }
    }
    return bank;
}

std::uint32_t WeightQuantizerBank::checksum() const {
    const std::vector<std::uint8_t> bytes = serialize_codebooks(*this);
    return fnv1a32(bytes);
}

namespace {

constexpr char kCodebookMagic[4] = {'N', 'L', 'W', 'Q'};
constexpr std::uint8_t kCodebookVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

struct ByteCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    std::uint8_t u8() {
        if (pos + 1 > bytes.size()) throw std::runtime_error("truncated codebook data");
        return bytes[pos++];
    }
    std::uint32_t u32() {
        if (pos + 4 > bytes.size()) throw std::runtime_error("truncated codebook data");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() {
        if (pos + 8 > bytes.size()) throw std::runtime_error("truncated codebook data");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        double d;
        std::memcpy(&d, &v, sizeof d);
        return d;
    }
};

} // namespace

std::uint32_t fnv1a32(std::span<const std::uint8_t> bytes) {
    std::uint32_t h = 2166136261u;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 16777619u;
    }
    return h;
}

std::vector<std::uint8_t> serialize_codebooks(const WeightQuantizerBank& bank) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kCodebookMagic, kCodebookMagic + 4);
    out.push_back(kCodebookVersion);
    for (const WeightQuantizer& q : bank.groups) {
        out.push_back(static_cast<std::uint8_t>(q.kind));
        out.push_back(static_cast<std::uint8_t>(q.bits));
        put_u32(out, static_cast<std::uint32_t>(q.thresholds.size()));
        for (double t : q.thresholds) put_f64(out, t);
        put_u32(out, static_cast<std::uint32_t>(q.levels.size()));
        for (double l : q.levels) put_f64(out, l);
    }
    return out;
}

WeightQuantizerBank parse_codebooks(std::span<const std::uint8_t> bytes) {
    ByteCursor cur{bytes};
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kCodebookMagic, 4) != 0)
        throw std::runtime_error("not a codebook file (bad magic)");
    cur.pos = 4;
    if (cur.u8() != kCodebookVersion) throw std::runtime_error("unsupported codebook version");

    WeightQuantizerBank bank;
    for (WeightQuantizer& q : bank.groups) {
        const std::uint8_t kind = cur.u8();
        if (kind > 1) throw std::runtime_error("bad quantizer kind in codebook file");
        q.kind = static_cast<WeightQuantizerKind>(kind);
        q.bits = cur.u8();
        const std::size_t expected = std::size_t{1} << q.bits;
        q.thresholds.resize(cur.u32());
        for (double& t : q.thresholds) t = cur.f64();
        q.levels.resize(cur.u32());
        for (double& l : q.levels) l = cur.f64();
        if (q.thresholds.size() != expected - 1 || q.levels.size() != expected)
            throw std::runtime_error("codebook record sizes inconsistent with bit depth");
    }
    if (cur.pos != bytes.size()) throw std::runtime_error("trailing bytes in codebook file");
    return bank;
}

void save_codebooks(const WeightQuantizerBank& bank, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_codebooks(bank);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write codebook file: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("codebook write failed: " + path);
}

WeightQuantizerBank load_codebooks(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open codebook file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return parse_codebooks(bytes);
}

} // namespace adpcm
