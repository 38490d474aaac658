#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adpcm/mlp.hpp"

namespace adpcm {

/// Mid-rise residual quantizer with multiplier-driven step adaptation.
/// One multiplier per magnitude level; step stays in [step_min, step_max].
struct AdaptiveResidualQuantizer {
    int bits = 5; // 2..5
    double step = 0.02;
    double step_min = 1e-5;
    double step_max = 1.0;
    std::vector<double> multipliers; // 2^(bits-1) entries

    int levels() const { return 1 << bits; }
    int magnitude_levels() const { return 1 << (bits - 1); }
};

// Step multiplier table for a given residual bit depth. Engineering defaults;
// override via make_residual_quantizer when experimenting.
std::vector<double> default_multipliers(int bits);

AdaptiveResidualQuantizer make_residual_quantizer(int bits, double step = 0.02,
                                                  double step_min = 1e-5, double step_max = 1.0,
                                                  std::vector<double> multipliers = {});

struct RqEncodeResult {
    int code = 0;
    double reconstructed = 0.0;
    AdaptiveResidualQuantizer next;
};

struct RqDecodeResult {
    double reconstructed = 0.0;
    AdaptiveResidualQuantizer next;
};

// code = 2*m for non-negative error, 2*m+1 for negative; m saturates at the
// outermost magnitude level; reconstruction is +/-(m + 0.5)*step.
RqEncodeResult rq_quantize(const AdaptiveResidualQuantizer& q, double error);
RqDecodeResult rq_dequantize(const AdaptiveResidualQuantizer& q, int code);

enum class WeightQuantizerKind : std::uint8_t { Uniform = 0, EqualOccupancy = 1 };

/// Scalar codebook: 2^bits levels separated by 2^bits - 1 thresholds.
struct WeightQuantizer {
    WeightQuantizerKind kind = WeightQuantizerKind::Uniform;
    int bits = 10;
    std::vector<double> thresholds;
    std::vector<double> levels;
    bool tie_adjusted = false; // thresholds were nudged apart around repeated values
};

// Uniform cells over the [clip/2, 1-clip/2] quantile range; out-of-range
// values clip to the extreme levels.
WeightQuantizer design_uniform(const std::vector<double>& sorted_samples, int bits,
                               double clip_fraction);

// Thresholds at the i/2^bits empirical quantiles, levels at per-cell means,
// so every cell carries the same share of the training mass.
WeightQuantizer design_equal_occupancy(const std::vector<double>& sorted_samples, int bits);

int wq_encode(const WeightQuantizer& q, double value);
double wq_decode(const WeightQuantizer& q, int code);

/// Bits per parameter group for the forward scheme's side information.
struct BitAllocation {
    int hidden_weights_bits = 10;
    int hidden_bias_bits = 10;
    int output_weights_bits = 10;
    int output_bias_bits = 10;

    bool operator==(const BitAllocation&) const = default;
    int bits_for(ParamGroupKind kind) const;
};

// 20*hw + 2*hb + 2*ow + 1*ob
int allocation_bits_per_frame(const BitAllocation& a);

/// One scalar codebook per parameter group, fixed group order.
struct WeightQuantizerBank {
    std::array<WeightQuantizer, 4> groups;

    BitAllocation allocation() const;
    std::uint32_t checksum() const;
};

// One designed codebook per group from pooled parameter distributions.
// clip_fraction applies to the Uniform family only.
WeightQuantizerBank design_bank(const std::array<GroupDistribution, 4>& pooled,
                                WeightQuantizerKind kind, const BitAllocation& allocation,
                                double clip_fraction = 0.0);

// Codebook file: magic "NLWQ", version byte, then four records in group
// order, each {kind u8, bits u8, u32 count + thresholds, u32 count + levels},
// all little-endian f64 payloads.
std::vector<std::uint8_t> serialize_codebooks(const WeightQuantizerBank& bank);
WeightQuantizerBank parse_codebooks(std::span<const std::uint8_t> bytes);
void save_codebooks(const WeightQuantizerBank& bank, const std::string& path);
WeightQuantizerBank load_codebooks(const std::string& path);

std::uint32_t fnv1a32(std::span<const std::uint8_t> bytes);

} // namespace adpcm
