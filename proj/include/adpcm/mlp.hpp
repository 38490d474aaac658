#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "adpcm/signal.hpp"

namespace adpcm {

inline constexpr int kMlpInputs = 10;
inline constexpr int kMlpHidden = 2;
inline constexpr int kMlpParamCount = 25; // 20 + 2 weights, 3 biases

/// 10-2-1 perceptron: tanh hidden layer, linear output.
///   y = w2 . tanh(w1 . history + b1) + b2
/// history is newest first, like the linear predictor.
struct MlpPredictor {
    std::array<std::array<double, kMlpInputs>, kMlpHidden> w1{};
    std::array<double, kMlpHidden> b1{};
    std::array<double, kMlpHidden> w2{};
    double b2 = 0.0;

    bool operator==(const MlpPredictor&) const = default;
};

double mlp_forward(const MlpPredictor& net, std::span<const double> history);

// Gradient of 0.5*(mlp_forward(net, history) - target)^2 with respect to
// every parameter, reusing MlpPredictor as the gradient container.
MlpPredictor mlp_gradient(const MlpPredictor& net, std::span<const double> history,
                          double target);

struct TrainConfig {
    int epochs = 100;         // small on purpose; the nets are meant to stay undertrained
    double learn_rate = 1.0;
    double init_scale = 0.3;  // uniform init in [-init_scale, init_scale)
    std::uint64_t seed = 1;
};

// Full-batch gradient descent on (10 preceding samples -> current sample)
// pairs built from the frame. history_seed holds the 10 samples preceding
// the frame in chronological order (zero-padded by the caller at stream
// start). Deterministic given (config, data).
MlpPredictor train_on_frame(const TrainConfig& config, std::span<const double> frame,
                            std::span<const double> history_seed);

// Same, recording the full-batch loss after each epoch.
MlpPredictor train_on_frame_traced(const TrainConfig& config, std::span<const double> frame,
                                   std::span<const double> history_seed,
                                   std::vector<double>* epoch_loss);

enum class ParamGroupKind : std::uint8_t {
    HiddenWeights = 0, // w1, row-major, 20 values
    HiddenBias = 1,    // b1, 2 values
    OutputWeights = 2, // w2, 2 values
    OutputBias = 3,    // b2, 1 value
};

inline constexpr std::array<std::size_t, 4> kGroupSizes = {20, 2, 2, 1};

const char* group_name(ParamGroupKind kind);

struct ParamGroup {
    ParamGroupKind kind;
    std::vector<double> values;
};

// Flattening order is fixed: w1 neuron 0 inputs 1..10, then neuron 1, then
// b1, w2, b2. merge(split(net)) == net exactly.
std::array<ParamGroup, 4> split_groups(const MlpPredictor& net);
MlpPredictor merge_groups(const std::array<ParamGroup, 4>& groups);

/// Pooled per-group parameter statistics over a set of trained nets.
struct GroupDistribution {
    ParamGroupKind kind;
    std::vector<double> sorted_values;
    std::vector<double> bin_edges;       // bins+1 edges
    std::vector<std::size_t> bin_counts; // bins entries
};

std::array<GroupDistribution, 4> collect_histograms(const std::vector<MlpPredictor>& nets,
                                                    int bins = 50);

// Forward-trains one net per frame of the corpus (seed mixed with the frame
// index, matching the forward codec) and returns them in frame order. This
// is the pipeline that feeds weight-quantizer design.
std::vector<MlpPredictor> train_corpus_nets(const TrainConfig& config, const PcmSignal& corpus,
                                            std::size_t frame_len);

} // namespace adpcm
