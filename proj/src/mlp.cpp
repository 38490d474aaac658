#include "adpcm/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adpcm/rng.hpp"

namespace adpcm {

namespace {

void check_history(std::span<const double> history) {
    if (history.size() != kMlpInputs)
        throw std::invalid_argument("mlp history must hold exactly 10 samples");
}

struct ForwardTrace {
    std::array<double, kMlpHidden> hidden;
    double output;
};

ForwardTrace forward_trace(const MlpPredictor& net, std::span<const double> history) {
    ForwardTrace t;
    double out = net.b2;
    for (int j = 0; j < kMlpHidden; ++j) {
        double z = net.b1[j];
        for (int i = 0; i < kMlpInputs; ++i) z += net.w1[j][i] * history[i];
        t.hidden[j] = std::tanh(z);
        out += net.w2[j] * t.hidden[j];
    }
    t.output = out;
    return t;
}

void accumulate_gradient(const MlpPredictor& net, std::span<const double> history,
                         double target, MlpPredictor& grad) {
    const ForwardTrace t = forward_trace(net, history);
    const double d_out = t.output - target;
    grad.b2 += d_out;
    for (int j = 0; j < kMlpHidden; ++j) {
        grad.w2[j] += d_out * t.hidden[j];
        const double dz = d_out * net.w2[j] * (1.0 - t.hidden[j] * t.hidden[j]);
        grad.b1[j] += dz;
        for (int i = 0; i < kMlpInputs; ++i) grad.w1[j][i] += dz * history[i];
    }
}

void apply_step(MlpPredictor& net, const MlpPredictor& grad, double scale) {
    for (int j = 0; j < kMlpHidden; ++j) {
        for (int i = 0; i < kMlpInputs; ++i) net.w1[j][i] -= scale * grad.w1[j][i];
        net.b1[j] -= scale * grad.b1[j];
        net.w2[j] -= scale * grad.w2[j];
    }
    net.b2 -= scale * grad.b2;
}

MlpPredictor random_init(double init_scale, std::uint64_t seed) {
    SplitMix64 rng(seed);
    MlpPredictor net;
    for (int j = 0; j < kMlpHidden; ++j)
        for (int i = 0; i < kMlpInputs; ++i) net.w1[j][i] = rng.next_symmetric() * init_scale;
    for (int j = 0; j < kMlpHidden; ++j) net.b1[j] = rng.next_symmetric() * init_scale;
    for (int j = 0; j < kMlpHidden; ++j) net.w2[j] = rng.next_symmetric() * init_scale;
    net.b2 = rng.next_symmetric() * init_scale;
    return net;
}

} // namespace

double mlp_forward(const MlpPredictor& net, std::span<const double> history) {
    check_history(history);
    return forward_trace(net, history).output;
}

MlpPredictor mlp_gradient(const MlpPredictor& net, std::span<const double> history,
                          double target) {
    check_history(history);
    MlpPredictor grad{};
    accumulate_gradient(net, history, target, grad);
    return grad;
}

MlpPredictor train_on_frame_traced(const TrainConfig& config, std::span<const double> frame,
                                   std::span<const double> history_seed,
                                   std::vector<double>* epoch_loss) {
    if (frame.empty()) throw std::invalid_argument("cannot train on an empty frame");
    if (history_seed.size() != kMlpInputs)
        throw std::invalid_argument("history seed must hold exactly 10 samples");
    if (config.epochs < 0 || config.learn_rate <= 0.0 || config.init_scale <= 0.0)
        throw std::invalid_argument("bad training configuration");

    // Training pair t: input = the 10 samples preceding frame[t] (newest
    // first, crossing into history_seed near the frame start), target = frame[t].
    const std::size_t n = frame.size();
    auto sample_at = [&](std::ptrdiff_t idx) { // idx relative to frame start
        if (idx >= 0) return frame[static_cast<std::size_t>(idx)];
        return history_seed[static_cast<std::size_t>(kMlpInputs + idx)];
    };
    std::vector<std::array<double, kMlpInputs>> inputs(n);
    for (std::size_t t = 0; t < n; ++t)
        for (int k = 0; k < kMlpInputs; ++k)
            inputs[t][k] = sample_at(static_cast<std::ptrdiff_t>(t) - 1 - k);

    MlpPredictor net = random_init(config.init_scale, config.seed);
    if (epoch_loss) epoch_loss->clear();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        MlpPredictor grad{};
        double loss = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            accumulate_gradient(net, inputs[t], frame[t], grad);
            if (epoch_loss) {
                const double d = forward_trace(net, inputs[t]).output - frame[t];
                loss += 0.5 * d * d;
            }
        }
        apply_step(net, grad, config.learn_rate / static_cast<double>(n));
        if (epoch_loss) epoch_loss->push_back(loss / static_cast<double>(n));
    }
    if (epoch_loss && config.epochs > 0) {
        // Close the trace with the post-update loss so monotonicity is observable.
        double loss = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double d = forward_trace(net, inputs[t]).output - frame[t];
            loss += 0.5 * d * d;
        }
        epoch_loss->push_back(loss / static_cast<double>(n));
    }
    return net;
}

MlpPredictor train_on_frame(const TrainConfig& config, std::span<const double> frame,
                            std::span<const double> history_seed) {
    return train_on_frame_traced(config, frame, history_seed, nullptr);
}

const char* group_name(ParamGroupKind kind) {
    switch (kind) {
        case ParamGroupKind::HiddenWeights: return "hidden_weights";
        case ParamGroupKind::HiddenBias: return "hidden_bias";
        case ParamGroupKind::OutputWeights: return "output_weights";
        case ParamGroupKind::OutputBias: return "output_bias";
    }
    return "?";
}

std::array<ParamGroup, 4> split_groups(const MlpPredictor& net) {
    std::array<ParamGroup, 4> out;
    out[0].kind = ParamGroupKind::HiddenWeights;
    for (int j = 0; j < kMlpHidden; ++j)
        for (int i = 0; i < kMlpInputs; ++i) out[0].values.push_back(net.w1[j][i]);
    out[1] = {ParamGroupKind::HiddenBias, {net.b1[0], net.b1[1]}};
    out[2] = {ParamGroupKind::OutputWeights, {net.w2[0], net.w2[1]}};
    out[3] = {ParamGroupKind::OutputBias, {net.b2}};
    return out;
}

MlpPredictor merge_groups(const std::array<ParamGroup, 4>& groups) {
    for (std::size_t g = 0; g < 4; ++g) {
        if (groups[g].kind != static_cast<ParamGroupKind>(g))
            throw std::invalid_argument("parameter groups out of order");
        if (groups[g].values.size() != kGroupSizes[g])
            throw std::invalid_argument("parameter group has wrong size");
    }
    MlpPredictor net;
    for (int j = 0; j < kMlpHidden; ++j)
        for (int i = 0; i < kMlpInputs; ++i)
            net.w1[j][i] = groups[0].values[static_cast<std::size_t>(j) * kMlpInputs + i];
    net.b1 = {groups[1].values[0], groups[1].values[1]};
    net.w2 = {groups[2].values[0], groups[2].values[1]};
    net.b2 = groups[3].values[0];
    return net;
}

std::array<GroupDistribution, 4> collect_histograms(const std::vector<MlpPredictor>& nets,
                                                    int bins) {
    if (nets.empty()) throw std::invalid_argument("empty predictor corpus");
    if (bins < 1) throw std::invalid_argument("bin count must be positive");

    std::array<GroupDistribution, 4> out;
    for (std::size_t g = 0; g < 4; ++g) {
        GroupDistribution& dist = out[g];
        dist.kind = static_cast<ParamGroupKind>(g);
        dist.sorted_values.reserve(nets.size() * kGroupSizes[g]);
    }
    for (const MlpPredictor& net : nets) {
        const std::array<ParamGroup, 4> groups = split_groups(net);
        for (std::size_t g = 0; g < 4; ++g)
            out[g].sorted_values.insert(out[g].sorted_values.end(), groups[g].values.begin(),
                                        groups[g].values.end());
    }
    for (GroupDistribution& dist : out) {
        std::sort(dist.sorted_values.begin(), dist.sorted_values.end());
        const double lo = dist.sorted_values.front();
        const double hi = dist.sorted_values.back();
        const double width = (hi > lo) ? (hi - lo) : 1.0; // point mass: one unit-wide bin span
        dist.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
        dist.bin_counts.assign(static_cast<std::size_t>(bins), 0);
        for (int b = 0; b <= bins; ++b)
            dist.bin_edges[static_cast<std::size_t>(b)] = lo + width * b / bins;
        for (double v : dist.sorted_values) {
            auto b = static_cast<std::size_t>((v - lo) / width * bins);
            if (b >= dist.bin_counts.size()) b = dist.bin_counts.size() - 1;
            ++dist.bin_counts[b];
        }
    }
    return out;
}

std::vector<MlpPredictor> train_corpus_nets(const TrainConfig& config, const PcmSignal& corpus,
                                            std::size_t frame_len) {
    const std::vector<FrameView> views = frames(corpus, frame_len);
    std::vector<MlpPredictor> nets;
    nets.reserve(views.size());
    const std::vector<double>& x = corpus.samples;
    for (std::size_t f = 0; f < views.size(); ++f) {
        std::array<double, kMlpInputs> seed{};
        for (int k = 0; k < kMlpInputs; ++k) {
            const std::ptrdiff_t idx =
                static_cast<std::ptrdiff_t>(views[f].start) - kMlpInputs + k;
            seed[static_cast<std::size_t>(k)] = idx >= 0 ? x[static_cast<std::size_t>(idx)] : 0.0;
        }
        TrainConfig per_frame = config;
        per_frame.seed = mix_seed(config.seed, f);
        nets.push_back(
            train_on_frame(per_frame, {x.data() + views[f].start, views[f].length}, seed));
    }
    return nets;
}

} // namespace adpcm
