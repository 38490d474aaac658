#include "adpcm/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "adpcm/bitio.hpp"
#include "adpcm/lpc.hpp"
#include "adpcm/rng.hpp"

namespace adpcm {

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::BackwardLms: return "backward-lms";
        case Scheme::BackwardLd: return "backward-ld";
        case Scheme::BackwardNl: return "backward-nl";
        case Scheme::ForwardNl: return "forward-nl";
    }
    return "?";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::BackwardLms, Scheme::BackwardLd, Scheme::BackwardNl,
                     Scheme::ForwardNl})
        if (name == scheme_name(s)) return s;
    return std::nullopt;
}

CodecConfig validate_config(CodecConfig config) {
    if (config.nq < 2 || config.nq > 5)
        throw std::invalid_argument("nq must be in [2, 5]");
    if (config.frame_len < 1 || config.frame_len > 65535)
        throw std::invalid_argument("frame_len must be in [1, 65535]");
    if (config.sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
    if (config.scheme == Scheme::BackwardLms || config.scheme == Scheme::BackwardLd) {
        if (config.order < 1 || config.order > 255)
            throw std::invalid_argument("order must be in [1, 255]");
    }
    if (config.scheme == Scheme::BackwardLd) {
        if (!(config.lambda > 0.0) || config.lambda > 1.0)
            throw std::invalid_argument("lambda must be in (0, 1]");
        // Canonicalize to the wire precision so both codec ends use one value.
        config.lambda = std::round(config.lambda * 10000.0) / 10000.0;
        if (config.lambda <= 0.0) throw std::invalid_argument("lambda too small for wire format");
    } else {
        config.lambda = 1.0;
    }
    if (config.scheme == Scheme::BackwardNl) {
        if (config.nl_update_period < 1 || config.nl_update_period > 65535)
            throw std::invalid_argument("nl_update_period must be in [1, 65535]");
    }
    if (config.scheme == Scheme::ForwardNl) {
        for (ParamGroupKind kind :
             {ParamGroupKind::HiddenWeights, ParamGroupKind::HiddenBias,
              ParamGroupKind::OutputWeights, ParamGroupKind::OutputBias}) {
            const int b = config.allocation.bits_for(kind);
            if (b < 1 || b > 10)
                throw std::invalid_argument("allocation bits must be in [1, 10]");
        }
    }
    if (config.scheme == Scheme::BackwardNl || config.scheme == Scheme::ForwardNl) {
        if (config.train.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
        if (!(config.train.learn_rate > 0.0) || !(config.train.init_scale > 0.0))
            throw std::invalid_argument("bad training configuration");
    }
    if (!(config.rq.step_min > 0.0) || !(config.rq.step_min <= config.rq.initial_step) ||
        !(config.rq.initial_step <= config.rq.step_max))
        throw std::invalid_argument("need 0 < step_min <= initial_step <= step_max");
    return config;
}

std::size_t Bitstream::frame_count() const {
    return (sample_count + frame_len - 1) / frame_len;
}

std::size_t Bitstream::param_bits_per_frame() const {
    if (scheme != Scheme::ForwardNl) return 0;
    return static_cast<std::size_t>(allocation_bits_per_frame(allocation));
}

std::size_t Bitstream::payload_bit_count() const {
    return frame_count() * param_bits_per_frame() + sample_count * static_cast<std::size_t>(nq);
}

namespace {

constexpr char kStreamMagic[4] = {'A', 'D', 'P', 'X'};
constexpr std::uint8_t kStreamVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

} // namespace

std::vector<std::uint8_t> Bitstream::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(kBitstreamHeaderSize + payload.size());
    out.insert(out.end(), kStreamMagic, kStreamMagic + 4);
    out.push_back(kStreamVersion);
    out.push_back(static_cast<std::uint8_t>(scheme));
    out.push_back(static_cast<std::uint8_t>(nq));
    put_u16(out, static_cast<std::uint16_t>(frame_len));
    out.push_back(static_cast<std::uint8_t>(order));
    put_u16(out, static_cast<std::uint16_t>(std::lround(lambda * 10000.0)));
    put_u16(out, static_cast<std::uint16_t>(nl_update_period));
    out.push_back(static_cast<std::uint8_t>(allocation.hidden_weights_bits));
    out.push_back(static_cast<std::uint8_t>(allocation.hidden_bias_bits));
    out.push_back(static_cast<std::uint8_t>(allocation.output_weights_bits));
    out.push_back(static_cast<std::uint8_t>(allocation.output_bias_bits));
    put_u32(out, static_cast<std::uint32_t>(sample_rate_hz));
    put_u32(out, static_cast<std::uint32_t>(sample_count));
    put_u32(out, codebook_checksum);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Bitstream Bitstream::parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kBitstreamHeaderSize)
        throw std::runtime_error("bitstream shorter than header");
    if (std::memcmp(bytes.data(), kStreamMagic, 4) != 0)
        throw std::runtime_error("not an adpcmlab bitstream (bad magic)");
    if (bytes[4] != kStreamVersion) throw std::runtime_error("unsupported bitstream version");

    Bitstream s;
    if (bytes[5] > 3) throw std::runtime_error("unknown scheme in bitstream header");
    s.scheme = static_cast<Scheme>(bytes[5]);
    s.nq = bytes[6];
    s.frame_len = get_u16(bytes.data() + 7);
    s.order = bytes[9];
    s.lambda = static_cast<double>(get_u16(bytes.data() + 10)) / 10000.0;
    s.nl_update_period = get_u16(bytes.data() + 12);
    s.allocation = {bytes[14], bytes[15], bytes[16], bytes[17]};
    s.sample_rate_hz = static_cast<int>(get_u32(bytes.data() + 18));
    s.sample_count = get_u32(bytes.data() + 22);
    s.codebook_checksum = get_u32(bytes.data() + 26);
    if (s.nq < 2 || s.nq > 5) throw std::runtime_error("bad nq in bitstream header");
    if (s.frame_len == 0) throw std::runtime_error("bad frame_len in bitstream header");
    s.payload.assign(bytes.begin() + kBitstreamHeaderSize, bytes.end());
    const std::size_t expected = (s.payload_bit_count() + 7) / 8;
    if (s.payload.size() > expected)
        throw std::runtime_error("trailing bytes after bitstream payload");
    return s;
}

namespace {

// Predictor/quantizer state machine shared verbatim by encoder and decoder,
// so every backward adaptation path runs through identical floating-point
// operations on both sides.
class StreamCore {
public:
    StreamCore(const CodecConfig& cfg, std::size_t sample_count)
        : cfg_(cfg),
          rq_(make_residual_quantizer(cfg.nq, cfg.rq.initial_step, cfg.rq.step_min,
                                      cfg.rq.step_max, cfg.rq.multipliers)) {
        recon_.reserve(sample_count);
        const std::size_t hist_len =
            std::max<std::size_t>(static_cast<std::size_t>(std::max(cfg.order, 1)), kMlpInputs);
        history_.assign(hist_len, 0.0); // newest first, zero-padded before t=0
        switch (cfg.scheme) {
            case Scheme::BackwardLms:
                lms_ = make_lms(cfg.order, cfg.lms.step_size, cfg.lms.leakage, cfg.lms.epsilon);
                break;
            case Scheme::BackwardLd:
                predictor_.coeffs.assign(static_cast<std::size_t>(cfg.order), 0.0);
                break;
            case Scheme::BackwardNl:
            case Scheme::ForwardNl:
                net_ = MlpPredictor{}; // all-zero bootstrap
                break;
        }
    }

    // Backward predictor refreshes due before encoding/decoding sample n.
    // Uses reconstructed data only; byte-for-byte identical on both sides.
    void backward_boundary(std::size_t n) {
        if (n == 0) return;
        if (cfg_.scheme == Scheme::BackwardLd && n % cfg_.frame_len == 0) {
            refresh_linear_from(n - cfg_.frame_len, cfg_.frame_len);
        } else if (cfg_.scheme == Scheme::BackwardNl && n % cfg_.nl_update_period == 0) {
            const std::size_t win_len = std::min(cfg_.frame_len, n);
            retrain_net(n - win_len, win_len, n / cfg_.nl_update_period);
        }
    }

    double predict() const {
        switch (cfg_.scheme) {
            case Scheme::BackwardLms:
                return lms_predict(lms_, linear_history());
            case Scheme::BackwardLd: {
                double acc = 0.0;
                for (std::size_t k = 0; k < predictor_.coeffs.size(); ++k)
                    acc += predictor_.coeffs[k] * history_[k];
                return acc;
            }
            case Scheme::BackwardNl:
            case Scheme::ForwardNl:
                return mlp_forward(net_, mlp_history());
        }
        return 0.0;
    }

    // Advance quantizer + predictor state with the reconstructed error of the
    // current sample. Returns the reconstructed sample.
    double advance(double prediction, double reconstructed_error,
                   const AdaptiveResidualQuantizer& next_rq) {
        if (cfg_.scheme == Scheme::BackwardLms)
            lms_ = lms_update(lms_, linear_history(), reconstructed_error);
        rq_ = next_rq;
        const double xt = prediction + reconstructed_error;
        // shift history right: history_[0] is newest
        for (std::size_t k = history_.size() - 1; k > 0; --k) history_[k] = history_[k - 1];
        history_[0] = xt;
        recon_.push_back(xt);
        return xt;
    }

    void set_forward_net(const MlpPredictor& net) { net_ = net; }

    const AdaptiveResidualQuantizer& rq() const { return rq_; }
    const std::vector<double>& reconstruction() const { return recon_; }
    std::vector<double> take_reconstruction() { return std::move(recon_); }

    // Seed history (chronological, zero-padded) for forward training of the
    // frame starting at `start` of the ORIGINAL signal.
    static std::array<double, kMlpInputs> seed_before(std::span<const double> x,
                                                      std::size_t start) {
        std::array<double, kMlpInputs> seed{};
        for (int k = 0; k < kMlpInputs; ++k) {
            const std::ptrdiff_t idx =
                static_cast<std::ptrdiff_t>(start) - kMlpInputs + k;
            seed[static_cast<std::size_t>(k)] =
                idx >= 0 ? x[static_cast<std::size_t>(idx)] : 0.0;
        }
        return seed;
    }

private:
    std::span<const double> linear_history() const {
        return {history_.data(), static_cast<std::size_t>(cfg_.order)};
    }
    std::span<const double> mlp_history() const { return {history_.data(), kMlpInputs}; }

    void refresh_linear_from(std::size_t start, std::size_t len) {
        const std::span<const double> window{recon_.data() + start, len};
        const int max_lag = std::min<int>(cfg_.order, static_cast<int>(len) - 1);
        std::vector<double> r = autocorrelation(window, max_lag);
        r.resize(static_cast<std::size_t>(cfg_.order) + 1, 0.0);
        if (r[0] <= 0.0) {
            predictor_.coeffs.assign(static_cast<std::size_t>(cfg_.order), 0.0);
            return;
        }
        predictor_ = bandwidth_expand(levinson_durbin(r, cfg_.order).predictor, cfg_.lambda);
    }

    void retrain_net(std::size_t start, std::size_t len, std::size_t update_index) {
        TrainConfig train = cfg_.train;
        train.seed = mix_seed(cfg_.train.seed, update_index);
        const std::array<double, kMlpInputs> seed = seed_before(recon_, start);
        net_ = train_on_frame(train, {recon_.data() + start, len}, seed);
    }

    CodecConfig cfg_;
    AdaptiveResidualQuantizer rq_;
    std::vector<double> history_;
    std::vector<double> recon_;
    LmsState lms_;
    LinearPredictor predictor_;
    MlpPredictor net_;
};

struct FrameParamCodes {
    MlpPredictor trained;
    MlpPredictor dequantized;
    std::vector<std::pair<std::uint32_t, int>> codes; // (code, bit width)
};

FrameParamCodes quantize_net(const MlpPredictor& net, const WeightQuantizerBank& bank) {
    FrameParamCodes out;
    out.trained = net;
    std::array<ParamGroup, 4> groups = split_groups(net);
    for (std::size_t g = 0; g < 4; ++g) {
        const WeightQuantizer& wq = bank.groups[g];
        for (double& v : groups[g].values) {
            const int code = wq_encode(wq, v);
            out.codes.emplace_back(static_cast<std::uint32_t>(code), wq.bits);
            v = wq_decode(wq, code);
        }
    }
    out.dequantized = merge_groups(groups);
    return out;
}

void check_bank(const WeightQuantizerBank* bank, const BitAllocation& allocation) {
    if (!bank) throw std::invalid_argument("forward-nl requires a weight codebook bank");
    for (std::size_t g = 0; g < 4; ++g) {
        const int expect = allocation.bits_for(static_cast<ParamGroupKind>(g));
        if (bank->groups[g].bits != expect)
            throw std::invalid_argument("codebook bank does not match the bit allocation");
    }
}

} // namespace

EncodeResult encode(const CodecConfig& config_in, const PcmSignal& signal,
                    const WeightQuantizerBank* bank) {
    const CodecConfig cfg = validate_config(config_in);
    validate_signal(signal);
    if (signal.samples.empty()) throw std::invalid_argument("cannot encode an empty signal");
    if (cfg.scheme == Scheme::ForwardNl) check_bank(bank, cfg.allocation);

    const std::vector<double>& x = signal.samples;
    const std::size_t count = x.size();

    StreamCore core(cfg, count);
    BitWriter writer;
    EncodeResult out;
    out.prediction_errors.reserve(count);

    for (std::size_t n = 0; n < count; ++n) {
        core.backward_boundary(n);
        if (cfg.scheme == Scheme::ForwardNl && n % cfg.frame_len == 0) {
            const std::size_t frame_index = n / cfg.frame_len;
            const std::size_t len = std::min(cfg.frame_len, count - n);
            TrainConfig train = cfg.train;
            train.seed = mix_seed(cfg.train.seed, frame_index);
            const std::array<double, kMlpInputs> seed = StreamCore::seed_before(x, n);
            const MlpPredictor trained = train_on_frame(train, {x.data() + n, len}, seed);
            FrameParamCodes params = quantize_net(trained, *bank);
            for (const auto& [code, bits] : params.codes) writer.put(code, bits);
            core.set_forward_net(cfg.weight_mode == ForwardWeightMode::QuantizedInLoop
                                     ? params.dequantized
                                     : params.trained);
        }
        const double xhat = core.predict();
        const double e = x[n] - xhat;
        out.prediction_errors.push_back(e);
        const RqEncodeResult res = rq_quantize(core.rq(), e);
        writer.put(static_cast<std::uint32_t>(res.code), cfg.nq);
        core.advance(xhat, res.reconstructed, res.next);
    }

    Bitstream& s = out.stream;
    s.scheme = cfg.scheme;
    s.nq = cfg.nq;
    s.frame_len = cfg.frame_len;
    s.order = cfg.order;
    s.lambda = cfg.lambda;
    s.nl_update_period = cfg.nl_update_period;
    s.allocation = cfg.allocation;
    s.sample_rate_hz = cfg.sample_rate_hz;
    s.sample_count = count;
    s.codebook_checksum = cfg.scheme == Scheme::ForwardNl ? bank->checksum() : 0;
    s.payload = writer.take();

    out.reconstruction.sample_rate_hz = cfg.sample_rate_hz;
    out.reconstruction.samples = core.take_reconstruction();
    return out;
}

DecodeParams params_of(const CodecConfig& config) {
    return {config.train, config.lms, config.rq};
}

PcmSignal decode(const Bitstream& stream, const WeightQuantizerBank* bank,
                 const DecodeParams& params) {
    CodecConfig cfg;
    cfg.scheme = stream.scheme;
    cfg.nq = stream.nq;
    cfg.frame_len = stream.frame_len;
    cfg.order = stream.order;
    cfg.lambda = stream.lambda;
    cfg.nl_update_period = stream.nl_update_period;
    cfg.allocation = stream.allocation;
    cfg.sample_rate_hz = stream.sample_rate_hz;
    cfg.train = params.train;
    cfg.lms = params.lms;
    cfg.rq = params.rq;
    cfg = validate_config(cfg);

    if (cfg.scheme == Scheme::ForwardNl) {
        check_bank(bank, cfg.allocation);
        if (bank->checksum() != stream.codebook_checksum)
            throw std::runtime_error("codebook checksum mismatch");
    }

    const std::size_t count = stream.sample_count;
    StreamCore core(cfg, count);
    BitReader reader(stream.payload);

    auto read_bits = [&](int bits, std::size_t frame_index) -> std::uint32_t {
        if (reader.bits_left() < static_cast<std::size_t>(bits))
            throw std::runtime_error("truncated bitstream at frame " +
                                     std::to_string(frame_index));
        return reader.get(bits);
    };

    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t frame_index = n / cfg.frame_len;
        core.backward_boundary(n);
        if (cfg.scheme == Scheme::ForwardNl && n % cfg.frame_len == 0) {
            std::array<ParamGroup, 4> groups;
            for (std::size_t g = 0; g < 4; ++g) {
                const WeightQuantizer& wq = bank->groups[g];
                groups[g].kind = static_cast<ParamGroupKind>(g);
                groups[g].values.resize(kGroupSizes[g]);
                for (double& v : groups[g].values)
                    v = wq_decode(wq, static_cast<int>(read_bits(wq.bits, frame_index)));
            }
            core.set_forward_net(merge_groups(groups));
        }
        const double xhat = core.predict();
        const int code = static_cast<int>(read_bits(cfg.nq, frame_index));
        const RqDecodeResult res = rq_dequantize(core.rq(), code);
        core.advance(xhat, res.reconstructed, res.next);
    }

    PcmSignal out;
    out.sample_rate_hz = stream.sample_rate_hz;
    out.samples = core.take_reconstruction();
    return out;
}

} // namespace adpcm
