#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "adpcm/codec.hpp"
#include "adpcm/metrics.hpp"
#include "adpcm/mlp.hpp"
#include "adpcm/quantizer.hpp"
#include "adpcm/signal.hpp"
#include "adpcm/synth.hpp"

namespace fs = std::filesystem;

namespace adpcm::cli {

namespace {

// ---------------------------------------------------------------------------
// small helpers

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

BitAllocation parse_allocation(const std::string& text) {
    const std::vector<std::string> parts = split(text, '-');
    if (parts.size() != 4)
        throw CLI::ValidationError("allocation", "expected hw-hb-ow-ob, e.g. 7-10-7-10");
    BitAllocation a;
    try {
        a.hidden_weights_bits = std::stoi(parts[0]);
        a.hidden_bias_bits = std::stoi(parts[1]);
        a.output_weights_bits = std::stoi(parts[2]);
        a.output_bias_bits = std::stoi(parts[3]);
    } catch (const std::exception&) {
        throw CLI::ValidationError("allocation", "expected four integers, e.g. 7-10-7-10");
    }
    return a;
}

std::string allocation_string(const BitAllocation& a) {
    return std::to_string(a.hidden_weights_bits) + "-" + std::to_string(a.hidden_bias_bits) +
           "-" + std::to_string(a.output_weights_bits) + "-" +
           std::to_string(a.output_bias_bits);
}

PcmFormat format_for(const std::string& path, const std::string& override_fmt) {
    if (override_fmt == "wav16") return PcmFormat::Wav16Mono;
    if (override_fmt == "raw16le") return PcmFormat::Raw16Le;
    if (!override_fmt.empty())
        throw CLI::ValidationError("format", "expected wav16 or raw16le");
    const std::string ext = fs::path(path).extension().string();
    return ext == ".wav" ? PcmFormat::Wav16Mono : PcmFormat::Raw16Le;
}

// A corpus path is either one audio file or a directory of them; directory
// entries are concatenated in filename order, matching how the experiments
// are meant to chain sentences together.
PcmSignal load_corpus(const std::string& path, int sample_rate_hz) {
    if (!fs::exists(path)) throw std::runtime_error("corpus path does not exist: " + path);
    if (!fs::is_directory(path))
        return load_pcm(path, format_for(path, ""), sample_rate_hz);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".wav" || ext == ".raw" || ext == ".pcm") files.push_back(entry.path().string());
    }
    if (files.empty()) throw std::runtime_error("no .wav/.raw/.pcm files in corpus: " + path);
    std::sort(files.begin(), files.end());
    std::vector<PcmSignal> parts;
    parts.reserve(files.size());
    for (const std::string& f : files) parts.push_back(load_pcm(f, format_for(f, ""), sample_rate_hz));
    return concat_corpus(parts);
}

std::string codebook_filename(WeightQuantizerKind kind, int bits, double clip) {
    char buf[64];
    if (kind == WeightQuantizerKind::EqualOccupancy) {
        std::snprintf(buf, sizeof buf, "wq_eo_b%02d.nlwq", bits);
    } else {
        std::snprintf(buf, sizeof buf, "wq_uniform_b%02d_c%.4f.nlwq", bits, clip);
    }
    return buf;
}

// Assemble the per-group bank an allocation needs from codebook files. Each
// file carries all four group records at one bit depth; mixed allocations
// pull each group's record from the file with the matching depth.
WeightQuantizerBank resolve_bank(const std::vector<std::string>& codebook_paths,
                                 WeightQuantizerKind family, double clip,
                                 const BitAllocation& allocation) {
    if (codebook_paths.empty())
        throw std::runtime_error("forward-nl needs --codebooks (file, files, or directory)");
    std::vector<WeightQuantizerBank> banks;
    for (const std::string& p : codebook_paths) {
        if (fs::is_directory(p)) {
            std::vector<int> bits = {allocation.hidden_weights_bits, allocation.hidden_bias_bits,
                                     allocation.output_weights_bits, allocation.output_bias_bits};
            std::sort(bits.begin(), bits.end());
            bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
            for (int b : bits) {
                const fs::path file = fs::path(p) / codebook_filename(family, b, clip);
                if (!fs::exists(file))
                    throw std::runtime_error("missing codebook file: " + file.string());
                banks.push_back(load_codebooks(file.string()));
            }
        } else {
            banks.push_back(load_codebooks(p));
        }
    }
    WeightQuantizerBank out;
    for (std::size_t g = 0; g < 4; ++g) {
        const int need = allocation.bits_for(static_cast<ParamGroupKind>(g));
        const WeightQuantizer* found = nullptr;
        for (const WeightQuantizerBank& b : banks)
            if (b.groups[g].bits == need && b.groups[g].kind == family) {
                found = &b.groups[g];
                break;
            }
        if (!found)
            throw std::runtime_error("no codebook record for " +
                                     std::string(group_name(static_cast<ParamGroupKind>(g))) +
                                     " at " + std::to_string(need) + " bits");
        out.groups[g] = *found;
    }
    return out;
}

// ---------------------------------------------------------------------------
// shared flag bundles

struct TrainFlags {
    int epochs = 100;
    double learn_rate = 1.0;
    double init_scale = 0.3;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--epochs", epochs, "training epochs per frame (small on purpose)");
        cmd->add_option("--learn-rate", learn_rate, "gradient-descent step");
        cmd->add_option("--init-scale", init_scale, "uniform init range for MLP weights");
        cmd->add_option("--seed", seed, "global seed; per-frame seeds derive from it");
    }
    TrainConfig config() const { return {epochs, learn_rate, init_scale, seed}; }
};

struct LmsFlags {
    double mu = 0.005;
    double leakage = 0.9999;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mu", mu, "NLMS step size");
        cmd->add_option("--leakage", leakage, "NLMS coefficient leakage in (0,1]");
    }
    LmsParams params() const { return {mu, leakage, 1e-6}; }
};

// ---------------------------------------------------------------------------
// encode / decode

struct CodecFlags {
    std::string scheme = "backward-ld";
    int nq = 5;
    std::size_t frame_len = 200;
    int order = 10;
    double lambda = 1.0;
    std::size_t update_period = 0; // 0 = frame_len
    std::string allocation = "10-10-10-10";
    std::string family = "eo";
    double clip = 0.01;
    std::vector<std::string> codebooks;
    TrainFlags train;
    LmsFlags lms;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scheme", scheme,
                        "backward-lms | backward-ld | backward-nl | forward-nl");
        cmd->add_option("--nq", nq, "residual bits per sample (2-5)");
        cmd->add_option("--frame-len", frame_len, "frame length in samples");
        cmd->add_option("--order", order, "linear predictor order");
        cmd->add_option("--lambda", lambda, "bandwidth expansion factor (backward-ld)");
        cmd->add_option("--update-period", update_period,
                        "samples between MLP retrainings (backward-nl); 0 = frame length");
        cmd->add_option("--allocation", allocation, "weight bits as hw-hb-ow-ob (forward-nl)");
        cmd->add_option("--family", family, "weight quantizer family: eo | uniform");
        cmd->add_option("--clip", clip, "clip fraction for uniform codebook lookup");
        cmd->add_option("--codebooks", codebooks, "codebook file(s) or directory (forward-nl)")
            ->delimiter(',');
        train.attach(cmd);
        lms.attach(cmd);
    }

    WeightQuantizerKind family_kind() const {
        if (family == "eo") return WeightQuantizerKind::EqualOccupancy;
        if (family == "uniform") return WeightQuantizerKind::Uniform;
        throw CLI::ValidationError("family", "expected eo or uniform");
    }

    CodecConfig config(int sample_rate_hz) const {
        const std::optional<Scheme> s = scheme_from_name(scheme);
        if (!s) throw CLI::ValidationError("scheme", "unknown scheme " + scheme);
        CodecConfig cfg;
        cfg.scheme = *s;
        cfg.nq = nq;
        cfg.frame_len = frame_len;
        cfg.order = order;
        cfg.lambda = lambda;
        cfg.nl_update_period = update_period == 0 ? frame_len : update_period;
        cfg.allocation = parse_allocation(allocation);
        cfg.train = train.config();
        cfg.lms = lms.params();
        cfg.sample_rate_hz = sample_rate_hz;
        return validate_config(cfg);
    }
};

int cmd_encode(const std::string& in, const std::string& out, const std::string& in_format,
               int sample_rate, const CodecFlags& flags) {
    const PcmSignal signal = load_pcm(in, format_for(in, in_format), sample_rate);
    const CodecConfig cfg = flags.config(signal.sample_rate_hz);

    std::optional<WeightQuantizerBank> bank;
    if (cfg.scheme == Scheme::ForwardNl)
        bank = resolve_bank(flags.codebooks, flags.family_kind(), flags.clip, cfg.allocation);

    const EncodeResult res = encode(cfg, signal, bank ? &*bank : nullptr);
    const std::vector<std::uint8_t> bytes = res.stream.serialize();
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write: " + out);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + out);

    std::cout << "samples=" << signal.samples.size() << " bytes=" << bytes.size()
              << " bitrate_bps=" << format_double(overall_bitrate_bps(cfg));
    try { // quality summary is best-effort: too-short or silent input has no SNR
        const double gp = prediction_gain_db(signal.samples, res.prediction_errors);
        const SegSnrResult snr = segsnr(signal, res.reconstruction);
        std::cout << " gp_db=" << format_double(gp)
                  << " segsnr_db=" << format_double(snr.segsnr_db);
    } catch (const std::invalid_argument&) {
    }
    std::cout << "\n";
    return 0;
}

int cmd_decode(const std::string& in, const std::string& out, const std::string& out_format,
               const CodecFlags& flags) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + in);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                          std::istreambuf_iterator<char>());
    const Bitstream stream = Bitstream::parse(bytes);

    std::optional<WeightQuantizerBank> bank;
    if (stream.scheme == Scheme::ForwardNl)
        bank = resolve_bank(flags.codebooks, flags.family_kind(), flags.clip, stream.allocation);

    DecodeParams params;
    params.train = flags.train.config();
    params.lms = flags.lms.params();
    const PcmSignal decoded = decode(stream, bank ? &*bank : nullptr, params);
    save_pcm(decoded, out, format_for(out, out_format));
    std::cout << "samples=" << decoded.samples.size() << " rate=" << decoded.sample_rate_hz
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-codebooks

int cmd_train_codebooks(const std::string& corpus_path, const std::string& out_dir,
                        const std::vector<int>& bits_list, const std::vector<double>& clips,
                        std::size_t frame_len, int bins, int sample_rate,
                        const TrainFlags& train) {
    const PcmSignal corpus = load_corpus(corpus_path, sample_rate);
    const std::vector<MlpPredictor> nets = train_corpus_nets(train.config(), corpus, frame_len);
    if (nets.empty()) throw std::runtime_error("corpus too short for one frame");
    const std::array<GroupDistribution, 4> pooled = collect_histograms(nets, bins);

    fs::create_directories(out_dir);
    std::ofstream hist(fs::path(out_dir) / "weight_histograms.csv");
    hist << "group,bin_lo,bin_hi,count\n";
    for (const GroupDistribution& d : pooled)
        for (std::size_t b = 0; b < d.bin_counts.size(); ++b)
            hist << group_name(d.kind) << "," << format_double(d.bin_edges[b]) << ","
                 << format_double(d.bin_edges[b + 1]) << "," << d.bin_counts[b] << "\n";

    int files = 0;
    for (int bits : bits_list) {
        const BitAllocation alloc{bits, bits, bits, bits};
        const WeightQuantizerBank eo =
            design_bank(pooled, WeightQuantizerKind::EqualOccupancy, alloc);
        save_codebooks(eo, (fs::path(out_dir) /
                            codebook_filename(WeightQuantizerKind::EqualOccupancy, bits, 0.0))
                               .string());
        ++files;
        for (double clip : clips) {
            const WeightQuantizerBank uni =
                design_bank(pooled, WeightQuantizerKind::Uniform, alloc, clip);
            save_codebooks(uni, (fs::path(out_dir) /
                                 codebook_filename(WeightQuantizerKind::Uniform, bits, clip))
                                    .string());
            ++files;
        }
    }
    std::cout << "nets=" << nets.size() << " pooled_params=" << nets.size() * kMlpParamCount
              << " codebook_files=" << files << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct GridPoint {
    CodecConfig config;
    WeightQuantizerKind family = WeightQuantizerKind::EqualOccupancy;
    double clip = 0.0;
    bool uses_frame = true;
};

struct Grid {
    std::vector<std::string> schemes;
    std::vector<int> nq = {2, 3, 4, 5};
    std::vector<std::size_t> frame_lens = {200};
    std::vector<int> orders = {10};
    std::vector<double> lambdas = {1.0};
    std::vector<std::size_t> update_periods = {0}; // 0 = frame length
    std::vector<std::string> allocations = {"10-10-10-10"};
    std::vector<std::string> families = {"eo"};
    std::vector<double> clips = {0.01};
    std::string corpus, codebooks, out;
    std::optional<std::uint64_t> seed;
};

Grid parse_grid(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open grid file: " + path);
    Grid g;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("grid line " + std::to_string(lineno) + ": expected key = values");
        const std::string key = trim(text.substr(0, eq));
        const std::vector<std::string> values = split(text.substr(eq + 1), ',');
        auto as_int = [&](const std::string& v) { return std::stoi(v); };
        auto as_size = [&](const std::string& v) { return static_cast<std::size_t>(std::stoul(v)); };
        auto as_double = [&](const std::string& v) { return std::stod(v); };
        try {
            if (key == "scheme") {
                g.schemes = values;
            } else if (key == "nq") {
                g.nq.clear();
                for (const auto& v : values) g.nq.push_back(as_int(v));
            } else if (key == "frame_len") {
                g.frame_lens.clear();
                for (const auto& v : values) g.frame_lens.push_back(as_size(v));
            } else if (key == "order") {
                g.orders.clear();
                for (const auto& v : values) g.orders.push_back(as_int(v));
            } else if (key == "lambda") {
                g.lambdas.clear();
                for (const auto& v : values) g.lambdas.push_back(as_double(v));
            } else if (key == "update_period") {
                g.update_periods.clear();
                for (const auto& v : values) g.update_periods.push_back(as_size(v));
            } else if (key == "allocation") {
                g.allocations = values;
            } else if (key == "family") {
                g.families = values;
            } else if (key == "clip") {
                g.clips.clear();
                for (const auto& v : values) g.clips.push_back(as_double(v));
            } else if (key == "corpus") {
                g.corpus = trim(text.substr(eq + 1));
            } else if (key == "codebooks") {
                g.codebooks = trim(text.substr(eq + 1));
            } else if (key == "out") {
                g.out = trim(text.substr(eq + 1));
            } else if (key == "seed") {
                g.seed = std::stoull(trim(text.substr(eq + 1)));
            } else {
                throw std::runtime_error("unknown key '" + key + "'");
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error("grid line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (g.schemes.empty())
        throw std::runtime_error("grid file must list at least one scheme");
    return g;
}

// Allocation entries are either explicit hw-hb-ow-ob tuples or "all:LO-HI",
// which expands to every combination of per-group depths in [LO, HI] — the
// exhaustive way to hunt for which parameter group tolerates fewer bits.
std::vector<BitAllocation> expand_allocations(const std::vector<std::string>& entries) {
    std::vector<BitAllocation> out;
    for (const std::string& entry : entries) {
        if (entry.rfind("all:", 0) == 0) {
            const std::vector<std::string> bounds = split(entry.substr(4), '-');
            int lo = 0, hi = -1;
            try {
                if (bounds.size() == 2) {
                    lo = std::stoi(bounds[0]);
                    hi = std::stoi(bounds[1]);
                }
            } catch (const std::exception&) {
            }
            if (lo < 1 || hi > 10 || lo > hi)
                throw std::runtime_error("bad allocation range (want all:LO-HI within 1..10): " +
                                         entry);
            for (int hw = lo; hw <= hi; ++hw)
                for (int hb = lo; hb <= hi; ++hb)
                    for (int ow = lo; ow <= hi; ++ow)
                        for (int ob = lo; ob <= hi; ++ob)
                            out.push_back({hw, hb, ow, ob});
        } else {
            out.push_back(parse_allocation(entry));
        }
    }
    return out;
}

// Expand only the dimensions a scheme actually uses; a full factorial
// product would just duplicate rows along inapplicable axes.
std::vector<GridPoint> expand_grid(const Grid& g, int sample_rate, const TrainConfig& train,
                                   const LmsParams& lms) {
    std::vector<GridPoint> points;
    auto base = [&](Scheme s, int nq) {
        CodecConfig cfg;
        cfg.scheme = s;
        cfg.nq = nq;
        cfg.frame_len = g.frame_lens.front();
        cfg.sample_rate_hz = sample_rate;
        cfg.train = train;
        cfg.lms = lms;
        return cfg;
    };
    for (const std::string& name : g.schemes) {
        const std::optional<Scheme> scheme = scheme_from_name(name);
        if (!scheme) throw std::runtime_error("unknown scheme in grid: " + name);
        for (int nq : g.nq) {
            switch (*scheme) {
                case Scheme::BackwardLms:
                    for (int order : g.orders) {
                        GridPoint p{base(*scheme, nq), WeightQuantizerKind::EqualOccupancy, 0.0,
                                    false};
                        p.config.order = order;
                        points.push_back(std::move(p));
                    }
                    break;
                case Scheme::BackwardLd:
                    for (std::size_t frame : g.frame_lens)
                        for (int order : g.orders)
                            for (double lambda : g.lambdas) {
                                GridPoint p{base(*scheme, nq)};
                                p.config.frame_len = frame;
                                p.config.order = order;
                                p.config.lambda = lambda;
                                points.push_back(std::move(p));
                            }
                    break;
                case Scheme::BackwardNl:
                    for (std::size_t frame : g.frame_lens)
                        for (std::size_t period : g.update_periods) {
                            GridPoint p{base(*scheme, nq)};
                            p.config.frame_len = frame;
                            p.config.nl_update_period = period == 0 ? frame : period;
                            points.push_back(std::move(p));
                        }
                    break;
                case Scheme::ForwardNl:
                    for (std::size_t frame : g.frame_lens)
                        for (const std::string& family : g.families) {
                            WeightQuantizerKind kind;
                            if (family == "eo")
                                kind = WeightQuantizerKind::EqualOccupancy;
                            else if (family == "uniform")
                                kind = WeightQuantizerKind::Uniform;
                            else
                                throw std::runtime_error("unknown family in grid: " + family);
                            const std::vector<double> clips =
                                kind == WeightQuantizerKind::Uniform ? g.clips
                                                                     : std::vector<double>{0.0};
                            for (const BitAllocation& alloc : expand_allocations(g.allocations))
                                for (double clip : clips) {
                                    GridPoint p{base(*scheme, nq), kind, clip};
                                    p.config.frame_len = frame;
                                    p.config.allocation = alloc;
                                    points.push_back(std::move(p));
                                }
                        }
                    break;
            }
        }
    }
    return points;
}

struct SweepRow {
    GridPoint point;
    double gp_db = 0.0, segsnr_db = 0.0, bitrate_bps = 0.0, wall_seconds = 0.0;
    std::string error;
};

std::string csv_escape(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

void write_row(std::ostream& out, const SweepRow& row, bool timings) {
    const CodecConfig& cfg = row.point.config;
    const Scheme s = cfg.scheme;
    out << scheme_name(s) << "," << cfg.nq << ",";
    if (row.point.uses_frame) out << cfg.frame_len;
    out << ",";
    if (s == Scheme::BackwardLms || s == Scheme::BackwardLd) out << cfg.order;
    out << ",";
    if (s == Scheme::BackwardLd) out << format_double(cfg.lambda);
    out << ",";
    if (s == Scheme::BackwardNl) out << cfg.nl_update_period;
    out << ",";
    if (s == Scheme::ForwardNl) out << allocation_string(cfg.allocation);
    out << ",";
    if (s == Scheme::ForwardNl)
        out << (row.point.family == WeightQuantizerKind::EqualOccupancy ? "eo" : "uniform");
    out << ",";
    if (s == Scheme::ForwardNl && row.point.family == WeightQuantizerKind::Uniform)
        out << format_double(row.point.clip);
    out << ",";
    if (row.error.empty())
        out << format_double(row.gp_db) << "," << format_double(row.segsnr_db) << ","
            << format_double(row.bitrate_bps);
    else
        out << ",,";
    out << ",";
    if (timings) out << std::fixed << std::setprecision(3) << row.wall_seconds << std::defaultfloat;
    out << "," << csv_escape(row.error) << "\n";
}

int cmd_sweep(const std::string& grid_path, std::string corpus_path, std::string codebooks_dir,
              std::string out_path, int sample_rate, int workers, bool timings,
              const TrainFlags& train_flags, const LmsFlags& lms_flags,
              std::optional<std::uint64_t> seed_flag) {
    Grid grid = parse_grid(grid_path);
    if (!corpus_path.empty()) grid.corpus = corpus_path;
    if (!codebooks_dir.empty()) grid.codebooks = codebooks_dir;
    if (!out_path.empty()) grid.out = out_path;
    if (grid.corpus.empty()) throw std::runtime_error("no corpus (flag --corpus or grid key)");
    if (grid.out.empty()) throw std::runtime_error("no output path (flag --out or grid key)");

    TrainConfig train = train_flags.config();
    if (seed_flag) train.seed = *seed_flag;
    else if (grid.seed) train.seed = *grid.seed;

    const PcmSignal corpus = load_corpus(grid.corpus, sample_rate);
    std::vector<GridPoint> points = expand_grid(grid, corpus.sample_rate_hz, train,
                                                lms_flags.params());
    std::vector<SweepRow> rows(points.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            SweepRow& row = rows[i];
            row.point = points[i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                std::optional<WeightQuantizerBank> bank;
                if (row.point.config.scheme == Scheme::ForwardNl) {
                    if (grid.codebooks.empty())
                        throw std::runtime_error("forward-nl in grid but no --codebooks");
                    bank = resolve_bank({grid.codebooks}, row.point.family, row.point.clip,
                                        row.point.config.allocation);
                }
                const EncodeResult res = encode(row.point.config, corpus, bank ? &*bank : nullptr);
                row.gp_db = prediction_gain_db(corpus.samples, res.prediction_errors);
                row.segsnr_db = segsnr(corpus, res.reconstruction).segsnr_db;
                row.bitrate_bps = overall_bitrate_bps(row.point.config);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            row.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::ofstream out(grid.out);
    if (!out) throw std::runtime_error("cannot write: " + grid.out);
    out << "scheme,nq,frame_len,order,lambda,update_period,allocation,family,clip_fraction,"
           "gp_db,segsnr_db,bitrate_bps,wall_seconds,error\n";
    for (const SweepRow& row : rows) write_row(out, row, timings);
    std::cout << "rows=" << rows.size() << " out=" << grid.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// report

struct ResultRow {
    std::map<std::string, std::string> cols;

    double num(const std::string& key) const {
        const auto it = cols.find(key);
        if (it == cols.end() || it->second.empty()) return 0.0;
        return std::stod(it->second);
    }
    const std::string& str(const std::string& key) const {
        static const std::string empty;
        const auto it = cols.find(key);
        return it == cols.end() ? empty : it->second;
    }
};

std::vector<ResultRow> read_results(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open results file: " + path);
    std::string line;
    if (!std::getline(f, line)) return {};
    const std::vector<std::string> header = split(trim(line), ',');
    std::vector<ResultRow> rows;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> vals = split(line, ',');
        if (vals.size() != header.size())
            throw std::runtime_error("results row has " + std::to_string(vals.size()) +
                                     " columns, header has " + std::to_string(header.size()));
        ResultRow row;
        for (std::size_t i = 0; i < header.size(); ++i) row.cols[header[i]] = vals[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_report(const std::string& in_path, const std::string& out_dir) {
    const std::vector<ResultRow> rows = read_results(in_path);
    fs::create_directories(out_dir);

    // Sample-adaptive linear scheme: one line per nq.
    {
        std::ofstream f(fs::path(out_dir) / "table_lms.csv");
        f << "order,nq,gp_db,segsnr_db\n";
        std::vector<const ResultRow*> sel;
        for (const ResultRow& r : rows)
            if (r.str("scheme") == "backward-lms" && r.str("error").empty())
                sel.push_back(&r);
        std::stable_sort(sel.begin(), sel.end(), [](const ResultRow* a, const ResultRow* b) {
            return std::tuple(a->num("order"), a->num("nq")) <
                   std::tuple(b->num("order"), b->num("nq"));
        });
        for (const ResultRow* r : sel)
            f << r->str("order") << "," << r->str("nq") << "," << r->str("gp_db") << ","
              << r->str("segsnr_db") << "\n";
    }

    // Block-adaptive linear scheme: frame x lambda x nq.
    {
        std::ofstream f(fs::path(out_dir) / "table_ld.csv");
        f << "order,frame_len,nq,lambda,gp_db,segsnr_db\n";
        std::vector<const ResultRow*> sel;
        for (const ResultRow& r : rows)
            if (r.str("scheme") == "backward-ld" && r.str("error").empty()) sel.push_back(&r);
        std::stable_sort(sel.begin(), sel.end(), [](const ResultRow* a, const ResultRow* b) {
            return std::tuple(a->num("order"), a->num("frame_len"), a->num("nq"),
                              a->num("lambda")) <
                   std::tuple(b->num("order"), b->num("frame_len"), b->num("nq"),
                              b->num("lambda"));
        });
        for (const ResultRow* r : sel)
            f << r->str("order") << "," << r->str("frame_len") << "," << r->str("nq") << ","
              << r->str("lambda") << "," << r->str("gp_db") << "," << r->str("segsnr_db") << "\n";
    }

    // Rate-distortion points for every scheme, bitrate ascending.
    {
        std::ofstream f(fs::path(out_dir) / "rate_distortion.csv");
        f << "scheme,bitrate_bps,segsnr_db\n";
        std::vector<const ResultRow*> sel;
        for (const ResultRow& r : rows)
            if (r.str("error").empty() && !r.str("bitrate_bps").empty()) sel.push_back(&r);
        std::stable_sort(sel.begin(), sel.end(), [](const ResultRow* a, const ResultRow* b) {
            return std::tuple(a->str("scheme"), a->num("bitrate_bps")) <
                   std::tuple(b->str("scheme"), b->num("bitrate_bps"));
        });
        for (const ResultRow* r : sel)
            f << r->str("scheme") << "," << r->str("bitrate_bps") << "," << r->str("segsnr_db")
              << "\n";
    }
    std::cout << "rows=" << rows.size() << " out=" << out_dir << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"ADPCM speech-coding laboratory: linear and MLP prediction, "
                 "adaptive quantization, rate-distortion sweeps"};
    app.require_subcommand(1);

    int exit_code = 0;

    // encode
    auto* enc = app.add_subcommand("encode", "encode a speech file to an .adpx bitstream");
    std::string enc_in, enc_out, enc_fmt;
    int enc_rate = 8000;
    CodecFlags enc_flags;
    enc->add_option("--in", enc_in, "input .wav or raw16le file")->required();
    enc->add_option("--out", enc_out, "output bitstream file")->required();
    enc->add_option("--format", enc_fmt, "input format override: wav16 | raw16le");
    enc->add_option("--sample-rate", enc_rate, "sample rate for raw input");
    enc_flags.attach(enc);
    enc->callback([&] { exit_code = cmd_encode(enc_in, enc_out, enc_fmt, enc_rate, enc_flags); });

    // decode
    auto* dec = app.add_subcommand("decode", "decode an .adpx bitstream to audio");
    std::string dec_in, dec_out, dec_fmt;
    CodecFlags dec_flags;
    dec->add_option("--in", dec_in, "input bitstream file")->required();
    dec->add_option("--out", dec_out, "output .wav or raw16le file")->required();
    dec->add_option("--format", dec_fmt, "output format override: wav16 | raw16le");
    dec_flags.attach(dec);
    dec->callback([&] { exit_code = cmd_decode(dec_in, dec_out, dec_fmt, dec_flags); });

    // train-codebooks
    auto* tc = app.add_subcommand("train-codebooks",
                                  "design weight codebooks from a training corpus");
    std::string tc_corpus, tc_out;
    std::vector<int> tc_bits = {6, 7, 8, 9, 10};
    std::vector<double> tc_clips = {0.0, 0.005, 0.01, 0.02, 0.05};
    std::size_t tc_frame = 200;
    int tc_bins = 50, tc_rate = 8000;
    TrainFlags tc_train;
    tc->add_option("--corpus", tc_corpus, "training corpus file or directory")->required();
    tc->add_option("--out", tc_out, "output directory")->required();
    tc->add_option("--bits", tc_bits, "bit depths to design")->delimiter(',');
    tc->add_option("--clips", tc_clips, "clip fractions for the uniform family")->delimiter(',');
    tc->add_option("--frame-len", tc_frame, "training frame length");
    tc->add_option("--bins", tc_bins, "histogram bins");
    tc->add_option("--sample-rate", tc_rate, "sample rate for raw corpus files");
    tc_train.attach(tc);
    tc->callback([&] {
        exit_code = cmd_train_codebooks(tc_corpus, tc_out, tc_bits, tc_clips, tc_frame, tc_bins,
                                        tc_rate, tc_train);
    });

    // sweep
    auto* sw = app.add_subcommand("sweep", "run a grid of codec configs over a corpus");
    std::string sw_grid, sw_corpus, sw_codebooks, sw_out;
    int sw_rate = 8000, sw_workers = 1;
    bool sw_timings = false;
    TrainFlags sw_train;
    LmsFlags sw_lms;
    std::optional<std::uint64_t> sw_seed;
    sw->add_option("--grid", sw_grid, "grid file (key = comma-separated values)")->required();
    sw->add_option("--corpus", sw_corpus, "evaluation corpus file or directory");
    sw->add_option("--codebooks", sw_codebooks, "codebook directory for forward-nl points");
    sw->add_option("--out", sw_out, "output CSV path");
    sw->add_option("--sample-rate", sw_rate, "sample rate for raw corpus files");
    sw->add_option("--workers", sw_workers, "parallel grid workers");
    sw->add_flag("--timings", sw_timings, "fill the wall_seconds column (breaks byte-identical reruns)");
    sw->add_option("--epochs", sw_train.epochs, "training epochs per frame");
    sw->add_option("--learn-rate", sw_train.learn_rate, "gradient-descent step");
    sw->add_option("--init-scale", sw_train.init_scale, "uniform init range for MLP weights");
    sw->add_option("--seed", sw_seed, "global seed (overrides grid key)");
    sw->add_option("--mu", sw_lms.mu, "NLMS step size");
    sw->add_option("--leakage", sw_lms.leakage, "NLMS coefficient leakage");
    sw->callback([&] {
        exit_code = cmd_sweep(sw_grid, sw_corpus, sw_codebooks, sw_out, sw_rate, sw_workers,
                              sw_timings, sw_train, sw_lms, sw_seed);
    });

    // report
    auto* rp = app.add_subcommand("report", "pivot a sweep CSV into table/figure-shaped CSVs");
    std::string rp_in, rp_out;
    rp->add_option("--in", rp_in, "sweep results CSV")->required();
    rp->add_option("--out", rp_out, "output directory")->required();
    rp->callback([&] { exit_code = cmd_report(rp_in, rp_out); });

    // synth
    auto* sy = app.add_subcommand("synth", "generate a deterministic speech-like test file");
    std::string sy_out;
    double sy_seconds = 60.0;
    std::uint64_t sy_seed = 1;
    int sy_rate = 8000;
    sy->add_option("--out", sy_out, "output .wav or raw16le file")->required();
    sy->add_option("--seconds", sy_seconds, "duration");
    sy->add_option("--seed", sy_seed, "generator seed");
    sy->add_option("--sample-rate", sy_rate, "sample rate");
    sy->callback([&] {
        const PcmSignal s = synth_speech(sy_seconds, sy_seed, sy_rate);
        save_pcm(s, sy_out, format_for(sy_out, ""));
        std::cout << "samples=" << s.samples.size() << " out=" << sy_out << "\n";
    });

    std::vector<std::string> argv_storage = args;
    std::vector<const char*> argv = {"adpcmlab"};
    for (const std::string& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}

} // namespace adpcm::cli
