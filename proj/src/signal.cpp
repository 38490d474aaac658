#include "adpcm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace adpcm {

namespace {

constexpr double kInt16Scale = 32768.0;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

std::vector<double> decode_int16le(const std::uint8_t* data, std::size_t byte_count) {
    std::vector<double> samples(byte_count / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::int16_t v = static_cast<std::int16_t>(read_u16(data + 2 * i));
        samples[i] = static_cast<double>(v) / kInt16Scale;
    }
    return samples;
}

PcmSignal load_wav(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("not a RIFF/WAVE file: " + path);

    bool have_fmt = false;
    std::uint16_t format_code = 0, channels = 0, bits_per_sample = 0;
    std::uint32_t rate = 0;
    PcmSignal out;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        std::uint32_t chunk_size = read_u32(chunk + 4);
        std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size())
            throw std::runtime_error("truncated wav chunk in " + path);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw std::runtime_error("malformed fmt chunk in " + path);
            format_code = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            rate = read_u32(bytes.data() + body + 4);
            bits_per_sample = read_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            if (!have_fmt) throw std::runtime_error("wav data chunk before fmt in " + path);
            if (format_code != 1) throw std::runtime_error("unsupported wav format (PCM required): " + path);
            if (channels != 1) throw std::runtime_error("mono required: " + path);
            if (bits_per_sample != 16) throw std::runtime_error("16-bit samples required: " + path);
            out.samples = decode_int16le(bytes.data() + body, chunk_size);
            out.sample_rate_hz = static_cast<int>(rate);
            return out;
        }
        pos = body + chunk_size + (chunk_size & 1); // chunks are word-aligned
    }
    throw std::runtime_error("wav file has no data chunk: " + path);
}

void write_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::vector<std::uint8_t> encode_int16le(const std::vector<double>& samples) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(samples.size() * 2);
    for (double s : samples) {
        double scaled = std::round(s * kInt16Scale);
        scaled = std::clamp(scaled, -32768.0, 32767.0);
        write_u16(bytes, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    }
    return bytes;
}

} // namespace

void validate_signal(const PcmSignal& signal) {
    if (signal.sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
    for (double s : signal.samples)
        if (!std::isfinite(s)) throw std::invalid_argument("signal contains non-finite samples");
}

PcmSignal load_pcm(const std::string& path, PcmFormat format, int sample_rate_hz) {
    if (format == PcmFormat::Wav16Mono) return load_wav(path);
    if (sample_rate_hz <= 0) throw std::invalid_argument("raw input needs a positive sample rate");
    std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() % 2 != 0) throw std::runtime_error("raw16le file has odd byte count: " + path);
    PcmSignal out;
    out.samples = decode_int16le(bytes.data(), bytes.size());
    out.sample_rate_hz = sample_rate_hz;
    return out;
}

void save_pcm(const PcmSignal& signal, const std::string& path, PcmFormat format) {
    validate_signal(signal);
    std::vector<std::uint8_t> data = encode_int16le(signal.samples);
    std::vector<std::uint8_t> out;
    if (format == PcmFormat::Wav16Mono) {
        std::uint32_t data_size = static_cast<std::uint32_t>(data.size());
        std::uint32_t rate = static_cast<std::uint32_t>(signal.sample_rate_hz);
        out.insert(out.end(), {'R', 'I', 'F', 'F'});
        write_u32(out, 36 + data_size);
        out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
        write_u32(out, 16);
        write_u16(out, 1);  // PCM
        write_u16(out, 1);  // mono
        write_u32(out, rate);
        write_u32(out, rate * 2); // byte rate
        write_u16(out, 2);  // block align
        write_u16(out, 16); // bits per sample
        out.insert(out.end(), {'d', 'a', 't', 'a'});
        write_u32(out, data_size);
    }
    out.insert(out.end(), data.begin(), data.end());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write file: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

PcmSignal concat_corpus(const std::vector<PcmSignal>& signals) {
    if (signals.empty()) throw std::invalid_argument("empty corpus");
    PcmSignal out;
    out.sample_rate_hz = signals.front().sample_rate_hz;
    std::size_t total = 0;
    for (const PcmSignal& s : signals) {
        if (s.sample_rate_hz != out.sample_rate_hz)
            throw std::invalid_argument("mixed sample rates in corpus");
        total += s.samples.size();
    }
    out.samples.reserve(total);
    for (const PcmSignal& s : signals)
        out.samples.insert(out.samples.end(), s.samples.begin(), s.samples.end());
    return out;
}

std::vector<FrameView> frames(const PcmSignal& signal, std::size_t frame_len) {
    if (frame_len == 0) throw std::invalid_argument("frame_len must be positive");
    std::vector<FrameView> out;
    const std::size_t n = signal.samples.size();
    for (std::size_t start = 0; start < n; start += frame_len)
        out.push_back({start, std::min(frame_len, n - start)});
    return out;
}

} // namespace adpcm
