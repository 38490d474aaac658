#include <doctest.h>

#include <stdexcept>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "adpcm/rng.hpp"
#include "adpcm/signal.hpp"

using namespace adpcm;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "adpcmlab_signal_tests";
    fs::create_directories(dir);
    return dir;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("raw16le load scales int16 by 1/32768") {
    const fs::path path = temp_dir() / "scale.raw";
    // int16 values 0, 16384, -32768 little-endian
    write_bytes(path, {0x00, 0x00, 0x00, 0x40, 0x00, 0x80});
    const PcmSignal s = load_pcm(path.string(), PcmFormat::Raw16Le, 8000);
    REQUIRE(s.samples.size() == 3);
    CHECK(s.samples[0] == 0.0);
    CHECK(s.samples[1] == 0.5);
    CHECK(s.samples[2] == -1.0);
    CHECK(s.sample_rate_hz == 8000);
}

TEST_CASE("empty raw file loads as empty signal") {
    const fs::path path = temp_dir() / "empty.raw";
    write_bytes(path, {});
    const PcmSignal s = load_pcm(path.string(), PcmFormat::Raw16Le, 8000);
    CHECK(s.samples.empty());
}

TEST_CASE("stereo wav is rejected") {
    // Minimal RIFF with a 2-channel fmt chunk and empty data chunk.
    std::vector<std::uint8_t> wav = {
        'R', 'I', 'F', 'F', 36, 0, 0, 0, 'W', 'A', 'V', 'E',
        'f', 'm', 't', ' ', 16, 0, 0, 0,
        1, 0,             // PCM
        2, 0,             // channels = 2
        0x40, 0x1f, 0, 0, // 8000 Hz
        0, 0x7d, 0, 0,    // byte rate
        4, 0, 16, 0,      // block align, bits
        'd', 'a', 't', 'a', 0, 0, 0, 0};
    const fs::path path = temp_dir() / "stereo.wav";
    write_bytes(path, wav);
    CHECK_THROWS_WITH_AS(load_pcm(path.string(), PcmFormat::Wav16Mono),
                         doctest::Contains("mono required"), std::runtime_error);
}

TEST_CASE("wav and raw round trips stay within int16 resolution") {
    SplitMix64 rng(7);
    PcmSignal s;
    s.sample_rate_hz = 8000;
    for (int i = 0; i < 1000; ++i) s.samples.push_back(rng.next_symmetric() * 0.99);

    for (PcmFormat format : {PcmFormat::Raw16Le, PcmFormat::Wav16Mono}) {
        const fs::path path =
            temp_dir() / (format == PcmFormat::Raw16Le ? "rt.raw" : "rt.wav");
        save_pcm(s, path.string(), format);
        const PcmSignal back = load_pcm(path.string(), format, 8000);
        REQUIRE(back.samples.size() == s.samples.size());
        CHECK(back.sample_rate_hz == 8000);
        for (std::size_t i = 0; i < s.samples.size(); ++i)
            CHECK(std::abs(back.samples[i] - s.samples[i]) <= 1.0 / 65536.0);
    }
}

TEST_CASE("concat_corpus preserves order and length") {
    PcmSignal a, b;
    a.sample_rate_hz = b.sample_rate_hz = 8000;
    a.samples.assign(100, 0.25);
    b.samples.assign(50, -0.5);
    const PcmSignal joined = concat_corpus({a, b});
    REQUIRE(joined.samples.size() == 150);
    CHECK(joined.samples[0] == 0.25);
    CHECK(joined.samples[149] == -0.5);

    const PcmSignal same = concat_corpus({a});
    CHECK(same.samples == a.samples);
}

TEST_CASE("concat_corpus rejects mixed rates") {
    PcmSignal a, b;
    a.sample_rate_hz = 8000;
    b.sample_rate_hz = 16000;
    a.samples = {0.0};
    b.samples = {0.0};
    CHECK_THROWS_AS(concat_corpus({a, b}), std::invalid_argument);
}

TEST_CASE("concat_corpus is associative in the sample sequence") {
    SplitMix64 rng(11);
    std::vector<PcmSignal> parts(3);
    for (PcmSignal& p : parts) {
        p.sample_rate_hz = 8000;
        const std::size_t len = 1 + (rng.next() % 40);
        for (std::size_t i = 0; i < len; ++i) p.samples.push_back(rng.next_symmetric());
    }
    const PcmSignal left = concat_corpus({concat_corpus({parts[0], parts[1]}), parts[2]});
    const PcmSignal right = concat_corpus({parts[0], concat_corpus({parts[1], parts[2]})});
    CHECK(left.samples == right.samples);
}

TEST_CASE("frames covers the signal with a true-length tail") {
    PcmSignal s;
    s.samples.assign(450, 0.0);
    const std::vector<FrameView> f = frames(s, 200);
    REQUIRE(f.size() == 3);
    CHECK(f[0].length == 200);
    CHECK(f[1].length == 200);
    CHECK(f[2].length == 50);
    CHECK(f[2].start == 400);

    s.samples.assign(200, 0.0);
    CHECK(frames(s, 200).size() == 1);

    s.samples.clear();
    CHECK(frames(s, 200).empty());
}
