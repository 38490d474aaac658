#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "adpcm/quantizer.hpp"
#include "adpcm/rng.hpp"

using namespace adpcm;

TEST_CASE("mid-rise quantizer has no zero level") {
    const AdaptiveResidualQuantizer q = make_residual_quantizer(3, 1.0, 1e-5, 4.0);
    const RqEncodeResult res = rq_quantize(q, 0.0);
    CHECK(res.code == 0);
    CHECK(res.reconstructed == 0.5);
    CHECK(res.next.step == doctest::Approx(1.0 * q.multipliers[0]));
}

TEST_CASE("overload errors saturate at the outer level") {
    const AdaptiveResidualQuantizer q = make_residual_quantizer(2, 1.0, 1e-5, 4.0);
    const RqEncodeResult res = rq_quantize(q, 10.0);
    CHECK(res.code == 2); // magnitude 1, positive
    CHECK(res.reconstructed == 1.5);
    CHECK(res.next.step == doctest::Approx(std::min(1.0 * q.multipliers[1], 4.0)));

    const RqEncodeResult neg = rq_quantize(q, -10.0);
    CHECK(neg.code == 3);
    CHECK(neg.reconstructed == -1.5);
}

TEST_CASE("quantization error is bounded by step/2 when unclipped") {
    AdaptiveResidualQuantizer q = make_residual_quantizer(4);
    SplitMix64 rng(12);
    for (int n = 0; n < 200000; ++n) {
        const double e = 0.3 * rng.next_symmetric();
        const RqEncodeResult res = rq_quantize(q, e);
        if (std::abs(e) < q.step * static_cast<double>(q.magnitude_levels()))
            CHECK(std::abs(e - res.reconstructed) <= q.step / 2 * (1.0 + 1e-12));
        CHECK(res.next.step >= q.step_min);
        CHECK(res.next.step <= q.step_max);
        q = res.next;
    }
}

TEST_CASE("dequantize mirrors quantize for every code") {
    const AdaptiveResidualQuantizer q = make_residual_quantizer(5, 0.1, 1e-5, 1.0);
    for (int code = 0; code < q.levels(); ++code) {
        const RqDecodeResult dec = rq_dequantize(q, code);
        const int m = code >> 1;
        const double expect = ((code & 1) ? -1.0 : 1.0) * (m + 0.5) * q.step;
        CHECK(dec.reconstructed == expect);
        CHECK(dec.next.step == std::clamp(q.step * q.multipliers[m], q.step_min, q.step_max));
    }
    CHECK_THROWS_AS(rq_dequantize(q, q.levels()), std::out_of_range);
    CHECK_THROWS_AS(rq_dequantize(q, -1), std::out_of_range);
}

TEST_CASE("encoder and decoder quantizer states stay synchronized") {
    AdaptiveResidualQuantizer enc = make_residual_quantizer(3);
    AdaptiveResidualQuantizer dec = enc;
    SplitMix64 rng(77);
    for (int n = 0; n < 100000; ++n) {
        const double e = 0.5 * rng.next_symmetric();
        const RqEncodeResult er = rq_quantize(enc, e);
        const RqDecodeResult dr = rq_dequantize(dec, er.code);
        CHECK(dr.reconstructed == er.reconstructed);
        CHECK(dr.next.step == er.next.step);
        enc = er.next;
        dec = dr.next;
    }
}

TEST_CASE("multiplier tables must adapt both ways") {
    CHECK_THROWS_AS(make_residual_quantizer(2, 0.02, 1e-5, 1.0, {1.2, 1.6}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_residual_quantizer(2, 0.02, 1e-5, 1.0, {0.8, 0.9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_residual_quantizer(6), std::invalid_argument);
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

double training_mse(const WeightQuantizer& q, const std::vector<double>& samples) {
    double mse = 0.0;
    for (double v : samples) {
        const double d = v - wq_decode(q, wq_encode(q, v));
        mse += d * d;
    }
    return mse / static_cast<double>(samples.size());
}

} // namespace

TEST_CASE("uniform design splits the clipped range evenly") {
    const std::vector<double> samples = linspace(0.0, 1.0, 10001);

    const WeightQuantizer two_cell = design_uniform(samples, 1, 0.0);
    REQUIRE(two_cell.thresholds.size() == 1);
    CHECK(two_cell.thresholds[0] == doctest::Approx(0.5));
    CHECK(two_cell.levels[0] == doctest::Approx(0.25));
    CHECK(two_cell.levels[1] == doctest::Approx(0.75));

    const WeightQuantizer clipped = design_uniform(samples, 4, 0.2);
    CHECK(clipped.thresholds.front() == doctest::Approx(0.1 + 0.8 / 16).epsilon(1e-3));
    CHECK(clipped.levels.front() == doctest::Approx(0.1 + 0.8 / 32).epsilon(1e-3));
    CHECK(clipped.levels.back() == doctest::Approx(0.9 - 0.8 / 32).epsilon(1e-3));

    CHECK_THROWS_AS(design_uniform(std::vector<double>(5, 1.0), 3, 0.0), std::invalid_argument);
}

TEST_CASE("uniform in-range round trip stays within half a cell") {
    const std::vector<double> samples = linspace(-1.0, 1.0, 4097);
    SplitMix64 rng(9);
    for (int bits = 1; bits <= 10; ++bits) {
        const WeightQuantizer q = design_uniform(samples, bits, 0.0);
        const double half_cell = 2.0 / static_cast<double>(1 << (bits + 1));
        for (int n = 0; n < 2000; ++n) {
            const double v = rng.next_symmetric();
            const double err = std::abs(v - wq_decode(q, wq_encode(q, v)));
            CHECK(err <= half_cell * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("equal occupancy on a uniform distribution matches the uniform design") {
    const std::vector<double> samples = linspace(0.0, 1.0, 100000);
    const WeightQuantizer q = design_equal_occupancy(samples, 1);
    CHECK(q.thresholds[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(q.levels[0] == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(q.levels[1] == doctest::Approx(0.75).epsilon(1e-3));
}

TEST_CASE("equal occupancy balances cell counts for bits 1..10") {
    SplitMix64 rng(4);
    std::vector<double> samples(100000);
    for (double& v : samples) v = rng.next_unit() * rng.next_unit(); // skewed
    std::sort(samples.begin(), samples.end());

    for (int bits = 1; bits <= 10; ++bits) {
        const WeightQuantizer q = design_equal_occupancy(samples, bits);
        std::vector<std::size_t> counts(static_cast<std::size_t>(1) << bits, 0);
        for (double v : samples) ++counts[static_cast<std::size_t>(wq_encode(q, v))];
        const std::size_t lo = samples.size() / counts.size();
        for (std::size_t c : counts) {
            CHECK(c >= lo);
            CHECK(c <= lo + 1);
        }
    }
}

TEST_CASE("equal occupancy tracks an exponential shape") {
    // Inverse-CDF grid: dense near zero, stretched in the tail.
    std::vector<double> samples(100000);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(samples.size());
        samples[i] = -std::log(1.0 - u);
    }
    const WeightQuantizer q = design_equal_occupancy(samples, 3);

    for (std::size_t i = 2; i < q.thresholds.size(); ++i)
        CHECK(q.thresholds[i] - q.thresholds[i - 1] >=
              (q.thresholds[i - 1] - q.thresholds[i - 2]) * 0.99);

    std::vector<std::size_t> counts(8, 0);
    for (double v : samples) ++counts[static_cast<std::size_t>(wq_encode(q, v))];
    for (std::size_t c : counts) {
        CHECK(static_cast<double>(c) >= samples.size() / 8.0 * 0.98);
        CHECK(static_cast<double>(c) <= samples.size() / 8.0 * 1.02);
    }
}

TEST_CASE("equal occupancy with exactly 2^bits distinct values pins levels to them") {
    const std::vector<double> samples = {0.1, 0.2, 0.35, 0.5, 1.0, 2.0, 4.0, 8.0};
    const WeightQuantizer q = design_equal_occupancy(samples, 3);
    REQUIRE(q.levels.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(q.levels[i] == samples[i]);

    CHECK_THROWS_WITH_AS(design_equal_occupancy(samples, 4),
                         doctest::Contains("too few distinct values"), std::invalid_argument);
}

TEST_CASE("equal occupancy survives heavy ties") {
    std::vector<double> samples;
    for (int i = 0; i < 100; ++i) samples.push_back(0.0);
    for (int i = 0; i < 5; ++i) samples.push_back(1.0 + i);
    std::sort(samples.begin(), samples.end());
    const WeightQuantizer q = design_equal_occupancy(samples, 2);
    CHECK(q.tie_adjusted);
    for (std::size_t i = 1; i < q.thresholds.size(); ++i)
        CHECK(q.thresholds[i] > q.thresholds[i - 1]);
    // All tied zeros land in a single cell.
    const int zero_cell = wq_encode(q, 0.0);
    CHECK(wq_decode(q, zero_cell) == 0.0);
}

TEST_CASE("cell means are MSE-optimal for the training set") {
    SplitMix64 rng(15);
    std::vector<double> samples(20000);
    for (double& v : samples) v = rng.next_symmetric() + 0.3 * rng.next_symmetric();
    std::sort(samples.begin(), samples.end());

    const WeightQuantizer q = design_equal_occupancy(samples, 4);
    const double base_mse = training_mse(q, samples);
    for (std::size_t i = 0; i < q.levels.size(); ++i) {
        const double width_lo = i == 0 ? q.thresholds[0] - q.levels[0]
                                       : q.thresholds[std::min(i, q.thresholds.size() - 1)] -
                                             q.thresholds[i - 1];
        for (double delta : {-0.1 * width_lo, 0.1 * width_lo}) {
            WeightQuantizer perturbed = q;
            perturbed.levels[i] += delta;
            CHECK(training_mse(perturbed, samples) >= base_mse - 1e-15);
        }
    }
}

TEST_CASE("wq_encode agrees with a linear threshold scan and is monotone") {
    SplitMix64 rng(33);
    std::vector<double> samples(5000);
    for (double& v : samples) v = rng.next_symmetric() * 2.0;
    std::sort(samples.begin(), samples.end());
    const WeightQuantizer q = design_equal_occupancy(samples, 5);

    for (int n = 0; n < 5000; ++n) {
        const double v = 5.0 * rng.next_symmetric();
        int scan = 0;
        while (scan < static_cast<int>(q.thresholds.size()) &&
               q.thresholds[static_cast<std::size_t>(scan)] <= v)
            ++scan;
        CHECK(wq_encode(q, v) == scan);
    }

    std::vector<double> probes(1000);
    for (double& v : probes) v = 5.0 * rng.next_symmetric();
    std::sort(probes.begin(), probes.end());
    int prev = 0;
    for (double v : probes) {
        const int code = wq_encode(q, v);
        CHECK(code >= prev);
        prev = code;
    }

    CHECK(wq_encode(q, -100.0) == 0);
    const double level3 = q.levels[3];
    CHECK(wq_decode(q, wq_encode(q, level3)) == level3);
    CHECK_THROWS_AS(wq_decode(q, 1 << 5), std::out_of_range);
}

TEST_CASE("allocation bit arithmetic") {
    CHECK(allocation_bits_per_frame({7, 10, 7, 10}) == 184);
    CHECK(allocation_bits_per_frame({10, 10, 10, 10}) == 250);
    CHECK(allocation_bits_per_frame({1, 1, 1, 1}) == 25);
}

TEST_CASE("codebook files round trip bit-exactly") {
    const std::vector<double> samples = linspace(-0.8, 1.3, 5000);
    WeightQuantizerBank bank;
    bank.groups[0] = design_equal_occupancy(samples, 7);
    bank.groups[1] = design_uniform(samples, 10, 0.01);
    bank.groups[2] = design_equal_occupancy(samples, 7);
    bank.groups[3] = design_uniform(samples, 10, 0.0);

    const auto dir = std::filesystem::temp_directory_path() / "adpcmlab_quant_tests";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "bank.nlwq").string();
    save_codebooks(bank, path);
    const WeightQuantizerBank back = load_codebooks(path);

    for (std::size_t g = 0; g < 4; ++g) {
        CHECK(back.groups[g].kind == bank.groups[g].kind);
        CHECK(back.groups[g].bits == bank.groups[g].bits);
        CHECK(back.groups[g].thresholds == bank.groups[g].thresholds);
        CHECK(back.groups[g].levels == bank.groups[g].levels);
    }
    CHECK(back.checksum() == bank.checksum());
    CHECK(back.allocation() == BitAllocation{7, 10, 7, 10});

    std::vector<std::uint8_t> bytes = serialize_codebooks(bank);
    bytes[0] = 'X';
    CHECK_THROWS_AS(parse_codebooks(bytes), std::runtime_error);
    bytes[0] = 'N';
    bytes.pop_back();
    CHECK_THROWS_AS(parse_codebooks(bytes), std::runtime_error);
}
