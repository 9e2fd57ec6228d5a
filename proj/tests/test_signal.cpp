#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spdtan/butterworth.hpp"
#include "spdtan/signal.hpp"
#include "test_support.hpp"

using namespace spdtan;

namespace {

std::vector<double> sine(double hz, double fs, long n, double amplitude = 1.0) {
    std::vector<double> x(n);
    for (long i = 0; i < n; ++i) {
        x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * i / fs);
    }
    return x;
}

double rms(std::span<const double> x, long trim) {
    double acc = 0.0;
    long count = 0;
    for (long i = trim; i < static_cast<long>(x.size()) - trim; ++i) {
        acc += x[i] * x[i];
        ++count;
    }
    return std::sqrt(acc / count);
}

std::vector<double> white_noise(long n, Rng& rng) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    return x;
}

std::vector<double> random_walk(long n, Rng& rng, double step_sd = 1.0) {
    std::vector<double> x(n);
    double acc = 0.0;
    for (auto& v : x) {
        acc += step_sd * rng.normal();
        v = acc;
    }
    return x;
}

Recording make_recording(const Matrix& data, double fs, const std::string& paradigm = "EC") {
    Recording rec;
    rec.data = data;
    rec.samples_per_second = fs;
    rec.paradigm = paradigm;
    for (int ch = 0; ch < data.rows(); ++ch) rec.channels.push_back("ch" + std::to_string(ch));
    return rec;
}

/// Band-limited stationary noise occupying 2-30 Hz.
Matrix stationary_noise(int channels, long n, double fs, Rng& rng) {
    const auto sos = butter_bandpass(4, 2.0, 30.0, fs);
    Matrix data(channels, n);
    for (int ch = 0; ch < channels; ++ch) {
        const auto filtered = sosfiltfilt(sos, white_noise(n, rng));
        data.row(ch) = Eigen::Map<const Vector>(filtered.data(), n);
    }
    return data;
}

}  // namespace

TEST_CASE("butter_bandpass rejects invalid edges") {
    CHECK_THROWS_AS(butter_bandpass(4, 0.0, 4.0, 256.0), ArgumentError);
    CHECK_THROWS_AS(butter_bandpass(4, 8.0, 4.0, 256.0), ArgumentError);
    CHECK_THROWS_AS(butter_bandpass(4, 8.0, 200.0, 256.0), ArgumentError);
}

TEST_CASE("bandpass keeps in-band sinusoids and kills out-of-band ones") {
    const double fs = 256.0;
    const long n = 2048;
    Matrix data(1, n);
    data.row(0) = Eigen::Map<const Vector>(sine(10.0, fs, n).data(), n);
    const Segment seg{data};

    const Segment alpha = bandpass(seg, {"alpha", 8.0, 13.0}, fs);
    std::vector<double> out(alpha.data.row(0).begin(), alpha.data.row(0).end());
    std::vector<double> in(seg.data.row(0).begin(), seg.data.row(0).end());
    const double ratio_alpha = rms(out, 256) / rms(in, 256);
    CHECK(ratio_alpha > 0.95);
    CHECK(ratio_alpha < 1.05);

    const Segment delta = bandpass(seg, {"delta", 2.0, 4.0}, fs);
    std::vector<double> out_d(delta.data.row(0).begin(), delta.data.row(0).end());
    CHECK(rms(out_d, 256) / rms(in, 256) <= 0.1);
}

TEST_CASE("bandpass stopband attenuation is at least 20 dB") {
    const double fs = 256.0;
    const long n = 2048;
    Matrix data(1, n);
    data.row(0) = Eigen::Map<const Vector>(sine(20.0, fs, n).data(), n);
    const Segment out = bandpass(Segment{data}, {"alpha", 8.0, 13.0}, fs);
    std::vector<double> y(out.data.row(0).begin(), out.data.row(0).end());
    std::vector<double> x(data.row(0).begin(), data.row(0).end());
    CHECK(20.0 * std::log10(rms(x, 256) / rms(y, 256)) >= 20.0);
}

TEST_CASE("bandpass of zero signal is zero and output length matches") {
    const Segment zero{Matrix::Zero(2, 300)};
    const Segment out = bandpass(zero, {"alpha", 8.0, 13.0}, 128.0);
    CHECK(out.data.norm() == 0.0);
    CHECK(out.n_samples() == 300);
}

TEST_CASE("bandpass is linear") {
    Rng rng(6);
    const double fs = 128.0;
    const long n = 512;
    Matrix x(1, n), y(1, n);
    x.row(0) = Eigen::Map<const Vector>(white_noise(n, rng).data(), n);
    y.row(0) = Eigen::Map<const Vector>(white_noise(n, rng).data(), n);
    const BandSpec band{"theta", 4.0, 8.0};
    const Matrix combo = 2.5 * x - 1.25 * y;
    const Segment f_combo = bandpass(Segment{combo}, band, fs);
    const Matrix expected =
        2.5 * bandpass(Segment{x}, band, fs).data - 1.25 * bandpass(Segment{y}, band, fs).data;
    CHECK((f_combo.data - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("band filter bank is passive: band powers sum below total power") {
    Rng rng(10);
    const double fs = 256.0;
    const long n = 4096;
    Matrix data(1, n);
    data.row(0) = Eigen::Map<const Vector>(white_noise(n, rng).data(), n);
    const Segment seg{data};
    double band_power = 0.0;
    for (const auto& band : default_bands()) {
        band_power += bandpass(seg, band, fs).data.squaredNorm();
    }
    CHECK(band_power <= data.squaredNorm());
}

TEST_CASE("segment arithmetic: 180 s and 140 s at 256 Hz with 4-s windows") {
    Rng rng(11);
    const Recording ec = make_recording(test::rand_gaussian(2, 180 * 256, rng), 256.0);
    const auto segs_ec = segment(ec, 4.0);
    CHECK(segs_ec.size() == 45);
    CHECK(segs_ec.front().n_samples() == 1024);

    const Recording wlt = make_recording(test::rand_gaussian(2, 140 * 256, rng), 256.0, "WLT");
    CHECK(segment(wlt, 4.0).size() == 35);
}

TEST_CASE("segment drops the trailing partial segment") {
    Rng rng(12);
    const Recording rec = make_recording(test::rand_gaussian(2, 500, rng), 100.0);
    const auto segs = segment(rec, 4.0);
    CHECK(segs.size() == 1);
    CHECK(segs.front().n_samples() == 400);
    CHECK_THROWS_AS(segment(rec, 6.0), ArgumentError);
}

TEST_CASE("segments are mean-centered per channel unless disabled") {
    Rng rng(13);
    Matrix data = test::rand_gaussian(3, 1024, rng);
    data.array() += 5.0;  // strong offset
    const Recording rec = make_recording(data, 128.0);
    for (const auto& seg : segment(rec, 2.0)) {
        CHECK(seg.data.rowwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
    }
    const auto literal = segment(rec, 2.0, false);
    CHECK(literal.front().data.rowwise().mean().cwiseAbs().minCoeff() > 1.0);
}

TEST_CASE("segmentation round-trips a concatenation") {
    Rng rng(14);
    const Matrix data = test::rand_gaussian(2, 3 * 256, rng);
    const Recording rec = make_recording(data, 64.0);
    const auto segs = segment(rec, 4.0, false);
    REQUIRE(segs.size() == 3);
    Matrix glued(2, 3 * 256);
    for (int s = 0; s < 3; ++s) glued.middleCols(s * 256, 256) = segs[s].data;
    CHECK((glued - data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stack_bands shapes and block content, seed 17") {
    Rng rng(17);
    const double fs = 64.0;
    Matrix data = test::rand_gaussian(2, 64, rng);
    const Segment seg{data};
    const std::vector<BandSpec> two = {{"theta", 4.0, 8.0}, {"alpha", 8.0, 13.0}};
    const Segment stacked = stack_bands(seg, two, fs);
    CHECK(stacked.n_channels() == 4);
    CHECK(stacked.n_samples() == 64);
    CHECK((stacked.data.topRows(2) - bandpass(seg, two[0], fs).data).norm() == 0.0);
    CHECK((stacked.data.bottomRows(2) - bandpass(seg, two[1], fs).data).norm() == 0.0);

    const Segment one = stack_bands(seg, std::vector<BandSpec>{two[0]}, fs);
    CHECK(one.n_channels() == 2);

    // The four-band bank turns 19 channels into 76 rows.
    Rng rng2(18);
    const Segment eeg{test::rand_gaussian(19, 256, rng2)};
    CHECK(stack_bands(eeg, default_bands(), 256.0).n_channels() == 76);
}

TEST_CASE("adf_statistic rejects white noise, seed 21") {
    Rng rng(21);
    const auto noise = white_noise(1000, rng);
    CHECK(adf_statistic(noise, 1) < adf_critical_value(0.05));
}

TEST_CASE("adf_statistic Monte Carlo: white noise rejects, random walks do not") {
    int noise_rejections = 0;
    int walk_non_rejections = 0;
    const double critical = adf_critical_value(0.05);
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed) + 21);
        if (adf_statistic(white_noise(1000, rng), 1) < critical) ++noise_rejections;
        Rng rng2(static_cast<std::uint64_t>(seed) + 2121);
        if (adf_statistic(random_walk(1000, rng2), 1) >= critical) ++walk_non_rejections;
    }
    CHECK(noise_rejections >= 99);
    CHECK(walk_non_rejections >= 90);
}

TEST_CASE("adf_statistic is affine invariant") {
    Rng rng(23);
    const auto y = white_noise(600, rng);
    std::vector<double> transformed(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) transformed[i] = -3.7 * y[i] + 11.0;
    const double a = adf_statistic(y, 4);
    const double b = adf_statistic(transformed, 4);
    CHECK(std::abs(a - b) <= 1e-8);
}

TEST_CASE("adf_statistic error paths") {
    const std::vector<double> constant(100, 2.0);
    CHECK_THROWS_AS(adf_statistic(constant, 1), ArgumentError);
    const std::vector<double> tiny = {1.0, 2.0, 1.5};
    CHECK_THROWS_AS(adf_statistic(tiny, 1), ArgumentError);
    CHECK_THROWS_AS(adf_critical_value(0.2), ArgumentError);
}

TEST_CASE("adf default lag follows the fourth-root rule") {
    CHECK(adf_default_lag(100) == 12);
    CHECK(adf_default_lag(1024) == 21);
    CHECK(adf_default_lag(256) == 15);
}

TEST_CASE("choose_segment_length picks the longest quasi-stationary candidate") {
    Rng rng(31);
    const double fs = 128.0;
    const long n = static_cast<long>(64 * fs);
    const Recording stationary = make_recording(stationary_noise(3, n, fs, rng), fs);
    const std::vector<double> candidates = {2.0, 4.0, 8.0};
    CHECK(choose_segment_length(stationary, candidates) == 8.0);

    const std::vector<double> single = {4.0};
    CHECK(choose_segment_length(stationary, single) == 4.0);

    CHECK_THROWS_AS(choose_segment_length(stationary, std::vector<double>{}), ArgumentError);
}

TEST_CASE("slow drift shortens the chosen segment length") {
    Rng rng(37);
    const double fs = 128.0;
    const long n = static_cast<long>(64 * fs);
    const Matrix clean = stationary_noise(3, n, fs, rng);
    Matrix drifting = clean;
    for (int ch = 0; ch < 3; ++ch) {
        Rng walk_rng(100 + ch);
        const auto walk = random_walk(n, walk_rng, 0.1);
        drifting.row(ch) += Eigen::Map<const Vector>(walk.data(), n);
    }
    const std::vector<double> candidates = {2.0, 4.0, 8.0};
    const double with_drift =
        choose_segment_length(make_recording(drifting, fs), candidates);
    const double detrended =
        choose_segment_length(make_recording(clean, fs), candidates);
    CHECK(with_drift < detrended);
}
