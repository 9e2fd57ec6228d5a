#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spdtan/estimators.hpp"
#include "spdtan/evaluation.hpp"
#include "spdtan/pipeline.hpp"
#include "spdtan/synth.hpp"
#include "test_support.hpp"

using namespace spdtan;

namespace {

CohortSpec small_spec(std::uint64_t seed, double effect) {
    CohortSpec spec;
    spec.n_subjects = 24;
    spec.n_channels = 4;
    spec.samples_per_second = 64.0;
    spec.duration_seconds = 32.0;
    spec.seed = seed;
    spec.effect_size = effect;
    return spec;
}

/// Naive periodogram power in [low, high) Hz.
double band_power(std::span<const double> x, double fs, double low, double high) {
    const long n = static_cast<long>(x.size());
    double acc = 0.0;
    for (long k = 1; k < n / 2; ++k) {
        const double freq = fs * static_cast<double>(k) / n;
        if (freq < low || freq >= high) continue;
        double re = 0.0, im = 0.0;
        const double w = -2.0 * std::numbers::pi * k / n;
        for (long i = 0; i < n; ++i) {
            re += x[i] * std::cos(w * i);
            im += x[i] * std::sin(w * i);
        }
        acc += re * re + im * im;
    }
    return acc;
}

CohortTable table_from(const GroundTruth& truth) {
    CohortTable table;
    for (int z = 0; z < truth.spec.n_subjects; ++z) {
        table.ids.push_back("s" + std::to_string(z));
    }
    table.targets = truth.targets;
    auto [names, values] = covariate_table(truth);
    table.covariate_names = std::move(names);
    table.covariates = std::move(values);
    return table;
}

/// In-memory featurization: per-subject matrices, geometry mean, fold
/// featurizer over the means.
SubjectMeans means_from(const Cohort& cohort, GeometryKind geometry, MatrixDesign design) {
    SubjectMeans means;
    means.covariate_names = cohort.covariate_names;
    means.covariates = cohort.covariates;
    for (std::size_t z = 0; z < cohort.recordings.size(); ++z) {
        means.ids.push_back("s" + std::to_string(z));
        const auto matrices = build_subject_matrices(
            cohort.recordings[z], DependenceKind::Covariance, design, cohort.truth.bands, 4.0);
        means.means.push_back(subject_mean(matrices, geometry));
    }
    return means;
}

}  // namespace

TEST_CASE("cohort planning is bit-deterministic; rendering too") {
    const CohortSpec spec = small_spec(11, 0.6);
    const GroundTruth a = plan_cohort(spec);
    const GroundTruth b = plan_cohort(spec);
    CHECK(to_json_string(a) == to_json_string(b));
    const Recording ra = render_recording(a, 3);
    const Recording rb = render_recording(b, 3);
    CHECK((ra.data - rb.data).cwiseAbs().maxCoeff() == 0.0);

    CohortSpec other = spec;
    other.seed = 12;
    CHECK(to_json_string(plan_cohort(other)) != to_json_string(a));
}

TEST_CASE("ground truth JSON round trip") {
    const GroundTruth truth = plan_cohort(small_spec(5, 0.4));
    const GroundTruth back = ground_truth_from_json(to_json_string(truth));
    CHECK(to_json_string(back) == to_json_string(truth));
}

TEST_CASE("spec validation") {
    CohortSpec spec = small_spec(1, 0.5);
    spec.n_subjects = 5;
    CHECK_THROWS_AS(plan_cohort(spec), ArgumentError);
    spec = small_spec(1, 1.5);
    CHECK_THROWS_AS(plan_cohort(spec), ArgumentError);
    spec = small_spec(1, 0.5);
    spec.samples_per_second = 20.0;
    CHECK_THROWS_AS(plan_cohort(spec), ArgumentError);
}

TEST_CASE("effect size endpoints: zero kills the signal, one kills the noise") {
    const GroundTruth null_truth = plan_cohort(small_spec(3, 0.0));
    CHECK(null_truth.signal_scale == 0.0);
    CHECK(null_truth.noise_sd == 1.0);

    const GroundTruth pure = plan_cohort(small_spec(3, 1.0));
    CHECK(pure.noise_sd == 0.0);
    CHECK(pure.signal_scale == 1.0);

    // Same seed: the latents agree, only the target mixing differs.
    CHECK((null_truth.oracle - pure.oracle).cwiseAbs().maxCoeff() == 0.0);
    CHECK((null_truth.targets - pure.targets).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("subject band covariances are SPD perturbations of the group mean") {
    const GroundTruth truth = plan_cohort(small_spec(7, 0.5));
    for (const auto& g : truth.group_band_covariance) {
        CHECK(eig_sym(SymmetricMatrix::symmetrized(g)).eigenvalues(0) > 0.0);
    }
    double mean_dist = 0.0;
    int count = 0;
    for (const auto& sub : truth.subjects) {
        for (std::size_t b = 0; b < sub.band_covariance.size(); ++b) {
            const SpdMatrix c(SymmetricMatrix::symmetrized(sub.band_covariance[b]));
            const SpdMatrix g(SymmetricMatrix::symmetrized(truth.group_band_covariance[b]));
            mean_dist += dist_riemannian(g, c);
            ++count;
        }
    }
    mean_dist /= count;
    // Geodesic spread tracks the disturbance-norm parameter.
    CHECK(mean_dist > 0.1 * truth.spec.disturbance_norm);
    CHECK(mean_dist < 3.0 * truth.spec.disturbance_norm);
}

TEST_CASE("oracle features with effect 1 support near-perfect prediction") {
    const GroundTruth truth = plan_cohort(small_spec(13, 1.0));
    CohortTable table = table_from(truth);
    CvConfig cfg;
    cfg.n_lambdas = 40;
    cfg.lambda_ratio = 1e-10;
    cfg.tol = 1e-11;
    const CvReport report = repeat_cv(
        table, constant_featurizer(truth.oracle, truth.oracle_names), 1, 42, cfg);
    CHECK(report.mean_rmse <= 1e-6);
}

TEST_CASE("oracle CV error sits near the analytic noise floor at effect 0.5") {
    double total_ratio = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        CohortSpec spec = small_spec(100 + s, 0.5);
        spec.n_subjects = 60;  // keeps fold-level estimation noise small
        const GroundTruth truth = plan_cohort(spec);
        CohortTable table = table_from(truth);
        CvConfig cfg;
        cfg.n_lambdas = 30;
        cfg.lambda_ratio = 1e-4;
        const CvReport report = repeat_cv(
            table, constant_featurizer(truth.oracle, truth.oracle_names), 1, 17, cfg);
        const double floor = truth.target_scale * truth.noise_sd;
        total_ratio += report.mean_rmse / floor;
    }
    const double mean_ratio = total_ratio / seeds;
    CHECK(mean_ratio >= 0.85);
    CHECK(mean_ratio <= 1.15);
}

TEST_CASE("segment covariance estimates converge to the implied covariance") {
    Matrix implied;
    std::vector<double> errors;
    for (double duration : {16.0, 64.0, 256.0}) {
        CohortSpec spec = small_spec(19, 0.5);
        spec.n_subjects = 20;
        spec.duration_seconds = duration;
        const GroundTruth truth = plan_cohort(spec);
        const Recording rec = render_recording(truth, 0);

        implied = Matrix::Zero(spec.n_channels, spec.n_channels);
        for (const auto& c : truth.subjects[0].band_covariance) implied += c;

        std::vector<SpdMatrix> covs;
        for (const auto& seg : segment(rec, 4.0)) covs.push_back(sample_covariance(seg));
        const SpdMatrix mean = mean_euclidean(covs);
        errors.push_back((mean.mat() - implied).norm() / implied.norm());
    }
    CHECK(errors[1] < errors[0]);
    CHECK(errors[2] < errors[1]);
    CHECK(errors[2] <= 0.5 * errors[0]);  // roughly halves per quadrupling
}

TEST_CASE("band-limited sources concentrate their power in band") {
    // Same construction the renderer uses: shaped white noise per band.
    Rng rng(23);
    const double fs = 64.0;
    const long n = 4096;
    for (const auto& band : default_bands()) {
        const auto sos = butter_bandpass(4, band.low_hz, band.high_hz, fs);
        std::vector<double> white(n + 256);
        for (auto& w : white) w = rng.normal();
        const auto shaped = sosfilt(sos, white);
        const std::vector<double> kept(shaped.begin() + 256, shaped.end());
        const double in_band = band_power(kept, fs, band.low_hz, band.high_hz);
        const double total = band_power(kept, fs, 0.0, fs / 2.0);
        CHECK(in_band >= 0.8 * total);
    }
}

TEST_CASE("rendered recordings concentrate power inside the filter bank span") {
    CohortSpec spec = small_spec(29, 0.5);
    spec.duration_seconds = 32.0;
    const GroundTruth truth = plan_cohort(spec);
    const Recording rec = render_recording(truth, 1);
    std::vector<double> ch(rec.n_samples());
    Eigen::Map<Vector>(ch.data(), rec.n_samples()) = rec.data.row(0);
    const std::vector<double> head(ch.begin(), ch.begin() + 2048);
    const double in_span = band_power(head, spec.samples_per_second, 1.5, 16.0);
    const double total = band_power(head, spec.samples_per_second, 0.0,
                                    spec.samples_per_second / 2.0);
    CHECK(in_span >= 0.8 * total);
}

TEST_CASE("pipeline RMSE is non-increasing in effect size") {
    std::vector<double> rmses;
    for (double effect : {0.0, 0.4, 0.8}) {
        CohortSpec spec = small_spec(311, effect);
        spec.n_channels = 5;
        spec.n_subjects = 40;
        spec.duration_seconds = 48.0;
        const Cohort cohort = generate_cohort(spec);
        const SubjectMeans means =
            means_from(cohort, GeometryKind::LogEuclidean, MatrixDesign::Spatiofrequential);
        CohortTable table = table_from(cohort.truth);
        CvConfig cfg;
        cfg.n_lambdas = 25;
        const CvReport report = repeat_cv(
            table, make_manifold_featurizer(means, GeometryKind::LogEuclidean, true), 2, 7,
            cfg);
        rmses.push_back(report.mean_rmse);
    }
    CHECK(rmses[1] <= rmses[0]);
    CHECK(rmses[2] <= rmses[1]);
}

TEST_CASE("the pipeline never beats the oracle features") {
    CohortSpec spec = small_spec(411, 0.5);
    spec.n_channels = 5;
    spec.n_subjects = 30;
    const Cohort cohort = generate_cohort(spec);
    CohortTable table = table_from(cohort.truth);
    CvConfig cfg;
    cfg.n_lambdas = 20;

    const CvReport oracle = repeat_cv(
        table, constant_featurizer(cohort.truth.oracle, cohort.truth.oracle_names), 2, 3, cfg);
    const SubjectMeans means =
        means_from(cohort, GeometryKind::LogEuclidean, MatrixDesign::Spatiofrequential);
    const CvReport pipeline = repeat_cv(
        table, make_manifold_featurizer(means, GeometryKind::LogEuclidean, true), 2, 3, cfg);

    const double target_sd =
        std::sqrt((table.targets.array() - table.targets.mean()).square().sum() /
                  table.targets.size());
    CHECK(pipeline.mean_rmse >= oracle.mean_rmse - 0.1 * target_sd);
}

TEST_CASE("covariate table shape follows the target kind") {
    CohortSpec spec = small_spec(31, 0.5);
    spec.target_kind = TargetKind::BrainVolLike;
    auto [names_b, values_b] = covariate_table(plan_cohort(spec));
    CHECK(names_b == std::vector<std::string>{"age", "gender"});
    CHECK(values_b.cols() == 2);

    spec.target_kind = TargetKind::HippVolLike;
    auto [names_h, values_h] = covariate_table(plan_cohort(spec));
    CHECK(names_h == std::vector<std::string>{"age", "gender", "field_strength"});
    for (int z = 0; z < values_h.rows(); ++z) {
        const double f = values_h(z, 2);
        CHECK((f == 1.5 || f == 3.0));
    }
}
