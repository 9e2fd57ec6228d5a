#include "spdtan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spdtan/butterworth.hpp"
#include "spdtan/estimators.hpp"
#include "spdtan/manifold.hpp"
#include "spdtan/rng.hpp"

namespace spdtan {

using nlohmann::json;

std::string to_string(TargetKind t) {
    return t == TargetKind::BrainVolLike ? "brainvol_like" : "hippvol_like";
}

TargetKind target_kind_from_string(const std::string& s) {
    if (s == "brainvol_like") return TargetKind::BrainVolLike;
    if (s == "hippvol_like") return TargetKind::HippVolLike;
    throw ArgumentError("unknown target kind '" + s +
                        "' (expected brainvol_like | hippvol_like)");
}

void validate_cohort_spec(const CohortSpec& spec) {
    if (spec.n_subjects < 20) {
        throw ArgumentError("cohort spec: need at least 20 subjects, got " +
                            std::to_string(spec.n_subjects));
    }
    if (spec.n_channels < 2) throw ArgumentError("cohort spec: need at least 2 channels");
    if (!(spec.samples_per_second > 30.0)) {
        throw ArgumentError("cohort spec: sampling rate must exceed 30 Hz (the filter bank "
                            "tops out at 15 Hz)");
    }
    if (!(spec.duration_seconds >= 8.0)) {
        throw ArgumentError("cohort spec: duration must be at least 8 seconds");
    }
    if (spec.effect_size < 0.0 || spec.effect_size > 1.0) {
        throw ArgumentError("cohort spec: effect size must be in [0, 1]");
    }
    if (!(spec.disturbance_norm > 0.0)) {
        throw ArgumentError("cohort spec: disturbance norm must be positive");
    }
}

namespace {

// Seed-stream tags so every random draw has a fixed, documented origin.
constexpr std::uint64_t kStreamGroup = 0x47;
constexpr std::uint64_t kStreamSubjectBase = 0x10000;
constexpr std::uint64_t kStreamCoefficients = 0x11;
constexpr std::uint64_t kStreamNoise = 0x12;
constexpr std::uint64_t kStreamCovariates = 0x13;

Matrix random_orthogonal(int dim, Rng& rng) {
    Matrix gauss(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) gauss(i, j) = rng.normal();
    const Eigen::HouseholderQR<Matrix> qr(gauss);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

Matrix random_group_covariance(int dim, Rng& rng) {
    const Matrix q = random_orthogonal(dim, rng);
    Vector eigenvalues(dim);
    for (int i = 0; i < dim; ++i) eigenvalues(i) = std::exp(rng.uniform(-0.7, 0.7));
    return q * eigenvalues.asDiagonal() * q.transpose();
}

/// Symmetric Gaussian disturbance with expected Frobenius norm ~ norm.
Matrix random_tangent(int dim, double norm, Rng& rng) {
    Matrix t(dim, dim);
    const double scale = norm / static_cast<double>(dim);
    for (int i = 0; i < dim; ++i) {
        t(i, i) = scale * rng.normal();
        for (int j = i + 1; j < dim; ++j) {
            const double v = scale * rng.normal() / std::sqrt(2.0);
            t(i, j) = t(j, i) = v;
        }
    }
    return t;
}

/// Planted sites carry a fixed standard deviation, independent of the
/// dimension-scaled background: segment-level estimation noise of a
/// band-limited process is ~1/sqrt(2 * bandwidth * total seconds) per
/// tangent entry, and the planted signal has to clear it at n = 19.
constexpr double kPlantedSiteSd = 0.2;

/// Planted site in the tangent disturbance E of one band (C = G^{1/2}
/// exp(E) G^{1/2}): a diagonal entry is a log band-power deviation, an
/// off-diagonal one a cross-channel coupling.
struct PlantedTerm {
    int band;
    int row;
    int col;
};

// Few sites, so each keeps a target correlation clear of the max spurious
// correlation among ~3000 features at a ~100-subject cohort.
std::vector<PlantedTerm> choose_terms(int n_bands, int n_channels, Rng& rng) {
    std::vector<PlantedTerm> terms;
    for (int k = 0; k < 2; ++k) {
        const int band = static_cast<int>(rng.uniform_below(n_bands));
        const int ch = static_cast<int>(rng.uniform_below(n_channels));
        terms.push_back({band, ch, ch});
    }
    {
        const int band = static_cast<int>(rng.uniform_below(n_bands));
        const int i = static_cast<int>(rng.uniform_below(n_channels));
        int j = static_cast<int>(rng.uniform_below(n_channels));
        if (j == i) j = (j + 1) % n_channels;
        terms.push_back({band, std::min(i, j), std::max(i, j)});
    }
    return terms;
}

}  // namespace

GroundTruth plan_cohort(const CohortSpec& spec) {
    validate_cohort_spec(spec);
    const int n = spec.n_channels;

    GroundTruth truth;
    truth.spec = spec;
    truth.bands = default_bands();
    const int n_bands = static_cast<int>(truth.bands.size());

    Rng group_rng(derive_seed(spec.seed, kStreamGroup));
    truth.group_band_covariance.reserve(n_bands);
    for (int b = 0; b < n_bands; ++b) {
        truth.group_band_covariance.push_back(random_group_covariance(n, group_rng));
    }
    const std::vector<PlantedTerm> terms = choose_terms(n_bands, n, group_rng);

    // Subject latents: geodesic perturbations of the group mean per band.
    // The planted features are read straight off the tangent disturbances,
    // the coordinates the tangent-space pipeline encodes affinely.
    const int k_terms = static_cast<int>(terms.size());
    truth.subjects.resize(spec.n_subjects);
    truth.oracle.resize(spec.n_subjects, k_terms);
    std::vector<Matrix> group_sqrt(n_bands);
    for (int b = 0; b < n_bands; ++b) {
        group_sqrt[b] = matrix_sqrt(SpdMatrix(truth.group_band_covariance[b])).mat();
    }
    Rng covariate_rng(derive_seed(spec.seed, kStreamCovariates));
    for (int z = 0; z < spec.n_subjects; ++z) {
        SubjectTruth& sub = truth.subjects[z];
        Rng rng(derive_seed(spec.seed, kStreamSubjectBase + static_cast<std::uint64_t>(z)));
        sub.band_covariance.reserve(n_bands);
        for (int b = 0; b < n_bands; ++b) {
            Matrix disturbance = random_tangent(n, spec.disturbance_norm, rng);
            for (int k = 0; k < k_terms; ++k) {
                if (terms[k].band != b) continue;
                const double v = kPlantedSiteSd * rng.normal();
                disturbance(terms[k].row, terms[k].col) = v;
                disturbance(terms[k].col, terms[k].row) = v;
                truth.oracle(z, k) = v;
            }
            const Matrix expd =
                matrix_exp(SymmetricMatrix::symmetrized(disturbance)).mat();
            sub.band_covariance.push_back(group_sqrt[b] * expd * group_sqrt[b]);
        }
        sub.age = std::floor(covariate_rng.uniform(55.0, 86.0));
        sub.gender = covariate_rng.bernoulli(0.45) ? 1 : 0;
        sub.field_strength = covariate_rng.bernoulli(0.5) ? 3.0 : 1.5;
    }

    for (const auto& term : terms) {
        std::ostringstream name;
        name << (term.row == term.col ? "logpower_" : "coupling_")
             << truth.bands[term.band].name << "_" << term.row;
        if (term.row != term.col) name << "_" << term.col;
        truth.oracle_names.push_back(name.str());
    }

    Rng coef_rng(derive_seed(spec.seed, kStreamCoefficients));
    truth.oracle_coefficients.resize(k_terms);
    for (int k = 0; k < k_terms; ++k) {
        truth.oracle_coefficients(k) = (coef_rng.bernoulli(0.5) ? 1.0 : -1.0) *
                                       coef_rng.uniform(0.5, 1.0);
    }

    Vector signal = truth.oracle * truth.oracle_coefficients;
    const double mean = signal.mean();
    const double sd = std::sqrt((signal.array() - mean).square().sum() /
                                static_cast<double>(spec.n_subjects));
    if (sd > 0.0) signal = (signal.array() - mean) / sd;

    // target (raw units) = sqrt(e) * signal + covariate effects + noise,
    // noise variance (1 - e), so the planted fraction of the non-covariate
    // variance is exactly the effect size.
    truth.signal_scale = std::sqrt(spec.effect_size);
    truth.noise_sd = std::sqrt(1.0 - spec.effect_size);
    const bool with_field = spec.target_kind == TargetKind::HippVolLike;
    if (spec.target_kind == TargetKind::BrainVolLike) {
        truth.target_offset = 0.82;
        truth.target_scale = 4.0e-3;
    } else {
        truth.target_offset = 4.4e-3;
        truth.target_scale = 4.0e-7;
    }

    Rng noise_rng(derive_seed(spec.seed, kStreamNoise));
    truth.targets.resize(spec.n_subjects);
    for (int z = 0; z < spec.n_subjects; ++z) {
        const SubjectTruth& sub = truth.subjects[z];
        double covariate_part = 0.3 * (sub.age - 70.0) / 8.66 + 0.4 * (sub.gender - 0.5);
        if (with_field) covariate_part += 0.3 * (sub.field_strength - 2.25) / 0.75;
        const double raw = truth.signal_scale * signal(z) + covariate_part +
                           truth.noise_sd * noise_rng.normal();
        truth.targets(z) = truth.target_offset + truth.target_scale * raw;
    }
    return truth;
}

Recording render_recording(const GroundTruth& truth, int subject_index) {
    const CohortSpec& spec = truth.spec;
    if (subject_index < 0 || subject_index >= spec.n_subjects) {
        throw ArgumentError("render_recording: subject index out of range");
    }
    const int n = spec.n_channels;
    const long t = static_cast<long>(std::llround(spec.duration_seconds *
                                                  spec.samples_per_second));
    const int n_bands = static_cast<int>(truth.bands.size());
    const SubjectTruth& sub = truth.subjects[subject_index];

    // Band-limited unit-variance processes: white noise shaped by the same
    // Butterworth band-pass the pipeline uses, normalized by the filter's
    // analytic white-noise power gain. A causal pass with a discarded
    // burn-in keeps the process stationary across the kept window.
    Rng rng(derive_seed(spec.seed ^ 0x5349474eULL,
                        kStreamSubjectBase + static_cast<std::uint64_t>(subject_index)));
    const long burn_in = static_cast<long>(std::llround(4.0 * spec.samples_per_second));

    Matrix data = Matrix::Zero(n, t);
    std::vector<double> white(burn_in + t);
    for (int b = 0; b < n_bands; ++b) {
        const auto sos = butter_bandpass(4, truth.bands[b].low_hz, truth.bands[b].high_hz,
                                         spec.samples_per_second);
        const double gain = std::sqrt(white_noise_power_gain(sos));
        Matrix sources(n, t);
        for (int ch = 0; ch < n; ++ch) {
            for (auto& w : white) w = rng.normal();
            const std::vector<double> shaped = sosfilt(sos, white);
            for (long i = 0; i < t; ++i) sources(ch, i) = shaped[burn_in + i] / gain;
        }
        const Matrix mixing = matrix_sqrt(SpdMatrix(sub.band_covariance[b])).mat();
        data += mixing * sources;
    }

    Recording rec;
    rec.samples_per_second = spec.samples_per_second;
    rec.paradigm = spec.paradigm;
    rec.data = std::move(data);
    rec.channels.reserve(n);
    for (int ch = 0; ch < n; ++ch) rec.channels.push_back("ch" + std::to_string(ch));
    return rec;
}

std::pair<std::vector<std::string>, Matrix> covariate_table(const GroundTruth& truth) {
    const bool with_field = truth.spec.target_kind == TargetKind::HippVolLike;
    std::vector<std::string> names = {"age", "gender"};
    if (with_field) names.push_back("field_strength");
    Matrix values(truth.spec.n_subjects, static_cast<int>(names.size()));
    for (int z = 0; z < truth.spec.n_subjects; ++z) {
        values(z, 0) = truth.subjects[z].age;
        values(z, 1) = truth.subjects[z].gender;
        if (with_field) values(z, 2) = truth.subjects[z].field_strength;
    }
    return {std::move(names), std::move(values)};
}

Cohort generate_cohort(const CohortSpec& spec) {
    Cohort cohort;
    cohort.truth = plan_cohort(spec);
    cohort.targets = cohort.truth.targets;
    auto [names, values] = covariate_table(cohort.truth);
    cohort.covariate_names = std::move(names);
    cohort.covariates = std::move(values);
    cohort.recordings.reserve(spec.n_subjects);
    for (int z = 0; z < spec.n_subjects; ++z) {
        cohort.recordings.push_back(render_recording(cohort.truth, z));
    }
    return cohort;
}

DesignMatrix oracle_features(const GroundTruth& truth) {
    auto [cov_names, cov_values] = covariate_table(truth);
    DesignMatrix d;
    d.column_names = truth.oracle_names;
    d.column_names.insert(d.column_names.end(), cov_names.begin(), cov_names.end());
    d.X.resize(truth.spec.n_subjects, truth.oracle.cols() + cov_values.cols());
    d.X.leftCols(truth.oracle.cols()) = truth.oracle;
    d.X.rightCols(cov_values.cols()) = cov_values;
    d.y = truth.targets;
    return d;
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return Matrix();
    Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            m(static_cast<long>(i), static_cast<long>(k)) = rows[i][k];
        }
    }
    return m;
}

}  // namespace

std::string to_json_string(const GroundTruth& truth) {
    json j;
    j["format_version"] = 1;
    j["spec"] = {{"n_subjects", truth.spec.n_subjects},
                 {"n_channels", truth.spec.n_channels},
                 {"samples_per_second", truth.spec.samples_per_second},
                 {"duration_seconds", truth.spec.duration_seconds},
                 {"seed", truth.spec.seed},
                 {"effect_size", truth.spec.effect_size},
                 {"target_kind", to_string(truth.spec.target_kind)},
                 {"disturbance_norm", truth.spec.disturbance_norm},
                 {"paradigm", truth.spec.paradigm}};
    json bands = json::array();
    for (const auto& b : truth.bands) {
        bands.push_back({{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}});
    }
    j["bands"] = std::move(bands);
    json group = json::array();
    for (const auto& g : truth.group_band_covariance) group.push_back(matrix_to_json(g));
    j["group_band_covariance"] = std::move(group);
    json subjects = json::array();
    for (const auto& sub : truth.subjects) {
        json cov = json::array();
        for (const auto& c : sub.band_covariance) cov.push_back(matrix_to_json(c));
        subjects.push_back({{"band_covariance", std::move(cov)},
                            {"age", sub.age},
                            {"gender", sub.gender},
                            {"field_strength", sub.field_strength}});
    }
    j["subjects"] = std::move(subjects);
    j["oracle_names"] = truth.oracle_names;
    j["oracle"] = matrix_to_json(truth.oracle);
    j["oracle_coefficients"] = std::vector<double>(
        truth.oracle_coefficients.data(),
        truth.oracle_coefficients.data() + truth.oracle_coefficients.size());
    j["signal_scale"] = truth.signal_scale;
    j["noise_sd"] = truth.noise_sd;
    j["target_offset"] = truth.target_offset;
    j["target_scale"] = truth.target_scale;
    j["targets"] = std::vector<double>(truth.targets.data(),
                                       truth.targets.data() + truth.targets.size());
    return j.dump(2);
}

GroundTruth ground_truth_from_json(const std::string& text) {
    const json j = json::parse(text);
    GroundTruth truth;
    const json& s = j.at("spec");
    truth.spec.n_subjects = s.at("n_subjects").get<int>();
    truth.spec.n_channels = s.at("n_channels").get<int>();
    truth.spec.samples_per_second = s.at("samples_per_second").get<double>();
    truth.spec.duration_seconds = s.at("duration_seconds").get<double>();
    truth.spec.seed = s.at("seed").get<std::uint64_t>();
    truth.spec.effect_size = s.at("effect_size").get<double>();
    truth.spec.target_kind = target_kind_from_string(s.at("target_kind").get<std::string>());
    truth.spec.disturbance_norm = s.at("disturbance_norm").get<double>();
    truth.spec.paradigm = s.at("paradigm").get<std::string>();
    for (const auto& b : j.at("bands")) {
        truth.bands.push_back({b.at("name").get<std::string>(), b.at("low_hz").get<double>(),
                               b.at("high_hz").get<double>()});
    }
    for (const auto& g : j.at("group_band_covariance")) {
        truth.group_band_covariance.push_back(matrix_from_json(g));
    }
    for (const auto& sub : j.at("subjects")) {
        SubjectTruth st;
        for (const auto& c : sub.at("band_covariance")) {
            st.band_covariance.push_back(matrix_from_json(c));
        }
        st.age = sub.at("age").get<double>();
        st.gender = sub.at("gender").get<int>();
        st.field_strength = sub.at("field_strength").get<double>();
        truth.subjects.push_back(std::move(st));
    }
    truth.oracle_names = j.at("oracle_names").get<std::vector<std::string>>();
    truth.oracle = matrix_from_json(j.at("oracle"));
    const auto coef = j.at("oracle_coefficients").get<std::vector<double>>();
    truth.oracle_coefficients =
        Eigen::Map<const Vector>(coef.data(), static_cast<long>(coef.size()));
    truth.signal_scale = j.at("signal_scale").get<double>();
    truth.noise_sd = j.at("noise_sd").get<double>();
    truth.target_offset = j.at("target_offset").get<double>();
    truth.target_scale = j.at("target_scale").get<double>();
    const auto targets = j.at("targets").get<std::vector<double>>();
    truth.targets = Eigen::Map<const Vector>(targets.data(), static_cast<long>(targets.size()));
    return truth;
}

}  // namespace spdtan
