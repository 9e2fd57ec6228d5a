// Seeded synthetic cohorts with planted ground truth: band-limited
// stochastic oscillators mixed through subject-specific spatial structure,
// targets generated as a linear function of log band powers and
// cross-channel couplings plus covariate effects and Gaussian noise.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdtan/regression.hpp"
#include "spdtan/signal.hpp"

namespace spdtan {

enum class TargetKind { BrainVolLike, HippVolLike };

std::string to_string(TargetKind t);
TargetKind target_kind_from_string(const std::string& s);

struct CohortSpec {
    int n_subjects = 110;
    int n_channels = 19;
    double samples_per_second = 256.0;
    double duration_seconds = 180.0;
    std::uint64_t seed = 0;
    double effect_size = 0.5;  // fraction of non-covariate target variance from the planted signal
    TargetKind target_kind = TargetKind::BrainVolLike;
    double disturbance_norm = 0.4;  // tangent-space spread of subject structure around the group mean
    std::string paradigm = "EC";
};

void validate_cohort_spec(const CohortSpec& spec);

/// Per-subject latent state: the mixing-implied per-band covariances and
/// the covariates.
struct SubjectTruth {
    std::vector<Matrix> band_covariance;  // one SPD matrix per band
    double age = 0.0;
    int gender = 0;
    double field_strength = 1.5;
};

/// Everything needed to reproduce targets and recordings: reproducible from
/// (spec, seed) alone.
struct GroundTruth {
    CohortSpec spec;
    std::vector<BandSpec> bands;
    std::vector<Matrix> group_band_covariance;  // group-level per-band SPD means
    std::vector<SubjectTruth> subjects;
    std::vector<std::string> oracle_names;  // planted feature names
    Matrix oracle;                          // n_subjects x k planted features
    Vector oracle_coefficients;             // on the standardized planted signal
    double signal_scale = 0.0;              // multiplies the standardized planted signal
    double noise_sd = 0.0;                  // in raw (unscaled) target units
    double target_offset = 0.0;
    double target_scale = 1.0;
    Vector targets;
};

struct Cohort {
    std::vector<Recording> recordings;
    Vector targets;
    std::vector<std::string> covariate_names;
    Matrix covariates;
    GroundTruth truth;
};

/// Latents, covariates and targets only; no time series are rendered.
/// Deterministic per (spec contents, spec.seed).
GroundTruth plan_cohort(const CohortSpec& spec);

/// Renders one subject's recording from the ground truth: per band, n
/// independent unit-variance band-limited processes mixed through the
/// subject's band covariance square root, summed over bands. The random
/// stream is derived from (cohort seed, subject index), so rendering is
/// order- and parallelism-invariant.
Recording render_recording(const GroundTruth& truth, int subject_index);

/// Covariate table implied by the ground truth (age, gender; plus
/// field_strength for HippVolLike cohorts).
std::pair<std::vector<std::string>, Matrix> covariate_table(const GroundTruth& truth);

/// Full in-memory cohort. Prefer plan_cohort + render_recording streaming
/// for large cohorts.
Cohort generate_cohort(const CohortSpec& spec);

/// The true generating features (planted terms + covariates) with the
/// targets as response; upper-bounds achievable accuracy, with noise floor
/// target_scale * noise_sd.
DesignMatrix oracle_features(const GroundTruth& truth);

std::string to_json_string(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const std::string& text);

}  // namespace spdtan
