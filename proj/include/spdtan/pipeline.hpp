// Pipeline driver glue shared by the CLI and the end-to-end tests:
// configuration, on-disk cohort/featurization artifacts, the fold-level
// featurizer used by nested CV, and the summary table renderer.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spdtan/estimators.hpp"
#include "spdtan/evaluation.hpp"
#include "spdtan/synth.hpp"

namespace spdtan {

/// Flat key=value configuration for the featurize/evaluate commands.
/// Unknown keys are rejected on load; flags override file values.
struct PipelineConfig {
    DependenceKind dependence = DependenceKind::Covariance;
    GeometryKind geometry = GeometryKind::LogEuclidean;
    MatrixDesign design = MatrixDesign::Spatiofrequential;
    std::vector<BandSpec> bands = default_bands();
    double segment_seconds = 4.0;  // <= 0 means "auto" (stationarity search)
    bool auto_segment = false;
    bool isometric = true;
    double alpha = 0.5;
    int n_lambdas = 100;
    double lambda_ratio = 1e-3;
    double tol = 1e-7;
    int max_passes = 100000;
    int outer_folds = 10;
    int inner_folds = 10;
    int repetitions = 100;
    std::uint64_t base_seed = 0;
    std::vector<std::string> covariates = {"age", "gender"};
    bool unpenalized_covariates = false;
    int jobs = 0;  // 0 = auto
    KarcherConfig karcher;

    CvConfig cv_config() const;
    std::map<std::string, std::string> echo() const;  // every value, as strings
};

PipelineConfig parse_config(const std::map<std::string, std::string>& keys);
PipelineConfig load_config_file(const std::string& path,
                                const std::map<std::string, std::string>& overrides = {});
std::string print_config(const PipelineConfig& cfg);
std::vector<BandSpec> parse_bands(const std::string& text);
std::string format_bands(const std::vector<BandSpec>& bands);

/// Build/version string embedded in every output artifact.
std::string code_version();

/// Cohort directory layout written by the synth command and read back by
/// featurize/evaluate: recordings/<id>.bin, targets.csv, covariates.csv,
/// ground_truth.json, manifest.json.
struct CohortPaths {
    std::string root;
    std::string recordings_dir() const { return root + "/recordings"; }
    std::string recording(const std::string& id) const {
        return recordings_dir() + "/" + id + ".bin";
    }
    std::string targets() const { return root + "/targets.csv"; }
    std::string covariates() const { return root + "/covariates.csv"; }
    std::string ground_truth() const { return root + "/ground_truth.json"; }
    std::string manifest() const { return root + "/manifest.json"; }
};

std::vector<std::string> write_cohort(const CohortPaths& paths, const GroundTruth& truth,
                                      int jobs = 0);

/// Featurization output: per-subject SPD means (so CV can refit the group
/// reference per fold), the global-reference feature table for external
/// tools, and a manifest echoing the full config.
struct FeaturizePaths {
    std::string root;
    std::string means_dir() const { return root + "/means"; }
    std::string mean(const std::string& id) const { return means_dir() + "/" + id + ".csv"; }
    std::string features() const { return root + "/features.csv"; }
    std::string manifest() const { return root + "/manifest.json"; }
};

/// Subject-level data carried between featurize and evaluate.
struct SubjectMeans {
    std::vector<std::string> ids;
    std::vector<SpdMatrix> means;
    std::vector<std::string> covariate_names;
    Matrix covariates;
};

struct FeaturizeOutput {
    SubjectMeans means;
    Matrix features;  // global-reference features (for export only)
    std::vector<std::string> feature_names;
    double segment_seconds = 0.0;  // after auto search, if any
};

/// signal -> estimators -> manifold over a whole cohort directory.
FeaturizeOutput featurize_cohort(const CohortPaths& cohort, const PipelineConfig& cfg);
void write_featurize_output(const FeaturizePaths& paths, const FeaturizeOutput& out,
                            const PipelineConfig& cfg);
FeaturizeOutput load_featurize_output(const FeaturizePaths& paths, PipelineConfig* cfg_out);

/// Fold featurizer over persisted subject means: refits the group
/// reference on the training subjects of every fold (Log-Euclidean means
/// reuse cached matrix logs; Euclidean features are fold-independent).
FoldFeaturizer make_manifold_featurizer(const SubjectMeans& means, GeometryKind geometry,
                                        bool isometric, const KarcherConfig& karcher = {});

/// Loads targets.csv (id,target) ordered like `ids`.
Vector load_targets(const std::string& path, const std::vector<std::string>& ids);

/// mean/min/max RMSE grid over dependence x geometry x design conditions,
/// one column group per distinct target label; missing conditions render
/// as an em-dash placeholder and are reported through `warnings`.
std::string render_table(const std::vector<CvReport>& reports,
                         std::vector<std::string>* warnings = nullptr);

/// The determinant contrast demo: Euclidean vs Log-Euclidean vs Riemannian
/// means of diag(2, 1/2) and diag(1/2, 2).
std::string swelling_demo();

}  // namespace spdtan
