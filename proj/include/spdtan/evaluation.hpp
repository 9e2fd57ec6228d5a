// The experimental protocol: repeated two-level nested cross-validation
// with leakage auditing, RMSE aggregation, and paired statistical model
// comparison on squared errors.

#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spdtan/regression.hpp"

namespace spdtan {

/// Subjects available to the CV driver. Covariates may be zero-width (the
/// covariates-only baseline uses *only* them, a feature model gets both).
struct CohortTable {
    std::vector<std::string> ids;
    Vector targets;
    std::vector<std::string> covariate_names;
    Matrix covariates;  // n_subjects x n_covariates (possibly 0 columns)

    int n_subjects() const { return static_cast<int>(ids.size()); }
};

/// Fold assignments for one repetition: outer[i] in [0, outer_folds) per
/// subject; inner[k][i] in [0, inner_folds) for subjects outside outer fold
/// k and -1 for its test subjects.
struct FoldPlan {
    std::uint64_t seed = 0;
    int outer_folds = 10;
    int inner_folds = 10;
    std::vector<int> outer;
    std::vector<std::vector<int>> inner;
};

/// Deterministic partition: fold sizes differ by at most one at both
/// levels, inner folds never contain the outer test subjects. Requires at
/// least 20 subjects.
FoldPlan make_fold_plan(int n_subjects, std::uint64_t seed, int outer_folds = 10,
                        int inner_folds = 10);

/// What a fold-level featurizer returns: feature rows for every subject,
/// fitted using only the training subjects it was handed (recorded in
/// fitted_ids for the leakage audit). Zero-width features are allowed.
struct FeaturizeResult {
    Matrix features;  // n_subjects x p
    std::vector<std::string> names;
    std::vector<int> fitted_ids;
};

using FoldFeaturizer = std::function<FeaturizeResult(const std::vector<int>& train_ids)>;

/// Fixed feature matrix (no fold dependence); still records fitted ids so
/// the audit contract is uniform.
FoldFeaturizer constant_featurizer(Matrix features, std::vector<std::string> names);

/// Covariates-only baseline: zero feature columns.
FoldFeaturizer covariates_only_featurizer();

struct CvConfig {
    int outer_folds = 10;
    int inner_folds = 10;
    double alpha = 0.5;
    int n_lambdas = 100;
    double lambda_ratio = 1e-3;
    double tol = 1e-7;
    int max_passes = 100000;
    bool unpenalized_covariates = false;
    int jobs = 1;  // worker cap for repetitions; results are jobs-invariant
};

/// One transform-fit event recorded for the leakage audit.
struct AuditEntry {
    std::string transform;  // "group_reference" | "standardization" | "lambda_selection"
    int repetition = 0;
    int outer_fold = 0;
    std::vector<int> fitted_ids;
};

struct RepetitionResult {
    std::uint64_t seed = 0;
    Vector predictions;  // out-of-fold, one per subject
    std::vector<double> chosen_lambda;  // per outer fold
    double rmse = 0.0;
};

struct CvReport {
    std::vector<std::string> subject_ids;
    Vector targets;
    std::vector<RepetitionResult> repetitions;
    double mean_rmse = 0.0;
    double min_rmse = 0.0;
    double max_rmse = 0.0;
    bool covariates_only = false;
    bool audit_passed = false;
    int audit_entries = 0;
    std::map<std::string, std::string> condition;  // dependence/geometry/design/target labels
    std::map<std::string, std::string> config_echo;
};

/// sqrt(mean((p - t)^2)); lengths must match and be >= 1.
double rmse(std::span<const double> predictions, std::span<const double> truth);

/// One repetition of nested CV. Per outer fold: features and
/// standardization fitted on training subjects only, lambda selected by
/// inner-loop mean MSE over the path, final fit on the full training fold,
/// held-out subjects predicted once. Violations of the leakage contract
/// are surfaced through the audit (and would throw std::logic_error).
RepetitionResult nested_cv(const CohortTable& table, const FoldFeaturizer& featurizer,
                           const FoldPlan& plan, const CvConfig& cfg,
                           std::vector<AuditEntry>* audit = nullptr, int repetition_index = 0);

/// Runs nested_cv for seeds base_seed .. base_seed + n_repetitions - 1 and
/// aggregates mean/min/max RMSE. Repetitions may run on cfg.jobs workers;
/// the report is bit-identical for any worker count.
CvReport repeat_cv(const CohortTable& table, const FoldFeaturizer& featurizer,
                   int n_repetitions, std::uint64_t base_seed, const CvConfig& cfg);

enum class PairedTest { Wilcoxon, TTest };

struct ComparisonResult {
    std::string model_a;
    std::string model_b;
    std::vector<double> p_values;  // one per repetition
    double averaged_p = 1.0;
    int direction = 0;  // -1: a has lower squared error, +1: b does, 0: tie
    double mean_squared_error_diff = 0.0;  // mean(se_a - se_b)
};

/// Two-sided Wilcoxon signed-rank test on paired differences (zeros
/// dropped, average ranks for ties, normal approximation with tie and
/// continuity corrections). Returns 1 when every difference is zero.
double wilcoxon_signed_rank_p(std::span<const double> diffs);

/// Two-sided paired t-test on the differences.
double paired_ttest_p(std::span<const double> diffs);

/// Per repetition, a paired two-sided test on per-subject squared errors;
/// p-values averaged across repetitions. Inputs must cover the same
/// subjects with identical fold plans (checked via the stored seeds).
ComparisonResult compare_models(const CvReport& a, const CvReport& b,
                                PairedTest test = PairedTest::Wilcoxon);

/// compare_models against a covariates-only baseline report (must be
/// flagged as such).
ComparisonResult standalone_test(const CvReport& report, const CvReport& baseline,
                                 PairedTest test = PairedTest::Wilcoxon);

std::string to_json_string(const CvReport& report);
CvReport cv_report_from_json(const std::string& text);
std::string to_json_string(const ComparisonResult& result);
ComparisonResult comparison_from_json(const std::string& text);

}  // namespace spdtan
