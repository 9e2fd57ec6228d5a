// Elastic-net linear regression by cyclic coordinate descent with
// soft-thresholding, plus standardization, the geometric lambda path, and
// prediction with training-set parameters.
//
// Objective: (1/2N) ||y - X b||^2 + lambda * (alpha ||b||_1
//            + (1 - alpha)/2 ||b||^2), optionally with per-column penalty
// weights (0 exempts a column from the penalty).

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdtan/spd_core.hpp"

namespace spdtan {

/// Rows = subjects, columns = features (+ covariates). y may be empty for
/// prediction-only row sets.
struct DesignMatrix {
    std::vector<std::string> column_names;
    Matrix X;
    Vector y;

    int n_rows() const { return static_cast<int>(X.rows()); }
    int n_cols() const { return static_cast<int>(X.cols()); }
};

/// Training-set standardization state. Columns with (population) standard
/// deviation ~0 are dropped and recorded; response is centered only.
struct StandardizationParams {
    std::vector<std::string> columns;  // retained, in order
    std::vector<int> kept_indices;     // position of each retained column in the source design
    Vector mean;
    Vector stddev;  // population convention (divide by N)
    double response_mean = 0.0;
    std::vector<std::string> dropped_columns;
};

struct ElasticNetFit {
    Vector beta;                          // original scale, aligned with columns
    Vector beta_std;                      // standardized scale (the solver's view)
    double intercept = 0.0;               // original scale
    double lambda = 0.0;
    double alpha = 0.0;
    std::vector<std::string> columns;     // names for beta entries
    std::vector<std::string> active_set;  // columns with beta != 0
    int passes = 0;
    double max_coordinate_change = 0.0;
};

/// Centers and scales every non-constant column to mean 0, sd 1
/// (population sd), centers the response. Throws when every column is
/// constant.
std::pair<DesignMatrix, StandardizationParams> standardize(const DesignMatrix& d);

/// Cyclic coordinate descent on a standardized design. Stops when the
/// largest coordinate change in a full sweep drops below tol; iterates the
/// active set between full sweeps. warm_start, when given, must match the
/// standardized column count. penalty_weights (default all 1) multiply
/// lambda per column. Throws ConvergenceError when max_passes is exhausted.
ElasticNetFit fit_elastic_net(const DesignMatrix& std_d, const StandardizationParams& params,
                              double lambda, double alpha, double tol = 1e-7,
                              int max_passes = 100000,
                              std::span<const double> penalty_weights = {},
                              const Vector* warm_start = nullptr);

/// Geometric grid of n_lambdas values from lambda_max =
/// max_j |x_j^T y| / (N * alpha) down to lambda_max * ratio, descending.
/// alpha must be > 0 (a ridge-only path has no finite lambda_max).
std::vector<double> lambda_path(const DesignMatrix& std_d, double alpha, int n_lambdas = 100,
                                double ratio = 1e-3,
                                std::span<const double> penalty_weights = {});

/// Warm-started fits along a descending lambda sequence.
std::vector<ElasticNetFit> fit_path(const DesignMatrix& std_d,
                                    const StandardizationParams& params,
                                    std::span<const double> lambdas, double alpha,
                                    double tol = 1e-7, int max_passes = 100000,
                                    std::span<const double> penalty_weights = {});

/// Applies the training-set standardization to new rows (columns matched by
/// name; training-time dropped columns are ignored), then intercept + X b.
/// Throws ArgumentError listing any missing columns.
Vector predict(const ElasticNetFit& fit, const StandardizationParams& params,
               const DesignMatrix& rows);

/// Largest KKT violation of a fit on its standardized design; the
/// optimality certificate used by tests and the acceptance suite.
double max_kkt_violation(const DesignMatrix& std_d, const ElasticNetFit& fit,
                         std::span<const double> penalty_weights = {});

/// Elastic-net objective value on a standardized design.
double elastic_net_objective(const DesignMatrix& std_d, const Vector& beta_std, double lambda,
                             double alpha, std::span<const double> penalty_weights = {});

}  // namespace spdtan
