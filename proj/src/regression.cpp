#include "spdtan/regression.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace spdtan {

namespace {

double soft_threshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

void check_penalties(std::span<const double> penalty_weights, int n_cols, const char* what) {
    if (!penalty_weights.empty() && static_cast<int>(penalty_weights.size()) != n_cols) {
        std::ostringstream err;
        err << what << ": penalty weight count " << penalty_weights.size()
            << " does not match " << n_cols << " columns";
        throw ArgumentError(err.str());
    }
    for (double w : penalty_weights) {
        if (w < 0.0) throw ArgumentError(std::string(what) + ": negative penalty weight");
    }
}

}  // namespace

std::pair<DesignMatrix, StandardizationParams> standardize(const DesignMatrix& d) {
    const int n = d.n_rows();
    const int p = d.n_cols();
    if (n < 3) throw ArgumentError("standardize: need at least 3 rows");
    if (d.y.size() != n) throw ArgumentError("standardize: response length mismatch");
    if (!d.X.allFinite() || !d.y.allFinite()) {
        throw ArgumentError("standardize: non-finite values in design");
    }

    StandardizationParams params;
    params.response_mean = d.y.mean();
    std::vector<int> keep;
    std::vector<double> means, sds;
    for (int j = 0; j < p; ++j) {
        const double mean = d.X.col(j).mean();
        const double var = (d.X.col(j).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (sd <= 1e-12 * (std::abs(mean) + 1.0)) {
            params.dropped_columns.push_back(d.column_names[j]);
            continue;
        }
        keep.push_back(j);
        means.push_back(mean);
        sds.push_back(sd);
    }
    if (keep.empty()) throw ArgumentError("standardize: every column is constant");

    DesignMatrix out;
    out.X.resize(n, static_cast<int>(keep.size()));
    out.y = d.y.array() - params.response_mean;
    params.mean.resize(static_cast<int>(keep.size()));
    params.stddev.resize(static_cast<int>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.X.col(static_cast<int>(k)) = (d.X.col(keep[k]).array() - means[k]) / sds[k];
        out.column_names.push_back(d.column_names[keep[k]]);
        params.mean(static_cast<int>(k)) = means[k];
        params.stddev(static_cast<int>(k)) = sds[k];
    }
    params.columns = out.column_names;
    params.kept_indices = keep;
    return {std::move(out), std::move(params)};
}

namespace {

struct Sweep {
    double max_delta = 0.0;
    bool any_update = false;
};

/// One coordinate-descent sweep over the given column indices. Columns have
/// unit population variance, so the update is
///   b_j <- S((1/N) x_j^T r + b_j, lambda * alpha * w_j)
///          / (1 + lambda * (1 - alpha) * w_j).
Sweep cd_sweep(const Matrix& X, const Vector& /*y*/, Vector& residual, Vector& beta,
               std::span<const int> cols, double lambda, double alpha,
               std::span<const double> weights) {
    const double n = static_cast<double>(X.rows());
    Sweep sweep;
    for (int j : cols) {
        const double w = weights.empty() ? 1.0 : weights[j];
        const double rho = residual.dot(X.col(j)) / n + beta(j);
        const double updated =
            soft_threshold(rho, lambda * alpha * w) / (1.0 + lambda * (1.0 - alpha) * w);
        const double delta = updated - beta(j);
        if (delta != 0.0) {
            residual -= delta * X.col(j);
            beta(j) = updated;
            sweep.any_update = true;
        }
        sweep.max_delta = std::max(sweep.max_delta, std::abs(delta));
    }
    return sweep;
}

}  // namespace

double elastic_net_objective(const DesignMatrix& std_d, const Vector& beta_std, double lambda,
                             double alpha, std::span<const double> penalty_weights) {
    const double n = static_cast<double>(std_d.n_rows());
    const Vector residual = std_d.y - std_d.X * beta_std;
    double penalty = 0.0;
    for (int j = 0; j < beta_std.size(); ++j) {
        const double w = penalty_weights.empty() ? 1.0 : penalty_weights[j];
        penalty += w * (alpha * std::abs(beta_std(j)) +
                        0.5 * (1.0 - alpha) * beta_std(j) * beta_std(j));
    }
    return residual.squaredNorm() / (2.0 * n) + lambda * penalty;
}

ElasticNetFit fit_elastic_net(const DesignMatrix& std_d, const StandardizationParams& params,
                              double lambda, double alpha, double tol, int max_passes,
                              std::span<const double> penalty_weights,
                              const Vector* warm_start) {
    const int p = std_d.n_cols();
    if (lambda < 0.0) throw ArgumentError("fit_elastic_net: lambda must be >= 0");
    if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("fit_elastic_net: alpha must be in [0, 1]");
    if (!(tol > 0.0)) throw ArgumentError("fit_elastic_net: tol must be > 0");
    if (max_passes < 1) throw ArgumentError("fit_elastic_net: max_passes must be >= 1");
    check_penalties(penalty_weights, p, "fit_elastic_net");
    if (static_cast<int>(params.columns.size()) != p) {
        throw ArgumentError("fit_elastic_net: standardization params do not match the design");
    }
    if (warm_start && warm_start->size() != p) {
        throw ArgumentError("fit_elastic_net: warm start length mismatch");
    }

    Vector beta = warm_start ? *warm_start : Vector::Zero(p);
    Vector residual = std_d.y - std_d.X * beta;

    std::vector<int> all_cols(p);
    std::iota(all_cols.begin(), all_cols.end(), 0);

#ifndef NDEBUG
    double prev_objective = elastic_net_objective(std_d, beta, lambda, alpha, penalty_weights);
#endif

    int pass = 0;
    double last_max_delta = 0.0;
    bool converged = false;
    while (pass < max_passes) {
        // Full sweep; then, while anything moved, iterate the active set and
        // re-check with another full sweep (the glmnet strategy).
        Sweep sweep = cd_sweep(std_d.X, std_d.y, residual, beta, all_cols, lambda, alpha,
                               penalty_weights);
        ++pass;
#ifndef NDEBUG
        {
            const double obj = elastic_net_objective(std_d, beta, lambda, alpha, penalty_weights);
            assert(obj <= prev_objective + 1e-10 * (1.0 + std::abs(prev_objective)));
            prev_objective = obj;
        }
#endif
        last_max_delta = sweep.max_delta;
        if (sweep.max_delta < tol) {
            converged = true;
            break;
        }
        std::vector<int> active;
        for (int j = 0; j < p; ++j) {
            if (beta(j) != 0.0) active.push_back(j);
        }
        while (pass < max_passes && !active.empty()) {
            Sweep inner = cd_sweep(std_d.X, std_d.y, residual, beta, active, lambda, alpha,
                                   penalty_weights);
            ++pass;
            last_max_delta = inner.max_delta;
            if (inner.max_delta < tol) break;
        }
    }
    if (!converged) {
        // Convergence is only ever declared by a full sweep, so an exhausted
        // budget inside the active-set iterations is a failure too.
        std::ostringstream err;
        err << "fit_elastic_net: no convergence after " << pass
            << " passes (max coordinate change " << last_max_delta << ", tol " << tol << ")";
        throw ConvergenceError(err.str(), last_max_delta, pass);
    }

    ElasticNetFit fit;
    fit.beta_std = beta;
    fit.lambda = lambda;
    fit.alpha = alpha;
    fit.columns = params.columns;
    fit.passes = pass;
    fit.max_coordinate_change = last_max_delta;
    fit.beta.resize(p);
    double intercept = params.response_mean;
    for (int j = 0; j < p; ++j) {
        fit.beta(j) = beta(j) / params.stddev(j);
        intercept -= fit.beta(j) * params.mean(j);
        if (beta(j) != 0.0) fit.active_set.push_back(params.columns[j]);
    }
    fit.intercept = intercept;
    return fit;
}

std::vector<double> lambda_path(const DesignMatrix& std_d, double alpha, int n_lambdas,
                                double ratio, std::span<const double> penalty_weights) {
    if (!(alpha > 0.0)) {
        throw ArgumentError(
            "lambda_path: alpha must be > 0 (a pure ridge path has no finite lambda_max; pick "
            "an explicit lambda grid instead)");
    }
    if (n_lambdas < 1) throw ArgumentError("lambda_path: n_lambdas must be >= 1");
    if (!(ratio > 0.0) || ratio > 1.0) throw ArgumentError("lambda_path: ratio must be in (0, 1]");
    check_penalties(penalty_weights, std_d.n_cols(), "lambda_path");

    const double n = static_cast<double>(std_d.n_rows());
    double lambda_max = 0.0;
    for (int j = 0; j < std_d.n_cols(); ++j) {
        const double w = penalty_weights.empty() ? 1.0 : penalty_weights[j];
        if (w == 0.0) continue;  // unpenalized columns do not cap the path
        lambda_max = std::max(lambda_max, std::abs(std_d.X.col(j).dot(std_d.y)) / (n * alpha * w));
    }
    if (lambda_max <= 0.0) lambda_max = 1.0;  // all-zero response: any grid gives the zero model

    std::vector<double> path(n_lambdas);
    if (n_lambdas == 1) {
        path[0] = lambda_max;
        return path;
    }
    const double log_max = std::log(lambda_max);
    const double log_min = std::log(lambda_max * ratio);
    for (int i = 0; i < n_lambdas; ++i) {
        const double f = static_cast<double>(i) / (n_lambdas - 1);
        path[i] = std::exp(log_max + f * (log_min - log_max));
    }
    path.front() = lambda_max;
    return path;
}

std::vector<ElasticNetFit> fit_path(const DesignMatrix& std_d,
                                    const StandardizationParams& params,
                                    std::span<const double> lambdas, double alpha, double tol,
                                    int max_passes, std::span<const double> penalty_weights) {
    std::vector<ElasticNetFit> fits;
    fits.reserve(lambdas.size());
    Vector warm = Vector::Zero(std_d.n_cols());
    for (double lambda : lambdas) {
        fits.push_back(fit_elastic_net(std_d, params, lambda, alpha, tol, max_passes,
                                       penalty_weights, &warm));
        warm = fits.back().beta_std;
    }
    return fits;
}

Vector predict(const ElasticNetFit& fit, const StandardizationParams& params,
               const DesignMatrix& rows) {
    // Map every training column to its position in the incoming rows.
    std::unordered_map<std::string, int> by_name;
    for (int j = 0; j < rows.n_cols(); ++j) by_name.emplace(rows.column_names[j], j);
    std::vector<int> source(params.columns.size(), -1);
    for (std::size_t k = 0; k < params.columns.size(); ++k) {
        const auto it = by_name.find(params.columns[k]);
        if (it != by_name.end()) source[k] = it->second;
    }
    std::vector<std::string> missing;
    for (std::size_t k = 0; k < source.size(); ++k) {
        if (source[k] < 0) missing.push_back(params.columns[k]);
    }
    if (!missing.empty()) {
        std::ostringstream err;
        err << "predict: rows are missing training columns:";
        for (const auto& name : missing) err << " " << name;
        throw ArgumentError(err.str());
    }

    Vector out = Vector::Constant(rows.n_rows(), params.response_mean);
    for (std::size_t k = 0; k < source.size(); ++k) {
        const int j = static_cast<int>(k);
        if (fit.beta_std(j) == 0.0) continue;
        out += fit.beta_std(j) *
               ((rows.X.col(source[k]).array() - params.mean(j)) / params.stddev(j)).matrix();
    }
    return out;
}

double max_kkt_violation(const DesignMatrix& std_d, const ElasticNetFit& fit,
                         std::span<const double> penalty_weights) {
    const double n = static_cast<double>(std_d.n_rows());
    const Vector residual = std_d.y - std_d.X * fit.beta_std;
    double worst = 0.0;
    for (int j = 0; j < std_d.n_cols(); ++j) {
        const double w = penalty_weights.empty() ? 1.0 : penalty_weights[j];
        const double grad = std_d.X.col(j).dot(residual) / n -
                            fit.lambda * (1.0 - fit.alpha) * w * fit.beta_std(j);
        if (fit.beta_std(j) != 0.0) {
            worst = std::max(worst,
                             std::abs(grad - fit.lambda * fit.alpha * w *
                                                 (fit.beta_std(j) > 0.0 ? 1.0 : -1.0)));
        } else {
            worst = std::max(worst, std::max(0.0, std::abs(grad) - fit.lambda * fit.alpha * w));
        }
    }
    return worst;
}

}  // namespace spdtan
