#include "spdtan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "spdtan/parallel.hpp"
#include "spdtan/rng.hpp"

namespace spdtan {

using nlohmann::json;

FoldPlan make_fold_plan(int n_subjects, std::uint64_t seed, int outer_folds, int inner_folds) {
    if (n_subjects < 20) {
        throw ArgumentError("make_fold_plan: need at least 20 subjects, got " +
                            std::to_string(n_subjects));
    }
    if (outer_folds < 2 || inner_folds < 2) {
        throw ArgumentError("make_fold_plan: need at least 2 folds per level");
    }
    if (n_subjects < outer_folds) {
        throw ArgumentError("make_fold_plan: more outer folds than subjects");
    }

    FoldPlan plan;
    plan.seed = seed;
    plan.outer_folds = outer_folds;
    plan.inner_folds = inner_folds;
    plan.outer.resize(n_subjects);
    plan.inner.assign(outer_folds, std::vector<int>(n_subjects, -1));

    std::vector<int> order(n_subjects);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0));
    rng.shuffle(order);
    for (int i = 0; i < n_subjects; ++i) plan.outer[order[i]] = i % outer_folds;

    for (int k = 0; k < outer_folds; ++k) {
        std::vector<int> training;
        for (int i = 0; i < n_subjects; ++i) {
            if (plan.outer[i] != k) training.push_back(i);
        }
        Rng inner_rng(derive_seed(seed, static_cast<std::uint64_t>(k) + 1));
        inner_rng.shuffle(training);
        for (std::size_t i = 0; i < training.size(); ++i) {
            plan.inner[k][training[i]] = static_cast<int>(i) % inner_folds;
        }
    }
    return plan;
}

FoldFeaturizer constant_featurizer(Matrix features, std::vector<std::string> names) {
    if (static_cast<int>(names.size()) != features.cols()) {
        throw ArgumentError("constant_featurizer: name count does not match feature columns");
    }
    auto shared = std::make_shared<std::pair<Matrix, std::vector<std::string>>>(
        std::move(features), std::move(names));
    return [shared](const std::vector<int>& train_ids) {
        return FeaturizeResult{shared->first, shared->second, train_ids};
    };
}

FoldFeaturizer covariates_only_featurizer() {
    return [](const std::vector<int>& train_ids) {
        return FeaturizeResult{Matrix(), {}, train_ids};
    };
}

double rmse(std::span<const double> predictions, std::span<const double> truth) {
    if (predictions.size() != truth.size()) {
        throw ArgumentError("rmse: length mismatch " + std::to_string(predictions.size()) +
                            " vs " + std::to_string(truth.size()));
    }
    if (predictions.empty()) throw ArgumentError("rmse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(predictions.size()));
}

namespace {

void check_disjoint(const std::vector<int>& fitted, const std::vector<bool>& is_test,
                    const char* transform) {
    for (int id : fitted) {
        if (is_test[id]) {
            throw std::logic_error(std::string("leakage: transform '") + transform +
                                   "' saw held-out subject " + std::to_string(id));
        }
    }
}

/// Design matrix over the given rows: EEG features (possibly none) followed
/// by covariates.
DesignMatrix assemble_rows(const CohortTable& table, const Matrix& features,
                           const std::vector<std::string>& feature_names,
                           const std::vector<int>& rows, bool with_response) {
    const int p_feat = static_cast<int>(features.cols());
    const int p_cov = static_cast<int>(table.covariates.cols());
    DesignMatrix d;
    d.column_names = feature_names;
    d.column_names.insert(d.column_names.end(), table.covariate_names.begin(),
                          table.covariate_names.end());
    d.X.resize(static_cast<int>(rows.size()), p_feat + p_cov);
    if (with_response) d.y.resize(static_cast<int>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (p_feat > 0) d.X.row(r).head(p_feat) = features.row(rows[r]);
        if (p_cov > 0) d.X.row(r).tail(p_cov) = table.covariates.row(rows[r]);
        if (with_response) d.y(static_cast<int>(r)) = table.targets(rows[r]);
    }
    return d;
}

std::vector<double> penalties_for(const DesignMatrix& std_d, const CohortTable& table,
                                  bool unpenalized_covariates) {
    if (!unpenalized_covariates) return {};
    std::vector<double> w(std_d.column_names.size(), 1.0);
    for (std::size_t j = 0; j < std_d.column_names.size(); ++j) {
        for (const auto& cov : table.covariate_names) {
            if (std_d.column_names[j] == cov) w[j] = 0.0;
        }
    }
    return w;
}

/// Rows standardized with training-fold parameters; prediction is then
/// response_mean + X_std * beta_std, reusing one matrix for every lambda.
Matrix standardize_rows(const DesignMatrix& rows, const StandardizationParams& params) {
    Matrix out(rows.n_rows(), static_cast<int>(params.kept_indices.size()));
    for (std::size_t k = 0; k < params.kept_indices.size(); ++k) {
        const int j = static_cast<int>(k);
        out.col(j) = (rows.X.col(params.kept_indices[k]).array() - params.mean(j)) /
                     params.stddev(j);
    }
    return out;
}

}  // namespace

RepetitionResult nested_cv(const CohortTable& table, const FoldFeaturizer& featurizer,
                           const FoldPlan& plan, const CvConfig& cfg,
                           std::vector<AuditEntry>* audit, int repetition_index) {
    const int n = table.n_subjects();
    if (static_cast<int>(plan.outer.size()) != n) {
        throw ArgumentError("nested_cv: fold plan does not cover the cohort");
    }
    if (table.targets.size() != n) throw ArgumentError("nested_cv: target length mismatch");

    RepetitionResult rep;
    rep.seed = plan.seed;
    rep.predictions = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
    rep.chosen_lambda.resize(plan.outer_folds, 0.0);

    for (int k = 0; k < plan.outer_folds; ++k) {
        std::vector<int> train_ids, test_ids;
        std::vector<bool> is_test(n, false);
        for (int i = 0; i < n; ++i) {
            if (plan.outer[i] == k) {
                test_ids.push_back(i);
                is_test[i] = true;
            } else {
                train_ids.push_back(i);
            }
        }

        const FeaturizeResult feat = featurizer(train_ids);
        if (feat.features.size() > 0 && feat.features.rows() != n) {
            throw ArgumentError("nested_cv: featurizer must return one row per subject");
        }
        check_disjoint(feat.fitted_ids, is_test, "group_reference");
        if (audit) audit->push_back({"group_reference", repetition_index, k, feat.fitted_ids});

        // Inner loop: the lambda grid comes from the outer training set; each
        // inner fold standardizes and fits on its own training rows only.
        const DesignMatrix outer_train =
            assemble_rows(table, feat.features, feat.names, train_ids, true);
        auto [outer_std, outer_params] = standardize(outer_train);
        const std::vector<double> outer_weights =
            penalties_for(outer_std, table, cfg.unpenalized_covariates);
        const std::vector<double> lambdas =
            lambda_path(outer_std, cfg.alpha, cfg.n_lambdas, cfg.lambda_ratio, outer_weights);
        check_disjoint(train_ids, is_test, "standardization");
        if (audit) audit->push_back({"standardization", repetition_index, k, train_ids});

        Vector sq_error_by_lambda = Vector::Zero(static_cast<int>(lambdas.size()));
        int validated = 0;
        for (int fold = 0; fold < plan.inner_folds; ++fold) {
            std::vector<int> inner_train, inner_val;
            for (int i : train_ids) {
                (plan.inner[k][i] == fold ? inner_val : inner_train).push_back(i);
            }
            if (inner_val.empty() || static_cast<int>(inner_train.size()) < 3) continue;

            const DesignMatrix train_d =
                assemble_rows(table, feat.features, feat.names, inner_train, true);
            auto [std_d, params] = standardize(train_d);
            const std::vector<double> weights =
                penalties_for(std_d, table, cfg.unpenalized_covariates);
            const std::vector<ElasticNetFit> fits =
                fit_path(std_d, params, lambdas, cfg.alpha, cfg.tol, cfg.max_passes, weights);

            const DesignMatrix val_d =
                assemble_rows(table, feat.features, feat.names, inner_val, false);
            const Matrix val_std = standardize_rows(val_d, params);
            for (std::size_t li = 0; li < fits.size(); ++li) {
                const Vector pred =
                    (val_std * fits[li].beta_std).array() + params.response_mean;
                for (std::size_t r = 0; r < inner_val.size(); ++r) {
                    const double d = pred(static_cast<int>(r)) - table.targets(inner_val[r]);
                    sq_error_by_lambda(static_cast<int>(li)) += d * d;
                }
            }
            validated += static_cast<int>(inner_val.size());
        }
        if (validated == 0) throw ArgumentError("nested_cv: inner folds left nothing to validate");

        int best = 0;
        for (int li = 1; li < sq_error_by_lambda.size(); ++li) {
            if (sq_error_by_lambda(li) < sq_error_by_lambda(best)) best = li;
        }
        rep.chosen_lambda[k] = lambdas[best];
        if (audit) audit->push_back({"lambda_selection", repetition_index, k, train_ids});

        // Final fit on the whole outer training fold at the selected lambda,
        // warm-started along the path down to it.
        const std::vector<double> head(lambdas.begin(), lambdas.begin() + best + 1);
        const std::vector<ElasticNetFit> final_fits =
            fit_path(outer_std, outer_params, head, cfg.alpha, cfg.tol, cfg.max_passes,
                     outer_weights);
        const DesignMatrix test_d =
            assemble_rows(table, feat.features, feat.names, test_ids, false);
        const Vector pred = predict(final_fits.back(), outer_params, test_d);
        for (std::size_t r = 0; r < test_ids.size(); ++r) {
            rep.predictions(test_ids[r]) = pred(static_cast<int>(r));
        }
    }

    for (int i = 0; i < n; ++i) {
        if (std::isnan(rep.predictions(i))) {
            throw std::logic_error("nested_cv: subject " + std::to_string(i) +
                                   " has no out-of-fold prediction");
        }
    }
    rep.rmse = rmse(std::span<const double>(rep.predictions.data(), n),
                    std::span<const double>(table.targets.data(), n));
    return rep;
}

CvReport repeat_cv(const CohortTable& table, const FoldFeaturizer& featurizer,
                   int n_repetitions, std::uint64_t base_seed, const CvConfig& cfg) {
    if (n_repetitions < 1) throw ArgumentError("repeat_cv: need at least one repetition");

    CvReport report;
    report.subject_ids = table.ids;
    report.targets = table.targets;
    report.repetitions.resize(n_repetitions);

    std::vector<std::vector<AuditEntry>> audits(n_repetitions);
    parallel_for(n_repetitions, cfg.jobs, [&](int r) {
        const FoldPlan plan = make_fold_plan(table.n_subjects(), base_seed + r,
                                             cfg.outer_folds, cfg.inner_folds);
        report.repetitions[r] = nested_cv(table, featurizer, plan, cfg, &audits[r], r);
    });

    report.audit_passed = true;  // nested_cv throws on any violation
    for (const auto& a : audits) report.audit_entries += static_cast<int>(a.size());

    report.mean_rmse = 0.0;
    report.min_rmse = std::numeric_limits<double>::infinity();
    report.max_rmse = -std::numeric_limits<double>::infinity();
    for (const auto& rep : report.repetitions) {
        report.mean_rmse += rep.rmse;
        report.min_rmse = std::min(report.min_rmse, rep.rmse);
        report.max_rmse = std::max(report.max_rmse, rep.rmse);
    }
    report.mean_rmse /= n_repetitions;
    return report;
}

double wilcoxon_signed_rank_p(std::span<const double> diffs) {
    std::vector<double> abs_nonzero;
    std::vector<bool> positive;
    for (double d : diffs) {
        if (d != 0.0) {
            abs_nonzero.push_back(std::abs(d));
            positive.push_back(d > 0.0);
        }
    }
    const std::size_t n = abs_nonzero.size();
    if (n == 0) return 1.0;  // all ties: no evidence either way

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return abs_nonzero[a] < abs_nonzero[b]; });

    // Average ranks over tie groups; collect the tie correction term.
    double w_plus = 0.0;
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_nonzero[order[j + 1]] == abs_nonzero[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        const double run = static_cast<double>(j - i + 1);
        tie_term += run * run * run - run;
        for (std::size_t k = i; k <= j; ++k) {
            if (positive[order[k]]) w_plus += avg_rank;
        }
        i = j + 1;
    }

    const double dn = static_cast<double>(n);
    const double mean = dn * (dn + 1.0) / 4.0;
    const double variance = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term / 48.0;
    if (variance <= 0.0) return 1.0;  // every magnitude tied in one group both ways
    const double num = w_plus - mean;
    const double z = (num - (num > 0.0 ? 0.5 : num < 0.0 ? -0.5 : 0.0)) / std::sqrt(variance);
    const double p = std::erfc(std::abs(z) / std::sqrt(2.0));
    return std::min(1.0, p);
}

double paired_ttest_p(std::span<const double> diffs) {
    const std::size_t n = diffs.size();
    if (n < 2) throw ArgumentError("paired_ttest_p: need at least 2 pairs");
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    const double var = ss / static_cast<double>(n - 1);
    if (var == 0.0) return mean == 0.0 ? 1.0 : 0.0;
    const double t = mean / std::sqrt(var / static_cast<double>(n));
    boost::math::students_t dist(static_cast<double>(n - 1));
    return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

ComparisonResult compare_models(const CvReport& a, const CvReport& b, PairedTest test) {
    if (a.subject_ids != b.subject_ids) {
        throw ArgumentError("compare_models: reports cover different subjects");
    }
    if (a.repetitions.size() != b.repetitions.size()) {
        throw ArgumentError("compare_models: repetition counts differ");
    }
    for (std::size_t r = 0; r < a.repetitions.size(); ++r) {
        if (a.repetitions[r].seed != b.repetitions[r].seed) {
            throw ArgumentError("compare_models: fold plans differ at repetition " +
                                std::to_string(r));
        }
    }
    if ((a.targets - b.targets).cwiseAbs().maxCoeff() != 0.0) {
        throw ArgumentError("compare_models: targets differ");
    }

    ComparisonResult result;
    result.model_a = a.condition.count("label") ? a.condition.at("label") : "a";
    result.model_b = b.condition.count("label") ? b.condition.at("label") : "b";
    const int n = static_cast<int>(a.subject_ids.size());
    double total_diff = 0.0;
    for (std::size_t r = 0; r < a.repetitions.size(); ++r) {
        std::vector<double> diffs(n);
        for (int i = 0; i < n; ++i) {
            const double ea = a.repetitions[r].predictions(i) - a.targets(i);
            const double eb = b.repetitions[r].predictions(i) - b.targets(i);
            diffs[i] = ea * ea - eb * eb;
            total_diff += diffs[i];
        }
        result.p_values.push_back(test == PairedTest::Wilcoxon ? wilcoxon_signed_rank_p(diffs)
                                                               : paired_ttest_p(diffs));
    }
    result.averaged_p = std::accumulate(result.p_values.begin(), result.p_values.end(), 0.0) /
                        static_cast<double>(result.p_values.size());
    result.mean_squared_error_diff =
        total_diff / (static_cast<double>(a.repetitions.size()) * n);
    result.direction = result.mean_squared_error_diff < 0.0   ? -1
                       : result.mean_squared_error_diff > 0.0 ? 1
                                                              : 0;
    return result;
}

ComparisonResult standalone_test(const CvReport& report, const CvReport& baseline,
                                 PairedTest test) {
    if (!baseline.covariates_only) {
        throw ArgumentError("standalone_test: baseline report is not covariates-only");
    }
    return compare_models(report, baseline, test);
}

namespace {

json repetition_to_json(const RepetitionResult& rep) {
    return json{{"seed", rep.seed},
                {"rmse", rep.rmse},
                {"chosen_lambda", rep.chosen_lambda},
                {"predictions", std::vector<double>(rep.predictions.data(),
                                                    rep.predictions.data() + rep.predictions.size())}};
}

RepetitionResult repetition_from_json(const json& j) {
    RepetitionResult rep;
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.rmse = j.at("rmse").get<double>();
    rep.chosen_lambda = j.at("chosen_lambda").get<std::vector<double>>();
    const auto pred = j.at("predictions").get<std::vector<double>>();
    rep.predictions = Eigen::Map<const Vector>(pred.data(), static_cast<long>(pred.size()));
    return rep;
}

}  // namespace

std::string to_json_string(const CvReport& report) {
    json j;
    j["format_version"] = 1;
    j["subject_ids"] = report.subject_ids;
    j["targets"] = std::vector<double>(report.targets.data(),
                                       report.targets.data() + report.targets.size());
    j["summary"] = {{"mean_rmse", report.mean_rmse},
                    {"min_rmse", report.min_rmse},
                    {"max_rmse", report.max_rmse},
                    {"repetitions", report.repetitions.size()}};
    j["covariates_only"] = report.covariates_only;
    j["audit"] = {{"passed", report.audit_passed}, {"entries", report.audit_entries}};
    j["condition"] = report.condition;
    j["config"] = report.config_echo;
    json reps = json::array();
    for (const auto& rep : report.repetitions) reps.push_back(repetition_to_json(rep));
    j["repetitions"] = std::move(reps);
    return j.dump(2);
}

CvReport cv_report_from_json(const std::string& text) {
    const json j = json::parse(text);
    CvReport report;
    report.subject_ids = j.at("subject_ids").get<std::vector<std::string>>();
    const auto targets = j.at("targets").get<std::vector<double>>();
    report.targets = Eigen::Map<const Vector>(targets.data(), static_cast<long>(targets.size()));
    report.mean_rmse = j.at("summary").at("mean_rmse").get<double>();
    report.min_rmse = j.at("summary").at("min_rmse").get<double>();
    report.max_rmse = j.at("summary").at("max_rmse").get<double>();
    report.covariates_only = j.at("covariates_only").get<bool>();
    report.audit_passed = j.at("audit").at("passed").get<bool>();
    report.audit_entries = j.at("audit").at("entries").get<int>();
    report.condition = j.at("condition").get<std::map<std::string, std::string>>();
    report.config_echo = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& rep : j.at("repetitions")) {
        report.repetitions.push_back(repetition_from_json(rep));
    }
    return report;
}

std::string to_json_string(const ComparisonResult& result) {
    json j;
    j["format_version"] = 1;
    j["model_a"] = result.model_a;
    j["model_b"] = result.model_b;
    j["p_values"] = result.p_values;
    j["averaged_p"] = result.averaged_p;
    j["direction"] = result.direction;
    j["mean_squared_error_diff"] = result.mean_squared_error_diff;
    return j.dump(2);
}

ComparisonResult comparison_from_json(const std::string& text) {
    const json j = json::parse(text);
    ComparisonResult result;
    result.model_a = j.at("model_a").get<std::string>();
    result.model_b = j.at("model_b").get<std::string>();
    result.p_values = j.at("p_values").get<std::vector<double>>();
    result.averaged_p = j.at("averaged_p").get<double>();
    result.direction = j.at("direction").get<int>();
    result.mean_squared_error_diff = j.at("mean_squared_error_diff").get<double>();
    return result;
}

}  // namespace spdtan
