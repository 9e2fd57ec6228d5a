// spdtan command-line driver: synth, featurize, evaluate, compare, table,
// demo-swelling. Commands are pure functions of their on-disk inputs and
// flags; every artifact embeds the effective configuration and the build
// version.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spdtan/evaluation.hpp"
#include "spdtan/pipeline.hpp"
#include "spdtan/synth.hpp"

namespace fs = std::filesystem;
using namespace spdtan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitIo = 4;

void require_empty_or_force(const std::string& dir, bool force) {
    if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
        throw ArgumentError("output directory '" + dir +
                            "' is not empty; pass --force to overwrite");
    }
    fs::create_directories(dir);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

struct ConfigCli {
    std::string config_file;
    std::vector<std::string> sets;  // key=value overrides
    bool print_config = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "flat key = value configuration file");
        cmd->add_option("--set", sets, "override a config key (key=value, repeatable)");
        cmd->add_flag("--print-config", print_config, "print the effective config and exit");
    }

    PipelineConfig resolve(const std::map<std::string, std::string>& extra = {}) const {
        std::map<std::string, std::string> overrides = extra;
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw ArgumentError("--set expects key=value, got '" + kv + "'");
            }
            overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        return load_config_file(config_file, overrides);
    }
};

int run_synth(const std::string& out_dir, const CohortSpec& spec, bool force, int jobs) {
    require_empty_or_force(out_dir, force);
    const GroundTruth truth = plan_cohort(spec);
    const CohortPaths paths{out_dir};
    const auto ids = write_cohort(paths, truth, jobs);
    std::cout << "cohort: " << ids.size() << " subjects, " << spec.n_channels << " channels, "
              << spec.duration_seconds << " s at " << spec.samples_per_second << " Hz\n"
              << "target kind: " << to_string(spec.target_kind)
              << ", effect size: " << spec.effect_size << ", seed: " << spec.seed << "\n"
              << "wrote " << out_dir << "\n";
    return kExitOk;
}

int run_featurize(const std::string& cohort_dir, const std::string& out_dir,
                  const ConfigCli& config_cli, bool force) {
    const PipelineConfig cfg = config_cli.resolve();
    if (config_cli.print_config) {
        std::cout << print_config(cfg);
        return kExitOk;
    }
    require_empty_or_force(out_dir, force);
    const FeaturizeOutput out = featurize_cohort(CohortPaths{cohort_dir}, cfg);
    write_featurize_output(FeaturizePaths{out_dir}, out, cfg);
    std::cout << "featurized " << out.means.ids.size() << " subjects: feature dim "
              << out.feature_names.size() << ", segment length " << out.segment_seconds
              << " s\nwrote " << out_dir << "\n";
    return kExitOk;
}

int run_evaluate(const std::string& features_dir, const std::string& cohort_dir,
                 const std::string& out_file, const ConfigCli& config_cli,
                 bool covariates_only, const std::string& label) {
    PipelineConfig stored;
    const FeaturizeOutput feats = load_featurize_output(FeaturizePaths{features_dir}, &stored);
    // CV settings may be overridden; the featurization condition (geometry,
    // dependence, design, bands) is pinned by the manifest.
    std::map<std::string, std::string> pinned;
    for (const auto& [key, value] : stored.echo()) pinned[key] = value;
    PipelineConfig cfg = stored;
    {
        const PipelineConfig overridden = config_cli.resolve(pinned);
        cfg.repetitions = overridden.repetitions;
        cfg.base_seed = overridden.base_seed;
        cfg.outer_folds = overridden.outer_folds;
        cfg.inner_folds = overridden.inner_folds;
        cfg.alpha = overridden.alpha;
        cfg.n_lambdas = overridden.n_lambdas;
        cfg.lambda_ratio = overridden.lambda_ratio;
        cfg.tol = overridden.tol;
        cfg.max_passes = overridden.max_passes;
        cfg.unpenalized_covariates = overridden.unpenalized_covariates;
        cfg.jobs = overridden.jobs;
    }
    if (config_cli.print_config) {
        std::cout << print_config(cfg);
        return kExitOk;
    }

    CohortTable table;
    table.ids = feats.means.ids;
    table.covariate_names = feats.means.covariate_names;
    table.covariates = feats.means.covariates;
    table.targets = load_targets(CohortPaths{cohort_dir}.targets(), table.ids);

    const FoldFeaturizer featurizer =
        covariates_only ? covariates_only_featurizer()
                        : make_manifold_featurizer(feats.means, cfg.geometry, cfg.isometric,
                                                   cfg.karcher);
    CvReport report = repeat_cv(table, featurizer, cfg.repetitions, cfg.base_seed,
                                cfg.cv_config());
    report.covariates_only = covariates_only;
    report.condition["dependence"] = to_string(cfg.dependence);
    report.condition["geometry"] = covariates_only ? "none" : to_string(cfg.geometry);
    report.condition["design"] = to_string(cfg.design);
    report.condition["target"] = label;
    report.condition["label"] =
        covariates_only ? ("covariates_only" + (label.empty() ? "" : ":" + label))
                        : (to_string(cfg.dependence) + "/" + to_string(cfg.geometry) + "/" +
                           to_string(cfg.design) + (label.empty() ? "" : ":" + label));
    report.config_echo = cfg.echo();
    report.config_echo["code_version"] = code_version();
    report.config_echo["segment_seconds_used"] = std::to_string(feats.segment_seconds);

    write_file(out_file, to_json_string(report) + "\n");
    std::cout << "RMSE over " << cfg.repetitions << " repetitions: mean " << report.mean_rmse
              << ", min " << report.min_rmse << ", max " << report.max_rmse << "\n"
              << "leakage audit: " << (report.audit_passed ? "passed" : "FAILED") << " ("
              << report.audit_entries << " transform fits)\nwrote " << out_file << "\n";
    return kExitOk;
}

int run_compare(const std::string& file_a, const std::string& file_b,
                const std::string& out_file, bool use_ttest, bool standalone) {
    const CvReport a = cv_report_from_json(read_file(file_a));
    const CvReport b = cv_report_from_json(read_file(file_b));
    const PairedTest test = use_ttest ? PairedTest::TTest : PairedTest::Wilcoxon;
    const ComparisonResult result =
        standalone ? standalone_test(a, b, test) : compare_models(a, b, test);
    if (!out_file.empty()) write_file(out_file, to_json_string(result) + "\n");
    std::cout << "models: " << result.model_a << " vs " << result.model_b << "\n"
              << "averaged p over " << result.p_values.size()
              << " repetitions: " << result.averaged_p << "\n"
              << "direction: "
              << (result.direction < 0   ? result.model_a + " has lower squared error"
                  : result.direction > 0 ? result.model_b + " has lower squared error"
                                         : "tie")
              << "\n";
    if (!out_file.empty()) std::cout << "wrote " << out_file << "\n";
    return kExitOk;
}

int run_table(const std::vector<std::string>& report_files, const std::string& out_file) {
    std::vector<CvReport> reports;
    reports.reserve(report_files.size());
    for (const auto& file : report_files) {
        reports.push_back(cv_report_from_json(read_file(file)));
    }
    std::vector<std::string> warnings;
    const std::string table = render_table(reports, &warnings);
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";
    std::cout << table;
    if (!out_file.empty()) {
        write_file(out_file, table);
        std::cout << "wrote " << out_file << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPD-manifold tangent-space regression pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort with ground truth");
    CohortSpec spec;
    std::string synth_out;
    bool synth_force = false;
    int synth_jobs = 0;
    std::string target_kind = "brainvol_like";
    synth->add_option("--subjects", spec.n_subjects, "number of subjects (>= 20)");
    synth->add_option("--channels", spec.n_channels, "number of channels");
    synth->add_option("--fs", spec.samples_per_second, "sampling rate in Hz");
    synth->add_option("--duration", spec.duration_seconds, "recording length in seconds");
    synth->add_option("--seed", spec.seed, "cohort seed");
    synth->add_option("--effect-size", spec.effect_size,
                      "fraction of non-covariate target variance from the planted signal");
    synth->add_option("--target-kind", target_kind, "brainvol_like | hippvol_like");
    synth->add_option("--disturbance-norm", spec.disturbance_norm,
                      "tangent-space spread of subject structure");
    synth->add_option("--paradigm", spec.paradigm, "paradigm label stored with recordings");
    synth->add_option("--out", synth_out, "output cohort directory")->required();
    synth->add_flag("--force", synth_force, "allow writing into a nonempty directory");
    synth->add_option("--jobs", synth_jobs, "worker threads (0 = auto)");

    // featurize
    auto* featurize = app.add_subcommand("featurize", "recordings -> subject means + features");
    std::string feat_cohort, feat_out;
    bool feat_force = false;
    ConfigCli feat_config;
    featurize->add_option("--cohort", feat_cohort, "cohort directory from synth")->required();
    featurize->add_option("--out", feat_out, "output directory");
    featurize->add_flag("--force", feat_force, "allow writing into a nonempty directory");
    feat_config.attach(featurize);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "repeated nested cross-validation");
    std::string eval_features, eval_cohort, eval_out = "cv_report.json", eval_label;
    bool eval_covariates_only = false;
    ConfigCli eval_config;
    evaluate->add_option("--features", eval_features, "featurize output directory")->required();
    evaluate->add_option("--cohort", eval_cohort, "cohort directory (for targets.csv)")
        ->required();
    evaluate->add_option("--out", eval_out, "output report JSON");
    evaluate->add_option("--label", eval_label, "target label recorded in the report");
    evaluate->add_flag("--covariates-only", eval_covariates_only,
                       "baseline model without EEG features");
    eval_config.attach(evaluate);

    // compare
    auto* compare = app.add_subcommand("compare", "paired squared-error comparison");
    std::string cmp_a, cmp_b, cmp_out;
    bool cmp_ttest = false, cmp_standalone = false;
    compare->add_option("report_a", cmp_a, "first CV report JSON")->required();
    compare->add_option("report_b", cmp_b, "second CV report JSON")->required();
    compare->add_option("--out", cmp_out, "output comparison JSON");
    compare->add_flag("--ttest", cmp_ttest, "paired t-test instead of Wilcoxon signed-rank");
    compare->add_flag("--standalone", cmp_standalone,
                      "require report_b to be a covariates-only baseline");

    // table
    auto* table = app.add_subcommand("table", "mean/min/max RMSE grid over conditions");
    std::vector<std::string> table_reports;
    std::string table_out;
    table->add_option("reports", table_reports, "CV report JSON files")->required();
    table->add_option("--out", table_out, "also write the table to a file");

    // demo-swelling
    auto* demo = app.add_subcommand("demo-swelling",
                                    "determinant contrast of the three mean definitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion") {
            return app.exit(e);
        }
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (*synth) {
            spec.target_kind = target_kind_from_string(target_kind);
            return run_synth(synth_out, spec, synth_force, synth_jobs);
        }
        if (*featurize) {
            if (!feat_config.print_config && feat_out.empty()) {
                throw ArgumentError("featurize: --out is required");
            }
            return run_featurize(feat_cohort, feat_out, feat_config, feat_force);
        }
        if (*evaluate) {
            return run_evaluate(eval_features, eval_cohort, eval_out, eval_config,
                                eval_covariates_only, eval_label);
        }
        if (*compare) return run_compare(cmp_a, cmp_b, cmp_out, cmp_ttest, cmp_standalone);
        if (*table) return run_table(table_reports, table_out);
        if (*demo) {
            std::cout << swelling_demo();
            return kExitOk;
        }
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
