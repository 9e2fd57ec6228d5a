#include "spdtan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spdtan/parallel.hpp"
#include "spdtan/recording_io.hpp"

namespace spdtan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ArgumentError("config: key '" + key + "' expects true/false, got '" + value + "'");
}

double parse_double(const std::string& value, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
        throw ArgumentError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
    return v;
}

long parse_int(const std::string& value, const std::string& key) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0') {
        throw ArgumentError("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream stream(s);
    std::string part;
    while (std::getline(stream, part, sep)) parts.push_back(trim(part));
    return parts;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<BandSpec> parse_bands(const std::string& text) {
    std::vector<BandSpec> bands;
    for (const std::string& part : split(text, ',')) {
        if (part.empty()) continue;
        const auto colon = part.find(':');
        const auto dash = part.find('-', colon == std::string::npos ? 0 : colon);
        if (colon == std::string::npos || dash == std::string::npos) {
            throw ArgumentError("config: band '" + part + "' must look like name:low-high");
        }
        BandSpec band;
        band.name = trim(part.substr(0, colon));
        band.low_hz = parse_double(trim(part.substr(colon + 1, dash - colon - 1)), "bands");
        band.high_hz = parse_double(trim(part.substr(dash + 1)), "bands");
        if (!(band.low_hz > 0.0) || !(band.low_hz < band.high_hz)) {
            throw ArgumentError("config: band '" + part + "' has invalid edges");
        }
        bands.push_back(std::move(band));
    }
    if (bands.empty()) throw ArgumentError("config: empty band list");
    return bands;
}

std::string format_bands(const std::vector<BandSpec>& bands) {
    std::ostringstream out;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        out << (i ? "," : "") << bands[i].name << ":" << bands[i].low_hz << "-"
            << bands[i].high_hz;
    }
    return out.str();
}

CvConfig PipelineConfig::cv_config() const {
    CvConfig cv;
    cv.outer_folds = outer_folds;
    cv.inner_folds = inner_folds;
    cv.alpha = alpha;
    cv.n_lambdas = n_lambdas;
    cv.lambda_ratio = lambda_ratio;
    cv.tol = tol;
    cv.max_passes = max_passes;
    cv.unpenalized_covariates = unpenalized_covariates;
    cv.jobs = jobs;
    return cv;
}

std::map<std::string, std::string> PipelineConfig::echo() const {
    std::map<std::string, std::string> out;
    out["dependence"] = to_string(dependence);
    out["geometry"] = to_string(geometry);
    out["design"] = to_string(design);
    out["bands"] = format_bands(bands);
    out["segment_seconds"] = auto_segment ? std::string("auto") : format_double(segment_seconds);
    out["isometric"] = isometric ? "true" : "false";
    out["alpha"] = format_double(alpha);
    out["n_lambdas"] = std::to_string(n_lambdas);
    out["lambda_ratio"] = format_double(lambda_ratio);
    out["tol"] = format_double(tol);
    out["max_passes"] = std::to_string(max_passes);
    out["outer_folds"] = std::to_string(outer_folds);
    out["inner_folds"] = std::to_string(inner_folds);
    out["repetitions"] = std::to_string(repetitions);
    out["base_seed"] = std::to_string(base_seed);
    std::string cov;
    for (std::size_t i = 0; i < covariates.size(); ++i) cov += (i ? "," : "") + covariates[i];
    out["covariates"] = cov;
    out["unpenalized_covariates"] = unpenalized_covariates ? "true" : "false";
    out["jobs"] = std::to_string(jobs);
    out["karcher_tolerance"] = format_double(karcher.tolerance);
    out["karcher_max_iterations"] = std::to_string(karcher.max_iterations);
    out["karcher_step"] = format_double(karcher.step);
    return out;
}

PipelineConfig parse_config(const std::map<std::string, std::string>& keys) {
    PipelineConfig cfg;
    for (const auto& [key, value] : keys) {
        if (key == "dependence") cfg.dependence = dependence_from_string(value);
        else if (key == "geometry") cfg.geometry = geometry_from_string(value);
        else if (key == "design") cfg.design = design_from_string(value);
        else if (key == "bands") cfg.bands = parse_bands(value);
        else if (key == "segment_seconds") {
            if (value == "auto") {
                cfg.auto_segment = true;
            } else {
                cfg.auto_segment = false;
                cfg.segment_seconds = parse_double(value, key);
                if (!(cfg.segment_seconds > 0.0)) {
                    throw ArgumentError("config: segment_seconds must be positive or 'auto'");
                }
            }
        } else if (key == "isometric") cfg.isometric = parse_bool(value, key);
        else if (key == "alpha") cfg.alpha = parse_double(value, key);
        else if (key == "n_lambdas") cfg.n_lambdas = static_cast<int>(parse_int(value, key));
        else if (key == "lambda_ratio") cfg.lambda_ratio = parse_double(value, key);
        else if (key == "tol") cfg.tol = parse_double(value, key);
        else if (key == "max_passes") cfg.max_passes = static_cast<int>(parse_int(value, key));
        else if (key == "outer_folds") cfg.outer_folds = static_cast<int>(parse_int(value, key));
        else if (key == "inner_folds") cfg.inner_folds = static_cast<int>(parse_int(value, key));
        else if (key == "repetitions") cfg.repetitions = static_cast<int>(parse_int(value, key));
        else if (key == "base_seed") {
            cfg.base_seed = static_cast<std::uint64_t>(parse_int(value, key));
        } else if (key == "covariates") cfg.covariates = split(value, ',');
        else if (key == "unpenalized_covariates") {
            cfg.unpenalized_covariates = parse_bool(value, key);
        } else if (key == "jobs") cfg.jobs = static_cast<int>(parse_int(value, key));
        else if (key == "karcher_tolerance") cfg.karcher.tolerance = parse_double(value, key);
        else if (key == "karcher_max_iterations") {
            cfg.karcher.max_iterations = static_cast<int>(parse_int(value, key));
        } else if (key == "karcher_step") cfg.karcher.step = parse_double(value, key);
        else throw ArgumentError("config: unknown key '" + key + "'");
    }
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ArgumentError("config: alpha must be in [0, 1]");
    if (cfg.outer_folds < 2 || cfg.inner_folds < 2) {
        throw ArgumentError("config: fold counts must be at least 2");
    }
    if (cfg.repetitions < 1) throw ArgumentError("config: repetitions must be >= 1");
    if (cfg.n_lambdas < 1) throw ArgumentError("config: n_lambdas must be >= 1");
    return cfg;
}

PipelineConfig load_config_file(const std::string& path,
                                const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> keys;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ArgumentError("config: line " + std::to_string(line_no) +
                                    " is not key = value");
            }
            keys[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }
    for (const auto& [key, value] : overrides) keys[key] = value;
    return parse_config(keys);
}

std::string print_config(const PipelineConfig& cfg) {
    std::ostringstream out;
    for (const auto& [key, value] : cfg.echo()) out << key << " = " << value << "\n";
    return out.str();
}

std::string code_version() {
#ifdef SPDTAN_VERSION
    return SPDTAN_VERSION;
#else
    return "unknown";
#endif
}

namespace {

void write_id_value_csv(const std::string& path, const std::string& header,
                        const std::vector<std::string>& ids,
                        const std::function<std::string(int)>& row) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << header << "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i] << "," << row(static_cast<int>(i)) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

std::string subject_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%04d", index);
    return buf;
}

}  // namespace

std::vector<std::string> write_cohort(const CohortPaths& paths, const GroundTruth& truth,
                                      int jobs) {
    fs::create_directories(paths.recordings_dir());
    std::vector<std::string> ids;
    ids.reserve(truth.spec.n_subjects);
    for (int z = 0; z < truth.spec.n_subjects; ++z) ids.push_back(subject_id(z));

    parallel_for(truth.spec.n_subjects, jobs, [&](int z) {
        const Recording rec = render_recording(truth, z);
        save_recording_binary(paths.recording(ids[z]), rec);
    });

    write_id_value_csv(paths.targets(), "id,target", ids, [&](int z) {
        return format_double(truth.targets(z));
    });

    auto [cov_names, cov_values] = covariate_table(truth);
    std::string header = "id";
    for (const auto& name : cov_names) header += "," + name;
    write_id_value_csv(paths.covariates(), header, ids, [&](int z) {
        std::string row;
        for (int j = 0; j < cov_values.cols(); ++j) {
            row += (j ? "," : "") + format_double(cov_values(z, j));
        }
        return row;
    });

    {
        std::ofstream out(paths.ground_truth());
        if (!out) throw IoError("cannot open for writing: " + paths.ground_truth());
        out << to_json_string(truth) << "\n";
    }
    {
        json manifest;
        manifest["kind"] = "cohort";
        manifest["code_version"] = code_version();
        manifest["n_subjects"] = truth.spec.n_subjects;
        manifest["n_channels"] = truth.spec.n_channels;
        manifest["samples_per_second"] = truth.spec.samples_per_second;
        manifest["duration_seconds"] = truth.spec.duration_seconds;
        manifest["seed"] = truth.spec.seed;
        manifest["effect_size"] = truth.spec.effect_size;
        manifest["target_kind"] = to_string(truth.spec.target_kind);
        manifest["ids"] = ids;
        std::ofstream out(paths.manifest());
        if (!out) throw IoError("cannot open for writing: " + paths.manifest());
        out << manifest.dump(2) << "\n";
    }
    return ids;
}

namespace {

struct CsvTable {
    std::vector<std::string> columns;  // without the id column
    std::vector<std::string> ids;
    Matrix values;
};

CsvTable load_id_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
    CsvTable table;
    std::vector<std::string> header = split(line, ',');
    if (header.empty() || header[0] != "id") {
        throw IoError("CSV must start with an id column: " + path);
    }
    table.columns.assign(header.begin() + 1, header.end());
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) continue;
        table.ids.push_back(trim(cell));
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            values.push_back(std::strtod(cell.c_str(), nullptr));
            ++col;
        }
        if (col != table.columns.size()) {
            throw IoError("CSV row for id '" + table.ids.back() + "' has " +
                          std::to_string(col) + " values, expected " +
                          std::to_string(table.columns.size()) + ": " + path);
        }
    }
    table.values.resize(static_cast<long>(table.ids.size()),
                        static_cast<long>(table.columns.size()));
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            table.values(static_cast<long>(i), static_cast<long>(j)) =
                values[i * table.columns.size() + j];
        }
    }
    return table;
}

}  // namespace

Vector load_targets(const std::string& path, const std::vector<std::string>& ids) {
    const CsvTable table = load_id_csv(path);
    if (table.columns.size() != 1 || table.columns[0] != "target") {
        throw IoError("targets CSV must have columns id,target: " + path);
    }
    Vector out(static_cast<long>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = std::find(table.ids.begin(), table.ids.end(), ids[i]);
        if (it == table.ids.end()) {
            throw ArgumentError("targets CSV is missing subject '" + ids[i] + "'");
        }
        out(static_cast<long>(i)) = table.values(it - table.ids.begin(), 0);
    }
    return out;
}

FeaturizeOutput featurize_cohort(const CohortPaths& cohort, const PipelineConfig& cfg) {
    const CsvTable cov_table = load_id_csv(cohort.covariates());
    const int n_subjects = static_cast<int>(cov_table.ids.size());
    if (n_subjects == 0) throw ArgumentError("featurize: cohort has no subjects");

    // Select the configured covariate columns.
    std::vector<int> cov_cols;
    for (const auto& name : cfg.covariates) {
        const auto it = std::find(cov_table.columns.begin(), cov_table.columns.end(), name);
        if (it == cov_table.columns.end()) {
            throw ArgumentError("featurize: covariate '" + name + "' not present in " +
                                cohort.covariates());
        }
        cov_cols.push_back(static_cast<int>(it - cov_table.columns.begin()));
    }

    FeaturizeOutput out;
    out.means.ids = cov_table.ids;
    out.means.covariate_names = cfg.covariates;
    out.means.covariates.resize(n_subjects, static_cast<long>(cov_cols.size()));
    for (int i = 0; i < n_subjects; ++i) {
        for (std::size_t j = 0; j < cov_cols.size(); ++j) {
            out.means.covariates(i, static_cast<long>(j)) = cov_table.values(i, cov_cols[j]);
        }
    }

    double seconds = cfg.segment_seconds;
    if (cfg.auto_segment) {
        const Recording probe = load_recording_binary(cohort.recording(cov_table.ids[0]));
        const std::vector<double> candidates = {2.0, 4.0, 8.0, 16.0};
        seconds = choose_segment_length(probe, candidates);
    }
    out.segment_seconds = seconds;

    std::vector<SpdMatrix> means(n_subjects, SpdMatrix::from_certified(Matrix::Identity(1, 1), 1.0));
    parallel_for(n_subjects, cfg.jobs, [&](int z) {
        const Recording rec = load_recording_binary(cohort.recording(cov_table.ids[z]));
        try {
            const std::vector<SpdMatrix> matrices =
                build_subject_matrices(rec, cfg.dependence, cfg.design, cfg.bands, seconds);
            means[z] = subject_mean(matrices, cfg.geometry, cfg.karcher);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("featurize: subject '" + cov_table.ids[z] + "': " + e.what(),
                                   e.residual(), e.iterations());
        } catch (const std::exception& e) {
            throw ArgumentError("featurize: subject '" + cov_table.ids[z] + "': " + e.what());
        }
    });
    out.means.means = std::move(means);

    // Global-reference features for export; CV refits the reference per fold.
    const int dim = out.means.means.front().dim();
    out.feature_names = upper_feature_names(dim);
    out.features.resize(n_subjects, static_cast<long>(out.feature_names.size()));
    if (cfg.geometry == GeometryKind::Euclidean) {
        for (int z = 0; z < n_subjects; ++z) {
            out.features.row(z) = upper_vectorize(out.means.means[z].sym(), cfg.isometric);
        }
    } else {
        const SpdMatrix reference =
            fit_group_reference(out.means.means, cfg.geometry, cfg.karcher);
        for (int z = 0; z < n_subjects; ++z) {
            out.features.row(z) =
                tangent_map(out.means.means[z], reference, cfg.isometric).values;
        }
    }
    return out;
}

void write_featurize_output(const FeaturizePaths& paths, const FeaturizeOutput& out,
                            const PipelineConfig& cfg) {
    fs::create_directories(paths.means_dir());
    for (std::size_t z = 0; z < out.means.ids.size(); ++z) {
        save_matrix_csv(paths.mean(out.means.ids[z]), out.means.means[z].mat());
    }

    std::ofstream feat(paths.features());
    if (!feat) throw IoError("cannot open for writing: " + paths.features());
    feat << "id";
    for (const auto& name : out.means.covariate_names) feat << "," << name;
    for (const auto& name : out.feature_names) feat << "," << name;
    feat << "\n";
    for (std::size_t z = 0; z < out.means.ids.size(); ++z) {
        feat << out.means.ids[z];
        for (long j = 0; j < out.means.covariates.cols(); ++j) {
            feat << "," << format_double(out.means.covariates(static_cast<long>(z), j));
        }
        for (long j = 0; j < out.features.cols(); ++j) {
            feat << "," << format_double(out.features(static_cast<long>(z), j));
        }
        feat << "\n";
    }
    if (!feat) throw IoError("write failed: " + paths.features());

    json manifest;
    manifest["kind"] = "features";
    manifest["code_version"] = code_version();
    manifest["config"] = cfg.echo();
    manifest["segment_seconds"] = out.segment_seconds;
    manifest["ids"] = out.means.ids;
    manifest["feature_dim"] = out.feature_names.size();
    std::ofstream mf(paths.manifest());
    if (!mf) throw IoError("cannot open for writing: " + paths.manifest());
    mf << manifest.dump(2) << "\n";
}

FeaturizeOutput load_featurize_output(const FeaturizePaths& paths, PipelineConfig* cfg_out) {
    std::ifstream mf(paths.manifest());
    if (!mf) throw IoError("cannot open: " + paths.manifest());
    json manifest;
    mf >> manifest;
    if (manifest.at("kind").get<std::string>() != "features") {
        throw IoError("manifest is not a featurize manifest: " + paths.manifest());
    }
    const PipelineConfig cfg =
        parse_config(manifest.at("config").get<std::map<std::string, std::string>>());
    if (cfg_out) *cfg_out = cfg;

    FeaturizeOutput out;
    out.segment_seconds = manifest.at("segment_seconds").get<double>();
    const auto ids = manifest.at("ids").get<std::vector<std::string>>();

    const CsvTable table = load_id_csv(paths.features());
    if (table.ids != ids) {
        throw IoError("features.csv subject ids do not match the manifest: " + paths.features());
    }
    const std::size_t n_cov = cfg.covariates.size();
    if (table.columns.size() < n_cov) {
        throw IoError("features.csv has fewer columns than the configured covariates");
    }
    for (std::size_t j = 0; j < n_cov; ++j) {
        if (table.columns[j] != cfg.covariates[j]) {
            throw IoError("features.csv covariate columns do not match the manifest config");
        }
    }
    out.means.ids = ids;
    out.means.covariate_names = cfg.covariates;
    out.means.covariates = table.values.leftCols(static_cast<long>(n_cov));
    out.feature_names.assign(table.columns.begin() + static_cast<long>(n_cov),
                             table.columns.end());
    out.features = table.values.rightCols(table.values.cols() - static_cast<long>(n_cov));

    out.means.means.reserve(ids.size());
    for (const auto& id : ids) {
        out.means.means.push_back(SpdMatrix(load_matrix_csv(paths.mean(id))));
    }
    return out;
}

FoldFeaturizer make_manifold_featurizer(const SubjectMeans& means, GeometryKind geometry,
                                        bool isometric, const KarcherConfig& karcher) {
    if (means.means.empty()) throw ArgumentError("make_manifold_featurizer: no subject means");
    const int n = static_cast<int>(means.means.size());
    const int dim = means.means.front().dim();
    auto names = std::make_shared<std::vector<std::string>>(upper_feature_names(dim));

    if (geometry == GeometryKind::Euclidean) {
        Matrix features(n, dim * (dim + 1) / 2);
        for (int z = 0; z < n; ++z) {
            features.row(z) = upper_vectorize(means.means[z].sym(), isometric);
        }
        return constant_featurizer(std::move(features), *names);
    }

    // Shared read-only state; safe to call concurrently across repetitions.
    auto subject_means = std::make_shared<std::vector<SpdMatrix>>(means.means);
    auto logs = std::make_shared<std::vector<Matrix>>();
    if (geometry == GeometryKind::LogEuclidean) {
        logs->reserve(n);
        for (const auto& m : *subject_means) logs->push_back(matrix_log(m).mat());
    }

    return [subject_means, logs, names, geometry, isometric, karcher,
            dim](const std::vector<int>& train_ids) {
        if (train_ids.empty()) throw ArgumentError("featurizer: empty training set");
        SpdMatrix reference = [&] {
            if (geometry == GeometryKind::LogEuclidean) {
                Matrix acc = Matrix::Zero(dim, dim);
                for (int id : train_ids) acc += (*logs)[id];
                acc /= static_cast<double>(train_ids.size());
                return matrix_exp(SymmetricMatrix::symmetrized(std::move(acc)));
            }
            std::vector<SpdMatrix> train;
            train.reserve(train_ids.size());
            for (int id : train_ids) train.push_back((*subject_means)[id]);
            return mean_riemannian(train, karcher).mean;
        }();

        FeaturizeResult result;
        result.names = *names;
        result.fitted_ids = train_ids;
        result.features.resize(static_cast<long>(subject_means->size()),
                               static_cast<long>(names->size()));
        for (std::size_t z = 0; z < subject_means->size(); ++z) {
            result.features.row(static_cast<long>(z)) =
                tangent_map((*subject_means)[z], reference, isometric).values;
        }
        return result;
    };
}

namespace {

struct TableRow {
    const char* dependence;
    const char* approach;
    const char* design;
};

std::string condition_value(const CvReport& report, const std::string& key) {
    const auto it = report.condition.find(key);
    return it == report.condition.end() ? "" : it->second;
}

}  // namespace

std::string render_table(const std::vector<CvReport>& reports,
                         std::vector<std::string>* warnings) {
    // Row layout mirrors the reporting grid: spatiofrequential block first,
    // covariance before rank correlation, EUC / TAN_log / TAN_rie within.
    static constexpr TableRow kRows[] = {
        {"COV", "EUC", "SF"},     {"COV", "TAN_log", "SF"}, {"COV", "TAN_rie", "SF"},
        {"KEN", "EUC", "SF"},     {"KEN", "TAN_log", "SF"}, {"KEN", "TAN_rie", "SF"},
        {"COV", "EUC", "S"},      {"COV", "TAN_log", "S"},  {"COV", "TAN_rie", "S"},
        {"KEN", "EUC", "S"},      {"KEN", "TAN_log", "S"},  {"KEN", "TAN_rie", "S"},
    };
    static const std::map<std::string, std::string> kApproach = {
        {"euclidean", "EUC"}, {"log_euclidean", "TAN_log"}, {"riemannian", "TAN_rie"}};
    static const std::map<std::string, std::string> kDependence = {{"covariance", "COV"},
                                                                   {"kendall", "KEN"}};
    static const std::map<std::string, std::string> kDesign = {{"spatial", "S"},
                                                               {"spatiofrequential", "SF"}};

    std::vector<std::string> targets;
    for (const auto& report : reports) {
        const std::string target = condition_value(report, "target");
        if (std::find(targets.begin(), targets.end(), target) == targets.end()) {
            targets.push_back(target);
        }
    }
    std::sort(targets.begin(), targets.end());
    if (targets.empty()) targets.push_back("");

    const auto find_report = [&](const TableRow& row, const std::string& target)
        -> const CvReport* {
        for (const auto& report : reports) {
            if (kDependence.count(condition_value(report, "dependence")) &&
                kDependence.at(condition_value(report, "dependence")) == row.dependence &&
                kApproach.count(condition_value(report, "geometry")) &&
                kApproach.at(condition_value(report, "geometry")) == row.approach &&
                kDesign.count(condition_value(report, "design")) &&
                kDesign.at(condition_value(report, "design")) == row.design &&
                condition_value(report, "target") == target) {
                return &report;
            }
        }
        return nullptr;
    };

    std::ostringstream out;
    out << "Dep  Approach  Design";
    for (const auto& target : targets) {
        const std::string label = target.empty() ? "target" : target;
        out << "  | " << label << ": RMSE       Min        Max       ";
    }
    out << "\n";
    out << std::string(22 + targets.size() * 46, '-') << "\n";
    char buf[64];
    for (const auto& row : kRows) {
        std::snprintf(buf, sizeof(buf), "%-4s %-9s %-6s", row.dependence, row.approach,
                      row.design);
        out << buf;
        for (const auto& target : targets) {
            const CvReport* report = find_report(row, target);
            if (!report) {
                out << "  |        —          —          —      ";
                if (warnings) {
                    warnings->push_back(std::string("missing condition: ") + row.dependence +
                                        " " + row.approach + " " + row.design +
                                        (target.empty() ? "" : " (" + target + ")"));
                }
                continue;
            }
            std::snprintf(buf, sizeof(buf), "  | %9.3e  %9.3e  %9.3e", report->mean_rmse,
                          report->min_rmse, report->max_rmse);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

std::string swelling_demo() {
    Vector d1(2), d2(2);
    d1 << 2.0, 0.5;
    d2 << 0.5, 2.0;
    const std::vector<SpdMatrix> pair = {
        SpdMatrix::from_certified(Matrix(d1.asDiagonal()), 0.5),
        SpdMatrix::from_certified(Matrix(d2.asDiagonal()), 0.5)};
    const SpdMatrix euc = mean_euclidean(pair);
    const SpdMatrix log_euc = mean_logeuclidean(pair);
    const SpdMatrix rie = mean_riemannian(pair).mean;

    std::ostringstream out;
    out << "inputs: diag(2, 1/2) and diag(1/2, 2), det = 1 each\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "euclidean mean     det = %.12g  (swells above 1)\n",
                  euc.mat().determinant());
    out << buf;
    std::snprintf(buf, sizeof(buf), "log-euclidean mean det = %.12g\n",
                  log_euc.mat().determinant());
    out << buf;
    std::snprintf(buf, sizeof(buf), "riemannian mean    det = %.12g\n",
                  rie.mat().determinant());
    out << buf;
    return out.str();
}

}  // namespace spdtan
