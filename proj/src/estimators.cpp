#include "spdtan/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace spdtan {

std::string to_string(DependenceKind d) {
    return d == DependenceKind::Covariance ? "covariance" : "kendall";
}

std::string to_string(MatrixDesign d) {
    return d == MatrixDesign::Spatial ? "spatial" : "spatiofrequential";
}

DependenceKind dependence_from_string(const std::string& s) {
    if (s == "covariance") return DependenceKind::Covariance;
    if (s == "kendall") return DependenceKind::Kendall;
    throw ArgumentError("unknown dependence '" + s + "' (expected covariance | kendall)");
}

MatrixDesign design_from_string(const std::string& s) {
    if (s == "spatial") return MatrixDesign::Spatial;
    if (s == "spatiofrequential") return MatrixDesign::Spatiofrequential;
    throw ArgumentError("unknown design '" + s + "' (expected spatial | spatiofrequential)");
}

SpdMatrix sample_covariance(const Segment& seg) {
    const long t = seg.n_samples();
    if (t < 2) throw ArgumentError("sample_covariance: need at least 2 samples per segment");
    Matrix cov = Matrix::Zero(seg.n_channels(), seg.n_channels());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(seg.data, 1.0 / static_cast<double>(t - 1));
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    // PSD by construction; promote rank-deficient estimates with a floor
    // two decades above the SPD threshold (absolute fallback for the
    // all-zero segment).
    const SymmetricMatrix sym = SymmetricMatrix::symmetrized(std::move(cov));
    const Eigendecomposition eig = eig_sym(sym);
    const double max_eig = std::max(eig.eigenvalues(eig.eigenvalues.size() - 1), 0.0);
    const double floor = std::max(1e-8 * max_eig, 1e-10);
    return nearest_spd(sym, floor);
}

namespace {

std::uint64_t tie_pairs(const std::vector<double>& sorted) {
    std::uint64_t pairs = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
            ++run;
        } else {
            pairs += static_cast<std::uint64_t>(run) * (run - 1) / 2;
            run = 1;
        }
    }
    return pairs;
}

/// Merge-sort inversion count (strict inversions only, so ties in y do not
/// count as discordances).
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch,
                               std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t count = count_inversions(v, scratch, lo, mid) +
                          count_inversions(v, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            count += mid - i;
            scratch[k++] = v[j++];
        } else {
            scratch[k++] = v[i++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + lo, scratch.begin() + hi, v.begin() + lo);
    return count;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw ArgumentError("kendall_tau: length mismatch");
    if (n < 2) throw ArgumentError("kendall_tau: need at least 2 observations");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    // Knight's algorithm: tie counts in x, in (x, y) jointly, in y, and the
    // number of discordant swaps from sorting y within x-order.
    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t ties_x = 0, ties_xy = 0;
    {
        std::size_t run_x = 1, run_xy = 1;
        for (std::size_t i = 1; i <= n; ++i) {
            const bool same_x = i < n && x[order[i]] == x[order[i - 1]];
            const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
            if (same_x) ++run_x;
            else {
                ties_x += static_cast<std::uint64_t>(run_x) * (run_x - 1) / 2;
                run_x = 1;
            }
            if (same_xy) ++run_xy;
            else {
                ties_xy += static_cast<std::uint64_t>(run_xy) * (run_xy - 1) / 2;
                run_xy = 1;
            }
        }
    }

    std::vector<double> y_in_x_order(n);
    for (std::size_t i = 0; i < n; ++i) y_in_x_order[i] = y[order[i]];
    std::vector<double> scratch(n);
    const std::uint64_t swaps = count_inversions(y_in_x_order, scratch, 0, n);

    std::vector<double> y_sorted(y.begin(), y.end());
    std::sort(y_sorted.begin(), y_sorted.end());
    const std::uint64_t ties_y = tie_pairs(y_sorted);

    const std::int64_t concordant_minus_discordant =
        static_cast<std::int64_t>(n0) - static_cast<std::int64_t>(ties_x) -
        static_cast<std::int64_t>(ties_y) + static_cast<std::int64_t>(ties_xy) -
        2 * static_cast<std::int64_t>(swaps);
    const double denom = std::sqrt(static_cast<double>(n0 - ties_x)) *
                         std::sqrt(static_cast<double>(n0 - ties_y));
    if (denom == 0.0) throw ArgumentError("kendall_tau: a series is constant");
    return static_cast<double>(concordant_minus_discordant) / denom;
}

double kendall_tau_brute(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw ArgumentError("kendall_tau_brute: length mismatch");
    if (n < 2) throw ArgumentError("kendall_tau_brute: need at least 2 observations");
    std::int64_t concordant = 0, discordant = 0;
    std::uint64_t ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0) ++ties_x;
            if (dy == 0.0) ++ties_y;
            if (dx != 0.0 && dy != 0.0) {
                if ((dx > 0.0) == (dy > 0.0)) ++concordant;
                else ++discordant;
            }
        }
    }
    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const double denom = std::sqrt(static_cast<double>(n0 - ties_x)) *
                         std::sqrt(static_cast<double>(n0 - ties_y));
    if (denom == 0.0) throw ArgumentError("kendall_tau_brute: a series is constant");
    return static_cast<double>(concordant - discordant) / denom;
}

SpdMatrix kendall_matrix(const Segment& seg) {
    const int n = seg.n_channels();
    const long t = seg.n_samples();
    if (t < 2) throw ArgumentError("kendall_matrix: need at least 2 samples per segment");
    if (n < 1) throw ArgumentError("kendall_matrix: empty segment");

    std::vector<std::vector<double>> rows(n);
    for (int ch = 0; ch < n; ++ch) {
        rows[ch].resize(t);
        Eigen::Map<Vector>(rows[ch].data(), t) = seg.data.row(ch);
        if (*std::max_element(rows[ch].begin(), rows[ch].end()) ==
            *std::min_element(rows[ch].begin(), rows[ch].end())) {
            throw ArgumentError("kendall_matrix: channel " + std::to_string(ch) +
                                " is constant");
        }
    }

    Matrix tau = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            tau(i, j) = tau(j, i) = kendall_tau(rows[i], rows[j]);
        }
    }

    // tau matrices are not guaranteed positive definite: clip the spectrum,
    // then restore the unit diagonal by congruence with diag(d)^{-1/2}
    // (congruence keeps definiteness).
    const SymmetricMatrix sym = SymmetricMatrix::symmetrized(std::move(tau));
    const Eigendecomposition eig = eig_sym(sym);
    const double max_eig = eig.eigenvalues(eig.eigenvalues.size() - 1);
    const SpdMatrix repaired = nearest_spd(sym, 1e-6 * std::max(max_eig, 1.0));
    Vector inv_sqrt_diag = repaired.mat().diagonal().array().rsqrt();
    Matrix normalized =
        inv_sqrt_diag.asDiagonal() * repaired.mat() * inv_sqrt_diag.asDiagonal();
    const double scale_min = inv_sqrt_diag.minCoeff();
    return SpdMatrix::from_certified(std::move(normalized),
                                     repaired.min_eigenvalue() * scale_min * scale_min);
}

std::vector<SpdMatrix> build_subject_matrices(const Recording& rec, DependenceKind dep,
                                              MatrixDesign design,
                                              std::span<const BandSpec> bands, double seconds) {
    validate_recording(rec);
    const std::vector<Segment> segments = segment(rec, seconds);
    std::vector<SpdMatrix> out;
    out.reserve(segments.size());
    for (const auto& seg : segments) {
        const Segment prepared = design == MatrixDesign::Spatiofrequential
                                     ? stack_bands(seg, bands, rec.samples_per_second)
                                     : seg;
        out.push_back(dep == DependenceKind::Covariance ? sample_covariance(prepared)
                                                        : kendall_matrix(prepared));
    }
    return out;
}

SpdMatrix subject_mean(std::span<const SpdMatrix> matrices, GeometryKind geometry,
                       const KarcherConfig& cfg) {
    return mean_by_geometry(matrices, geometry, cfg);
}

Vector subject_feature(std::span<const SpdMatrix> matrices, GeometryKind geometry,
                       const SpdMatrix* group_reference, bool isometric,
                       const KarcherConfig& cfg) {
    if (matrices.empty()) throw ArgumentError("subject_feature: no matrices");
    if ((geometry == GeometryKind::Euclidean) != (group_reference == nullptr)) {
        throw ArgumentError(geometry == GeometryKind::Euclidean
                                ? "subject_feature: Euclidean geometry takes no group reference"
                                : "subject_feature: tangent geometries need a group reference");
    }
    const SpdMatrix mz = subject_mean(matrices, geometry, cfg);
    if (geometry == GeometryKind::Euclidean) {
        return upper_vectorize(mz.sym(), isometric);
    }
    return tangent_map(mz, *group_reference, isometric).values;
}

SpdMatrix fit_group_reference(std::span<const SpdMatrix> subject_means, GeometryKind geometry,
                              const KarcherConfig& cfg) {
    return mean_by_geometry(subject_means, geometry, cfg);
}

std::vector<std::string> upper_feature_names(int dim) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(dim) * (dim + 1) / 2);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            names.push_back("u" + std::to_string(i) + "_" + std::to_string(j));
        }
    }
    return names;
}

}  // namespace spdtan
