// Per-segment SPD matrix estimation (sample covariance, Kendall rank
// correlation; spatial and spatiofrequential designs) and per-subject
// aggregation into feature vectors.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdtan/manifold.hpp"
#include "spdtan/signal.hpp"

namespace spdtan {

enum class DependenceKind { Covariance, Kendall };
enum class MatrixDesign { Spatial, Spatiofrequential };

std::string to_string(DependenceKind d);
std::string to_string(MatrixDesign d);
DependenceKind dependence_from_string(const std::string& s);
MatrixDesign design_from_string(const std::string& s);

/// Sample covariance (1/(t-1)) X X^T of the segment as given (centering, if
/// wanted, happens at segmentation). Positive semidefinite by construction;
/// rank-deficient estimates are promoted to SPD by eigenvalue clipping.
SpdMatrix sample_covariance(const Segment& seg);

/// Tie-corrected Kendall tau_b of two equal-length series via the
/// merge-sort inversion count, O(t log t).
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// O(t^2) pair-counting tau_b. Independent oracle for kendall_tau; kept
/// apart from the fast path on purpose and only suitable for short series.
double kendall_tau_brute(std::span<const double> x, std::span<const double> y);

/// Matrix of pairwise tau_b with unit diagonal, repaired to SPD by clipping
/// eigenvalues at 1e-6 * (largest eigenvalue) and re-normalized to unit
/// diagonal by congruence with the inverse square roots of the diagonal.
/// Throws ArgumentError naming the channel when one is constant.
SpdMatrix kendall_matrix(const Segment& seg);

/// One SPD matrix per segment: Spatial estimates on the raw segment
/// (n x n), Spatiofrequential on the stacked band-filtered copies
/// (4n x 4n for four bands). Kendall applies to the same signals.
std::vector<SpdMatrix> build_subject_matrices(const Recording& rec, DependenceKind dep,
                                              MatrixDesign design,
                                              std::span<const BandSpec> bands, double seconds);

/// Mean of the per-segment matrices using the geometry's own mean.
SpdMatrix subject_mean(std::span<const SpdMatrix> matrices, GeometryKind geometry,
                       const KarcherConfig& cfg = {});

/// Subject feature vector: the geometry's subject mean M_z, then either
/// upper_vectorize(M_z) (Euclidean; no reference allowed) or
/// tangent_map(M_z, *group_reference) (Log-Euclidean / Riemannian;
/// reference required).
Vector subject_feature(std::span<const SpdMatrix> matrices, GeometryKind geometry,
                       const SpdMatrix* group_reference, bool isometric,
                       const KarcherConfig& cfg = {});

/// Group reference M_G: the selected geometric mean of the training
/// subjects' means. Must only ever see training subjects; the CV driver
/// audits this.
SpdMatrix fit_group_reference(std::span<const SpdMatrix> subject_means, GeometryKind geometry,
                              const KarcherConfig& cfg = {});

/// Feature names for a d x d symmetric source, matching upper_vectorize
/// order: u<i>_<j> for the entry at row i, column j.
std::vector<std::string> upper_feature_names(int dim);

}  // namespace spdtan
