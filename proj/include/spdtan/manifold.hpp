// The three geometries over SPD matrices: Euclidean, Log-Euclidean and
// affine-invariant Riemannian distances and means, plus the tangent-space
// mapping and upper-triangle vectorization that turn manifold points into
// feature vectors.

#pragma once

#include <span>
#include <string>

#include "spdtan/spd_core.hpp"

namespace spdtan {

enum class GeometryKind { Euclidean, LogEuclidean, Riemannian };

std::string to_string(GeometryKind g);
GeometryKind geometry_from_string(const std::string& s);

/// Vectorized tangent-space image of an SPD matrix at a reference point.
/// values has length d(d+1)/2; isometric records whether strict
/// off-diagonals carry the sqrt(2) weight that makes the 2-norm match the
/// Frobenius norm of the mapped matrix.
struct TangentVector {
    Vector values;
    SpdMatrix reference;
    bool isometric;
};

/// Karcher (Frechet) mean solver settings.
struct KarcherConfig {
    double tolerance = 1e-9;  // stop when the tangent gradient norm falls below
    int max_iterations = 50;
    double step = 1.0;  // in (0, 1]; halved whenever the cost fails to decrease
};

struct KarcherResult {
    SpdMatrix mean;
    int iterations;
    double gradient_norm;
};

/// Frobenius distance ||a - b||_F.
double dist_euclidean(const SpdMatrix& a, const SpdMatrix& b);

/// Arithmetic mean (1/N) sum C_i. SPD by convexity of the cone.
SpdMatrix mean_euclidean(std::span<const SpdMatrix> ms);

/// ||log(a) - log(b)||_F.
double dist_logeuclidean(const SpdMatrix& a, const SpdMatrix& b);

/// exp((1/N) sum log C_i). det equals the geometric mean of the input
/// determinants, so no swelling.
SpdMatrix mean_logeuclidean(std::span<const SpdMatrix> ms);

/// Geodesic (affine-invariant) distance ||log(a^{-1/2} b a^{-1/2})||_F
///  = sqrt(sum_i log^2 l_i), l_i the eigenvalues of a^{-1/2} b a^{-1/2}.
/// Invariant under congruence C -> W C W^T and under inversion.
double dist_riemannian(const SpdMatrix& a, const SpdMatrix& b);

/// Karcher mean argmin_C sum d_rie^2(C_i, C), solved by the fixed-point
/// iteration M <- M^{1/2} exp(step * A) M^{1/2} with
/// A = (1/N) sum log(M^{-1/2} C_i M^{-1/2}), initialized at the
/// Log-Euclidean mean, with step halving when the cost fails to decrease.
/// Throws ConvergenceError carrying the final gradient norm when the
/// iteration budget is exhausted.
KarcherResult mean_riemannian(std::span<const SpdMatrix> ms, const KarcherConfig& cfg = {});

/// Tangent-space mapping at `reference`:
///   upper(log(R^{-1/2} m R^{-1/2}))
/// which is the whitened logarithmic map. In isometric mode the vector
/// 2-norm equals dist_riemannian(reference, m).
TangentVector tangent_map(const SpdMatrix& m, const SpdMatrix& reference, bool isometric);

/// Row-major upper triangle including the diagonal, length d(d+1)/2.
/// isometric scales strict off-diagonals by sqrt(2) so the vector 2-norm
/// equals ||m||_F.
Vector upper_vectorize(const SymmetricMatrix& m, bool isometric);

/// Inverse of upper_vectorize (used by fixtures and IO).
SymmetricMatrix upper_unvectorize(const Vector& v, bool isometric);

/// Generic mean dispatch over the geometry kinds (Riemannian uses cfg).
SpdMatrix mean_by_geometry(std::span<const SpdMatrix> ms, GeometryKind geometry,
                           const KarcherConfig& cfg = {});

}  // namespace spdtan
