#include "spdtan/manifold.hpp"

#include <cmath>
#include <sstream>

namespace spdtan {

std::string to_string(GeometryKind g) {
    switch (g) {
        case GeometryKind::Euclidean: return "euclidean";
        case GeometryKind::LogEuclidean: return "log_euclidean";
        case GeometryKind::Riemannian: return "riemannian";
    }
    throw ArgumentError("unknown GeometryKind");
}

GeometryKind geometry_from_string(const std::string& s) {
    if (s == "euclidean") return GeometryKind::Euclidean;
    if (s == "log_euclidean") return GeometryKind::LogEuclidean;
    if (s == "riemannian") return GeometryKind::Riemannian;
    throw ArgumentError("unknown geometry '" + s +
                        "' (expected euclidean | log_euclidean | riemannian)");
}

namespace {

void check_same_dim(const SpdMatrix& a, const SpdMatrix& b, const char* what) {
    if (a.dim() != b.dim()) {
        std::ostringstream err;
        err << what << ": dimension mismatch " << a.dim() << " vs " << b.dim();
        throw ArgumentError(err.str());
    }
}

void check_nonempty(std::span<const SpdMatrix> ms, const char* what) {
    if (ms.empty()) throw ArgumentError(std::string(what) + ": empty matrix list");
    for (const auto& m : ms) {
        if (m.dim() != ms.front().dim()) {
            throw ArgumentError(std::string(what) + ": matrices have mixed dimensions");
        }
    }
}

/// log of the whitened matrix r^{-1/2} m r^{-1/2}, shared by the distance,
/// the tangent map and the Karcher gradient.
Matrix whitened_log(const Matrix& invsqrt_ref, const SpdMatrix& m, const char* what) {
    const Matrix whitened = invsqrt_ref * m.mat() * invsqrt_ref;
    const Eigendecomposition eig = eig_sym(SymmetricMatrix::symmetrized(whitened));
    const double max_eig = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (!(eig.eigenvalues(0) > spd_epsilon(max_eig)) || !(max_eig > 0.0)) {
        std::ostringstream err;
        err << what << ": whitened matrix lost positive definiteness (eigenvalue "
            << eig.eigenvalues(0) << ")";
        throw NotPositiveDefiniteError(err.str(), eig.eigenvalues(0));
    }
    const Vector logs = eig.eigenvalues.array().log();
    return eig.eigenvectors * logs.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace

double dist_euclidean(const SpdMatrix& a, const SpdMatrix& b) {
    check_same_dim(a, b, "dist_euclidean");
    return (a.mat() - b.mat()).norm();
}

SpdMatrix mean_euclidean(std::span<const SpdMatrix> ms) {
    check_nonempty(ms, "mean_euclidean");
    Matrix acc = Matrix::Zero(ms.front().dim(), ms.front().dim());
    double min_eig = 0.0;
    for (const auto& m : ms) {
        acc += m.mat();
        min_eig += m.min_eigenvalue();  // eigenvalue concavity: lmin(sum) >= sum lmin
    }
    const double n = static_cast<double>(ms.size());
    return SpdMatrix::from_certified(acc / n, min_eig / n);
}

double dist_logeuclidean(const SpdMatrix& a, const SpdMatrix& b) {
    check_same_dim(a, b, "dist_logeuclidean");
    return (matrix_log(a).mat() - matrix_log(b).mat()).norm();
}

SpdMatrix mean_logeuclidean(std::span<const SpdMatrix> ms) {
    check_nonempty(ms, "mean_logeuclidean");
    Matrix acc = Matrix::Zero(ms.front().dim(), ms.front().dim());
    for (const auto& m : ms) acc += matrix_log(m).mat();
    acc /= static_cast<double>(ms.size());
    return matrix_exp(SymmetricMatrix::symmetrized(std::move(acc)));
}

double dist_riemannian(const SpdMatrix& a, const SpdMatrix& b) {
    check_same_dim(a, b, "dist_riemannian");
    const Matrix inv_sqrt = matrix_invsqrt(a).mat();
    return whitened_log(inv_sqrt, b, "dist_riemannian").norm();
}

KarcherResult mean_riemannian(std::span<const SpdMatrix> ms, const KarcherConfig& cfg) {
    check_nonempty(ms, "mean_riemannian");
    if (!(cfg.tolerance > 0.0)) throw ArgumentError("mean_riemannian: tolerance must be > 0");
    if (cfg.max_iterations < 1) throw ArgumentError("mean_riemannian: max_iterations must be >= 1");
    if (!(cfg.step > 0.0) || cfg.step > 1.0) {
        throw ArgumentError("mean_riemannian: step must be in (0, 1]");
    }

    const double n = static_cast<double>(ms.size());
    SpdMatrix mean = mean_logeuclidean(ms);

    const auto gradient_and_cost = [&](const SpdMatrix& m, Matrix& grad_out) {
        const Matrix inv_sqrt = matrix_invsqrt(m).mat();
        grad_out.setZero(m.dim(), m.dim());
        double cost = 0.0;
        // Fixed-order reduction keeps results independent of any scheduling.
        for (const auto& c : ms) {
            const Matrix log_term = whitened_log(inv_sqrt, c, "mean_riemannian");
            grad_out += log_term;
            cost += log_term.squaredNorm();
        }
        grad_out /= n;
        return cost;
    };

    Matrix grad;
    double cost = gradient_and_cost(mean, grad);
    double grad_norm = grad.norm();
    double step = cfg.step;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (grad_norm <= cfg.tolerance) {
            return KarcherResult{std::move(mean), iter, grad_norm};
        }
        const Matrix sqrt_m = matrix_sqrt(mean).mat();
        for (;;) {
            const Matrix move = matrix_exp(SymmetricMatrix::symmetrized(step * grad)).mat();
            SpdMatrix candidate(SymmetricMatrix::symmetrized(sqrt_m * move * sqrt_m));
            Matrix cand_grad;
            const double cand_cost = gradient_and_cost(candidate, cand_grad);
            // The slack keeps roundoff noise in the cost (O(eps * cost))
            // from triggering spurious halving near the optimum.
            if (cand_cost <= cost * (1.0 + 1e-12) || step <= 1e-8) {
                mean = std::move(candidate);
                cost = cand_cost;
                grad = std::move(cand_grad);
                grad_norm = grad.norm();
                break;
            }
            step *= 0.5;
        }
    }
    if (grad_norm <= cfg.tolerance) {
        return KarcherResult{std::move(mean), cfg.max_iterations, grad_norm};
    }
    std::ostringstream err;
    err << "mean_riemannian: no convergence after " << cfg.max_iterations
        << " iterations (gradient norm " << grad_norm << ", tolerance " << cfg.tolerance << ")";
    throw ConvergenceError(err.str(), grad_norm, cfg.max_iterations);
}

TangentVector tangent_map(const SpdMatrix& m, const SpdMatrix& reference, bool isometric) {
    check_same_dim(m, reference, "tangent_map");
    const Matrix inv_sqrt = matrix_invsqrt(reference).mat();
    const Matrix mapped = whitened_log(inv_sqrt, m, "tangent_map");
    Vector values = upper_vectorize(SymmetricMatrix::symmetrized(mapped), isometric);
    return TangentVector{std::move(values), reference, isometric};
}

Vector upper_vectorize(const SymmetricMatrix& m, bool isometric) {
    const int d = m.dim();
    Vector v(d * (d + 1) / 2);
    const double off = isometric ? std::sqrt(2.0) : 1.0;
    int k = 0;
    for (int i = 0; i < d; ++i) {
        v(k++) = m.mat()(i, i);
        for (int j = i + 1; j < d; ++j) v(k++) = off * m.mat()(i, j);
    }
    return v;
}

SymmetricMatrix upper_unvectorize(const Vector& v, bool isometric) {
    const double len = static_cast<double>(v.size());
    const int d = static_cast<int>(std::lround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
    if (static_cast<long>(d) * (d + 1) / 2 != v.size()) {
        throw ArgumentError("upper_unvectorize: length " + std::to_string(v.size()) +
                            " is not a triangular number");
    }
    Matrix m(d, d);
    const double off = isometric ? 1.0 / std::sqrt(2.0) : 1.0;
    int k = 0;
    for (int i = 0; i < d; ++i) {
        m(i, i) = v(k++);
        for (int j = i + 1; j < d; ++j) {
            m(i, j) = m(j, i) = off * v(k++);
        }
    }
    return SymmetricMatrix::symmetrized(std::move(m));
}

SpdMatrix mean_by_geometry(std::span<const SpdMatrix> ms, GeometryKind geometry,
                           const KarcherConfig& cfg) {
    switch (geometry) {
        case GeometryKind::Euclidean: return mean_euclidean(ms);
        case GeometryKind::LogEuclidean: return mean_logeuclidean(ms);
        case GeometryKind::Riemannian: return mean_riemannian(ms, cfg).mean;
    }
    throw ArgumentError("unknown GeometryKind");
}

}  // namespace spdtan
