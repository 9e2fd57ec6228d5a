// Dense symmetric matrix algebra: validated symmetric / SPD value types and
// the spectral matrix functions (log, exp, sqrt, inverse sqrt) everything
// else is built on.
//
// All matrix functions go through a single symmetric eigendecomposition;
// inputs are symmetric by construction so the spectral form is exact.

#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>

#include "spdtan/errors.hpp"

namespace spdtan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative positive-definiteness threshold: a symmetric matrix with largest
/// eigenvalue lmax counts as SPD only if its smallest eigenvalue exceeds
/// spd_epsilon(lmax). Scale-free, with an absolute fallback so the zero
/// matrix gets a usable floor.
inline double spd_epsilon(double largest_eigenvalue) {
    return 1e-10 * std::max(largest_eigenvalue, 0.0);
}

/// Dense symmetric matrix. The constructor rejects input whose asymmetry
/// exceeds 1e-10 * max(1, |entry|) per entry, then stores the exactly
/// symmetrized (m + m^T)/2 so downstream algebra never sees drift.
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(Matrix m);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& mat() const { return entries_; }

    /// Wraps (m + m^T)/2 without the asymmetry check; for results that are
    /// symmetric by construction up to roundoff.
    static SymmetricMatrix symmetrized(Matrix m);

private:
    struct unchecked_t {};
    SymmetricMatrix(Matrix m, unchecked_t) : entries_(std::move(m)) {}

    Matrix entries_;
};

/// Symmetric positive-definite matrix with a minimum-eigenvalue certificate.
/// The validating constructor computes the spectrum; internal factories
/// carry analytically known certificates instead.
class SpdMatrix {
public:
    /// Validates positive definiteness: throws NotPositiveDefiniteError when
    /// the smallest eigenvalue is <= spd_epsilon(largest eigenvalue).
    explicit SpdMatrix(const SymmetricMatrix& m);
    explicit SpdMatrix(Matrix m) : SpdMatrix(SymmetricMatrix(std::move(m))) {}

    int dim() const { return base_.dim(); }
    const Matrix& mat() const { return base_.mat(); }
    const SymmetricMatrix& sym() const { return base_; }
    double min_eigenvalue() const { return min_eigenvalue_; }

    /// Trusted factory for matrices whose positive spectrum is known by
    /// construction (exp of a symmetric matrix, clipped eigenvalues, ...).
    static SpdMatrix from_certified(Matrix m, double min_eigenvalue);

private:
    SpdMatrix(SymmetricMatrix base, double min_eig)
        : base_(std::move(base)), min_eigenvalue_(min_eig) {}

    SymmetricMatrix base_;
    double min_eigenvalue_;
};

/// Spectral factorization of a symmetric matrix: eigenvalues ascending,
/// eigenvectors orthonormal in columns, V diag(l) V^T reconstructs the input.
struct Eigendecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// Symmetric eigendecomposition. Throws ConvergenceError (naming the
/// dimension) if the underlying solver fails to converge.
Eigendecomposition eig_sym(const SymmetricMatrix& m);

/// Matrix logarithm V diag(log l) V^T. Inverse of matrix_exp on SPD inputs.
SymmetricMatrix matrix_log(const SpdMatrix& m);

/// Matrix exponential V diag(exp l) V^T; always SPD.
SpdMatrix matrix_exp(const SymmetricMatrix& m);

/// Principal square root: sqrt(m) * sqrt(m) = m.
SpdMatrix matrix_sqrt(const SpdMatrix& m);

/// Inverse square root: invsqrt(m) * m * invsqrt(m) = I.
SpdMatrix matrix_invsqrt(const SpdMatrix& m);

/// Eigenvalue clipping to >= floor (floor must be > 0). Input already
/// satisfying the floor (up to spectral measurement noise) is returned
/// unchanged, which also makes the operation exactly idempotent.
SpdMatrix nearest_spd(const SymmetricMatrix& m, double floor);

/// CSV round trip: header row "dim=<k>", then k rows of k comma-separated
/// values at full double precision.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);
void save_matrix_csv(const std::string& path, const Matrix& m);
Matrix load_matrix_csv(const std::string& path);

}  // namespace spdtan
