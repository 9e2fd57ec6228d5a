#include "spdtan/spd_core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace spdtan {

namespace {

void check_square(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        std::ostringstream err;
        err << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
        throw ArgumentError(err.str());
    }
}

Eigen::SelfAdjointEigenSolver<Matrix> solve_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
        std::ostringstream err;
        err << "symmetric eigensolver failed to converge on a " << m.rows() << "x" << m.cols()
            << " matrix";
        throw ConvergenceError(err.str(), std::numeric_limits<double>::quiet_NaN(), 0);
    }
    return solver;
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(Matrix m) : entries_(std::move(m)) {
    check_square(entries_, "SymmetricMatrix");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < entries_.cols(); ++j) {
            const double a = entries_(i, j);
            const double b = entries_(j, i);
            if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a))) {
                std::ostringstream err;
                err << "matrix is not symmetric at (" << i << "," << j << "): " << a << " vs "
                    << b;
                throw ArgumentError(err.str());
            }
        }
    }
    entries_ = ((entries_ + entries_.transpose()) * 0.5).eval();
}

SymmetricMatrix SymmetricMatrix::symmetrized(Matrix m) {
    check_square(m, "SymmetricMatrix::symmetrized");
    Matrix sym = ((m + m.transpose()) * 0.5).eval();
    return SymmetricMatrix(std::move(sym), unchecked_t{});
}

SpdMatrix::SpdMatrix(const SymmetricMatrix& m) : base_(m), min_eigenvalue_(0.0) {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver = solve_sym(m.mat());
    const double min_eig = solver.eigenvalues()(0);
    const double max_eig = solver.eigenvalues()(m.dim() - 1);
    if (!(min_eig > spd_epsilon(max_eig))) {
        std::ostringstream err;
        err << "matrix is not positive definite: smallest eigenvalue " << min_eig
            << " (largest " << max_eig << ")";
        throw NotPositiveDefiniteError(err.str(), min_eig);
    }
    min_eigenvalue_ = min_eig;
}

SpdMatrix SpdMatrix::from_certified(Matrix m, double min_eigenvalue) {
    return SpdMatrix(SymmetricMatrix::symmetrized(std::move(m)), min_eigenvalue);
}

Eigendecomposition eig_sym(const SymmetricMatrix& m) {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver = solve_sym(m.mat());
    return Eigendecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

/// Checks the spectrum against the relative SPD threshold before applying a
/// function that needs strictly positive eigenvalues.
void require_positive_spectrum(const Vector& eigenvalues, const char* what) {
    const double min_eig = eigenvalues(0);
    const double max_eig = eigenvalues(eigenvalues.size() - 1);
    if (!(min_eig > spd_epsilon(max_eig)) || !(max_eig > 0.0)) {
        std::ostringstream err;
        err << what << ": eigenvalue " << min_eig << " is not positive (largest " << max_eig
            << ")";
        throw NotPositiveDefiniteError(err.str(), min_eig);
    }
}

Matrix rebuild(const Eigendecomposition& eig, const Vector& mapped) {
    return eig.eigenvectors * mapped.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace

SymmetricMatrix matrix_log(const SpdMatrix& m) {
    const Eigendecomposition eig = eig_sym(m.sym());
    require_positive_spectrum(eig.eigenvalues, "matrix_log");
    const Vector mapped = eig.eigenvalues.array().log();
    return SymmetricMatrix::symmetrized(rebuild(eig, mapped));
}

SpdMatrix matrix_exp(const SymmetricMatrix& m) {
    const Eigendecomposition eig = eig_sym(m);
    const Vector mapped = eig.eigenvalues.array().exp();
    return SpdMatrix::from_certified(rebuild(eig, mapped), mapped.minCoeff());
}

SpdMatrix matrix_sqrt(const SpdMatrix& m) {
    const Eigendecomposition eig = eig_sym(m.sym());
    require_positive_spectrum(eig.eigenvalues, "matrix_sqrt");
    const Vector mapped = eig.eigenvalues.array().sqrt();
    return SpdMatrix::from_certified(rebuild(eig, mapped), mapped.minCoeff());
}

SpdMatrix matrix_invsqrt(const SpdMatrix& m) {
    const Eigendecomposition eig = eig_sym(m.sym());
    require_positive_spectrum(eig.eigenvalues, "matrix_invsqrt");
    const Vector mapped = eig.eigenvalues.array().rsqrt();
    return SpdMatrix::from_certified(rebuild(eig, mapped), mapped.minCoeff());
}

SpdMatrix nearest_spd(const SymmetricMatrix& m, double floor) {
    if (!(floor > 0.0)) {
        throw ArgumentError("nearest_spd: floor must be positive");
    }
    const Eigendecomposition eig = eig_sym(m);
    const double min_eig = eig.eigenvalues(0);
    const double max_abs = eig.eigenvalues.cwiseAbs().maxCoeff();
    // Slack absorbs spectral measurement noise so a just-repaired matrix is
    // recognized as compliant and the operation is exactly idempotent.
    const double slack = std::max(1e-8 * floor, 64.0 * m.dim() *
                                  std::numeric_limits<double>::epsilon() * max_abs);
    if (min_eig >= floor - slack) {
        return SpdMatrix::from_certified(m.mat(), min_eig);
    }
    const Vector clipped = eig.eigenvalues.cwiseMax(floor);
    return SpdMatrix::from_certified(rebuild(eig, clipped), floor);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    out << "dim=" << m.rows() << "\n";
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

Matrix read_matrix_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("dim=", 0) != 0) {
        throw IoError("matrix CSV: missing dim=<k> header");
    }
    const long dim = std::strtol(line.c_str() + 4, nullptr, 10);
    if (dim <= 0) throw IoError("matrix CSV: invalid dimension '" + line + "'");
    Matrix m(dim, dim);
    for (long i = 0; i < dim; ++i) {
        if (!std::getline(in, line)) throw IoError("matrix CSV: truncated at row " + std::to_string(i));
        std::stringstream row(line);
        std::string cell;
        for (long j = 0; j < dim; ++j) {
            if (!std::getline(row, cell, ',')) {
                throw IoError("matrix CSV: row " + std::to_string(i) + " has too few columns");
            }
            m(i, j) = std::strtod(cell.c_str(), nullptr);
        }
    }
    return m;
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    write_matrix_csv(out, m);
    if (!out) throw IoError("write failed: " + path);
}

Matrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    return read_matrix_csv(in);
}

}  // namespace spdtan
