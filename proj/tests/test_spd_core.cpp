#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "spdtan/spd_core.hpp"
#include "test_support.hpp"

using namespace spdtan;
using test::rand_spd;
using test::rand_symmetric;
using test::rel_error;

TEST_CASE("eig_sym diagonal and identity") {
    Matrix d(2, 2);
    d << 4.0, 0.0, 0.0, 9.0;
    const Eigendecomposition eig = eig_sym(SymmetricMatrix(d));
    CHECK(eig.eigenvalues(0) == doctest::Approx(4.0));
    CHECK(eig.eigenvalues(1) == doctest::Approx(9.0));
    CHECK((eig.eigenvectors.cwiseAbs() - Matrix::Identity(2, 2)).norm() < 1e-12);

    const Eigendecomposition id3 = eig_sym(SymmetricMatrix(Matrix::Identity(3, 3)));
    for (int i = 0; i < 3; ++i) CHECK(id3.eigenvalues(i) == doctest::Approx(1.0));
}

TEST_CASE("eig_sym reconstruction and orthonormality, random 5x5 seed 42") {
    Rng rng(42);
    const Matrix m = rand_symmetric(5, rng);
    const Eigendecomposition eig = eig_sym(SymmetricMatrix(m));
    const Matrix rebuilt =
        eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
    CHECK((rebuilt - m).norm() <= 1e-8 * m.norm());
    const Matrix vtv = eig.eigenvectors.transpose() * eig.eigenvectors;
    CHECK((vtv - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::is_sorted(eig.eigenvalues.data(), eig.eigenvalues.data() + 5));
}

TEST_CASE("SymmetricMatrix rejects asymmetric input") {
    Matrix m(2, 2);
    m << 1.0, 2.0, 2.1, 1.0;
    CHECK_THROWS_AS(SymmetricMatrix{m}, ArgumentError);
}

TEST_CASE("SpdMatrix rejects indefinite input") {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(SpdMatrix{m}, NotPositiveDefiniteError);
    try {
        SpdMatrix bad{m};
    } catch (const NotPositiveDefiniteError& e) {
        CHECK(e.eigenvalue() == doctest::Approx(-1.0));
    }
}

TEST_CASE("matrix_log on identity and diagonal") {
    const SymmetricMatrix log_id = matrix_log(SpdMatrix(Matrix::Identity(4, 4)));
    CHECK(log_id.mat().norm() < 1e-14);

    Matrix d(2, 2);
    d << std::exp(1.0), 0.0, 0.0, std::exp(2.0);
    const SymmetricMatrix log_d = matrix_log(SpdMatrix(d));
    CHECK(log_d.mat()(0, 0) == doctest::Approx(1.0));
    CHECK(log_d.mat()(1, 1) == doctest::Approx(2.0));
    CHECK(std::abs(log_d.mat()(0, 1)) < 1e-14);
}

TEST_CASE("matrix_exp on zero and diagonal") {
    CHECK(rel_error(matrix_exp(SymmetricMatrix(Matrix::Zero(3, 3))).mat(),
                    Matrix::Identity(3, 3)) < 1e-14);
    Matrix d(2, 2);
    d << 1.0, 0.0, 0.0, 2.0;
    const SpdMatrix e = matrix_exp(SymmetricMatrix(d));
    CHECK(e.mat()(0, 0) == doctest::Approx(std::exp(1.0)));
    CHECK(e.mat()(1, 1) == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("exp(log(m)) round trip, random SPD 4x4 seed 7") {
    Rng rng(7);
    const SpdMatrix m = rand_spd(4, rng);
    const SpdMatrix back = matrix_exp(matrix_log(m));
    CHECK(rel_error(back.mat(), m.mat()) <= 1e-8);
}

TEST_CASE("matrix_exp of random symmetric is positive definite, seed 11") {
    Rng rng(11);
    const SpdMatrix e = matrix_exp(SymmetricMatrix(rand_symmetric(4, rng)));
    const Eigendecomposition eig = eig_sym(e.sym());
    CHECK(eig.eigenvalues(0) > 0.0);
}

TEST_CASE("matrix_sqrt and matrix_invsqrt on diag(4, 9)") {
    Matrix d(2, 2);
    d << 4.0, 0.0, 0.0, 9.0;
    const SpdMatrix m(d);
    CHECK(matrix_sqrt(m).mat()(0, 0) == doctest::Approx(2.0));
    CHECK(matrix_sqrt(m).mat()(1, 1) == doctest::Approx(3.0));
    CHECK(matrix_invsqrt(m).mat()(0, 0) == doctest::Approx(0.5));
    CHECK(matrix_invsqrt(m).mat()(1, 1) == doctest::Approx(1.0 / 3.0));

    const SpdMatrix id(Matrix::Identity(3, 3));
    CHECK(rel_error(matrix_sqrt(id).mat(), Matrix::Identity(3, 3)) < 1e-14);
}

TEST_CASE("invsqrt congruence gives identity, random SPD 6x6 seed 3") {
    Rng rng(3);
    const SpdMatrix m = rand_spd(6, rng);
    const Matrix w = matrix_invsqrt(m).mat();
    CHECK((w * m.mat() * w - Matrix::Identity(6, 6)).norm() <= 1e-8);
}

TEST_CASE("nearest_spd clips one eigenvalue") {
    Matrix d(2, 2);
    d << 2.0, 0.0, 0.0, -0.1;
    const SpdMatrix fixed = nearest_spd(SymmetricMatrix(d), 1e-6);
    const Eigendecomposition eig = eig_sym(fixed.sym());
    CHECK(eig.eigenvalues(0) == doctest::Approx(1e-6));
    CHECK(eig.eigenvalues(1) == doctest::Approx(2.0));
}

TEST_CASE("nearest_spd leaves compliant input unchanged, bit for bit") {
    Rng rng(5);
    const SpdMatrix m = rand_spd(4, rng, 0.5);  // eigenvalues well above the floor
    const SpdMatrix out = nearest_spd(m.sym(), 1e-9);
    CHECK((out.mat() - m.mat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nearest_spd floor reached exactly on indefinite 5x5, seed 9") {
    Rng rng(9);
    const Matrix m = rand_symmetric(5, rng);
    REQUIRE(eig_sym(SymmetricMatrix(m)).eigenvalues(0) < 0.0);  // actually indefinite
    const double floor = 1e-6;
    const SpdMatrix fixed = nearest_spd(SymmetricMatrix(m), floor);
    const Eigendecomposition eig = eig_sym(fixed.sym());
    CHECK(std::abs(eig.eigenvalues(0) - floor) <= 1e-12);
}

TEST_CASE("nearest_spd rejects nonpositive floor") {
    CHECK_THROWS_AS(nearest_spd(SymmetricMatrix(Matrix::Identity(2, 2)), 0.0), ArgumentError);
    CHECK_THROWS_AS(nearest_spd(SymmetricMatrix(Matrix::Identity(2, 2)), -1.0), ArgumentError);
}

TEST_CASE("nearest_spd is idempotent, exactly") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = rand_symmetric(5, rng);
        const SpdMatrix once = nearest_spd(SymmetricMatrix(m), 1e-6);
        const SpdMatrix twice = nearest_spd(once.sym(), 1e-6);
        CHECK((twice.mat() - once.mat()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("round trips across dims 2, 5, 19, 76") {
    Rng rng(1234);
    for (int dim : {2, 5, 19, 76}) {
        for (int trial = 0; trial < 25; ++trial) {
            const SpdMatrix m = rand_spd(dim, rng);
            CHECK(rel_error(matrix_exp(matrix_log(m)).mat(), m.mat()) <= 1e-8);
            const Matrix s = matrix_sqrt(m).mat();
            CHECK(rel_error(s * s, m.mat()) <= 1e-8);
        }
    }
}

TEST_CASE("eigenvalues of A A^T + eps I are positive") {
    Rng rng(21);
    const Matrix a = test::rand_gaussian(6, 6, rng);
    const Matrix m = a * a.transpose() + 1e-3 * Matrix::Identity(6, 6);
    const Eigendecomposition eig = eig_sym(SymmetricMatrix::symmetrized(m));
    CHECK(eig.eigenvalues(0) > 0.0);
}

TEST_CASE("matrix CSV round trip") {
    Rng rng(8);
    const Matrix m = rand_symmetric(4, rng);
    std::stringstream buf;
    write_matrix_csv(buf, m);
    const Matrix back = read_matrix_csv(buf);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);  // full-precision format
}

TEST_CASE("matrix CSV rejects malformed input") {
    std::stringstream missing_header("1,2\n3,4\n");
    CHECK_THROWS_AS(read_matrix_csv(missing_header), IoError);
    std::stringstream truncated("dim=3\n1,2,3\n");
    CHECK_THROWS_AS(read_matrix_csv(truncated), IoError);
}
