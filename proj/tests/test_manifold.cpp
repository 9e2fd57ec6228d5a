#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdtan/manifold.hpp"
#include "test_support.hpp"

using namespace spdtan;
using test::rand_invertible;
using test::rand_spd;
using test::rand_symmetric;
using test::rel_error;

namespace {

SpdMatrix diag_spd(std::initializer_list<double> entries) {
    Vector v(static_cast<long>(entries.size()));
    int i = 0;
    double min_e = 1e300;
    for (double e : entries) {
        v(i++) = e;
        min_e = std::min(min_e, e);
    }
    return SpdMatrix::from_certified(Matrix(v.asDiagonal()), min_e);
}

}  // namespace

TEST_CASE("dist_euclidean basics and direct-summation oracle, seed 5") {
    const SpdMatrix id(Matrix::Identity(3, 3));
    CHECK(dist_euclidean(id, id) == 0.0);

    // diag(2,2) against an SPD treated as near-zero floor: Frobenius of the
    // difference is the oracle; use the closed pair from the arithmetic.
    const SpdMatrix a = diag_spd({2.0, 2.0});
    const SpdMatrix b = diag_spd({1e-12, 1e-12});
    CHECK(dist_euclidean(a, b) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));

    Rng rng(5);
    const SpdMatrix x = rand_spd(4, rng);
    const SpdMatrix y = rand_spd(4, rng);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double d = x.mat()(i, j) - y.mat()(i, j);
            acc += d * d;
        }
    CHECK(dist_euclidean(x, y) == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
    CHECK(dist_euclidean(x, y) == dist_euclidean(y, x));

    const SpdMatrix z = rand_spd(5, rng);
    CHECK_THROWS_AS(dist_euclidean(x, z), ArgumentError);
}

TEST_CASE("mean_euclidean entrywise oracle and swelling") {
    Rng rng(1);
    std::vector<SpdMatrix> ms;
    for (int i = 0; i < 10; ++i) ms.push_back(rand_spd(3, rng));
    Matrix expected = Matrix::Zero(3, 3);
    for (const auto& m : ms) expected += m.mat();
    expected /= 10.0;
    CHECK(rel_error(mean_euclidean(ms).mat(), expected) < 1e-14);

    const SpdMatrix c = rand_spd(4, rng);
    const std::vector<SpdMatrix> same = {c, c, c};
    CHECK(rel_error(mean_euclidean(same).mat(), c.mat()) < 1e-14);

    const std::vector<SpdMatrix> pair = {diag_spd({2.0, 0.5}), diag_spd({0.5, 2.0})};
    const SpdMatrix euc = mean_euclidean(pair);
    CHECK(euc.mat()(0, 0) == doctest::Approx(1.25));
    CHECK(euc.mat()(1, 1) == doctest::Approx(1.25));
    CHECK(euc.mat().determinant() == doctest::Approx(1.5625));  // above the input dets of 1

    CHECK_THROWS_AS(mean_euclidean(std::vector<SpdMatrix>{}), ArgumentError);
}

TEST_CASE("dist_logeuclidean basics and matrix-log oracle, seed 5") {
    const SpdMatrix id(Matrix::Identity(2, 2));
    CHECK(dist_logeuclidean(id, id) == 0.0);

    const SpdMatrix scaled = diag_spd({std::exp(2.0), std::exp(2.0)});
    CHECK(dist_logeuclidean(id, scaled) == doctest::Approx(2.0 * std::sqrt(2.0)));

    Rng rng(5);
    const SpdMatrix x = rand_spd(4, rng);
    const SpdMatrix y = rand_spd(4, rng);
    const double oracle = (matrix_log(x).mat() - matrix_log(y).mat()).norm();
    CHECK(dist_logeuclidean(x, y) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("mean_logeuclidean: no swelling, fixed point, diagonal oracle") {
    const std::vector<SpdMatrix> pair = {diag_spd({2.0, 0.5}), diag_spd({0.5, 2.0})};
    const SpdMatrix m = mean_logeuclidean(pair);
    CHECK(rel_error(m.mat(), Matrix::Identity(2, 2)) < 1e-12);
    CHECK(m.mat().determinant() == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(33);
    const SpdMatrix c = rand_spd(5, rng);
    CHECK(rel_error(mean_logeuclidean(std::vector<SpdMatrix>{c}).mat(), c.mat()) < 1e-10);

    // Commuting family: all diagonal, seed 2. Oracle: exp of the entrywise
    // mean of the log diagonals.
    Rng rng2(2);
    std::vector<SpdMatrix> diag_family;
    Vector mean_log = Vector::Zero(4);
    for (int i = 0; i < 6; ++i) {
        Vector eigs(4);
        for (int j = 0; j < 4; ++j) eigs(j) = std::exp(rng2.uniform(-1.0, 1.0));
        diag_family.push_back(SpdMatrix::from_certified(Matrix(eigs.asDiagonal()),
                                                        eigs.minCoeff()));
        mean_log += eigs.array().log().matrix();
    }
    mean_log /= 6.0;
    const SpdMatrix got = mean_logeuclidean(diag_family);
    for (int j = 0; j < 4; ++j) {
        CHECK(got.mat()(j, j) == doctest::Approx(std::exp(mean_log(j))).epsilon(1e-10));
    }

    // det(mean_log) equals the geometric mean of the input determinants.
    Rng rng3(44);
    std::vector<SpdMatrix> ms;
    double log_det_acc = 0.0;
    for (int i = 0; i < 7; ++i) {
        ms.push_back(rand_spd(3, rng3));
        log_det_acc += std::log(ms.back().mat().determinant());
    }
    CHECK(mean_logeuclidean(ms).mat().determinant() ==
          doctest::Approx(std::exp(log_det_acc / 7.0)).epsilon(1e-8));
}

TEST_CASE("dist_riemannian: identity, scaling, congruence and inversion invariance") {
    const SpdMatrix id(Matrix::Identity(2, 2));
    CHECK(dist_riemannian(id, id) == 0.0);
    CHECK(dist_riemannian(id, diag_spd({std::exp(2.0), std::exp(2.0)})) ==
          doctest::Approx(2.0 * std::sqrt(2.0)));

    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const SpdMatrix a = rand_spd(4, rng);
        const SpdMatrix b = rand_spd(4, rng);
        const double d = dist_riemannian(a, b);
        CHECK(d == doctest::Approx(dist_riemannian(b, a)).epsilon(1e-10));

        const Matrix w = rand_invertible(4, rng);
        const SpdMatrix wa = SpdMatrix(SymmetricMatrix::symmetrized(w * a.mat() * w.transpose()));
        const SpdMatrix wb = SpdMatrix(SymmetricMatrix::symmetrized(w * b.mat() * w.transpose()));
        CHECK(std::abs(dist_riemannian(wa, wb) - d) <= 1e-8 * std::max(1.0, d));

        const SpdMatrix ia = SpdMatrix(SymmetricMatrix::symmetrized(a.mat().inverse()));
        const SpdMatrix ib = SpdMatrix(SymmetricMatrix::symmetrized(b.mat().inverse()));
        CHECK(std::abs(dist_riemannian(ia, ib) - d) <= 1e-8 * std::max(1.0, d));
    }
}

TEST_CASE("mean_riemannian: trivial, closed-form midpoint, commuting family") {
    Rng rng(3);
    const SpdMatrix c = rand_spd(4, rng);
    const KarcherResult same = mean_riemannian(std::vector<SpdMatrix>{c, c});
    CHECK(rel_error(same.mean.mat(), c.mat()) < 1e-9);

    // N = 2: geodesic midpoint a^{1/2} (a^{-1/2} b a^{-1/2})^{1/2} a^{1/2}.
    const SpdMatrix a = rand_spd(5, rng);
    const SpdMatrix b = rand_spd(5, rng);
    const Matrix sa = matrix_sqrt(a).mat();
    const Matrix isa = matrix_invsqrt(a).mat();
    const Matrix inner =
        matrix_sqrt(SpdMatrix(SymmetricMatrix::symmetrized(isa * b.mat() * isa))).mat();
    const Matrix midpoint = sa * inner * sa;
    const KarcherResult mid = mean_riemannian(std::vector<SpdMatrix>{a, b});
    CHECK(rel_error(mid.mean.mat(), midpoint) <= 1e-8);
    CHECK(mid.gradient_norm <= 1e-9);

    // Commuting (simultaneously diagonal) family coincides with the
    // Log-Euclidean mean.
    std::vector<SpdMatrix> diag_family;
    for (int i = 0; i < 5; ++i) {
        Vector eigs(3);
        for (int j = 0; j < 3; ++j) eigs(j) = std::exp(rng.uniform(-1.0, 1.0));
        diag_family.push_back(SpdMatrix::from_certified(Matrix(eigs.asDiagonal()),
                                                        eigs.minCoeff()));
    }
    const SpdMatrix log_mean = mean_logeuclidean(diag_family);
    const KarcherResult kar = mean_riemannian(diag_family);
    CHECK((kar.mean.mat() - log_mean.mat()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("mean_riemannian gradient condition and congruence equivariance") {
    Rng rng(7);
    std::vector<SpdMatrix> ms;
    for (int i = 0; i < 10; ++i) ms.push_back(rand_spd(6, rng));
    const KarcherConfig cfg;
    const KarcherResult result = mean_riemannian(ms, cfg);
    CHECK(result.gradient_norm <= cfg.tolerance);
    CHECK(result.iterations <= cfg.max_iterations);

    // Recompute the gradient independently at the returned mean.
    const Matrix w = matrix_invsqrt(result.mean).mat();
    Matrix grad = Matrix::Zero(6, 6);
    for (const auto& m : ms) {
        grad += matrix_log(SpdMatrix(SymmetricMatrix::symmetrized(w * m.mat() * w))).mat();
    }
    grad /= static_cast<double>(ms.size());
    CHECK(grad.norm() <= cfg.tolerance * 10.0);  // re-derivation noise allowance

    const Matrix t = rand_invertible(6, rng);
    std::vector<SpdMatrix> congruent;
    for (const auto& m : ms) {
        congruent.push_back(SpdMatrix(SymmetricMatrix::symmetrized(t * m.mat() * t.transpose())));
    }
    const KarcherResult moved = mean_riemannian(congruent, cfg);
    const Matrix expected = t * result.mean.mat() * t.transpose();
    CHECK(rel_error(moved.mean.mat(), expected) <= 1e-6);
}

TEST_CASE("mean_riemannian exhausts its budget with a convergence error") {
    Rng rng(9);
    std::vector<SpdMatrix> ms;
    for (int i = 0; i < 4; ++i) ms.push_back(rand_spd(3, rng));
    KarcherConfig cfg;
    cfg.tolerance = 1e-16;  // unreachable
    cfg.max_iterations = 2;
    CHECK_THROWS_AS(mean_riemannian(ms, cfg), ConvergenceError);
}

TEST_CASE("swelling contrast across the three means") {
    const std::vector<SpdMatrix> pair = {diag_spd({2.0, 0.5}), diag_spd({0.5, 2.0})};
    const double det_euc = mean_euclidean(pair).mat().determinant();
    const double det_log = mean_logeuclidean(pair).mat().determinant();
    const double det_rie = mean_riemannian(pair).mean.mat().determinant();
    CHECK(det_euc == doctest::Approx(1.5625));
    CHECK(std::abs(det_log - 1.0) <= 1e-10);
    CHECK(std::abs(det_rie - 1.0) <= 1e-10);
    CHECK(det_euc > 1.0);
}

TEST_CASE("tangent_map at the reference is zero; fixed example") {
    Rng rng(4);
    const SpdMatrix m = rand_spd(5, rng);
    const TangentVector at_ref = tangent_map(m, m, true);
    CHECK(at_ref.values.norm() < 1e-10);

    const SpdMatrix id(Matrix::Identity(2, 2));
    const TangentVector tv = tangent_map(diag_spd({std::exp(2.0), 1.0}), id, true);
    CHECK(tv.values(0) == doctest::Approx(2.0));
    CHECK(std::abs(tv.values(1)) < 1e-12);
    CHECK(std::abs(tv.values(2)) < 1e-12);
    CHECK(tv.values.norm() ==
          doctest::Approx(dist_riemannian(id, diag_spd({std::exp(2.0), 1.0}))));
}

TEST_CASE("isometric tangent_map norm equals dist_riemannian, seed 13") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const SpdMatrix m = rand_spd(4, rng);
        const SpdMatrix ref = rand_spd(4, rng);
        const TangentVector tv = tangent_map(m, ref, true);
        const double d = dist_riemannian(ref, m);
        CHECK(std::abs(tv.values.norm() - d) <= 1e-8 * std::max(1.0, d));
    }
}

TEST_CASE("upper_vectorize lengths, ordering, isometry") {
    CHECK(upper_vectorize(SymmetricMatrix(Matrix::Identity(19, 19)), false).size() == 190);
    CHECK(upper_vectorize(SymmetricMatrix(Matrix::Identity(76, 76)), false).size() == 2926);

    const Vector id2 = upper_vectorize(SymmetricMatrix(Matrix::Identity(2, 2)), false);
    CHECK(id2(0) == 1.0);
    CHECK(id2(1) == 0.0);
    CHECK(id2(2) == 1.0);

    Rng rng(15);
    const Matrix m = rand_symmetric(5, rng);
    const Vector iso = upper_vectorize(SymmetricMatrix(m), true);
    CHECK(iso.norm() == doctest::Approx(m.norm()).epsilon(1e-12));

    // Round trip through the inverse, both modes.
    for (bool isometric : {false, true}) {
        const Vector v = upper_vectorize(SymmetricMatrix(m), isometric);
        CHECK(rel_error(upper_unvectorize(v, isometric).mat(), m) < 1e-14);
    }
}

TEST_CASE("metric axioms across dims for all three distances") {
    Rng rng(99);
    for (int dim : {2, 5}) {
        for (int trial = 0; trial < 10; ++trial) {
            const SpdMatrix a = rand_spd(dim, rng);
            const SpdMatrix b = rand_spd(dim, rng);
            for (auto dist : {dist_euclidean, dist_logeuclidean, dist_riemannian}) {
                const double d = dist(a, b);
                CHECK(d >= 0.0);
                CHECK(d == doctest::Approx(dist(b, a)).epsilon(1e-9));
                CHECK(dist(a, a) <= 1e-7);
                CHECK(d > 1e-6);  // random pairs are distinct
            }
        }
    }
}
