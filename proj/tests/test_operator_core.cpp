#include <doctest.h>

#include <cmath>

#include "hflow/bloch.hpp"
#include "hflow/operator_core.hpp"
#include "hflow/random.hpp"

using namespace hflow;

namespace {

// Independent 2x2 oracle: eigenvalues of a Hermitian [[a, b], [conj(b), c]]
// from the characteristic polynomial.
std::pair<double, double> eig2(const Matrix& m) {
    const double a = m(0, 0).real();
    const double c = m(1, 1).real();
    const double b2 = std::norm(m(0, 1));
    const double mean = 0.5 * (a + c);
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b2);
    return {mean - disc, mean + disc};
}

double trace_norm_oracle2(const Matrix& m) {
    auto [lo, hi] = eig2(m);
    return std::abs(lo) + std::abs(hi);
}

}  // namespace

TEST_SUITE("operator-core") {

TEST_CASE("hermitian operator validates symmetry") {
    CHECK_THROWS_AS(HermitianOperator{sigma_plus()}, DomainError);
    CHECK_NOTHROW(HermitianOperator(pauli_y()));
    Matrix almost = pauli_x();
    almost(0, 1) += Complex(0, 1e-10);
    CHECK_THROWS_AS(HermitianOperator{almost}, DomainError);
}

TEST_CASE("density matrix validates trace and positivity") {
    CHECK_THROWS_AS(DensityMatrix{0.9 * Matrix::Identity(2, 2)}, DomainError);
    CHECK_THROWS_AS(DensityMatrix{pauli_z()}, DomainError);
    CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
}

TEST_CASE("trace norm examples") {
    // identical states cancel
    DensityMatrix rho = density_from_bloch({0.3, -0.2, 0.5});
    HelstromEnsemble same(0.5, rho, 0.5, rho);
    CHECK(trace_norm(same.delta()) < 1e-12);

    // orthogonal pure states saturate the upper bound
    HelstromEnsemble orth = antipodal_ensemble({0, 0, 1}, 0.5);
    CHECK(trace_norm(orth.delta()) == doctest::Approx(1.0).epsilon(1e-12));

    // Bloch vectors x and z at equal weights
    HelstromEnsemble tilted(0.5, density_from_bloch({1, 0, 0}), 0.5,
                            density_from_bloch({0, 0, 1}));
    const double oracle = trace_norm_oracle2(tilted.delta());
    CHECK(oracle == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
    CHECK(trace_norm(tilted.delta()) == doctest::Approx(oracle).epsilon(1e-12));

    CHECK_THROWS_AS(trace_norm(sigma_plus()), DomainError);
}

TEST_CASE("jordan hahn split") {
    SUBCASE("diagonal") {
        Matrix x(2, 2);
        x << 0.3, 0, 0, -0.7;
        auto pair = jordan_hahn(HermitianOperator(x));
        Matrix s_expect(2, 2), q_expect(2, 2);
        s_expect << 0.3, 0, 0, 0;
        q_expect << 0, 0, 0, 0.7;
        CHECK(max_abs(pair.positive_part.matrix() - s_expect) < 1e-14);
        CHECK(max_abs(pair.negative_part.matrix() - q_expect) < 1e-14);
    }
    SUBCASE("positive semidefinite has vanishing negative part") {
        Matrix x(2, 2);
        x << 2, 1, 1, 2;
        auto pair = jordan_hahn(HermitianOperator(x));
        CHECK(max_abs(pair.negative_part.matrix()) < 1e-12);
    }
    SUBCASE("sigma_x splits into rank-1 projections") {
        auto pair = jordan_hahn(HermitianOperator(pauli_x()));
        Matrix s_expect = 0.5 * (Matrix::Identity(2, 2) + pauli_x());
        Matrix q_expect = 0.5 * (Matrix::Identity(2, 2) - pauli_x());
        CHECK(max_abs(pair.positive_part.matrix() - s_expect) < 1e-12);
        CHECK(max_abs(pair.negative_part.matrix() - q_expect) < 1e-12);
    }
}

TEST_CASE("hermitian normal form examples") {
    SUBCASE("indefinite diagonal") {
        Matrix x(2, 2);
        x << 0.3, 0, 0, -0.7;
        auto d = hermitian_to_helstrom(HermitianOperator(x));
        CHECK(d.scale == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(d.ensemble.p1() == doctest::Approx(0.3).epsilon(1e-13));
        CHECK(d.ensemble.p2() == doctest::Approx(0.7).epsilon(1e-13));
        CHECK(d.ensemble.rho1().matrix()(0, 0).real() == doctest::Approx(1.0));
        CHECK(d.ensemble.rho2().matrix()(1, 1).real() == doctest::Approx(1.0));
    }
    SUBCASE("positive operator") {
        Matrix x(2, 2);
        x << 2, 0, 0, 1;
        auto d = hermitian_to_helstrom(HermitianOperator(x));
        CHECK(d.scale == doctest::Approx(3.0));
        CHECK(d.ensemble.p1() == doctest::Approx(1.0));
        CHECK(d.ensemble.rho1().matrix()(0, 0).real() == doctest::Approx(2.0 / 3.0));
        CHECK(d.ensemble.rho1().matrix()(1, 1).real() == doctest::Approx(1.0 / 3.0));
        // partner state pinned to the maximally mixed state
        CHECK(max_abs(d.ensemble.rho2().matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-14);
    }
    SUBCASE("minus sigma_z") {
        auto d = hermitian_to_helstrom(HermitianOperator(-pauli_z()));
        CHECK(d.scale == doctest::Approx(2.0));
        CHECK(d.ensemble.p1() == doctest::Approx(0.5));
        CHECK(d.ensemble.p2() == doctest::Approx(0.5));
        CHECK(d.ensemble.rho1().matrix()(1, 1).real() == doctest::Approx(1.0));
        CHECK(d.ensemble.rho2().matrix()(0, 0).real() == doctest::Approx(1.0));
    }
    SUBCASE("zero operator rejected") {
        CHECK_THROWS_AS(hermitian_to_helstrom(HermitianOperator(Matrix::Zero(2, 2))),
                        DomainError);
    }
}

TEST_CASE("discrimination success") {
    CHECK(discrimination_success(antipodal_ensemble({1, 0, 0}, 0.5)) ==
          doctest::Approx(1.0).epsilon(1e-12));

    DensityMatrix rho = density_from_bloch({0.1, 0.4, -0.2});
    HelstromEnsemble biased(0.7, rho, 0.3, rho);
    // ||Delta||_1 = |p1 - p2| = 0.4 when the states coincide
    CHECK(discrimination_success(biased) == doctest::Approx(0.7).epsilon(1e-12));

    // any ensemble with ||Delta||_1 = 0.4 gives 0.7
    HelstromEnsemble mixed(0.5, density_from_bloch({0, 0, 0.4}), 0.5,
                           density_from_bloch({0, 0, -0.4}));
    CHECK(trace_norm(mixed.delta()) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(discrimination_success(mixed) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("brute force oracle") {
    CHECK(discrimination_success_bruteforce(antipodal_ensemble({0, 1, 0}, 0.5), 100) ==
          doctest::Approx(1.0).epsilon(1e-12));

    DensityMatrix rho = density_from_bloch({-0.3, 0.1, 0.6});
    CHECK(discrimination_success_bruteforce(HelstromEnsemble(0.7, rho, 0.3, rho), 100) ==
          doctest::Approx(0.7).epsilon(1e-12));

    HelstromEnsemble tilted(0.5, density_from_bloch({1, 0, 0}), 0.5,
                            density_from_bloch({0, 0, 1}));
    CHECK(discrimination_success_bruteforce(tilted, 200) ==
          doctest::Approx(0.5 * (1.0 + std::sqrt(0.5))).epsilon(1e-12));

    CHECK_THROWS_AS(discrimination_success_bruteforce(
                        HelstromEnsemble(0.5, DensityMatrix::maximally_mixed(3), 0.5,
                                         DensityMatrix::maximally_mixed(3)),
                        10),
                    UnsupportedDimensionError);
}

TEST_CASE("helstrom bounds") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        double p1 = rng.uniform();
        HelstromEnsemble e(p1, density_from_bloch(random_in_ball3(rng)), 1.0 - p1,
                           density_from_bloch(random_in_ball3(rng)));
        CHECK(helstrom_bounds_check(e));
    }
    // lower bound saturation
    DensityMatrix rho = density_from_bloch({0.2, 0.2, 0.2});
    HelstromEnsemble same(0.8, rho, 0.2, rho);
    CHECK(trace_norm(same.delta()) == doctest::Approx(0.6).epsilon(1e-12));
    // upper bound saturation iff orthogonal supports
    CHECK(trace_norm(antipodal_ensemble({0.6, -0.8, 0}, 0.25).delta()) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("property: projection characterization agrees with eigenvalue route") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        Index d = 2 + (i % 3);
        HermitianOperator x(random_hermitian(rng, d));
        CHECK(std::abs(trace_norm(x) - trace_norm_projection_form(x)) < 1e-10);
    }
}

TEST_CASE("property: jordan hahn reconstruction and support orthogonality") {
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        Index d = 2 + (i % 3);
        HermitianOperator x(random_hermitian(rng, d));
        auto pair = jordan_hahn(x);
        CHECK(max_abs(pair.positive_part.matrix() - pair.negative_part.matrix() -
                      x.matrix()) < 1e-12);
        CHECK(max_abs(pair.positive_part.matrix() * pair.negative_part.matrix()) < 1e-9);
        Eigen::SelfAdjointEigenSolver<Matrix> es_s(pair.positive_part.matrix(),
                                                   Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Matrix> es_q(pair.negative_part.matrix(),
                                                   Eigen::EigenvaluesOnly);
        CHECK(es_s.eigenvalues().minCoeff() > -1e-10);
        CHECK(es_q.eigenvalues().minCoeff() > -1e-10);
        const double sum = pair.positive_part.matrix().trace().real() +
                           pair.negative_part.matrix().trace().real();
        CHECK(std::abs(sum - trace_norm(x)) < 1e-10);
    }
}

TEST_CASE("property: helstrom normal form round trip") {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        Index d = 2 + (i % 3);
        HermitianOperator x(random_hermitian(rng, d));
        auto dec = hermitian_to_helstrom(x);
        CHECK(dec.scale > 0.0);
        CHECK(max_abs(dec.scale * dec.ensemble.delta() - x.matrix()) < 1e-10);
        if (dec.ensemble.p1() > 0.0 && dec.ensemble.p2() > 0.0) {
            // indefinite branch: states must have orthogonal supports
            CHECK(max_abs(dec.ensemble.rho1().matrix() *
                          dec.ensemble.rho2().matrix()) < 1e-9);
        }
    }
}

TEST_CASE("property: 1000 random qubit ensembles match the brute-force oracle") {
    Rng rng(19);
    for (int i = 0; i < 1000; ++i) {
        double p1 = rng.uniform();
        HelstromEnsemble e(p1, density_from_bloch(random_in_ball3(rng)), 1.0 - p1,
                           density_from_bloch(random_in_ball3(rng)));
        CHECK(helstrom_bounds_check(e));
        CHECK(std::abs(discrimination_success(e) -
                       discrimination_success_bruteforce(e, 32)) < 1e-8);
    }
}

}  // TEST_SUITE
