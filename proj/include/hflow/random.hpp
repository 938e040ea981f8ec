#pragma once

#include <cstdint>
#include <random>

#include "hflow/matrix.hpp"

namespace hflow {

// Seeded random source for all sampling in the library and tests.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

inline Eigen::Vector3d random_unit_vector3(Rng& rng) {
    Eigen::Vector3d v;
    do {
        v << rng.normal(), rng.normal(), rng.normal();
    } while (v.norm() < 1e-12);
    return v.normalized();
}

inline Eigen::Vector3d random_in_ball3(Rng& rng) {
    return std::cbrt(rng.uniform()) * random_unit_vector3(rng);
}

inline Matrix random_ginibre(Rng& rng, Index dim) {
    Matrix g(dim, dim);
    for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    return g;
}

inline Matrix random_hermitian(Rng& rng, Index dim) {
    return hermitize(random_ginibre(rng, dim));
}

inline Matrix random_traceless_hermitian(Rng& rng, Index dim) {
    Matrix h = random_hermitian(rng, dim);
    h -= (h.trace() / static_cast<double>(dim)) * Matrix::Identity(dim, dim);
    return h;
}

inline Vector random_pure(Rng& rng, Index dim) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
    return v / v.norm();
}

// Full-rank random state from a Ginibre matrix.
inline Matrix random_density_matrix(Rng& rng, Index dim) {
    Matrix g = random_ginibre(rng, dim);
    Matrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

// Haar-distributed unitary via QR with phase correction; columns form a
// Haar-random orthonormal basis.
inline Matrix haar_basis(Rng& rng, Index dim) {
    Matrix g = random_ginibre(rng, dim);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < dim; ++j) {
        Complex d = r(j, j);
        if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

}  // namespace hflow
