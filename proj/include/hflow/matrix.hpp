#pragma once

#include <Eigen/Dense>
#include <complex>

namespace hflow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex imag_unit{0.0, 1.0};

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double adjoint_defect(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

// Symmetrize away roundoff; used after arithmetic that is Hermitian by
// construction but not bitwise.
inline Matrix hermitize(const Matrix& m) {
    return 0.5 * (m + m.adjoint());
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Column-stacking vectorization: (vec M)_{i + d*j} = M_{i,j}.
// Eigen matrices are column-major, so this is a flat copy.
inline Vector vectorize(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvectorize(const Vector& v, Index dim) {
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// j = 1, 2, 3
inline Matrix pauli(int j) {
    switch (j) {
        case 1: return pauli_x();
        case 2: return pauli_y();
        default: return pauli_z();
    }
}

// Raising operator with respect to the sigma_z eigenstates: maps |1> to |0>.
inline Matrix sigma_plus() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1;
    return m;
}

inline Matrix sigma_minus() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1;
    return m;
}

}  // namespace hflow
