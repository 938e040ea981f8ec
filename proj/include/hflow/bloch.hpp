#pragma once

#include <cmath>

#include "hflow/errors.hpp"
#include "hflow/matrix.hpp"
#include "hflow/operator_core.hpp"

namespace hflow {

// rho = (I + v.sigma)/2
inline Matrix state_from_bloch(const Eigen::Vector3d& v) {
    return 0.5 * (Matrix::Identity(2, 2) + v.x() * pauli_x() + v.y() * pauli_y() +
                  v.z() * pauli_z());
}

inline DensityMatrix density_from_bloch(const Eigen::Vector3d& v) {
    return DensityMatrix(state_from_bloch(v));
}

inline Eigen::Vector3d bloch_of(const Matrix& rho) {
    return {(rho * pauli_x()).trace().real(), (rho * pauli_y()).trace().real(),
            (rho * pauli_z()).trace().real()};
}

// Split a 2x2 Hermitian X = (c*I + u.sigma)/2 into trace part c and Bloch
// part u.
inline std::pair<double, Eigen::Vector3d> qubit_parts(const Matrix& x) {
    return {x.trace().real(), 2.0 * bloch_of(0.5 * x)};
}

// Trace norm of (c*I + u.sigma)/2 from its eigenvalues (c +- |u|)/2:
// the closed form (|c + |u|| + |c - |u||)/2.
inline double qubit_trace_norm_parts(double trace_part, double bloch_norm) {
    return 0.5 * (std::abs(trace_part + bloch_norm) + std::abs(trace_part - bloch_norm));
}

// Antipodal orthogonal qubit pair along direction u with weight p1 on the
// +u state.
inline HelstromEnsemble antipodal_ensemble(const Eigen::Vector3d& u, double p1) {
    Eigen::Vector3d n = u.normalized();
    return HelstromEnsemble(p1, density_from_bloch(n), 1.0 - p1, density_from_bloch(-n));
}

}  // namespace hflow
