#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "hflow/errors.hpp"
#include "hflow/generator.hpp"
#include "hflow/matrix.hpp"
#include "hflow/operator_core.hpp"

namespace hflow {

// dim^2 x dim^2 matrix acting on column-vectorized operators.
struct Superoperator {
    Index dim = 0;
    Matrix mat;

    Matrix apply(const Matrix& x) const { return unvectorize(mat * vectorize(x), dim); }

    // The trace functional is a left fixed point of a trace-preserving map:
    // returns max_j |sum_i (row Tr) S - row Tr|_j.
    double trace_preservation_defect() const {
        Vector tr_row = Vector::Zero(dim * dim);
        for (Index i = 0; i < dim; ++i) tr_row(i + dim * i) = 1.0;
        return (mat.transpose() * tr_row - tr_row).cwiseAbs().maxCoeff();
    }
};

// Superoperator matrix of the time-local generator at time t.
inline Matrix generator_superoperator(const GeneratorSpec& spec, double t,
                                      bool left_limit = false) {
    const Index d = spec.dim();
    const Matrix id = Matrix::Identity(d, d);
    const double s = left_limit ? spec.hamiltonian_schedule().at_left(t)
                                : spec.hamiltonian_schedule().at(t);
    Matrix k = -imag_unit * s *
               (kron(id, spec.hamiltonian()) - kron(spec.hamiltonian().transpose(), id));
    for (const auto& ch : spec.channels()) {
        const double g = left_limit ? ch.rate.at_left(t) : ch.rate.at(t);
        if (g == 0.0) continue;
        const Matrix& a = ch.lindblad_op;
        Matrix aa = a.adjoint() * a;
        k += g * (kron(a.conjugate(), a) -
                  0.5 * (kron(id, aa) + kron(aa.transpose(), id)));
    }
    return k;
}

// Uniform time grid of one-parameter maps Phi_t with invertibility flags.
struct PropagatorTable {
    Index dim = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Superoperator> maps;
    std::vector<bool> invertible;
    std::vector<double> sv_ratio;  // smallest/largest singular value

    std::size_t size() const { return times.size(); }

    std::size_t index_of(double t) const {
        const auto k = static_cast<long long>(std::llround(t / dt));
        if (k < 0 || k >= static_cast<long long>(times.size()) ||
            std::abs(t - static_cast<double>(k) * dt) > tol().grid_snap)
            throw GridError("time " + std::to_string(t) + " is not on the grid");
        return static_cast<std::size_t>(k);
    }
};

// Fixed-step RK4 on dPhi/dt = K(t) Phi with Phi(0) = I. The terminal stage of
// each step evaluates rates through their left limit, so piecewise-constant
// rates with grid-aligned breakpoints never leak across a phase boundary.
inline PropagatorTable integrate(const GeneratorSpec& spec, double total_time,
                                 double dt) {
    if (dt <= 0.0) throw DomainError("integrate: dt must be positive");
    if (total_time < dt) throw DomainError("integrate: T must be at least dt");
    const auto n_steps = static_cast<std::size_t>(std::llround(total_time / dt));
    if (std::abs(static_cast<double>(n_steps) * dt - total_time) > 1e-6 * dt)
        throw GridError("integrate: T must be an integer multiple of dt");

    const Index d = spec.dim();
    PropagatorTable table;
    table.dim = d;
    table.dt = dt;
    table.times.reserve(n_steps + 1);
    table.maps.reserve(n_steps + 1);

    Matrix phi = Matrix::Identity(d * d, d * d);
    table.times.push_back(0.0);
    table.maps.push_back({d, phi});
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Matrix k1 = generator_superoperator(spec, t);
        const Matrix k_mid = generator_superoperator(spec, t + 0.5 * dt);
        const Matrix k4 = generator_superoperator(spec, t + dt, /*left_limit=*/true);
        const Matrix a1 = k1 * phi;
        const Matrix a2 = k_mid * (phi + 0.5 * dt * a1);
        const Matrix a3 = k_mid * (phi + 0.5 * dt * a2);
        const Matrix a4 = k4 * (phi + dt * a3);
        phi += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        table.times.push_back(static_cast<double>(k + 1) * dt);
        table.maps.push_back({d, phi});
    }

    table.invertible.resize(table.size());
    table.sv_ratio.resize(table.size());
    for (std::size_t k = 0; k < table.size(); ++k) {
        Eigen::JacobiSVD<Matrix> svd(table.maps[k].mat);
        const double smax = svd.singularValues().maxCoeff();
        const double smin = svd.singularValues().minCoeff();
        table.sv_ratio[k] = smax > 0.0 ? smin / smax : 0.0;
        table.invertible[k] = table.sv_ratio[k] >= tol().inversion_sv_ratio;
    }
    return table;
}

// Phi_{t,s} = Phi_t Phi_s^{-1}; refuses to regularize a non-invertible Phi_s.
inline Superoperator intermediate_map(const PropagatorTable& table, double s, double t) {
    const std::size_t ks = table.index_of(s);
    const std::size_t kt = table.index_of(t);
    if (ks > kt) throw DomainError("intermediate_map: need s <= t");
    if (!table.invertible[ks])
        throw DivisibilityUndefinedError(
            "intermediate_map: Phi_s is not invertible at s = " + std::to_string(s) +
            ", divisibility is ill-defined there");
    const Matrix& phi_s = table.maps[ks].mat;
    const Matrix& phi_t = table.maps[kt].mat;
    // Solve X Phi_s = Phi_t through the transposed system.
    Matrix x = phi_s.transpose().partialPivLu().solve(phi_t.transpose()).transpose();
    return {table.dim, x};
}

inline double composition_residual(const PropagatorTable& table, double s, double t) {
    const Superoperator phi_ts = intermediate_map(table, s, t);
    return max_abs(phi_ts.mat * table.maps[table.index_of(s)].mat -
                   table.maps[table.index_of(t)].mat);
}

// Diagnostic reconstruction of the time-local generator from the tabulated
// flow, d(Phi)/dt Phi^{-1} by central differences; no attempt is made to
// split the result back into channels.
inline Matrix empirical_generator(const PropagatorTable& table, double t) {
    const std::size_t k = table.index_of(t);
    if (k == 0 || k + 1 >= table.size())
        throw GridError("empirical_generator: need an interior grid point");
    if (!table.invertible[k])
        throw DivisibilityUndefinedError(
            "empirical_generator: map is not invertible at t = " + std::to_string(t));
    Matrix derivative =
        (table.maps[k + 1].mat - table.maps[k - 1].mat) / (2.0 * table.dt);
    const Matrix& phi = table.maps[k].mat;
    return phi.transpose().partialPivLu().solve(derivative.transpose()).transpose();
}

// Reshuffled superoperator whose positive semidefiniteness certifies complete
// positivity: C[(i,k),(j,l)] = S[(k,l),(i,j)]. For the identity map this is
// twice the maximally entangled projector.
struct ChoiMatrix {
    Matrix mat;
};

inline ChoiMatrix choi(const Superoperator& s) {
    const Index d = s.dim;
    Matrix c(d * d, d * d);
    for (Index i = 0; i < d; ++i)
        for (Index k = 0; k < d; ++k)
            for (Index j = 0; j < d; ++j)
                for (Index l = 0; l < d; ++l)
                    c(i * d + k, j * d + l) = s.mat(k + d * l, i + d * j);
    return {hermitize(c)};
}

inline double min_choi_eigenvalue(const Superoperator& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(choi(s).mat, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Apply the tabulated map at an on-grid time to a state.
inline DensityMatrix evolve_state(const PropagatorTable& table, const DensityMatrix& rho0,
                                  double t) {
    if (rho0.dim() != table.dim) throw DomainError("evolve_state: dimension mismatch");
    const std::size_t k = table.index_of(t);
    Matrix out = hermitize(table.maps[k].apply(rho0.matrix()));
    if (std::abs(out.trace().real() - 1.0) > tol().evolve_trace)
        throw NumericalError("evolve_state: trace not preserved");
    // renormalize roundoff before validating
    out /= out.trace().real();
    return DensityMatrix(out);
}

}  // namespace hflow
