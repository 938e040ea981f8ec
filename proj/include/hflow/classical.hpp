#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "hflow/bloch.hpp"
#include "hflow/errors.hpp"
#include "hflow/generator.hpp"
#include "hflow/measure.hpp"
#include "hflow/propagator.hpp"

namespace hflow {

// Instantaneous spectral decomposition of the evolved state along the grid,
// with eigenvectors matched for continuity across steps.
struct SpectralTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> eigenvalues;  // descending order at t = 0
    std::vector<Matrix> frames;                // orthonormal columns
    std::vector<char> degenerate;              // matching ambiguous at this step
};

namespace detail {

// Greedy maximum-overlap assignment of new eigenvector columns to the
// previous frame's slots, ties broken by index; phases fixed so the matched
// overlap is real and nonnegative.
inline Matrix match_frame(const Matrix& prev, const Matrix& fresh) {
    const Index d = prev.cols();
    Eigen::MatrixXd overlap(d, d);
    for (Index m = 0; m < d; ++m)
        for (Index n = 0; n < d; ++n)
            overlap(m, n) = std::abs((prev.col(m).adjoint() * fresh.col(n))(0, 0));
    std::vector<bool> row_used(d, false), col_used(d, false);
    Matrix matched(prev.rows(), d);
    for (Index pass = 0; pass < d; ++pass) {
        Index best_m = -1, best_n = -1;
        double best = -1.0;
        for (Index m = 0; m < d; ++m) {
            if (row_used[m]) continue;
            for (Index n = 0; n < d; ++n) {
                if (col_used[n]) continue;
                if (overlap(m, n) > best) {
                    best = overlap(m, n);
                    best_m = m;
                    best_n = n;
                }
            }
        }
        row_used[best_m] = true;
        col_used[best_n] = true;
        Complex phase = (prev.col(best_m).adjoint() * fresh.col(best_n))(0, 0);
        Vector col = fresh.col(best_n);
        if (std::abs(phase) > 1e-12) col *= std::conj(phase) / std::abs(phase);
        matched.col(best_m) = col;
    }
    return matched;
}

inline bool has_degeneracy(const Eigen::VectorXd& evs, double gap) {
    for (Index i = 0; i + 1 < evs.size(); ++i)
        if (std::abs(evs(i) - evs(i + 1)) < gap) return true;
    return false;
}

}  // namespace detail

inline SpectralTrajectory spectral_track(const PropagatorTable& table,
                                         const DensityMatrix& rho0) {
    if (rho0.dim() != table.dim) throw DomainError("spectral_track: dimension mismatch");
    const Index d = table.dim;
    const double gap = tol().degeneracy_gap;
    SpectralTrajectory traj;
    traj.times = table.times;
    traj.eigenvalues.reserve(table.size());
    traj.frames.reserve(table.size());
    traj.degenerate.reserve(table.size());

    const Vector rho0_vec = vectorize(rho0.matrix());
    Matrix prev_frame;
    for (std::size_t k = 0; k < table.size(); ++k) {
        Matrix rho = hermitize(unvectorize(table.maps[k].mat * rho0_vec, d));
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
        // descending order
        Eigen::VectorXd evs = es.eigenvalues().reverse();
        Matrix vecs(d, d);
        for (Index j = 0; j < d; ++j) vecs.col(j) = es.eigenvectors().col(d - 1 - j);

        const bool degenerate = detail::has_degeneracy(evs, gap);
        Matrix frame;
        if (k == 0) {
            frame = vecs;
        } else if (degenerate) {
            // ambiguous eigenbasis: keep the previous frame for continuity
            frame = prev_frame;
        } else {
            frame = detail::match_frame(prev_frame, vecs);
        }
        Eigen::VectorXd populations(d);
        for (Index j = 0; j < d; ++j)
            populations(j) = (frame.col(j).adjoint() * rho * frame.col(j))(0, 0).real();

        traj.eigenvalues.push_back(populations);
        traj.frames.push_back(frame);
        traj.degenerate.push_back(degenerate ? 1 : 0);
        prev_frame = frame;
    }
    return traj;
}

// Classical jump process extracted from a quantum trajectory: transition
// rates on the grid plus whatever the Pauli equation produces from them.
struct ClassicalProcess {
    std::vector<double> times;
    double dt = 0.0;
    std::vector<Eigen::MatrixXd> rates;       // W(t_k), zero diagonal
    std::vector<Eigen::MatrixXd> rates_left;  // left limits at the grid points
    double min_offdiagonal = 0.0;             // positivity margin over the grid

    std::size_t index_of(double t) const {
        const auto k = static_cast<long long>(std::llround(t / dt));
        if (k < 0 || k >= static_cast<long long>(times.size()) ||
            std::abs(t - static_cast<double>(k) * dt) > tol().grid_snap)
            throw GridError("time " + std::to_string(t) + " is not on the grid");
        return static_cast<std::size_t>(k);
    }
};

// W_mn(t) = sum_j gamma_j(t) |<phi_m(t)| A_j |phi_n(t)>|^2 with the diagonal
// dropped. Left limits are tabulated alongside so the rate equation can keep
// each integration step inside its own phase of a piecewise rate.
inline ClassicalProcess classical_rates(const GeneratorSpec& spec,
                                        const SpectralTrajectory& traj) {
    const Index d = spec.dim();
    ClassicalProcess process;
    process.times = traj.times;
    process.dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0.0;
    process.rates.reserve(traj.times.size());
    process.rates_left.reserve(traj.times.size());
    double margin = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const Matrix& frame = traj.frames[k];
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
        Eigen::MatrixXd w_left = Eigen::MatrixXd::Zero(d, d);
        for (const auto& ch : spec.channels()) {
            const double g = ch.rate.at(traj.times[k]);
            const double g_left = ch.rate.at_left(traj.times[k]);
            if (g == 0.0 && g_left == 0.0) continue;
            Matrix amp = frame.adjoint() * ch.lindblad_op * frame;
            for (Index m = 0; m < d; ++m)
                for (Index n = 0; n < d; ++n)
                    if (m != n) {
                        const double overlap = std::norm(amp(m, n));
                        w(m, n) += g * overlap;
                        w_left(m, n) += g_left * overlap;
                    }
        }
        for (Index m = 0; m < d; ++m)
            for (Index n = 0; n < d; ++n)
                if (m != n && (first || w(m, n) < margin)) {
                    margin = w(m, n);
                    first = false;
                }
        process.rates.push_back(std::move(w));
        process.rates_left.push_back(std::move(w_left));
    }
    process.min_offdiagonal = margin;
    return process;
}

namespace detail {

// Generator matrix of the rate equation: L = W - diag(column sums of W).
inline Eigen::MatrixXd pauli_generator(const Eigen::MatrixXd& w) {
    Eigen::MatrixXd l = w;
    for (Index n = 0; n < w.cols(); ++n) l(n, n) -= w.col(n).sum();
    return l;
}

// RK4 with rates linearly interpolated at midpoints; the terminal stage of a
// step uses the left limit so grid-aligned rate breakpoints do not leak
// across phases. Works on vectors or matrices.
template <typename State>
State integrate_rate_equation(const ClassicalProcess& process, std::size_t k_from,
                              std::size_t k_to, State state) {
    for (std::size_t k = k_from; k < k_to; ++k) {
        const double h = process.dt;
        Eigen::MatrixXd l1 = pauli_generator(process.rates[k]);
        Eigen::MatrixXd l_mid =
            pauli_generator(0.5 * (process.rates[k] + process.rates_left[k + 1]));
        Eigen::MatrixXd l4 = pauli_generator(process.rates_left[k + 1]);
        State a1 = l1 * state;
        State a2 = l_mid * (state + 0.5 * h * a1);
        State a3 = l_mid * (state + 0.5 * h * a2);
        State a4 = l4 * (state + h * a3);
        state += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    }
    return state;
}

}  // namespace detail

// Pauli master equation for the 1-point probabilities.
inline std::vector<Eigen::VectorXd> pauli_evolve(const ClassicalProcess& process,
                                                 const Eigen::VectorXd& p0) {
    if (p0.size() != process.rates.front().rows())
        throw DomainError("pauli_evolve: dimension mismatch");
    std::vector<Eigen::VectorXd> out;
    out.reserve(process.times.size());
    Eigen::VectorXd p = p0;
    out.push_back(p);
    for (std::size_t k = 0; k + 1 < process.times.size(); ++k) {
        p = detail::integrate_rate_equation(process, k, k + 1, p);
        out.push_back(p);
    }
    return out;
}

// Transition matrix T(t, s) of the differential Chapman-Kolmogorov form,
// integrated column by column from the identity.
inline Eigen::MatrixXd transition_matrix(const ClassicalProcess& process, double s,
                                         double t) {
    const std::size_t ks = process.index_of(s);
    const std::size_t kt = process.index_of(t);
    if (ks > kt) throw DomainError("transition_matrix: need s <= t");
    const Index d = process.rates.front().rows();
    return detail::integrate_rate_equation(process, ks, kt,
                                           Eigen::MatrixXd::Identity(d, d).eval());
}

// Max-abs entry of T(t3,t1) - T(t3,t2) T(t2,t1).
inline double chapman_kolmogorov_check(const ClassicalProcess& process, double t1,
                                       double t2, double t3) {
    if (!(t1 <= t2 && t2 <= t3))
        throw DomainError("chapman_kolmogorov_check: need t1 <= t2 <= t3");
    Eigen::MatrixXd t31 = transition_matrix(process, t1, t3);
    Eigen::MatrixXd t32 = transition_matrix(process, t2, t3);
    Eigen::MatrixXd t21 = transition_matrix(process, t1, t2);
    return (t31 - t32 * t21).cwiseAbs().maxCoeff();
}

// Image criterion for qubits: the maximally mixed state lies in the image of
// Phi_t iff the Bloch image ellipsoid {M v + c : |v| <= 1} contains the
// origin, decided by a bounded least-norm solve. Exactly then does every
// orthonormal basis appear as the eigenbasis of some evolved state.
inline bool max_mixed_in_image(const PropagatorTable& table, double t) {
    if (table.dim != 2)
        throw UnsupportedDimensionError("max_mixed_in_image: qubit criterion only");
    const std::size_t k = table.index_of(t);
    const Superoperator& map = table.maps[k];

    Eigen::Matrix3d m;
    Eigen::Vector3d c;
    Matrix id_out = map.apply(Matrix::Identity(2, 2));
    for (int i = 0; i < 3; ++i) c(i) = 0.5 * (pauli(i + 1) * id_out).trace().real();
    for (int j = 0; j < 3; ++j) {
        Matrix p_out = map.apply(pauli(j + 1));
        for (int i = 0; i < 3; ++i) m(i, j) = 0.5 * (pauli(i + 1) * p_out).trace().real();
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    const Eigen::Vector3d d = svd.matrixU().transpose() * c;
    const double sv_floor = 1e-12 * std::max(1.0, sv.maxCoeff());

    // interior solution u_i = -d_i / sigma_i if it fits in the unit ball
    double interior_norm2 = 0.0;
    double null_residual2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (sv(i) > sv_floor)
            interior_norm2 += (d(i) / sv(i)) * (d(i) / sv(i));
        else
            null_residual2 += d(i) * d(i);
    }
    double min_norm;
    if (interior_norm2 <= 1.0) {
        min_norm = std::sqrt(null_residual2);
    } else {
        // trust-region secular equation: sum (sigma_i d_i / (sigma_i^2 + mu))^2 = 1
        auto constraint = [&](double mu) {
            double s = 0.0;
            for (int i = 0; i < 3; ++i) {
                double term = sv(i) * d(i) / (sv(i) * sv(i) + mu);
                s += term * term;
            }
            return s;
        };
        double lo = 0.0, hi = 1.0;
        while (constraint(hi) > 1.0 && hi < 1e12) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (constraint(mid) > 1.0 ? lo : hi) = mid;
        }
        const double mu = 0.5 * (lo + hi);
        double res2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            double term = d(i) * mu / (sv(i) * sv(i) + mu);
            if (sv(i) <= sv_floor) term = d(i);
            res2 += term * term;
        }
        min_norm = std::sqrt(res2);
    }
    return min_norm <= tol().image_membership;
}

}  // namespace hflow
