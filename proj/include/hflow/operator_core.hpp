#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

#include "hflow/errors.hpp"
#include "hflow/matrix.hpp"
#include "hflow/random.hpp"
#include "hflow/tolerances.hpp"

namespace hflow {

// Dense Hermitian operator with a validated symmetry witness.
class HermitianOperator {
  public:
    explicit HermitianOperator(Matrix entries, const Tolerances& t = tol())
        : m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw DomainError("HermitianOperator: matrix must be square and nonempty");
        if (adjoint_defect(m_) > t.hermitian_symmetry)
            throw DomainError("HermitianOperator: operator is not Hermitian");
        m_ = hermitize(m_);
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

  private:
    Matrix m_;
};

// Positive unit-trace operator.
class DensityMatrix {
  public:
    explicit DensityMatrix(Matrix entries, const Tolerances& t = tol())
        : op_(std::move(entries), t) {
        if (std::abs(op_.matrix().trace().real() - 1.0) > t.unit_trace)
            throw DomainError("DensityMatrix: trace is not 1");
        Eigen::SelfAdjointEigenSolver<Matrix> es(op_.matrix(), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -t.psd_floor)
            throw DomainError("DensityMatrix: operator is not positive semidefinite");
    }

    static DensityMatrix maximally_mixed(Index dim) {
        return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    static DensityMatrix pure(const Vector& psi) {
        Vector n = psi / psi.norm();
        return DensityMatrix(n * n.adjoint());
    }

    Index dim() const { return op_.dim(); }
    const Matrix& matrix() const { return op_.matrix(); }
    const HermitianOperator& op() const { return op_; }

  private:
    HermitianOperator op_;
};

// Binary ensemble {p_i, rho_i} whose weighted difference is the Helstrom
// matrix; its trace norm is the one-shot discrimination bias.
class HelstromEnsemble {
  public:
    HelstromEnsemble(double p1, DensityMatrix rho1, double p2, DensityMatrix rho2,
                     const Tolerances& t = tol())
        : p1_(p1), p2_(p2), rho1_(std::move(rho1)), rho2_(std::move(rho2)) {
        if (p1_ < 0.0 || p2_ < 0.0)
            throw DomainError("HelstromEnsemble: weights must be nonnegative");
        if (std::abs(p1_ + p2_ - 1.0) > t.probability_norm)
            throw DomainError("HelstromEnsemble: weights must sum to 1");
        if (rho1_.dim() != rho2_.dim())
            throw DomainError("HelstromEnsemble: state dimensions differ");
    }

    double p1() const { return p1_; }
    double p2() const { return p2_; }
    const DensityMatrix& rho1() const { return rho1_; }
    const DensityMatrix& rho2() const { return rho2_; }
    Index dim() const { return rho1_.dim(); }

    // p1*rho1 - p2*rho2, Hermitian by construction.
    Matrix delta() const { return p1_ * rho1_.matrix() - p2_ * rho2_.matrix(); }

  private:
    double p1_, p2_;
    DensityMatrix rho1_, rho2_;
};

// Orthogonal-support split X = S - Q with S, Q >= 0.
struct JordanHahnPair {
    HermitianOperator positive_part;  // S
    HermitianOperator negative_part;  // Q
};

// Sum of absolute eigenvalues.
inline double trace_norm(const HermitianOperator& x) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline double trace_norm(const Matrix& x, const Tolerances& t = tol()) {
    return trace_norm(HermitianOperator(x, t));
}

// Algebraic cross-check route: ||X||_1 = 2 Tr{Pi_{X>=0} X} - Tr X, the
// projection characterization evaluated at its optimizer.
inline double trace_norm_projection_form(const HermitianOperator& x,
                                          const Tolerances& t = tol()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix());
    double positive_trace = 0.0;
    for (Index i = 0; i < x.dim(); ++i) {
        double ev = es.eigenvalues()(i);
        if (ev >= -t.zero_eigenvalue) positive_trace += ev;
    }
    return 2.0 * positive_trace - x.matrix().trace().real();
}

// Projector onto the nonnegative-eigenvalue subspace, the optimal two-outcome
// discrimination effect.
inline Matrix nonnegative_spectral_projector(const HermitianOperator& x,
                                             const Tolerances& t = tol()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix());
    Matrix proj = Matrix::Zero(x.dim(), x.dim());
    for (Index i = 0; i < x.dim(); ++i)
        if (es.eigenvalues()(i) >= -t.zero_eigenvalue)
            proj += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    return proj;
}

// Eigenvalues within zero_eigenvalue of zero go to the positive part; the
// split choice does not affect the trace norm.
inline JordanHahnPair jordan_hahn(const HermitianOperator& x, const Tolerances& t = tol()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix());
    Matrix s = Matrix::Zero(x.dim(), x.dim());
    Matrix q = Matrix::Zero(x.dim(), x.dim());
    for (Index i = 0; i < x.dim(); ++i) {
        double ev = es.eigenvalues()(i);
        Matrix rank1 = es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
        if (ev >= -t.zero_eigenvalue)
            s += ev * rank1;
        else
            q -= ev * rank1;
    }
    return {HermitianOperator(hermitize(s), t), HermitianOperator(hermitize(q), t)};
}

struct HelstromDecomposition {
    double scale;  // lambda > 0 with X = lambda * (p1 rho1 - p2 rho2)
    HelstromEnsemble ensemble;
};

// Normal form of a nonzero Hermitian operator as a scaled Helstrom matrix.
// Indefinite X: scale = ||X||_1 and the states are the normalized orthogonal
// split parts. Semidefinite X: one weight is 1 and the partner state is fixed
// to the maximally mixed state for determinism.
inline HelstromDecomposition hermitian_to_helstrom(const HermitianOperator& x,
                                                   const Tolerances& t = tol()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix(), Eigen::EigenvaluesOnly);
    const double ev_min = es.eigenvalues().minCoeff();
    const double ev_max = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().cwiseAbs().sum() <= t.zero_operator)
        throw DomainError("hermitian_to_helstrom: zero operator has no normal form");

    const Index d = x.dim();
    if (ev_min >= -t.zero_eigenvalue) {  // positive semidefinite
        double lambda = x.matrix().trace().real();
        return {lambda, HelstromEnsemble(1.0, DensityMatrix(x.matrix() / lambda, t), 0.0,
                                         DensityMatrix::maximally_mixed(d), t)};
    }
    if (ev_max <= t.zero_eigenvalue) {  // negative semidefinite
        double lambda = -x.matrix().trace().real();
        return {lambda, HelstromEnsemble(0.0, DensityMatrix::maximally_mixed(d), 1.0,
                                         DensityMatrix(-x.matrix() / lambda, t), t)};
    }

    JordanHahnPair split = jordan_hahn(x, t);
    const double trace_s = split.positive_part.matrix().trace().real();
    const double trace_q = split.negative_part.matrix().trace().real();
    const double lambda = trace_s + trace_q;
    return {lambda,
            HelstromEnsemble(trace_s / lambda,
                             DensityMatrix(split.positive_part.matrix() / trace_s, t),
                             trace_q / lambda,
                             DensityMatrix(split.negative_part.matrix() / trace_q, t), t)};
}

// Maximal success probability of one-shot discrimination.
inline double discrimination_success(const HelstromEnsemble& ensemble) {
    return 0.5 * (1.0 + trace_norm(HermitianOperator(ensemble.delta())));
}

// Independent oracle over two-outcome effects for qubits: maximizes
// p2 + Tr{Delta T} over sampled projections plus the exact optimizer.
inline double discrimination_success_bruteforce(const HelstromEnsemble& ensemble,
                                                int n_candidates,
                                                const Tolerances& t = tol()) {
    if (ensemble.dim() != 2)
        throw UnsupportedDimensionError(
            "discrimination_success_bruteforce: qubit oracle only");

    const Matrix delta = ensemble.delta();
    auto success = [&](const Matrix& effect) {
        return ensemble.p2() + (delta * effect).trace().real();
    };

    double best = success(Matrix::Zero(2, 2));                       // rank 0
    best = std::max(best, success(Matrix::Identity(2, 2)));          // rank 2
    best = std::max(best, success(nonnegative_spectral_projector(
                              HermitianOperator(delta, t), t)));     // optimal

    Rng rng(0x5eedu);
    for (int i = 0; i < n_candidates; ++i) {
        Eigen::Vector3d u = random_unit_vector3(rng);
        Matrix proj = 0.5 * (Matrix::Identity(2, 2) + u.x() * pauli_x() +
                             u.y() * pauli_y() + u.z() * pauli_z());
        best = std::max(best, success(proj));
    }
    return best;
}

// |p1 - p2| <= ||Delta||_1 <= 1, within slack.
inline bool helstrom_bounds_check(const HelstromEnsemble& ensemble,
                                  const Tolerances& t = tol()) {
    const double norm = trace_norm(HermitianOperator(ensemble.delta(), t));
    const double lower = std::abs(ensemble.p1() - ensemble.p2());
    return norm >= lower - t.bound_slack && norm <= 1.0 + t.bound_slack;
}

}  // namespace hflow
