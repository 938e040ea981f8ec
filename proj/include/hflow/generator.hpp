#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "hflow/bloch.hpp"
#include "hflow/errors.hpp"
#include "hflow/matrix.hpp"
#include "hflow/operator_core.hpp"
#include "hflow/tolerances.hpp"

namespace hflow {

// Scalar rate gamma_j(t), deterministic and total on [0, T]. Piecewise kinds
// are right-continuous; at_left() gives the left limit so an integrator can
// keep the terminal stage of a step inside the step's own phase.
class RateFunction {
  public:
    enum class Kind { Constant, PiecewiseConstant, NegTanh, Table };

    static RateFunction constant(double value) {
        RateFunction r;
        r.kind_ = Kind::Constant;
        r.values_ = {value};
        return r;
    }

    // value is values[k] on [breakpoints[k-1], breakpoints[k]) with
    // breakpoints[-1] = 0 and breakpoints[n] = infinity.
    static RateFunction piecewise_constant(std::vector<double> breakpoints,
                                           std::vector<double> values) {
        if (values.size() != breakpoints.size() + 1)
            throw DomainError("RateFunction: need one more value than breakpoints");
        if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
            throw DomainError("RateFunction: breakpoints must be increasing");
        RateFunction r;
        r.kind_ = Kind::PiecewiseConstant;
        r.times_ = std::move(breakpoints);
        r.values_ = std::move(values);
        return r;
    }

    // -amplitude * tanh(t)
    static RateFunction neg_tanh(double amplitude) {
        RateFunction r;
        r.kind_ = Kind::NegTanh;
        r.values_ = {amplitude};
        return r;
    }

    // linear interpolation between samples, clamped outside the range
    static RateFunction table(std::vector<double> times, std::vector<double> values) {
        if (times.size() != values.size() || times.size() < 2)
            throw DomainError("RateFunction: table needs matching times and values");
        if (!std::is_sorted(times.begin(), times.end()))
            throw DomainError("RateFunction: table times must be increasing");
        RateFunction r;
        r.kind_ = Kind::Table;
        r.times_ = std::move(times);
        r.values_ = std::move(values);
        return r;
    }

    double at(double t) const { return eval(t, /*left_limit=*/false); }
    double at_left(double t) const { return eval(t, /*left_limit=*/true); }

    Kind kind() const { return kind_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

  private:
    double eval(double t, bool left_limit) const {
        switch (kind_) {
            case Kind::Constant:
                return values_[0];
            case Kind::NegTanh:
                return -values_[0] * std::tanh(t);
            case Kind::PiecewiseConstant: {
                // snap queries within grid_snap of a breakpoint onto it
                const double snap = tol().grid_snap;
                std::size_t idx = 0;
                for (std::size_t k = 0; k < times_.size(); ++k) {
                    const double edge = times_[k];
                    const bool past = left_limit ? (t > edge + snap) : (t >= edge - snap);
                    if (past)
                        idx = k + 1;
                    else
                        break;
                }
                return values_[idx];
            }
            case Kind::Table: {
                if (t <= times_.front()) return values_.front();
                if (t >= times_.back()) return values_.back();
                auto it = std::upper_bound(times_.begin(), times_.end(), t);
                std::size_t hi = static_cast<std::size_t>(it - times_.begin());
                std::size_t lo = hi - 1;
                double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
                return (1.0 - w) * values_[lo] + w * values_[hi];
            }
        }
        return 0.0;
    }

    Kind kind_ = Kind::Constant;
    std::vector<double> times_;
    std::vector<double> values_;
};

// One decay channel: rate function plus a fixed Lindblad operator. All
// scenarios here use constant operators with time-dependent scalar rates.
struct Channel {
    RateFunction rate;
    Matrix lindblad_op;
};

// Time-local generator data: H_S(t) = schedule(t) * hamiltonian plus decay
// channels with rates gamma_j(t).
class GeneratorSpec {
  public:
    GeneratorSpec(Index dim, Matrix hamiltonian, std::vector<Channel> channels,
                  RateFunction hamiltonian_schedule = RateFunction::constant(1.0))
        : dim_(dim),
          hamiltonian_(std::move(hamiltonian)),
          schedule_(std::move(hamiltonian_schedule)),
          channels_(std::move(channels)) {
        if (dim_ < 2) throw DomainError("GeneratorSpec: dimension must be at least 2");
        if (hamiltonian_.rows() != dim_ || hamiltonian_.cols() != dim_)
            throw DomainError("GeneratorSpec: Hamiltonian dimension mismatch");
        if (adjoint_defect(hamiltonian_) > tol().hermitian_symmetry)
            throw DomainError("GeneratorSpec: Hamiltonian must be Hermitian");
        for (const auto& ch : channels_) {
            if (ch.lindblad_op.rows() != dim_ || ch.lindblad_op.cols() != dim_)
                throw DomainError("GeneratorSpec: channel operator dimension mismatch");
            if (!ch.lindblad_op.allFinite())
                throw DomainError("GeneratorSpec: channel operator has non-finite entries");
        }
    }

    Index dim() const { return dim_; }
    const Matrix& hamiltonian() const { return hamiltonian_; }
    const RateFunction& hamiltonian_schedule() const { return schedule_; }
    const std::vector<Channel>& channels() const { return channels_; }

  private:
    Index dim_;
    Matrix hamiltonian_;
    RateFunction schedule_;
    std::vector<Channel> channels_;
};

namespace detail {

// -i s(t) [H, X] + sum_j gamma_j(t) (A X A^dag - 1/2 {A^dag A, X})
inline Matrix generator_action(const GeneratorSpec& spec, double t, const Matrix& x,
                               bool left_limit) {
    const double s = left_limit ? spec.hamiltonian_schedule().at_left(t)
                                : spec.hamiltonian_schedule().at(t);
    Matrix out = -imag_unit * s *
                 (spec.hamiltonian() * x - x * spec.hamiltonian());
    for (const auto& ch : spec.channels()) {
        const double g = left_limit ? ch.rate.at_left(t) : ch.rate.at(t);
        if (g == 0.0) continue;
        const Matrix& a = ch.lindblad_op;
        Matrix aa = a.adjoint() * a;
        out += g * (a * x * a.adjoint() - 0.5 * (aa * x + x * aa));
    }
    return out;
}

}  // namespace detail

// Evaluate K_t on a Hermitian operator. The result is Hermitian and traceless.
inline HermitianOperator apply_generator(const GeneratorSpec& spec, double t,
                                         const HermitianOperator& rho) {
    if (rho.dim() != spec.dim())
        throw DomainError("apply_generator: dimension mismatch");
    return HermitianOperator(hermitize(detail::generator_action(spec, t, rho.matrix(),
                                                                false)));
}

// d v/dt for qubits through the Bloch correspondence rho = (I + v.sigma)/2.
// Assembled from the generator's action on the Pauli basis, so it exercises a
// different evaluation path than apply_generator on the full state.
inline Eigen::Vector3d bloch_rhs(const GeneratorSpec& spec, double t,
                                 const Eigen::Vector3d& v) {
    if (spec.dim() != 2)
        throw UnsupportedDimensionError("bloch_rhs: qubit representation only");
    Eigen::Vector3d shift;
    Eigen::Matrix3d lin;
    Matrix k_id = detail::generator_action(spec, t, Matrix::Identity(2, 2), false);
    for (int i = 0; i < 3; ++i) shift(i) = 0.5 * (pauli(i + 1) * k_id).trace().real();
    for (int j = 0; j < 3; ++j) {
        Matrix k_pauli = detail::generator_action(spec, t, pauli(j + 1), false);
        for (int i = 0; i < 3; ++i)
            lin(i, j) = 0.5 * (pauli(i + 1) * k_pauli).trace().real();
    }
    return lin * v + shift;
}

// Named generator families.

// Three Pauli channels with equal rate gamma0/4 each: isotropic Bloch
// contraction at rate gamma0.
inline GeneratorSpec make_isotropic_generator(double gamma0) {
    if (gamma0 < 0.0) throw ConstraintError("isotropic: rate must be nonnegative");
    std::vector<Channel> channels;
    for (int j = 1; j <= 3; ++j)
        channels.push_back({RateFunction::constant(gamma0 / 4.0), pauli(j)});
    return GeneratorSpec(2, Matrix::Zero(2, 2), std::move(channels));
}

// Random-unitary qubit model with one permanently negative rate: rates
// (1, 1, -tanh t)/4 on the three Pauli channels.
inline GeneratorSpec make_eternal_generator() {
    std::vector<Channel> channels;
    channels.push_back({RateFunction::constant(0.25), pauli(1)});
    channels.push_back({RateFunction::constant(0.25), pauli(2)});
    channels.push_back({RateFunction::neg_tanh(0.25), pauli(3)});
    return GeneratorSpec(2, Matrix::Zero(2, 2), std::move(channels));
}

// Isotropic contraction on [0, t1) followed by a uniform z-translation on
// [t1, T], encoded with the two-channel sigma+- form whose negative-rate
// channel is the source of non-P-divisibility. Requires a <= 1 - r to keep
// the overall map positive.
inline GeneratorSpec make_translation_demo_generator(double gamma0, double t1, double b0,
                                                     double big_t) {
    if (gamma0 <= 0.0 || t1 <= 0.0)
        throw ConstraintError("translation-demo: contraction phase must be nontrivial");
    if (b0 <= 0.0 || big_t <= t1)
        throw ConstraintError("translation-demo: translation phase must be nontrivial");
    const double r = std::exp(-gamma0 * t1);
    const double a = b0 * (big_t - t1);
    if (a > 1.0 - r + 1e-12)
        throw ConstraintError(
            "translation-demo: require a <= 1 - r in order to maintain positivity of "
            "the dynamical map");
    std::vector<Channel> channels;
    for (int j = 1; j <= 3; ++j)
        channels.push_back(
            {RateFunction::piecewise_constant({t1}, {gamma0 / 4.0, 0.0}), pauli(j)});
    channels.push_back(
        {RateFunction::piecewise_constant({t1}, {0.0, -b0 / 2.0}), sigma_minus()});
    channels.push_back(
        {RateFunction::piecewise_constant({t1}, {0.0, b0 / 2.0}), sigma_plus()});
    return GeneratorSpec(2, Matrix::Zero(2, 2), std::move(channels));
}

struct BuiltinParams {
    double gamma0 = std::log(2.0);
    double t1 = 1.0;
    double b0 = 0.3;
    double big_t = 2.0;
};

inline GeneratorSpec builtin_generator(std::string_view name,
                                       const BuiltinParams& p = {}) {
    if (name == "isotropic") return make_isotropic_generator(p.gamma0);
    if (name == "eternal") return make_eternal_generator();
    if (name == "translation-demo")
        return make_translation_demo_generator(p.gamma0, p.t1, p.b0, p.big_t);
    throw DomainError("builtin_generator: unknown family '" + std::string(name) + "'");
}

}  // namespace hflow
