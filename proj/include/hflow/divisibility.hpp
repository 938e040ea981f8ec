#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hflow/bloch.hpp"
#include "hflow/errors.hpp"
#include "hflow/generator.hpp"
#include "hflow/propagator.hpp"
#include "hflow/random.hpp"

namespace hflow {

// Full rate-condition matrix a(m, n) = Tr{|m><m| K_t(|n><n|)} for a given
// orthonormal basis (columns). Column sums vanish by trace preservation; the
// off-diagonal entries are the positivity conditions for P-divisibility.
inline Eigen::MatrixXd kossakowski_matrix(const GeneratorSpec& spec, double t,
                                          const Matrix& basis) {
    const Index d = spec.dim();
    if (basis.rows() != d || basis.cols() != d)
        throw DomainError("kossakowski_matrix: basis dimension mismatch");
    if (max_abs(basis.adjoint() * basis - Matrix::Identity(d, d)) >
        tol().basis_orthonormality)
        throw DomainError("kossakowski_matrix: basis is not orthonormal");

    Eigen::MatrixXd a(d, d);
    for (Index n = 0; n < d; ++n) {
        Matrix proj_n = basis.col(n) * basis.col(n).adjoint();
        Matrix k_proj = detail::generator_action(spec, t, proj_n, false);
        for (Index m = 0; m < d; ++m)
            a(m, n) = (basis.col(m).adjoint() * k_proj * basis.col(m))(0, 0).real();
    }
    for (Index n = 0; n < d; ++n)
        if (std::abs(a.col(n).sum()) > 1e-10)
            throw NumericalError("kossakowski_matrix: column sum does not vanish");
    return a;
}

// CP-divisibility rate condition: margin(t) = min_j gamma_j(t), satisfied iff
// the margin never drops below -rate_margin.
inline std::vector<double> check_cp_rates(const GeneratorSpec& spec,
                                          const std::vector<double>& times) {
    std::vector<double> margins;
    margins.reserve(times.size());
    for (double t : times) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& ch : spec.channels()) m = std::min(m, ch.rate.at(t));
        if (spec.channels().empty()) m = 0.0;
        margins.push_back(m);
    }
    return margins;
}

namespace detail {

// True when every channel operator is one of the three Pauli matrices;
// rates[axis] accumulates per axis.
inline std::optional<std::array<std::vector<const RateFunction*>, 3>>
pauli_channel_rates(const GeneratorSpec& spec) {
    if (spec.dim() != 2 || spec.channels().empty()) return std::nullopt;
    std::array<std::vector<const RateFunction*>, 3> by_axis;
    for (const auto& ch : spec.channels()) {
        bool matched = false;
        for (int j = 1; j <= 3; ++j)
            if (max_abs(ch.lindblad_op - pauli(j)) < 1e-12) {
                by_axis[j - 1].push_back(&ch.rate);
                matched = true;
                break;
            }
        if (!matched) return std::nullopt;
    }
    return by_axis;
}

}  // namespace detail

// P-divisibility rate condition. For qubit Pauli channels the exact closed
// form is used: the minimum of the basis-dependent sum over all orthonormal
// bases equals the smallest pairwise rate sum. Otherwise the condition is
// sampled over the computational basis plus Haar-random bases, which can only
// certify violation.
struct PRateResult {
    std::vector<double> margins;
    bool exact = false;  // closed form used (Pauli channels)
};

inline PRateResult check_p_rates(const GeneratorSpec& spec,
                                 const std::vector<double>& times, int n_bases = 200,
                                 std::uint64_t seed = 1) {
    PRateResult result;
    result.margins.reserve(times.size());

    if (auto by_axis = detail::pauli_channel_rates(spec)) {
        result.exact = true;
        for (double t : times) {
            double g[3] = {0.0, 0.0, 0.0};
            for (int ax = 0; ax < 3; ++ax)
                for (const RateFunction* r : (*by_axis)[ax]) g[ax] += r->at(t);
            result.margins.push_back(
                std::min({g[0] + g[1], g[0] + g[2], g[1] + g[2]}));
        }
        return result;
    }

    // Precompute |<m| A_j |n>|^2 per basis; the weights are time-independent.
    const Index d = spec.dim();
    const std::size_t n_ch = spec.channels().size();
    Rng rng(seed);
    std::vector<Matrix> bases;
    bases.push_back(Matrix::Identity(d, d));
    for (int b = 1; b < n_bases; ++b) bases.push_back(haar_basis(rng, d));

    struct PairWeights {
        std::vector<double> w;  // one entry per channel
    };
    std::vector<PairWeights> pairs;
    for (const Matrix& basis : bases) {
        for (Index m = 0; m < d; ++m)
            for (Index n = 0; n < d; ++n) {
                if (m == n) continue;
                PairWeights pw;
                pw.w.resize(n_ch);
                for (std::size_t j = 0; j < n_ch; ++j) {
                    Complex amp = (basis.col(m).adjoint() *
                                   spec.channels()[j].lindblad_op * basis.col(n))(0, 0);
                    pw.w[j] = std::norm(amp);
                }
                pairs.push_back(std::move(pw));
            }
    }

    std::vector<double> gamma(n_ch);
    for (double t : times) {
        for (std::size_t j = 0; j < n_ch; ++j) gamma[j] = spec.channels()[j].rate.at(t);
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& pw : pairs) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_ch; ++j) s += gamma[j] * pw.w[j];
            margin = std::min(margin, s);
        }
        if (pairs.empty()) margin = 0.0;
        result.margins.push_back(margin);
    }
    return result;
}

// Map-level witness series over the grid intervals [t_k, t_{k+1}]; entries are
// NaN on intervals where the intermediate map is undefined.
struct WitnessSeries {
    std::vector<double> values;
    std::vector<std::pair<double, double>> undefined_intervals;
};

// Minimal Choi eigenvalue of each one-step intermediate map.
inline WitnessSeries check_cp_choi(const PropagatorTable& table) {
    WitnessSeries out;
    out.values.reserve(table.size() - 1);
    for (std::size_t k = 0; k + 1 < table.size(); ++k) {
        if (!table.invertible[k]) {
            out.values.push_back(std::numeric_limits<double>::quiet_NaN());
            out.undefined_intervals.emplace_back(table.times[k], table.times[k + 1]);
            continue;
        }
        out.values.push_back(
            min_choi_eigenvalue(intermediate_map(table, table.times[k],
                                                 table.times[k + 1])));
    }
    return out;
}

namespace detail {

// Trace-norm-one Hermitian probes in Helstrom normal form. For qubits a fixed
// axis/weight grid is included so the known worst directions are always hit.
inline std::vector<Matrix> contraction_probes(Index dim, int n_samples,
                                              std::uint64_t seed) {
    std::vector<Matrix> probes;
    if (dim == 2) {
        const Eigen::Vector3d axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        for (const auto& u : axes)
            for (double gap : {0.0, 0.5, 0.9}) {
                probes.push_back(0.5 * (gap * Matrix::Identity(2, 2) +
                                        u.x() * pauli_x() + u.y() * pauli_y() +
                                        u.z() * pauli_z()));
                probes.push_back(-probes.back());
            }
    }
    Rng rng(seed);
    for (int i = 0; i < n_samples; ++i) {
        HermitianOperator x(random_hermitian(rng, dim));
        auto dec = hermitian_to_helstrom(x);
        probes.push_back(dec.ensemble.delta());
    }
    return probes;
}

}  // namespace detail

// Trace-norm growth of Helstrom matrices under each one-step intermediate
// map; positive growth witnesses a non-positive map.
inline WitnessSeries check_p_contraction(const PropagatorTable& table,
                                         int n_samples = 24, std::uint64_t seed = 1) {
    if (n_samples < 1) throw DomainError("check_p_contraction: need n_samples >= 1");
    WitnessSeries out;
    const auto probes = detail::contraction_probes(table.dim, n_samples, seed);
    out.values.reserve(table.size() - 1);
    for (std::size_t k = 0; k + 1 < table.size(); ++k) {
        if (!table.invertible[k]) {
            out.values.push_back(std::numeric_limits<double>::quiet_NaN());
            out.undefined_intervals.emplace_back(table.times[k], table.times[k + 1]);
            continue;
        }
        Superoperator step = intermediate_map(table, table.times[k], table.times[k + 1]);
        double growth = -std::numeric_limits<double>::infinity();
        for (const Matrix& x : probes)
            growth = std::max(growth, trace_norm(hermitize(step.apply(x))) - 1.0);
        out.values.push_back(growth);
    }
    return out;
}

struct DivisibilityOptions {
    int n_bases = 200;
    int n_samples = 24;
    std::uint64_t seed = 1;
};

// Rate conditions, map-level witnesses and the two verdicts in one record.
struct DivisibilityReport {
    std::vector<double> times;
    std::vector<double> cp_rate_margin;
    std::vector<double> p_rate_margin;
    bool p_margin_exact = false;
    double worst_cp_rate_margin = 0.0;
    double worst_p_rate_margin = 0.0;
    std::vector<double> interval_choi_min;            // NaN where undefined
    std::vector<double> interval_contraction_growth;  // NaN where undefined
    std::vector<std::pair<double, double>> undefined_intervals;
    bool verdict_cp = false;  // from the rate conditions
    bool verdict_p = false;
    bool witness_cp = false;  // from the map-level witnesses
    bool witness_p = false;
};

inline DivisibilityReport divisibility_report(const GeneratorSpec& spec,
                                              const PropagatorTable& table,
                                              const DivisibilityOptions& opts = {}) {
    DivisibilityReport rep;
    rep.times = table.times;
    rep.cp_rate_margin = check_cp_rates(spec, table.times);
    auto p = check_p_rates(spec, table.times, opts.n_bases, opts.seed);
    rep.p_rate_margin = std::move(p.margins);
    rep.p_margin_exact = p.exact;
    rep.worst_cp_rate_margin =
        *std::min_element(rep.cp_rate_margin.begin(), rep.cp_rate_margin.end());
    rep.worst_p_rate_margin =
        *std::min_element(rep.p_rate_margin.begin(), rep.p_rate_margin.end());
    rep.verdict_cp = rep.worst_cp_rate_margin >= -tol().rate_margin;
    rep.verdict_p = rep.worst_p_rate_margin >= -tol().rate_margin;

    WitnessSeries choi_series = check_cp_choi(table);
    WitnessSeries contraction_series =
        check_p_contraction(table, opts.n_samples, opts.seed);
    rep.interval_choi_min = std::move(choi_series.values);
    rep.interval_contraction_growth = std::move(contraction_series.values);
    rep.undefined_intervals = std::move(choi_series.undefined_intervals);

    rep.witness_cp = true;
    for (double v : rep.interval_choi_min)
        if (!std::isnan(v) && v < -tol().choi_positivity) rep.witness_cp = false;
    rep.witness_p = true;
    for (double v : rep.interval_contraction_growth)
        if (!std::isnan(v) && v > tol().contraction_growth) rep.witness_p = false;
    return rep;
}

}  // namespace hflow
