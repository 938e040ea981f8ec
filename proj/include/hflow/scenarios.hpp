#pragma once

#include <cmath>
#include <vector>

#include "hflow/divisibility.hpp"
#include "hflow/measure.hpp"

namespace hflow {

// Contraction-then-translation scenario parameters with the derived contracted
// radius r = exp(-gamma0 t1) and translation length a = b0 (T - t1).
struct TranslationDemoParams {
    double gamma0 = std::log(2.0);
    double t1 = 1.0;
    double b0 = 0.3;
    double big_t = 2.0;

    double contracted_radius() const { return std::exp(-gamma0 * t1); }
    double translation_length() const { return b0 * (big_t - t1); }

    GeneratorSpec make_generator() const {
        return make_translation_demo_generator(gamma0, t1, b0, big_t);
    }
};

// Trace norm of a weighted qubit pair from its Bloch data,
// (|d + |w|| + |d - |w||)/2 with d = p1 - p2 and w = p1 v1 - p2 v2.
inline double helstrom_norm_closed_form(const Eigen::Vector3d& w, double p1, double p2) {
    return qubit_trace_norm_parts(p1 - p2, w.norm());
}

struct TranslationDemoReport {
    MeasureResult scan;
    double contracted_radius = 0.0;
    double translation_length = 0.0;
    double measure_numeric = 0.0;
    double measure_analytic = 0.0;  // r * a
    double optimizer_weight_gap = 0.0;
    Eigen::Vector3d optimizer_direction{0, 0, 0};
    double unbiased_measure = 0.0;
    double suboptimal_gap = 0.0;
    double suboptimal_numeric = 0.0;
    double suboptimal_analytic = 0.0;
};

// Accumulated increase of the antipodal z-pair with weight gap d, from the
// exact norm change: the norm minimum is max(d, r) and the final norm is
// max(d, r + d a).
inline double translation_demo_increase_analytic(double r, double a, double d) {
    return std::max(0.0, r + d * a - std::max(d, r));
}

inline TranslationDemoReport run_translation_demo(const TranslationDemoParams& params,
                                                  double dt = 1e-3,
                                                  const MeasureScanParams& scan = {},
                                                  double suboptimal_gap = 0.3) {
    const PropagatorTable table = integrate(params.make_generator(), params.big_t, dt);
    TranslationDemoReport report{measure_orthogonal_scan(table, scan)};
    report.contracted_radius = params.contracted_radius();
    report.translation_length = params.translation_length();
    report.measure_analytic = report.contracted_radius * report.translation_length;
    report.measure_numeric = report.scan.value;
    report.optimizer_weight_gap = report.scan.optimizer.p1() - report.scan.optimizer.p2();
    report.optimizer_direction = bloch_of(report.scan.optimizer.rho1().matrix());

    report.unbiased_measure = accumulate_increase(
        trace_norm_trajectory(table, antipodal_ensemble({0, 0, 1}, 0.5)));

    report.suboptimal_gap = suboptimal_gap;
    report.suboptimal_numeric = accumulate_increase(trace_norm_trajectory(
        table, antipodal_ensemble({0, 0, 1}, 0.5 * (1.0 + suboptimal_gap))));
    report.suboptimal_analytic = translation_demo_increase_analytic(
        report.contracted_radius, report.translation_length, suboptimal_gap);
    return report;
}

struct EternalDemoReport {
    bool verdict_cp = true;
    bool verdict_p = false;
    double worst_cp_margin = 0.0;
    double worst_p_margin = 0.0;
    double max_cp_margin_after_start = 0.0;  // sup over t > 0; negative here
    double measure_orthogonal = 0.0;
    double measure_local = 0.0;
    DivisibilityReport divisibility;
};

inline EternalDemoReport run_eternal_demo(double total_time = 3.0, double dt = 1e-3,
                                          const MeasureScanParams& scan = {},
                                          const DivisibilityOptions& opts = {}) {
    if (total_time <= 0.0) throw DomainError("run_eternal_demo: need T > 0");
    const GeneratorSpec spec = make_eternal_generator();
    const PropagatorTable table = integrate(spec, total_time, dt);
    EternalDemoReport report;
    report.divisibility = divisibility_report(spec, table, opts);
    report.verdict_cp = report.divisibility.verdict_cp;
    report.verdict_p = report.divisibility.verdict_p;
    report.worst_cp_margin = report.divisibility.worst_cp_rate_margin;
    report.worst_p_margin = report.divisibility.worst_p_rate_margin;
    report.max_cp_margin_after_start = report.divisibility.cp_rate_margin[1];
    for (std::size_t k = 1; k < report.divisibility.cp_rate_margin.size(); ++k)
        report.max_cp_margin_after_start = std::max(report.max_cp_margin_after_start,
                                                    report.divisibility.cp_rate_margin[k]);
    report.measure_orthogonal = measure_orthogonal_scan(table, scan).value;
    report.measure_local =
        measure_local(table, EnclosingSurface::default_sphere(2), scan).value;
    return report;
}

// System-environment unitary dilation: exchange coupling between a system
// qubit and an environment qubit, computed by dense matrix exponential of the
// Hermitian Hamiltonian at every grid point.
struct DilationDemoParams {
    double coupling = 1.0;
    double total_time = 2.0 * M_PI;
    double dt = 1e-2;
    HelstromEnsemble system_pair = antipodal_ensemble({0, 0, 1}, 0.5);
    DensityMatrix environment = density_from_bloch({0, 0, 1});
};

struct DilationDemoReport {
    std::vector<double> times;
    std::vector<double> internal_information;  // distinguishability on the system
    std::vector<double> external_information;  // remainder on system + environment
    double initial_information = 0.0;
    double conservation_residual = 0.0;  // max |I_int + I_ext - I_int(0)|
    double external_at_start = 0.0;
    double min_information = 0.0;  // most negative value encountered
};

namespace detail {

inline Matrix partial_trace_environment(const Matrix& joint) {
    Matrix out = Matrix::Zero(2, 2);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            for (Index e = 0; e < 2; ++e) out(i, j) += joint(2 * i + e, 2 * j + e);
    return out;
}

}  // namespace detail

inline DilationDemoReport run_dilation_demo(const DilationDemoParams& params) {
    if (params.system_pair.dim() != 2 || params.environment.dim() != 2)
        throw UnsupportedDimensionError("run_dilation_demo: qubit pair model");
    const auto n_steps =
        static_cast<std::size_t>(std::llround(params.total_time / params.dt));

    Matrix h = params.coupling * (kron(sigma_plus(), sigma_minus()) +
                                  kron(sigma_minus(), sigma_plus()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);

    const Matrix joint1 = kron(params.system_pair.rho1().matrix(),
                               params.environment.matrix());
    const Matrix joint2 = kron(params.system_pair.rho2().matrix(),
                               params.environment.matrix());
    const double p1 = params.system_pair.p1();
    const double p2 = params.system_pair.p2();

    DilationDemoReport report;
    report.times.reserve(n_steps + 1);
    report.internal_information.reserve(n_steps + 1);
    report.external_information.reserve(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * params.dt;
        Vector phases(4);
        for (Index i = 0; i < 4; ++i)
            phases(i) = std::exp(-imag_unit * es.eigenvalues()(i) * t);
        Matrix u = es.eigenvectors() * phases.asDiagonal() *
                   es.eigenvectors().adjoint();
        Matrix evolved1 = u * joint1 * u.adjoint();
        Matrix evolved2 = u * joint2 * u.adjoint();
        Matrix joint_diff = hermitize(p1 * evolved1 - p2 * evolved2);
        Matrix system_diff = hermitize(p1 * detail::partial_trace_environment(evolved1) -
                                       p2 * detail::partial_trace_environment(evolved2));
        const double internal = trace_norm(system_diff);
        const double total = trace_norm(joint_diff);
        report.times.push_back(t);
        report.internal_information.push_back(internal);
        report.external_information.push_back(total - internal);
    }

    report.initial_information = report.internal_information.front();
    report.external_at_start = report.external_information.front();
    report.conservation_residual = 0.0;
    report.min_information = 0.0;
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        const double sum =
            report.internal_information[k] + report.external_information[k];
        report.conservation_residual = std::max(
            report.conservation_residual, std::abs(sum - report.initial_information));
        report.min_information =
            std::min({report.min_information, report.internal_information[k],
                      report.external_information[k]});
    }
    return report;
}

}  // namespace hflow
