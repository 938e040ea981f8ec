#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "hflow/bloch.hpp"
#include "hflow/errors.hpp"
#include "hflow/operator_core.hpp"
#include "hflow/parallel.hpp"
#include "hflow/propagator.hpp"
#include "hflow/random.hpp"

namespace hflow {

// ||Phi_t(Delta)||_1 on the grid together with its finite-difference
// derivative (central; one-sided at the ends).
struct TraceNormTrajectory {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> sigma;
};

inline std::vector<double> finite_difference_derivative(const std::vector<double>& v,
                                                        double dt) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (v[1] - v[0]) / dt;
    d[n - 1] = (v[n - 1] - v[n - 2]) / dt;
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * dt);
    return d;
}

struct IncreaseBreakdown {
    double total = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // index ranges
};

// Sum of endpoint differences over maximal runs where the derivative exceeds
// the threshold; endpoint differencing telescopes exactly and is immune to
// derivative noise inside a run.
inline IncreaseBreakdown accumulated_increase_breakdown(const std::vector<double>& values,
                                                        double dt, double threshold) {
    IncreaseBreakdown out;
    const std::vector<double> sigma = finite_difference_derivative(values, dt);
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t k = 0; k <= sigma.size(); ++k) {
        const bool rising = k < sigma.size() && sigma[k] > threshold;
        if (rising && !in_run) {
            run_start = k;
            in_run = true;
        } else if (!rising && in_run) {
            out.runs.emplace_back(run_start, k - 1);
            out.total += values[k - 1] - values[run_start];
            in_run = false;
        }
    }
    return out;
}

inline TraceNormTrajectory trace_norm_trajectory(const PropagatorTable& table,
                                                 const HelstromEnsemble& ensemble) {
    if (ensemble.dim() != table.dim)
        throw DomainError("trace_norm_trajectory: dimension mismatch");
    TraceNormTrajectory traj;
    traj.times = table.times;
    traj.values.reserve(table.size());
    const Matrix delta = ensemble.delta();
    const Vector vec_delta = vectorize(delta);
    for (std::size_t k = 0; k < table.size(); ++k) {
        Matrix evolved = hermitize(unvectorize(table.maps[k].mat * vec_delta, table.dim));
        traj.values.push_back(trace_norm(evolved));
    }
    traj.sigma = finite_difference_derivative(traj.values, table.dt);
    return traj;
}

inline double accumulate_increase(const TraceNormTrajectory& traj,
                                  double threshold = tol().derivative_threshold) {
    if (traj.times.size() < 2) return 0.0;
    const double dt = traj.times[1] - traj.times[0];
    return accumulated_increase_breakdown(traj.values, dt, threshold).total;
}

// Affine Bloch representation of every tabulated qubit map, the fast path for
// the optimizer scans: Phi((c I + u.sigma)/2) = (c I + (M u + c s).sigma)/2.
struct BlochFlow {
    double dt = 0.0;
    std::vector<Eigen::Matrix3d> lin;
    std::vector<Eigen::Vector3d> shift;

    static BlochFlow from_table(const PropagatorTable& table) {
        if (table.dim != 2) throw UnsupportedDimensionError("BlochFlow: qubits only");
        BlochFlow flow;
        flow.dt = table.dt;
        flow.lin.reserve(table.size());
        flow.shift.reserve(table.size());
        for (const auto& s : table.maps) {
            Eigen::Matrix3d m;
            Eigen::Vector3d c;
            Matrix id_out = s.apply(Matrix::Identity(2, 2));
            for (int i = 0; i < 3; ++i)
                c(i) = 0.5 * (pauli(i + 1) * id_out).trace().real();
            for (int j = 0; j < 3; ++j) {
                Matrix p_out = s.apply(pauli(j + 1));
                for (int i = 0; i < 3; ++i)
                    m(i, j) = 0.5 * (pauli(i + 1) * p_out).trace().real();
            }
            flow.lin.push_back(m);
            flow.shift.push_back(c);
        }
        return flow;
    }

    // trace-norm values of Delta = (c I + u.sigma)/2 along the flow
    void values(double trace_part, const Eigen::Vector3d& u,
                std::vector<double>& out) const {
        out.resize(lin.size());
        for (std::size_t k = 0; k < lin.size(); ++k) {
            const double w = (lin[k] * u + trace_part * shift[k]).norm();
            out[k] = qubit_trace_norm_parts(trace_part, w);
        }
    }
};

enum class MeasureMethod { OrthogonalScan, LocalRepresentation };

struct MeasureResult {
    double value = 0.0;
    HelstromEnsemble optimizer;
    std::vector<std::pair<double, double>> increasing_intervals;
    MeasureMethod method = MeasureMethod::OrthogonalScan;
    bool lower_bound_only = false;  // sampled optimizer (dim > 2)
};

struct MeasureScanParams {
    int n_theta = 24;
    int n_phi = 48;
    int n_weight = 40;
    bool refine = true;
    int restarts = 2000;  // dim > 2 sampling
    std::uint64_t seed = 1;

    static MeasureScanParams from_grid(int n_grid, bool refine = true) {
        MeasureScanParams p;
        p.n_theta = std::max(4, n_grid);
        p.n_phi = 2 * p.n_theta;
        p.n_weight = std::max(8, (5 * n_grid) / 3);
        p.refine = refine;
        return p;
    }
};

namespace detail {

inline double golden_section_max(const std::function<double(double)>& f, double lo,
                                 double hi, int iters, double* arg_out) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    const double x = f1 > f2 ? x1 : x2;
    if (arg_out) *arg_out = x;
    return std::max(f1, f2);
}

inline Eigen::Vector3d direction(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta)};
}

struct QubitScanResult {
    double value = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    double weight = 0.5;
};

// Exhaustive (theta, phi, weight) grid with deterministic argmax, optionally
// polished by per-coordinate golden sections around the best grid point.
template <typename Objective>
QubitScanResult qubit_scan(const MeasureScanParams& params, Objective&& objective) {
    const int nt = params.n_theta, np = params.n_phi, nw = params.n_weight;
    const std::size_t n_cand = static_cast<std::size_t>(nt) * np * nw;
    std::vector<double> scores(n_cand);
    parallel_for(n_cand, [&](std::size_t idx) {
        thread_local std::vector<double> scratch;
        const int l = static_cast<int>(idx % nw);
        const int j = static_cast<int>((idx / nw) % np);
        const int i = static_cast<int>(idx / (static_cast<std::size_t>(nw) * np));
        scores[idx] = objective(M_PI * i / (nt - 1), 2.0 * M_PI * j / np,
                                0.5 + 0.5 * l / nw, scratch);
    });
    std::size_t best = 0;
    for (std::size_t idx = 1; idx < n_cand; ++idx)
        if (scores[idx] > scores[best]) best = idx;

    QubitScanResult out;
    out.theta = M_PI *
                static_cast<double>(best / (static_cast<std::size_t>(nw) * np)) /
                (nt - 1);
    out.phi = 2.0 * M_PI * static_cast<double>((best / nw) % np) / np;
    out.weight = 0.5 + 0.5 * static_cast<double>(best % nw) / nw;
    out.value = scores[best];

    if (params.refine) {
        std::vector<double> scratch;
        const double d_theta = M_PI / (nt - 1);
        const double d_phi = 2.0 * M_PI / np;
        const double d_weight = 0.5 / nw;
        for (int sweep = 0; sweep < 2; ++sweep) {
            out.value = golden_section_max(
                [&](double x) { return objective(x, out.phi, out.weight, scratch); },
                std::max(0.0, out.theta - d_theta), std::min(M_PI, out.theta + d_theta),
                40, &out.theta);
            out.value = golden_section_max(
                [&](double x) { return objective(out.theta, x, out.weight, scratch); },
                out.phi - d_phi, out.phi + d_phi, 40, &out.phi);
            out.value = golden_section_max(
                [&](double x) { return objective(out.theta, out.phi, x, scratch); },
                std::max(0.5, out.weight - d_weight),
                std::min(1.0 - 1e-9, out.weight + d_weight), 40, &out.weight);
        }
    }
    return out;
}

}  // namespace detail

// Maximal accumulated increase over orthogonal ensembles. Qubits: exhaustive
// antipodal (theta, phi) x weight grid with optional golden-section polish.
// dim > 2: restarted sampling over Haar-random orthogonal pure pairs with a
// weight line search; only a lower bound on the measure.
inline MeasureResult measure_orthogonal_scan(const PropagatorTable& table,
                                             const MeasureScanParams& params = {}) {
    const double sigma_tol = tol().derivative_threshold;

    if (table.dim == 2) {
        const BlochFlow flow = BlochFlow::from_table(table);
        auto best = detail::qubit_scan(
            params, [&flow, sigma_tol](double theta, double phi, double p,
                                       std::vector<double>& scratch) {
                flow.values(2.0 * p - 1.0, detail::direction(theta, phi), scratch);
                return accumulated_increase_breakdown(scratch, flow.dt, sigma_tol).total;
            });

        HelstromEnsemble optimizer =
            antipodal_ensemble(detail::direction(best.theta, best.phi), best.weight);
        TraceNormTrajectory traj = trace_norm_trajectory(table, optimizer);
        auto breakdown = accumulated_increase_breakdown(traj.values, table.dt, sigma_tol);
        MeasureResult result{best.value, optimizer, {}, MeasureMethod::OrthogonalScan,
                             false};
        for (auto [i0, i1] : breakdown.runs)
            result.increasing_intervals.emplace_back(traj.times[i0], traj.times[i1]);
        return result;
    }

    // dim > 2: sampled orthogonal pure pairs, reported as a lower bound
    const Index d = table.dim;
    Rng rng(params.seed);
    double best_value = -1.0;
    Vector best_psi1, best_psi2;
    double best_p = 0.5;
    std::vector<double> vals(table.size());
    for (int trial = 0; trial < params.restarts; ++trial) {
        Vector psi1 = random_pure(rng, d);
        Vector psi2 = random_pure(rng, d);
        psi2 -= psi1 * (psi1.adjoint() * psi2)(0, 0);
        if (psi2.norm() < 1e-8) continue;
        psi2.normalize();
        const Matrix rho1 = psi1 * psi1.adjoint();
        const Matrix rho2 = psi2 * psi2.adjoint();
        std::vector<Matrix> path1(table.size()), path2(table.size());
        for (std::size_t k = 0; k < table.size(); ++k) {
            path1[k] = hermitize(table.maps[k].apply(rho1));
            path2[k] = hermitize(table.maps[k].apply(rho2));
        }
        for (int l = 0; l < params.n_weight; ++l) {
            const double p = 0.5 + 0.5 * l / params.n_weight;
            for (std::size_t k = 0; k < table.size(); ++k)
                vals[k] = trace_norm(hermitize(p * path1[k] - (1.0 - p) * path2[k]));
            const double v =
                accumulated_increase_breakdown(vals, table.dt, sigma_tol).total;
            if (v > best_value) {
                best_value = v;
                best_psi1 = psi1;
                best_psi2 = psi2;
                best_p = p;
            }
        }
    }
    HelstromEnsemble optimizer(best_p, DensityMatrix::pure(best_psi1), 1.0 - best_p,
                               DensityMatrix::pure(best_psi2));
    TraceNormTrajectory traj = trace_norm_trajectory(table, optimizer);
    auto breakdown = accumulated_increase_breakdown(traj.values, table.dt, sigma_tol);
    MeasureResult result{std::max(best_value, 0.0), optimizer, {},
                         MeasureMethod::OrthogonalScan, true};
    for (auto [i0, i1] : breakdown.runs)
        result.increasing_intervals.emplace_back(traj.times[i0], traj.times[i1]);
    return result;
}

// Trace-norm sphere around an interior state: every traceless Hermitian
// direction exits through it exactly once.
class EnclosingSurface {
  public:
    EnclosingSurface(DensityMatrix center, double radius, const Tolerances& t = tol())
        : center_(std::move(center)), radius_(radius) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(center_.matrix(), Eigen::EigenvaluesOnly);
        min_eigenvalue_ = es.eigenvalues().minCoeff();
        if (min_eigenvalue_ < t.interior_min_eigenvalue)
            throw DomainError("EnclosingSurface: center must be an interior state");
        if (radius_ <= 0.0 || radius_ >= 2.0 * min_eigenvalue_)
            throw DomainError(
                "EnclosingSurface: radius must lie in (0, 2 min eigenvalue) so the "
                "sphere stays inside the state space");
    }

    static EnclosingSurface default_sphere(Index dim) {
        const double eps = std::min(0.5, 1.8 / static_cast<double>(dim));
        return EnclosingSurface(DensityMatrix::maximally_mixed(dim), eps);
    }

    const DensityMatrix& center() const { return center_; }
    double radius() const { return radius_; }
    double center_min_eigenvalue() const { return min_eigenvalue_; }

    bool contains(const DensityMatrix& rho, const Tolerances& t = tol()) const {
        return std::abs(trace_norm(hermitize(rho.matrix() - center_.matrix())) -
                        radius_) <= t.surface_membership;
    }

  private:
    DensityMatrix center_;
    double radius_;
    double min_eigenvalue_ = 0.0;
};

// sgn with sgn(0) = -1.
inline double sign_nonpositive_negative(double x) { return x <= 0.0 ? -1.0 : 1.0; }

// Trace with roundoff snapped to exact zero, so the sgn(0) = -1 branch is
// taken reliably for traceless operators.
inline double effective_trace(const Matrix& x) {
    const double t = x.trace().real();
    return std::abs(t) <= 1e-12 * std::max(1.0, max_abs(x)) ? 0.0 : t;
}

// Maps indefinite X to the traceless direction sgn(Tr X)[(Tr X) rho - X];
// acts as the identity on traceless operators.
inline Matrix to_traceless_direction(const DensityMatrix& center,
                                     const HermitianOperator& x) {
    const double trace_x = effective_trace(x.matrix());
    return sign_nonpositive_negative(trace_x) *
           (trace_x * center.matrix() - x.matrix());
}

struct SurfacePoint {
    double scale;         // lambda > 0 with lambda |Tr X| < 1
    double weight_plus;   // (1 + lambda |Tr X|)/2, weight of the center
    double weight_minus;  // (1 - lambda |Tr X|)/2, weight of the surface state
    DensityMatrix state;  // rho2 on the surface
};

// Surface state and weights realizing p+ rho1 - p- rho2 = sgn(Tr X) lambda X
// for an indefinite direction X.
inline SurfacePoint enclosing_surface_point(const EnclosingSurface& surface,
                                            const HermitianOperator& x,
                                            const Tolerances& t = tol()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix(), Eigen::EigenvaluesOnly);
    const bool indefinite = es.eigenvalues().minCoeff() < -t.zero_eigenvalue &&
                            es.eigenvalues().maxCoeff() > t.zero_eigenvalue;
    if (!indefinite)
        throw DomainError("enclosing_surface_point: operator must be indefinite");

    const double trace_x = effective_trace(x.matrix());
    const double sgn = sign_nonpositive_negative(trace_x);
    const Matrix y = to_traceless_direction(surface.center(), x);
    const double mu = surface.radius() / (2.0 * trace_norm(hermitize(y)));
    const double lambda = mu / (1.0 + mu * std::abs(trace_x));
    const double w_plus = 0.5 * (1.0 + lambda * std::abs(trace_x));
    const double w_minus = 0.5 * (1.0 - lambda * std::abs(trace_x));
    Matrix rho2 =
        (w_plus * surface.center().matrix() - sgn * lambda * x.matrix()) / w_minus;
    return {lambda, w_plus, w_minus, DensityMatrix(hermitize(rho2))};
}

// Local representation: maximize the accumulated increase of the trace norm,
// rescaled by the initial distinguishability, over weights and surface states
// around a fixed interior center.
inline MeasureResult measure_local(const PropagatorTable& table,
                                   const EnclosingSurface& surface,
                                   const MeasureScanParams& params = {}) {
    if (surface.center().dim() != table.dim)
        throw DomainError("measure_local: dimension mismatch");
    const double sigma_tol = tol().derivative_threshold;

    if (table.dim == 2) {
        const BlochFlow flow = BlochFlow::from_table(table);
        const Eigen::Vector3d center = bloch_of(surface.center().matrix());
        const double eps = surface.radius();
        auto best = detail::qubit_scan(
            params, [&](double theta, double phi, double p,
                        std::vector<double>& scratch) {
                const double c = 2.0 * p - 1.0;
                const Eigen::Vector3d u =
                    c * center - (1.0 - p) * eps * detail::direction(theta, phi);
                flow.values(c, u, scratch);
                const double initial = scratch.front();
                return initial > 0.0
                           ? accumulated_increase_breakdown(scratch, flow.dt, sigma_tol)
                                     .total /
                                 initial
                           : 0.0;
            });

        const Eigen::Vector3d v2 =
            center + eps * detail::direction(best.theta, best.phi);
        HelstromEnsemble optimizer(best.weight, surface.center(), 1.0 - best.weight,
                                   density_from_bloch(v2));
        TraceNormTrajectory traj = trace_norm_trajectory(table, optimizer);
        auto breakdown = accumulated_increase_breakdown(traj.values, table.dt, sigma_tol);
        MeasureResult result{best.value, optimizer, {},
                             MeasureMethod::LocalRepresentation, false};
        for (auto [i0, i1] : breakdown.runs)
            result.increasing_intervals.emplace_back(traj.times[i0], traj.times[i1]);
        return result;
    }

    // dim > 2: sampled traceless directions to the surface, lower bound only
    const Index d = table.dim;
    Rng rng(params.seed);
    double best_value = -1.0;
    Matrix best_rho2;
    double best_p = 0.5;
    std::vector<double> vals(table.size());
    for (int trial = 0; trial < params.restarts; ++trial) {
        Matrix y = random_traceless_hermitian(rng, d);
        const double mu = surface.radius() / (2.0 * trace_norm(hermitize(y)));
        Matrix rho2 = surface.center().matrix() + 2.0 * mu * y;
        std::vector<Matrix> path1(table.size()), path2(table.size());
        for (std::size_t k = 0; k < table.size(); ++k) {
            path1[k] = hermitize(table.maps[k].apply(surface.center().matrix()));
            path2[k] = hermitize(table.maps[k].apply(rho2));
        }
        for (int l = 0; l < params.n_weight; ++l) {
            const double p = 0.5 + 0.5 * l / params.n_weight;
            for (std::size_t k = 0; k < table.size(); ++k)
                vals[k] = trace_norm(hermitize(p * path1[k] - (1.0 - p) * path2[k]));
            if (vals.front() <= 0.0) continue;
            const double v =
                accumulated_increase_breakdown(vals, table.dt, sigma_tol).total /
                vals.front();
            if (v > best_value) {
                best_value = v;
                best_rho2 = rho2;
                best_p = p;
            }
        }
    }
    HelstromEnsemble optimizer(best_p, surface.center(), 1.0 - best_p,
                               DensityMatrix(best_rho2));
    TraceNormTrajectory traj = trace_norm_trajectory(table, optimizer);
    auto breakdown = accumulated_increase_breakdown(traj.values, table.dt, sigma_tol);
    MeasureResult result{std::max(best_value, 0.0), optimizer, {},
                         MeasureMethod::LocalRepresentation, true};
    for (auto [i0, i1] : breakdown.runs)
        result.increasing_intervals.emplace_back(traj.times[i0], traj.times[i1]);
    return result;
}

}  // namespace hflow
