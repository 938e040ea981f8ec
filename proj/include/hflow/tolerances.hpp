#pragma once

namespace hflow {

// All numerical thresholds used across the library, in one record.
// Values are defaults; construct a custom record and pass it explicitly
// where a function accepts one.
struct Tolerances {
    // Operator algebra
    double hermitian_symmetry = 1e-12;    // max |X - X^dag| entrywise
    double unit_trace = 1e-10;            // |Tr rho - 1|
    double psd_floor = 1e-10;             // eigenvalues >= -psd_floor
    double probability_norm = 1e-12;      // |p1 + p2 - 1|
    double support_orthogonality = 1e-9;  // max |S Q| entrywise
    double split_reconstruction = 1e-12;  // |S - Q - X|
    double helstrom_round_trip = 1e-10;   // |lambda*Delta - X|
    double zero_eigenvalue = 1e-12;       // spectral split near zero
    double zero_operator = 1e-14;         // trace norm below which X ~ 0
    double bound_slack = 1e-10;           // slack on the Helstrom bounds
    double oracle_match = 1e-9;           // brute force vs closed form

    // Propagation
    double trace_preservation = 1e-8;     // trace functional fixed point
    double choi_positivity = 1e-7;        // min Choi eigenvalue >= -this
    double inversion_sv_ratio = 1e-10;    // smallest/largest singular value
    double composition_residual = 1e-7;   // |Phi_{t,s} Phi_s - Phi_t|
    double grid_snap = 1e-9;              // |t - k*dt| for on-grid queries
    double evolve_trace = 1e-8;           // trace of an evolved state

    // Divisibility
    double rate_margin = 1e-12;           // rate conditions >= -this
    double contraction_growth = 1e-7;     // trace-norm growth <= this

    // Measure
    double derivative_threshold = 1e-9;   // sigma > this counts as increase
    double surface_membership = 1e-9;     // | ||rho2-rho1||_1 - eps |
    double interior_min_eigenvalue = 0.05;  // surface center interiority

    // Classical bridge
    double degeneracy_gap = 1e-10;        // |p_m - p_n| flags degeneracy
    double basis_orthonormality = 1e-10;  // frame orthonormality defect
    double stochasticity = 1e-7;          // column sums / entry positivity
    double rate_positivity = 1e-9;        // off-diagonal W >= -this
    double image_membership = 1e-9;       // origin-in-ellipsoid decision
};

inline const Tolerances& tol() {
    static const Tolerances defaults{};
    return defaults;
}

}  // namespace hflow
