// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hflow/classical.hpp"
#include "hflow/config.hpp"
#include "hflow/divisibility.hpp"
#include "hflow/measure.hpp"
#include "hflow/random.hpp"
#include "hflow/scenarios.hpp"

using namespace hflow;

namespace {

int g_failures = 0;

struct Criterion {
    int id;
    std::string label;
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }

    void finish(double seconds) {
        std::printf("%s criterion %2d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id,
                    label.c_str(), seconds);
        for (const auto& n : notes) std::printf("      - %s\n", n.c_str());
        if (!pass) ++g_failures;
    }
};

void run(int id, const std::string& label, const std::function<void(Criterion&)>& body) {
    Criterion c{id, label};
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.finish(seconds);
}

std::string fmt(double x) { return format_double(x); }

}  // namespace

int main() {
    const double dt = 1e-3;
    const TranslationDemoParams translation_params;  // gamma0=ln2, t1=1, b0=0.3, T=2
    PropagatorTable translation_table =
        integrate(translation_params.make_generator(), translation_params.big_t, dt);

    // 1. translation-demo measure, optimizer, unbiased blindness, runtime
    run(1, "translation-demo orthogonal scan", [&](Criterion& c) {
        const auto start = std::chrono::steady_clock::now();
        MeasureScanParams scan;  // default 24 x 48 x 40 grid with refinement
        MeasureResult res = measure_orthogonal_scan(translation_table, scan);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();

        c.require(std::abs(res.value - 0.150) / 0.150 <= 0.02,
                  "measure " + fmt(res.value) + " not within 2% of 0.150");
        const double gap = res.optimizer.p1() - res.optimizer.p2();
        c.require(std::abs(gap - 0.50) <= 0.02,
                  "optimizer weight gap " + fmt(gap) + " not within 0.02 of 0.50");
        const Eigen::Vector3d dir = bloch_of(res.optimizer.rho1().matrix()).normalized();
        const double angle = std::acos(std::clamp(dir.z(), -1.0, 1.0));
        c.require(angle <= 3.0 * M_PI / 180.0,
                  "optimizer direction " + fmt(angle * 180.0 / M_PI) +
                      " deg away from the z axis (limit 3)");
        const double unbiased = accumulate_increase(
            trace_norm_trajectory(translation_table, antipodal_ensemble({0, 0, 1}, 0.5)));
        c.require(unbiased <= 1e-6,
                  "unbiased accumulated increase " + fmt(unbiased) + " > 1e-6");
        c.require(elapsed < 60.0, "scan runtime " + fmt(elapsed) + " s >= 60 s");
    });

    // 2. eternal scenario: rate margins, interval Choi witness, measures, runtime
    run(2, "eternal scenario divisibility and measures", [&](Criterion& c) {
        const auto start = std::chrono::steady_clock::now();
        const GeneratorSpec spec = make_eternal_generator();
        PropagatorTable table = integrate(spec, 3.0, dt);

        auto cp_margins = check_cp_rates(spec, table.times);
        for (std::size_t k = 1; k < cp_margins.size(); ++k)
            if (cp_margins[k] >= 0.0) {
                c.require(false, "CP rate margin not negative at t = " +
                                     fmt(table.times[k]));
                break;
            }

        auto p_rates = check_p_rates(spec, table.times);
        double worst_p = *std::min_element(p_rates.margins.begin(),
                                           p_rates.margins.end());
        c.require(worst_p >= 0.0, "P rate margin " + fmt(worst_p) + " < 0");

        // dt-scaled negativity threshold for the one-step Choi witness
        const double choi_threshold = -1e-8 * (dt / 1e-3);
        auto choi_series = check_cp_choi(table);
        c.require(choi_series.undefined_intervals.empty(),
                  "unexpected undefined intervals");
        double worst_choi = 0.0;
        for (std::size_t k = 0; k < choi_series.values.size(); ++k) {
            if (!(choi_series.values[k] < choi_threshold)) {
                c.require(false, "interval Choi eigenvalue " +
                                     fmt(choi_series.values[k]) + " at t = " +
                                     fmt(table.times[k]) + " not below " +
                                     fmt(choi_threshold));
                break;
            }
            worst_choi = std::min(worst_choi, choi_series.values[k]);
        }

        MeasureScanParams scan;
        const double orth = measure_orthogonal_scan(table, scan).value;
        const double local =
            measure_local(table, EnclosingSurface::default_sphere(2), scan).value;
        c.require(orth <= 1e-6, "orthogonal-scan measure " + fmt(orth) + " > 1e-6");
        c.require(local <= 1e-6, "local measure " + fmt(local) + " > 1e-6");

        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        c.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s >= 30 s");
    });

    // 3. local representation equals orthogonal scan
    run(3, "local representation equals the orthogonal scan", [&](Criterion& c) {
        MeasureScanParams scan;
        const double orth = measure_orthogonal_scan(translation_table, scan).value;
        const double local = measure_local(translation_table,
                                           EnclosingSurface::default_sphere(2), scan)
                                 .value;
        c.require(std::abs(local - orth) <= 0.03 * orth,
                  "relative gap " + fmt(std::abs(local - orth) / orth) + " > 3%");

        MeasureScanParams fast;
        fast.refine = false;
        PropagatorTable eternal = integrate(make_eternal_generator(), 3.0, dt);
        PropagatorTable iso = integrate(make_isotropic_generator(std::log(2.0)), 2.0, dt);
        for (const PropagatorTable* t : {&eternal, &iso}) {
            c.require(measure_orthogonal_scan(*t, fast).value <= 1e-6,
                      "orthogonal scan not zero on a Markovian scenario");
            c.require(
                measure_local(*t, EnclosingSurface::default_sphere(2), fast).value <=
                    1e-6,
                "local measure not zero on a Markovian scenario");
        }
    });

    // 4. orthogonal optimum dominates 500 random non-orthogonal ensembles
    run(4, "orthogonality dominance over random ensembles", [&](Criterion& c) {
        MeasureScanParams scan;
        const double optimum = measure_orthogonal_scan(translation_table, scan).value;
        Rng rng(101);
        double worst = -1.0;
        for (int i = 0; i < 500; ++i) {
            const double p1 = rng.uniform();
            HelstromEnsemble e(p1, density_from_bloch(random_in_ball3(rng)), 1.0 - p1,
                               density_from_bloch(random_in_ball3(rng)));
            worst = std::max(worst, accumulate_increase(
                                        trace_norm_trajectory(translation_table, e)));
        }
        c.require(worst <= optimum + 1e-6,
                  "random ensemble increase " + fmt(worst) + " exceeds optimum " +
                      fmt(optimum));
    });

    // 5. discrimination oracle over 1000 random qubit ensembles
    run(5, "discrimination probability against the projection oracle",
        [&](Criterion& c) {
            Rng rng(103);
            for (int i = 0; i < 1000; ++i) {
                const double p1 = rng.uniform();
                HelstromEnsemble e(p1, density_from_bloch(random_in_ball3(rng)),
                                   1.0 - p1, density_from_bloch(random_in_ball3(rng)));
                const double closed = discrimination_success(e);
                const double brute = discrimination_success_bruteforce(e, 32);
                if (std::abs(closed - brute) > 1e-8) {
                    c.require(false, "oracle mismatch " + fmt(closed) + " vs " +
                                         fmt(brute));
                    break;
                }
                const double norm = trace_norm(e.delta());
                if (norm < std::abs(p1 - (1.0 - p1)) - 1e-10 || norm > 1.0 + 1e-10) {
                    c.require(false, "Helstrom bounds violated: " + fmt(norm));
                    break;
                }
            }
        });

    // 6. rate-condition verdicts equal map-level witness verdicts
    run(6, "concordance of rate conditions and map-level witnesses", [&](Criterion& c) {
        DivisibilityOptions opts;
        opts.n_samples = 16;

        struct Scenario {
            std::string name;
            GeneratorSpec spec;
            double total_time;
        };
        std::vector<Scenario> scenarios;
        scenarios.push_back({"isotropic", make_isotropic_generator(std::log(2.0)), 2.0});
        scenarios.push_back({"eternal", make_eternal_generator(), 3.0});
        scenarios.push_back(
            {"translation-demo", translation_params.make_generator(), 2.0});
        Rng rng(107);
        for (int i = 0; i < 50; ++i) {
            std::vector<Channel> channels;
            for (int j = 1; j <= 3; ++j)
                channels.push_back(
                    {RateFunction::constant(rng.uniform(0.0, 1.0)), pauli(j)});
            scenarios.push_back({"random-" + std::to_string(i),
                                 GeneratorSpec(2, Matrix::Zero(2, 2), channels), 0.5});
        }

        for (const auto& s : scenarios) {
            PropagatorTable table = integrate(s.spec, s.total_time, 1e-3);
            DivisibilityReport rep = divisibility_report(s.spec, table, opts);
            if (rep.verdict_cp != rep.witness_cp)
                c.require(false, s.name + ": CP rate verdict differs from Choi witness");
            if (rep.verdict_p != rep.witness_p)
                c.require(false,
                          s.name + ": P rate verdict differs from contraction witness");
            if (rep.verdict_cp && !rep.verdict_p)
                c.require(false, s.name + ": CP => P hierarchy violated");
        }
    });

    // 7. classical bridge: Pauli equation, rate positivity, Chapman-Kolmogorov
    run(7, "classical jump process consistency", [&](Criterion& c) {
        struct Scenario {
            std::string name;
            GeneratorSpec spec;
            double total_time;
            bool p_divisible;
        };
        const Scenario scenarios[] = {
            {"eternal", make_eternal_generator(), 2.0, true},
            {"isotropic", make_isotropic_generator(std::log(2.0)), 2.0, true},
            {"translation-demo", translation_params.make_generator(), 2.0, false},
        };
        Rng rng(109);
        for (const auto& s : scenarios) {
            PropagatorTable table = integrate(s.spec, s.total_time, 1e-3);
            // Pauli master equation matches the tracked eigenvalues
            for (const Eigen::Vector3d& v0 :
                 {Eigen::Vector3d(0, 0, 0.8), Eigen::Vector3d(0.4, 0.1, 0.2)}) {
                SpectralTrajectory traj = spectral_track(table, density_from_bloch(v0));
                ClassicalProcess process = classical_rates(s.spec, traj);
                auto populations = pauli_evolve(process, traj.eigenvalues.front());
                double sup = 0.0;
                for (std::size_t k = 0; k < populations.size(); ++k)
                    sup = std::max(sup, (populations[k] - traj.eigenvalues[k])
                                            .cwiseAbs()
                                            .maxCoeff());
                if (sup > 1e-4)
                    c.require(false, s.name + ": Pauli equation deviates by " + fmt(sup));
                const double ck = chapman_kolmogorov_check(process, 0.2, 0.9, 1.7);
                if (ck > 1e-6)
                    c.require(false, s.name + ": Chapman-Kolmogorov residual " + fmt(ck));
            }
            if (!s.p_divisible) continue;
            for (int i = 0; i < 20; ++i) {
                ClassicalProcess process = classical_rates(
                    s.spec,
                    spectral_track(table, density_from_bloch(random_in_ball3(rng))));
                if (process.min_offdiagonal < -1e-9) {
                    c.require(false, s.name + ": negative rate margin " +
                                         fmt(process.min_offdiagonal));
                    break;
                }
            }
        }
    });

    // 8. information-flow identity on the dilated dynamics
    run(8, "information flow conservation", [&](Criterion& c) {
        DilationDemoReport rep = run_dilation_demo(DilationDemoParams{});
        c.require(rep.conservation_residual <= 1e-8,
                  "conservation residual " + fmt(rep.conservation_residual) + " > 1e-8");
        c.require(rep.external_at_start <= 1e-10,
                  "external information at t=0 is " + fmt(rep.external_at_start));
    });

    // 9. image geometry of the translated Bloch ball
    run(9, "maximally mixed state in the image", [&](Criterion& c) {
        c.require(max_mixed_in_image(translation_table, 2.0),
                  "r=0.5, a=0.3: expected true");
        PropagatorTable tight = integrate(
            make_translation_demo_generator(std::log(10.0 / 3.0), 1.0, 0.45, 2.0), 2.0,
            1e-3);
        c.require(!max_mixed_in_image(tight, 2.0), "r=0.3, a=0.45: expected false");
    });

    // 10. RK4 order on the eternal closed form. Steps are chosen inside the
    // truncation-dominated regime; at dt ~ 1e-3 the deviation already sits at
    // the 1e-15 roundoff floor where halving cannot show the order.
    run(10, "integrator order check", [&](Criterion& c) {
        auto deviation = [](double step) {
            PropagatorTable table = integrate(make_eternal_generator(), 1.0, step);
            Eigen::Vector3d v = bloch_of(
                evolve_state(table, density_from_bloch({1, 0, 0}), 1.0).matrix());
            return std::abs(v.x() -
                            std::exp(-0.5 * (1.0 - std::log(std::cosh(1.0)))));
        };
        const double coarse = deviation(4e-2);
        const double fine = deviation(2e-2);
        c.require(coarse / fine >= 8.0, "error ratio " + fmt(coarse / fine) + " < 8");
    });

    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
