// Command-line front end: simulate a time-local master equation, decide
// P-/CP-divisibility, evaluate the generalized trace-distance measure, and
// extract the derived classical jump process.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hflow/config.hpp"

namespace fs = std::filesystem;
using namespace hflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct OutputDir {
    fs::path dir;
    Json files = Json::array();

    explicit OutputDir(const std::string& path) : dir(path) {
        fs::create_directories(dir);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        out << content;
        files.push_back(name);
    }

    void write_report(const std::string& command, const Json& config_echo,
                      std::uint64_t seed, Json summary) {
        Json report{{"command", command},
                    {"config_hash", config_hash(config_echo)},
                    {"seed", seed},
                    {"summary", std::move(summary)},
                    {"files", files}};
        std::ofstream out(dir / "report.json", std::ios::binary);
        out << report.dump(2) << '\n';
    }
};

ProcessConfig load_config(const std::string& path, std::optional<double> dt_override,
                          std::optional<std::uint64_t> seed_override,
                          std::optional<Eigen::Vector3d> bloch_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json doc;
    try {
        in >> doc;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ProcessConfig cfg = parse_process_config(doc);
    if (dt_override) cfg.dt = *dt_override;
    if (seed_override) cfg.seed = *seed_override;
    if (bloch_override) {
        if (cfg.spec.dim() != 2)
            throw ConfigError("--bloch requires a qubit configuration");
        cfg.initial_state = density_from_bloch(*bloch_override);
    }
    return cfg;
}

DensityMatrix default_initial_state(Index dim) {
    // deterministic nondegenerate spectrum, p_i proportional to dim - i
    Matrix rho = Matrix::Zero(dim, dim);
    const double norm = dim * (dim + 1) / 2.0;
    for (Index i = 0; i < dim; ++i)
        rho(i, i) = static_cast<double>(dim - i) / norm;
    return DensityMatrix(rho);
}

int cmd_simulate(const ProcessConfig& cfg, OutputDir& out, const std::string& echo) {
    PropagatorTable table = integrate(cfg.spec, cfg.total_time, cfg.dt);
    DensityMatrix rho0 =
        cfg.initial_state ? *cfg.initial_state : default_initial_state(cfg.spec.dim());
    out.write("simulate.csv", simulate_csv(table, rho0));
    out.write_report(echo, cfg.echo, cfg.seed,
                     Json{{"grid_points", table.size()},
                          {"T", cfg.total_time},
                          {"dt", cfg.dt}});
    return kExitOk;
}

int cmd_divisibility(const ProcessConfig& cfg, OutputDir& out, const std::string& echo) {
    PropagatorTable table = integrate(cfg.spec, cfg.total_time, cfg.dt);
    DivisibilityOptions opts;
    opts.seed = cfg.seed;
    DivisibilityReport rep = divisibility_report(cfg.spec, table, opts);
    if (rep.undefined_intervals.size() == table.size() - 1)
        throw NumericalError("divisibility is undefined on every interval");
    out.write("divisibility.json", to_json(rep).dump(2) + "\n");
    out.write_report(echo, cfg.echo, cfg.seed,
                     Json{{"verdict_cp", rep.verdict_cp},
                          {"verdict_p", rep.verdict_p},
                          {"witness_cp", rep.witness_cp},
                          {"witness_p", rep.witness_p}});
    return kExitOk;
}

int cmd_measure(const ProcessConfig& cfg, OutputDir& out, const std::string& echo,
                const std::string& method, int grid) {
    PropagatorTable table = integrate(cfg.spec, cfg.total_time, cfg.dt);
    MeasureScanParams params = MeasureScanParams::from_grid(grid);
    params.seed = cfg.seed;
    MeasureResult res = method == "local"
                            ? measure_local(table,
                                            EnclosingSurface::default_sphere(table.dim),
                                            params)
                            : measure_orthogonal_scan(table, params);
    out.write("measure.json", to_json(res).dump(2) + "\n");
    out.write("trajectory.csv",
              trajectory_csv(trace_norm_trajectory(table, res.optimizer)));
    out.write_report(echo, cfg.echo, cfg.seed,
                     Json{{"measure", res.value},
                          {"method", method},
                          {"lower_bound_only", res.lower_bound_only}});
    return kExitOk;
}

int cmd_classical(const ProcessConfig& cfg, OutputDir& out, const std::string& echo) {
    PropagatorTable table = integrate(cfg.spec, cfg.total_time, cfg.dt);
    DensityMatrix rho0 =
        cfg.initial_state ? *cfg.initial_state : default_initial_state(cfg.spec.dim());
    SpectralTrajectory traj = spectral_track(table, rho0);
    ClassicalProcess process = classical_rates(cfg.spec, traj);
    auto populations = pauli_evolve(process, traj.eigenvalues.front());
    double consistency = 0.0;
    for (std::size_t k = 0; k < populations.size(); ++k)
        consistency = std::max(
            consistency, (populations[k] - traj.eigenvalues[k]).cwiseAbs().maxCoeff());

    out.write("classical.csv", classical_csv(traj, process));
    Json rates = Json::array();
    for (std::size_t k = 0; k < process.times.size(); ++k) {
        Json w = Json::array();
        for (Index m = 0; m < process.rates[k].rows(); ++m)
            for (Index n = 0; n < process.rates[k].cols(); ++n)
                w.push_back(process.rates[k](m, n));
        rates.push_back(Json{{"t", process.times[k]}, {"W", std::move(w)}});
    }
    out.write("rates.json",
              Json{{"rates", std::move(rates)},
                   {"min_offdiagonal", process.min_offdiagonal},
                   {"pauli_consistency_sup", consistency}}
                      .dump(2) +
                  "\n");
    out.write_report(echo, cfg.echo, cfg.seed,
                     Json{{"min_offdiagonal", process.min_offdiagonal},
                          {"pauli_consistency_sup", consistency}});
    return kExitOk;
}

int cmd_demo(const std::string& name, OutputDir& out, const std::string& echo,
             std::optional<double> dt_override, int grid) {
    const double dt = dt_override.value_or(1e-3);
    MeasureScanParams scan = MeasureScanParams::from_grid(grid);
    Json config_echo{{"demo", name}, {"dt", dt}, {"grid", grid}};

    if (name == "translation") {
        TranslationDemoParams params;
        TranslationDemoReport rep = run_translation_demo(params, dt, scan);
        out.write("translation.json", to_json(rep).dump(2) + "\n");
        PropagatorTable table = integrate(params.make_generator(), params.big_t, dt);
        out.write("trajectory.csv",
                  trajectory_csv(trace_norm_trajectory(table, rep.scan.optimizer)));
        out.write_report(echo, config_echo, 1,
                         Json{{"measure_numeric", rep.measure_numeric},
                              {"measure_analytic", rep.measure_analytic}});
        return kExitOk;
    }
    if (name == "eternal") {
        EternalDemoReport rep = run_eternal_demo(3.0, dt, scan);
        out.write("eternal.json", to_json(rep).dump(2) + "\n");
        out.write("divisibility.json", to_json(rep.divisibility).dump(2) + "\n");
        out.write_report(echo, config_echo, 1,
                         Json{{"verdict_cp", rep.verdict_cp},
                              {"verdict_p", rep.verdict_p},
                              {"measure_orthogonal", rep.measure_orthogonal},
                              {"measure_local", rep.measure_local}});
        return kExitOk;
    }
    if (name == "dilation") {
        DilationDemoParams params;
        if (dt_override) params.dt = *dt_override;
        DilationDemoReport rep = run_dilation_demo(params);
        out.write("dilation.json", to_json(rep).dump(2) + "\n");
        out.write("dilation.csv", dilation_csv(rep));
        out.write_report(echo, config_echo, 1,
                         Json{{"conservation_residual", rep.conservation_residual},
                              {"external_at_start", rep.external_at_start}});
        return kExitOk;
    }
    throw ConfigError("unknown demo '" + name + "' (translation|eternal|dilation)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-local master equations, divisibility, and the generalized "
                 "trace-distance measure of non-Markovianity"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", method = "orthogonal", bloch_arg, demo_name;
    std::optional<double> dt_override;
    std::optional<std::uint64_t> seed_override;
    int grid = 24;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "config JSON path")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--dt-override", dt_override, "override the grid step");
        cmd->add_option("--seed", seed_override, "override the sampling seed");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "integrate and dump the state");
    add_common(simulate, true);
    simulate->add_option("--bloch", bloch_arg, "initial Bloch vector x,y,z");

    CLI::App* divisibility =
        app.add_subcommand("divisibility", "rate conditions and map-level witnesses");
    add_common(divisibility, true);

    CLI::App* measure = app.add_subcommand("measure", "generalized measure optimizer");
    add_common(measure, true);
    measure->add_option("--method", method, "orthogonal|local")
        ->check(CLI::IsMember({"orthogonal", "local"}));
    measure->add_option("--grid", grid, "scan resolution");

    CLI::App* classical =
        app.add_subcommand("classical", "derived classical jump process");
    add_common(classical, true);
    classical->add_option("--bloch", bloch_arg, "initial Bloch vector x,y,z");

    CLI::App* demo = app.add_subcommand("demo", "built-in scenario reproductions");
    demo->add_option("name", demo_name, "translation|eternal|dilation")->required();
    add_common(demo, false);
    demo->add_option("--grid", grid, "scan resolution");

    CLI11_PARSE(app, argc, argv);

    std::string echo;
    for (int i = 0; i < argc; ++i) {
        if (i) echo += ' ';
        echo += argv[i];
    }

    try {
        std::optional<Eigen::Vector3d> bloch_override;
        if (!bloch_arg.empty()) {
            Eigen::Vector3d v;
            if (std::sscanf(bloch_arg.c_str(), "%lf,%lf,%lf", &v.x(), &v.y(), &v.z()) !=
                3)
                throw ConfigError("--bloch expects three comma-separated numbers");
            bloch_override = v;
        }

        OutputDir out(out_dir);
        if (demo->parsed()) return cmd_demo(demo_name, out, echo, dt_override, grid);

        ProcessConfig cfg =
            load_config(config_path, dt_override, seed_override, bloch_override);
        if (simulate->parsed()) return cmd_simulate(cfg, out, echo);
        if (divisibility->parsed()) return cmd_divisibility(cfg, out, echo);
        if (measure->parsed()) return cmd_measure(cfg, out, echo, method, grid);
        if (classical->parsed()) return cmd_classical(cfg, out, echo);
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
