#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "hflow/config.hpp"

using namespace hflow;
namespace fs = std::filesystem;

namespace {

Json minimal_qubit_config() {
    return Json{
        {"dim", 2},
        {"hamiltonian", matrix_to_json(Matrix::Zero(2, 2))},
        {"channels",
         Json::array({Json{{"operator", "sigma_z"},
                           {"rate", Json{{"type", "constant"}, {"value", 0.5}}}}})},
        {"time", Json{{"T", 0.5}, {"dt", 0.01}}},
        {"seed", 7}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse a minimal explicit config") {
    ProcessConfig cfg = parse_process_config(minimal_qubit_config());
    CHECK(cfg.spec.dim() == 2);
    CHECK(cfg.spec.channels().size() == 1);
    CHECK(cfg.spec.channels()[0].rate.at(0.0) == 0.5);
    CHECK(cfg.total_time == 0.5);
    CHECK(cfg.dt == 0.01);
    CHECK(cfg.seed == 7);
}

TEST_CASE("field-addressed config errors") {
    auto expect_error_with = [](Json doc, const std::string& fragment) {
        try {
            parse_process_config(doc);
            FAIL_CHECK("expected ConfigError for ", fragment);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };

    Json no_dim = minimal_qubit_config();
    no_dim.erase("dim");
    expect_error_with(no_dim, "$.dim");

    Json bad_cell = minimal_qubit_config();
    bad_cell["hamiltonian"][0][1] = 3.0;  // not an [re, im] pair
    expect_error_with(bad_cell, "$.hamiltonian[0][1]");

    Json bad_rate = minimal_qubit_config();
    bad_rate["channels"][0]["rate"]["type"] = "exponential";
    expect_error_with(bad_rate, "$.channels[0].rate");

    Json bad_op = minimal_qubit_config();
    bad_op["channels"][0]["operator"] = "sigma_w";
    expect_error_with(bad_op, "$.channels[0].operator");

    Json bad_h = minimal_qubit_config();
    bad_h["hamiltonian"] = matrix_to_json(sigma_plus());
    expect_error_with(bad_h, "Hermitian");

    Json bad_time = minimal_qubit_config();
    bad_time["time"]["dt"] = -1.0;
    expect_error_with(bad_time, "$.time");
}

TEST_CASE("builtin config resolves by name") {
    Json doc{{"builtin", Json{{"name", "translation-demo"},
                              {"params", Json{{"b0", 0.2}}}}},
             {"time", Json{{"T", 2.0}, {"dt", 0.002}}}};
    ProcessConfig cfg = parse_process_config(doc);
    CHECK(cfg.spec.channels().size() == 5);

    Json bad{{"builtin", Json{{"name", "translation-demo"},
                              {"params", Json{{"b0", 0.8}}}}}};
    CHECK_THROWS_AS(parse_process_config(bad), ConfigError);
}

TEST_CASE("initial state variants") {
    Json doc = minimal_qubit_config();
    doc["initial_state"] = "maximally-mixed";
    CHECK(parse_process_config(doc).initial_state.has_value());

    doc["initial_state"] = Json{{"bloch", {0.1, 0.2, 0.3}}};
    ProcessConfig cfg = parse_process_config(doc);
    CHECK(bloch_of(cfg.initial_state->matrix()).isApprox(Eigen::Vector3d(0.1, 0.2, 0.3),
                                                         1e-12));

    doc["initial_state"] = Json{{"bloch", {0.1, 0.2}}};
    CHECK_THROWS_AS(parse_process_config(doc), ConfigError);
}

TEST_CASE("round trip: serialized builtin reproduces bitwise identical output") {
    GeneratorSpec spec = make_translation_demo_generator(std::log(2.0), 1.0, 0.3, 2.0);
    Json doc = spec_to_config_json(spec, 2.0, 0.002, 42);

    // through a dump/parse cycle, as a file on disk would go
    Json reparsed_doc = Json::parse(doc.dump());
    ProcessConfig cfg1 = parse_process_config(doc);
    ProcessConfig cfg2 = parse_process_config(reparsed_doc);

    DensityMatrix rho0 = density_from_bloch({0.2, -0.3, 0.4});
    std::string csv1 =
        simulate_csv(integrate(cfg1.spec, cfg1.total_time, cfg1.dt), rho0);
    std::string csv2 =
        simulate_csv(integrate(cfg2.spec, cfg2.total_time, cfg2.dt), rho0);
    CHECK(csv1 == csv2);

    std::string native =
        simulate_csv(integrate(spec, 2.0, 0.002), rho0);
    CHECK(csv1 == native);

    CHECK(config_hash(doc) == config_hash(reparsed_doc));
    Json changed = doc;
    changed["seed"] = 43;
    CHECK(config_hash(doc) != config_hash(changed));
}

TEST_CASE("double formatting survives a parse round trip") {
    for (double x : {0.1, 1.0 / 3.0, std::exp(1.0), -2.5e-17, 0.75342}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("csv shape") {
    GeneratorSpec spec = make_isotropic_generator(1.0);
    auto table = integrate(spec, 0.1, 0.01);
    std::string csv = simulate_csv(table, density_from_bloch({1, 0, 0}));
    CHECK(csv.rfind("t,vx,vy,vz,trace,min_eig\n", 0) == 0);
    // first data row is the initial state
    CHECK(csv.find("\n0,1,0,0,1,0\n") != std::string::npos);
}

TEST_CASE("report serialization includes verdicts and measure values") {
    auto spec = make_eternal_generator();
    auto table = integrate(spec, 0.5, 0.005);
    DivisibilityOptions opts;
    opts.n_samples = 8;
    Json j = to_json(divisibility_report(spec, table, opts));
    CHECK(j["verdict_cp"] == false);
    CHECK(j["verdict_p"] == true);
    CHECK(j["times"].size() == table.size());

    MeasureScanParams params;
    params.n_theta = 6;
    params.n_phi = 12;
    params.n_weight = 8;
    params.refine = false;
    Json m = to_json(measure_orthogonal_scan(table, params));
    CHECK(m["method"] == "orthogonal-scan");
    CHECK(m["value"].get<double>() < 1e-6);
    CHECK(m["optimizer"].contains("bloch1"));
}

TEST_CASE("thread cap honors the environment variable") {
    const char* saved = std::getenv("HELSTROM_FLOW_THREADS");
    setenv("HELSTROM_FLOW_THREADS", "1", 1);
    CHECK(max_threads() == 1);
    setenv("HELSTROM_FLOW_THREADS", "0", 1);  // invalid values are ignored
    CHECK(max_threads() >= 1);
    if (saved)
        setenv("HELSTROM_FLOW_THREADS", saved, 1);
    else
        unsetenv("HELSTROM_FLOW_THREADS");
}

TEST_CASE("cli subprocess: repeated runs are byte-identical") {
    const fs::path dir =
        fs::temp_directory_path() / ("hflow_det_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string args = "demo translation --dt-override 0.01 --grid 8 --out ";
    REQUIRE(run_cli(args + (dir / "a").string()) == 0);
    REQUIRE(run_cli(args + (dir / "b").string()) == 0);
    for (const char* name : {"trajectory.csv", "translation.json"}) {
        std::ifstream fa(dir / "a" / name), fb(dir / "b" / name);
        std::string sa((std::istreambuf_iterator<char>(fa)),
                       std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(fb)),
                       std::istreambuf_iterator<char>());
        CHECK(sa == sb);
        CHECK(!sa.empty());
    }
    fs::remove_all(dir);
}

TEST_CASE("cli subprocess: demo runs, bad configs exit 2") {
    const fs::path dir =
        fs::temp_directory_path() / ("hflow_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    SUBCASE("eternal demo exits 0 and writes its reports") {
        CHECK(run_cli("demo eternal --dt-override 0.05 --grid 8 --out " +
                      (dir / "eternal").string()) == 0);
        CHECK(fs::exists(dir / "eternal" / "report.json"));
        CHECK(fs::exists(dir / "eternal" / "eternal.json"));
        std::ifstream in(dir / "eternal" / "eternal.json");
        Json rep;
        in >> rep;
        CHECK(rep["verdict_cp"] == false);
        CHECK(rep["verdict_p"] == true);
    }
    SUBCASE("missing config file exits 2") {
        CHECK(run_cli("simulate --config /nonexistent.json --out " + dir.string()) == 2);
    }
    SUBCASE("invalid json exits 2") {
        const fs::path bad = dir / "bad.json";
        std::ofstream(bad) << "{ not json";
        CHECK(run_cli("simulate --config " + bad.string() + " --out " + dir.string()) ==
              2);
    }
    SUBCASE("constraint-violating builtin exits 2") {
        const fs::path bad = dir / "bad_builtin.json";
        std::ofstream(bad) << Json{{"builtin",
                                    Json{{"name", "translation-demo"},
                                         {"params", Json{{"b0", 0.9}}}}}}
                                  .dump();
        CHECK(run_cli("divisibility --config " + bad.string() + " --out " +
                      dir.string()) == 2);
    }
    SUBCASE("simulate on a serialized builtin exits 0") {
        const fs::path conf = dir / "iso.json";
        std::ofstream(conf) << spec_to_config_json(make_isotropic_generator(1.0), 0.5,
                                                   0.005, 3)
                                   .dump();
        CHECK(run_cli("simulate --config " + conf.string() + " --bloch 1,0,0 --out " +
                      (dir / "sim").string()) == 0);
        CHECK(fs::exists(dir / "sim" / "simulate.csv"));
    }
    fs::remove_all(dir);
}

}  // TEST_SUITE
