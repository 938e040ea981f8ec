#pragma once

#include <charconv>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "hflow/classical.hpp"
#include "hflow/divisibility.hpp"
#include "hflow/measure.hpp"
#include "hflow/scenarios.hpp"

namespace hflow {

using Json = nlohmann::json;

// --- JSON <-> matrix, row-major entries as [re, im] pairs ---

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw ConfigError(path + ": expected a nonempty array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<Index>(j[i].size()) != cols)
            throw ConfigError(path + "[" + std::to_string(i) + "]: ragged matrix rows");
        for (Index k = 0; k < cols; ++k) {
            const Json& cell = j[i][k];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number())
                throw ConfigError(path + "[" + std::to_string(i) + "][" +
                                  std::to_string(k) + "]: expected [re, im]");
            m(i, static_cast<Index>(k)) =
                Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

// --- JSON <-> rate functions ---

inline Json rate_to_json(const RateFunction& r) {
    switch (r.kind()) {
        case RateFunction::Kind::Constant:
            return Json{{"type", "constant"}, {"value", r.values()[0]}};
        case RateFunction::Kind::PiecewiseConstant:
            return Json{{"type", "piecewise-constant"},
                        {"breakpoints", r.times()},
                        {"values", r.values()}};
        case RateFunction::Kind::NegTanh:
            return Json{{"type", "neg-tanh"}, {"amplitude", r.values()[0]}};
        case RateFunction::Kind::Table:
            return Json{{"type", "table"}, {"times", r.times()}, {"values", r.values()}};
    }
    return {};
}

inline RateFunction rate_from_json(const Json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type"))
        throw ConfigError(path + ": expected a rate object with a 'type' field");
    const std::string type = j["type"].get<std::string>();
    try {
        if (type == "constant") return RateFunction::constant(j.at("value").get<double>());
        if (type == "piecewise-constant")
            return RateFunction::piecewise_constant(
                j.at("breakpoints").get<std::vector<double>>(),
                j.at("values").get<std::vector<double>>());
        if (type == "neg-tanh")
            return RateFunction::neg_tanh(j.at("amplitude").get<double>());
        if (type == "table")
            return RateFunction::table(j.at("times").get<std::vector<double>>(),
                                       j.at("values").get<std::vector<double>>());
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ".type: unknown rate kind '" + type + "'");
}

// --- named operators ---

inline Matrix named_operator(const std::string& name, Index dim,
                             const std::string& path) {
    if (name == "identity") return Matrix::Identity(dim, dim);
    if (dim != 2)
        throw ConfigError(path + ": named operator '" + name + "' requires dim = 2");
    if (name == "sigma_x") return pauli_x();
    if (name == "sigma_y") return pauli_y();
    if (name == "sigma_z") return pauli_z();
    if (name == "sigma_+" || name == "sigma_plus") return sigma_plus();
    if (name == "sigma_-" || name == "sigma_minus") return sigma_minus();
    throw ConfigError(path + ": unknown operator name '" + name + "'");
}

// --- process configuration ---

struct ProcessConfig {
    GeneratorSpec spec;
    double total_time = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    std::optional<DensityMatrix> initial_state;
    Json echo;  // the parsed document, for hashing and provenance
};

inline DensityMatrix initial_state_from_json(const Json& j, Index dim,
                                             const std::string& path) {
    try {
        if (j.is_string()) {
            const std::string name = j.get<std::string>();
            if (name == "maximally-mixed") return DensityMatrix::maximally_mixed(dim);
            if (dim == 2) {
                if (name == "pure-z+") return density_from_bloch({0, 0, 1});
                if (name == "pure-x+") return density_from_bloch({1, 0, 0});
            }
            throw ConfigError(path + ": unknown state name '" + name + "'");
        }
        if (j.is_object() && j.contains("bloch")) {
            auto v = j["bloch"].get<std::vector<double>>();
            if (v.size() != 3 || dim != 2)
                throw ConfigError(path + ".bloch: expected 3 components and dim = 2");
            return density_from_bloch({v[0], v[1], v[2]});
        }
        return DensityMatrix(matrix_from_json(j, path));
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline ProcessConfig parse_process_config(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("$: expected a JSON object");

    double total_time = 1.0, dt = 1e-3;
    if (doc.contains("time")) {
        const Json& t = doc["time"];
        if (!t.is_object() || !t.contains("T") || !t.contains("dt"))
            throw ConfigError("$.time: expected {\"T\": ..., \"dt\": ...}");
        total_time = t["T"].get<double>();
        dt = t["dt"].get<double>();
        if (dt <= 0.0 || total_time < dt)
            throw ConfigError("$.time: need dt > 0 and T >= dt");
    }
    std::uint64_t seed = doc.value("seed", 1ull);

    if (doc.contains("builtin")) {
        const Json& b = doc["builtin"];
        if (!b.is_object() || !b.contains("name"))
            throw ConfigError("$.builtin: expected {\"name\": ..., \"params\": {...}}");
        BuiltinParams params;
        if (b.contains("params")) {
            const Json& p = b["params"];
            params.gamma0 = p.value("gamma0", params.gamma0);
            params.t1 = p.value("t1", params.t1);
            params.b0 = p.value("b0", params.b0);
            params.big_t = p.value("T", params.big_t);
        }
        try {
            GeneratorSpec spec = builtin_generator(b["name"].get<std::string>(), params);
            ProcessConfig cfg{std::move(spec), total_time, dt, seed, std::nullopt, doc};
            if (doc.contains("initial_state"))
                cfg.initial_state = initial_state_from_json(doc["initial_state"],
                                                            cfg.spec.dim(),
                                                            "$.initial_state");
            return cfg;
        } catch (const Error& e) {
            throw ConfigError(std::string("$.builtin: ") + e.what());
        }
    }

    if (!doc.contains("dim")) throw ConfigError("$.dim: required");
    const Index dim = doc["dim"].get<Index>();
    if (dim < 2) throw ConfigError("$.dim: must be at least 2");

    Matrix hamiltonian = Matrix::Zero(dim, dim);
    if (doc.contains("hamiltonian"))
        hamiltonian = matrix_from_json(doc["hamiltonian"], "$.hamiltonian");

    RateFunction schedule = RateFunction::constant(1.0);
    if (doc.contains("hamiltonian_schedule"))
        schedule = rate_from_json(doc["hamiltonian_schedule"], "$.hamiltonian_schedule");

    std::vector<Channel> channels;
    if (doc.contains("channels")) {
        if (!doc["channels"].is_array()) throw ConfigError("$.channels: expected array");
        for (std::size_t i = 0; i < doc["channels"].size(); ++i) {
            const Json& c = doc["channels"][i];
            const std::string path = "$.channels[" + std::to_string(i) + "]";
            if (!c.is_object() || !c.contains("operator") || !c.contains("rate"))
                throw ConfigError(path + ": expected {\"operator\": ..., \"rate\": ...}");
            Matrix op = c["operator"].is_string()
                            ? named_operator(c["operator"].get<std::string>(), dim,
                                             path + ".operator")
                            : matrix_from_json(c["operator"], path + ".operator");
            channels.push_back({rate_from_json(c["rate"], path + ".rate"), op});
        }
    }

    try {
        GeneratorSpec spec(dim, hamiltonian, std::move(channels), schedule);
        ProcessConfig cfg{std::move(spec), total_time, dt, seed, std::nullopt, doc};
        if (doc.contains("initial_state"))
            cfg.initial_state = initial_state_from_json(doc["initial_state"], dim,
                                                        "$.initial_state");
        return cfg;
    } catch (const DomainError& e) {
        throw ConfigError(std::string("$: ") + e.what());
    }
}

// Explicit-channel serialization; parsing it back reproduces the spec
// bitwise (doubles round-trip through shortest representation).
inline Json spec_to_config_json(const GeneratorSpec& spec, double total_time, double dt,
                                std::uint64_t seed) {
    Json channels = Json::array();
    for (const auto& ch : spec.channels())
        channels.push_back(Json{{"operator", matrix_to_json(ch.lindblad_op)},
                                {"rate", rate_to_json(ch.rate)}});
    return Json{{"dim", spec.dim()},
                {"hamiltonian", matrix_to_json(spec.hamiltonian())},
                {"hamiltonian_schedule", rate_to_json(spec.hamiltonian_schedule())},
                {"channels", std::move(channels)},
                {"time", Json{{"T", total_time}, {"dt", dt}}},
                {"seed", seed}};
}

// FNV-1a over the canonical dump.
inline std::string config_hash(const Json& doc) {
    const std::string dump = doc.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- CSV emission, shortest round-trip double formatting ---

inline std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

inline std::string simulate_csv(const PropagatorTable& table, const DensityMatrix& rho0) {
    std::ostringstream out;
    const Index d = table.dim;
    if (d == 2) {
        out << "t,vx,vy,vz,trace,min_eig\n";
    } else {
        out << "t";
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j)
                out << ",re_" << i << j << ",im_" << i << j;
        out << ",trace,min_eig\n";
    }
    const Vector rho_vec = vectorize(rho0.matrix());
    for (std::size_t k = 0; k < table.size(); ++k) {
        Matrix rho = hermitize(unvectorize(table.maps[k].mat * rho_vec, d));
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
        out << format_double(table.times[k]);
        if (d == 2) {
            Eigen::Vector3d v = bloch_of(rho);
            out << ',' << format_double(v.x()) << ',' << format_double(v.y()) << ','
                << format_double(v.z());
        } else {
            for (Index i = 0; i < d; ++i)
                for (Index j = 0; j < d; ++j)
                    out << ',' << format_double(rho(i, j).real()) << ','
                        << format_double(rho(i, j).imag());
        }
        out << ',' << format_double(rho.trace().real()) << ','
            << format_double(es.eigenvalues().minCoeff()) << '\n';
    }
    return out.str();
}

inline std::string trajectory_csv(const TraceNormTrajectory& traj) {
    std::ostringstream out;
    out << "t,value,sigma\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        out << format_double(traj.times[k]) << ',' << format_double(traj.values[k])
            << ',' << format_double(traj.sigma[k]) << '\n';
    return out.str();
}

inline std::string classical_csv(const SpectralTrajectory& traj,
                                 const ClassicalProcess& process) {
    std::ostringstream out;
    const Index d = traj.eigenvalues.front().size();
    out << "t";
    for (Index i = 0; i < d; ++i) out << ",p_" << (i + 1);
    out << ",min_offdiag_W\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << format_double(traj.times[k]);
        for (Index i = 0; i < d; ++i) out << ',' << format_double(traj.eigenvalues[k](i));
        double min_off = 0.0;
        bool first = true;
        for (Index m = 0; m < d; ++m)
            for (Index n = 0; n < d; ++n)
                if (m != n && (first || process.rates[k](m, n) < min_off)) {
                    min_off = process.rates[k](m, n);
                    first = false;
                }
        out << ',' << format_double(min_off) << '\n';
    }
    return out.str();
}

inline std::string dilation_csv(const DilationDemoReport& report) {
    std::ostringstream out;
    out << "t,I_int,I_ext,total\n";
    for (std::size_t k = 0; k < report.times.size(); ++k)
        out << format_double(report.times[k]) << ','
            << format_double(report.internal_information[k]) << ','
            << format_double(report.external_information[k]) << ','
            << format_double(report.internal_information[k] +
                             report.external_information[k])
            << '\n';
    return out.str();
}

// --- report serialization ---

inline Json to_json(const MeasureResult& res) {
    Json optimizer{{"p1", res.optimizer.p1()},
                   {"p2", res.optimizer.p2()},
                   {"rho1", matrix_to_json(res.optimizer.rho1().matrix())},
                   {"rho2", matrix_to_json(res.optimizer.rho2().matrix())}};
    if (res.optimizer.dim() == 2) {
        Eigen::Vector3d v1 = bloch_of(res.optimizer.rho1().matrix());
        Eigen::Vector3d v2 = bloch_of(res.optimizer.rho2().matrix());
        optimizer["bloch1"] = {v1.x(), v1.y(), v1.z()};
        optimizer["bloch2"] = {v2.x(), v2.y(), v2.z()};
    }
    Json intervals = Json::array();
    for (auto [a, b] : res.increasing_intervals) intervals.push_back({a, b});
    return Json{{"value", res.value},
                {"method", res.method == MeasureMethod::OrthogonalScan
                               ? "orthogonal-scan"
                               : "local-representation"},
                {"lower_bound_only", res.lower_bound_only},
                {"optimizer", std::move(optimizer)},
                {"increasing_intervals", std::move(intervals)}};
}

inline Json to_json(const DivisibilityReport& rep) {
    Json undefined = Json::array();
    for (auto [s, t] : rep.undefined_intervals) undefined.push_back({s, t});
    return Json{{"times", rep.times},
                {"cp_rate_margin", rep.cp_rate_margin},
                {"p_rate_margin", rep.p_rate_margin},
                {"p_margin_exact", rep.p_margin_exact},
                {"worst_cp_rate_margin", rep.worst_cp_rate_margin},
                {"worst_p_rate_margin", rep.worst_p_rate_margin},
                {"interval_choi_min", rep.interval_choi_min},
                {"interval_contraction_growth", rep.interval_contraction_growth},
                {"undefined_intervals", std::move(undefined)},
                {"verdict_cp", rep.verdict_cp},
                {"verdict_p", rep.verdict_p},
                {"witness_cp", rep.witness_cp},
                {"witness_p", rep.witness_p}};
}

inline Json to_json(const TranslationDemoReport& rep) {
    return Json{{"contracted_radius", rep.contracted_radius},
                {"translation_length", rep.translation_length},
                {"measure_numeric", rep.measure_numeric},
                {"measure_analytic", rep.measure_analytic},
                {"optimizer_weight_gap", rep.optimizer_weight_gap},
                {"optimizer_direction",
                 {rep.optimizer_direction.x(), rep.optimizer_direction.y(),
                  rep.optimizer_direction.z()}},
                {"unbiased_measure", rep.unbiased_measure},
                {"suboptimal_gap", rep.suboptimal_gap},
                {"suboptimal_numeric", rep.suboptimal_numeric},
                {"suboptimal_analytic", rep.suboptimal_analytic},
                {"scan", to_json(rep.scan)}};
}

inline Json to_json(const EternalDemoReport& rep) {
    return Json{{"verdict_cp", rep.verdict_cp},
                {"verdict_p", rep.verdict_p},
                {"worst_cp_margin", rep.worst_cp_margin},
                {"worst_p_margin", rep.worst_p_margin},
                {"max_cp_margin_after_start", rep.max_cp_margin_after_start},
                {"measure_orthogonal", rep.measure_orthogonal},
                {"measure_local", rep.measure_local}};
}

inline Json to_json(const DilationDemoReport& rep) {
    return Json{{"initial_information", rep.initial_information},
                {"conservation_residual", rep.conservation_residual},
                {"external_at_start", rep.external_at_start},
                {"min_information", rep.min_information}};
}

}  // namespace hflow
