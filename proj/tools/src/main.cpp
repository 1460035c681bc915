// sympmor command line: per-stage subcommands for the reduction pipeline and
// a `reproduce` driver for the bundled studies.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "sympmor/basis.hpp"
#include "sympmor/hamiltonian.hpp"
#include "sympmor/integrator.hpp"
#include "sympmor/mapping.hpp"
#include "sympmor/matrix_io.hpp"
#include "sympmor/metrics.hpp"
#include "sympmor/rom.hpp"
#include "sympmor/snapshots.hpp"
#include "sympmor/study.hpp"
#include "sympmor/wave.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace sympmor;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return j;
}

template <typename T>
T require(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) throw ConfigError(what + ": missing required key \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(what + ": bad value for \"" + key + "\": " + e.what());
    }
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

/// Full-order model description shared by several subcommands:
///   {"kind": "wave1d", "n": 2048, "mu": 0.5}
///   {"kind": "wave2d", "nx": 100, "ny": 100, "mu": 1.0, "amplitude": 2.0}
struct FomSpec {
    std::string kind;
    Index n = 2048;
    Index nx = 100;
    Index ny = 100;
    double mu = 0.5;
    double amplitude = 2.0;
};

FomSpec parse_fom_spec(const json& j, const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + ": \"fom\" must be an object");
    FomSpec spec;
    spec.kind = require<std::string>(j, "kind", what);
    if (spec.kind != "wave1d" && spec.kind != "wave2d")
        throw ConfigError(what + ": fom kind must be wave1d or wave2d, got '" + spec.kind + "'");
    spec.n = value_or<Index>(j, "n", spec.n);
    spec.nx = value_or<Index>(j, "nx", spec.nx);
    spec.ny = value_or<Index>(j, "ny", spec.ny);
    spec.mu = value_or<double>(j, "mu", spec.mu);
    spec.amplitude = value_or<double>(j, "amplitude", spec.amplitude);
    return spec;
}

HamiltonianFOM build_fom(const FomSpec& spec, double mu) {
    if (spec.kind == "wave1d") {
        Wave1DConfig cfg;
        cfg.n = spec.n;
        cfg.mu = mu;
        return build_wave1d(cfg);
    }
    Wave2DConfig cfg;
    cfg.nx = spec.nx;
    cfg.ny = spec.ny;
    cfg.mu = mu;
    cfg.amplitude = spec.amplitude;
    return build_wave2d(cfg);
}

PartitionedState fom_initial_state(const FomSpec& spec, double mu) {
    if (spec.kind == "wave1d") {
        Wave1DConfig cfg;
        cfg.n = spec.n;
        cfg.mu = mu;
        return wave1d_initial_state(cfg);
    }
    Wave2DConfig cfg;
    cfg.nx = spec.nx;
    cfg.ny = spec.ny;
    cfg.mu = mu;
    cfg.amplitude = spec.amplitude;
    return wave2d_initial_state(cfg);
}

FomFamily fom_family(const FomSpec& spec) {
    FomFamily fam;
    fam.build = [spec](const Vector& mu) { return build_fom(spec, mu(0)); };
    fam.initial_state = [spec](const Vector& mu) { return fom_initial_state(spec, mu(0)); };
    return fam;
}

Index resolve_steps(const json& j, const std::string& what) {
    if (j.contains("num_steps")) return require<Index>(j, "num_steps", what);
    const double dt = require<double>(j, "dt", what);
    const double T = require<double>(j, "T", what);
    if (dt <= 0.0) throw ConfigError(what + ": dt must be positive");
    return static_cast<Index>(std::llround(T / dt));
}

// ---------------------------------------------------------------------------
// Subcommand implementations.  Each takes the parsed stage config.
// ---------------------------------------------------------------------------

/// {"fom": {...}, "dt":, "T": (or "num_steps"), "stride": 1, "out": "traj.mrx1"}
void cmd_fom_simulate(const json& cfg) {
    const std::string what = "fom-simulate";
    const FomSpec spec = parse_fom_spec(cfg.at("fom"), what);
    const double dt = require<double>(cfg, "dt", what);
    const Index steps = resolve_steps(cfg, what);
    const Index stride = value_or<Index>(cfg, "stride", 1);
    if (stride < 1) throw ConfigError(what + ": stride must be >= 1");
    const std::string out = require<std::string>(cfg, "out", what);

    const HamiltonianFOM fom = build_fom(spec, spec.mu);
    const PartitionedState y0 = fom_initial_state(spec, spec.mu);
    const Index cols = steps / stride + 1;
    Matrix Y(2 * fom.half_dim(), cols);
    stream_fom_trajectory(fom, y0, dt, steps, [&](Index k, const Vector& y) {
        if (k % stride == 0 && k / stride < cols) Y.col(k / stride) = y;
    });
    save_matrix(out, Y);
    std::printf("wrote %s (%lld x %lld)\n", out.c_str(), static_cast<long long>(Y.rows()),
                static_cast<long long>(Y.cols()));
}

/// {"fom": {...}, "train_mu": [...], "dt":, "T": (or "num_steps"),
///  "reference": "zero", "momentum_scale": 1.0, "out": "snapdir"}
void cmd_snapshots(const json& cfg) {
    const std::string what = "snapshots";
    const FomSpec spec = parse_fom_spec(cfg.at("fom"), what);
    const auto mus = require<std::vector<double>>(cfg, "train_mu", what);
    const double dt = require<double>(cfg, "dt", what);
    const Index steps = resolve_steps(cfg, what);
    const ReferenceKind ref = reference_kind_from_string(value_or<std::string>(cfg, "reference", "zero"));
    const double scale = value_or<double>(cfg, "momentum_scale", 1.0);
    const std::string out = require<std::string>(cfg, "out", what);

    std::vector<Vector> params;
    for (double mu : mus) {
        Vector v(1);
        v(0) = mu;
        params.push_back(v);
    }
    const SnapshotSet snaps = generate_snapshots(fom_family(spec), params, dt, steps, ref, scale);
    snaps.save(out);
    std::printf("wrote %s (%lld columns, %zu parameters)\n", out.c_str(),
                static_cast<long long>(snaps.num_cols()), snaps.parameters().size());
}

/// {"snapshots": "snapdir", "kind": "lsl|qmcl|bq", "r": 8,
///  "gamma_q": 0.0, "gamma_p": 0.0, "out": "basisdir"}
void cmd_fit_basis(const json& cfg) {
    const std::string what = "fit-basis";
    const SnapshotSet snaps = SnapshotSet::load(require<std::string>(cfg, "snapshots", what));
    const BasisKind kind = basis_kind_from_string(require<std::string>(cfg, "kind", what));
    const Index r = require<Index>(cfg, "r", what);
    const double gq = value_or<double>(cfg, "gamma_q", 0.0);
    const double gp = value_or<double>(cfg, "gamma_p", 0.0);
    const std::string out = require<std::string>(cfg, "out", what);

    const ReductionBasis basis = fit_bases(snaps, r, kind, gq, gp);
    basis.save(out);
    std::printf("wrote %s (kind %s, r = %lld)\n", out.c_str(), to_string(kind).c_str(),
                static_cast<long long>(r));
}

/// {"snapshots": "snapdir", "basis": "basisdir", "method": "lsl|smg-qmcl|galerkin-bq",
///  "fom": {...}, "out": "romdir"}
void cmd_build_rom(const json& cfg) {
    const std::string what = "build-rom";
    const SnapshotSet snaps = SnapshotSet::load(require<std::string>(cfg, "snapshots", what));
    ReductionBasis basis = ReductionBasis::load(require<std::string>(cfg, "basis", what));
    const std::string method = require<std::string>(cfg, "method", what);
    const FomSpec spec = parse_fom_spec(cfg.at("fom"), what);
    const std::string out = require<std::string>(cfg, "out", what);

    const HamiltonianFOM fom = build_fom(spec, spec.mu);
    const Mapping mapping(std::move(basis), snaps.reference());
    ReducedModel rom;
    if (method == "lsl") rom = build_lsl_rom(fom, mapping);
    else if (method == "smg-qmcl") rom = build_qmcl_rom(fom, mapping);
    else if (method == "galerkin-bq") rom = build_bq_rom(fom, mapping);
    else throw ConfigError(what + ": method must be lsl | smg-qmcl | galerkin-bq, got '" + method + "'");
    rom.save(out);
    std::printf("wrote %s (%s, 2r = %lld, %s)\n", out.c_str(), to_string(rom.kind()).c_str(),
                static_cast<long long>(rom.dim()),
                rom.offline_online() ? "offline-online" : "lifted evaluation");
}

Vector encode_initial(const ReducedModel& rom, const PartitionedState& y0) {
    if (rom.kind() == RomKind::naive_qm) return rom.joint_map().encode(y0.to_full());
    return encode(rom.mapping(), y0);
}

/// {"rom": "romdir", "dt":, "T": (or "num_steps"), "stride": 1, "out": "Z.mrx1",
///  "initial_file": "z0.mrx1"}  or  {"fom": {...}} to encode the model IC.
void cmd_rom_simulate(const json& cfg) {
    const std::string what = "rom-simulate";
    const ReducedModel rom = ReducedModel::load(require<std::string>(cfg, "rom", what));
    const double dt = require<double>(cfg, "dt", what);
    const Index steps = resolve_steps(cfg, what);
    const Index stride = value_or<Index>(cfg, "stride", 1);
    if (stride < 1) throw ConfigError(what + ": stride must be >= 1");
    const std::string out = require<std::string>(cfg, "out", what);

    Vector z0;
    if (cfg.contains("initial_file")) {
        z0 = load_vector(cfg.at("initial_file").get<std::string>());
    } else if (cfg.contains("fom")) {
        const FomSpec spec = parse_fom_spec(cfg.at("fom"), what);
        z0 = encode_initial(rom, fom_initial_state(spec, spec.mu));
    } else {
        throw ConfigError(what + ": give either \"initial_file\" or a \"fom\" block for the IC");
    }

    const Trajectory tr = integrate_rom(rom, z0, dt, steps);
    const Index cols = steps / stride + 1;
    Matrix Z(rom.dim(), cols);
    for (Index c = 0; c < cols; ++c) Z.col(c) = tr.states.col(c * stride);
    save_matrix(out, Z);
    std::printf("wrote %s (%lld x %lld, %lld Newton iterations total)\n", out.c_str(),
                static_cast<long long>(Z.rows()), static_cast<long long>(Z.cols()),
                static_cast<long long>(tr.total_newton_iters));
}

/// {"reference": "Y.mrx1", "trajectory": "Z.mrx1", "rom": "romdir" (optional),
///  "identity": false, "out": "metrics.csv"}
/// With "identity": true the trajectory already holds full states.
void cmd_evaluate(const json& cfg) {
    const std::string what = "evaluate";
    const Matrix Y = load_matrix(require<std::string>(cfg, "reference", what));
    const Matrix T = load_matrix(require<std::string>(cfg, "trajectory", what));
    const bool identity = value_or<bool>(cfg, "identity", false);
    const std::string out = require<std::string>(cfg, "out", what);

    Matrix Y_rec;
    if (identity) {
        Y_rec = T;
    } else if (cfg.contains("rom")) {
        const ReducedModel rom = ReducedModel::load(cfg.at("rom").get<std::string>());
        Y_rec = decode_trajectory(rom, T);
    } else {
        throw ConfigError(what + ": give a \"rom\" directory to decode, or \"identity\": true");
    }

    const double err = relative_state_error(Y, Y_rec);
    const Vector pw = pointwise_state_error(Y, Y_rec);
    std::ofstream f(out);
    if (!f) throw ConfigError(what + ": cannot open for writing: " + out);
    char buf[48];
    f << "metric,value\n";
    std::snprintf(buf, sizeof buf, "%.17g", err);
    f << "err_sim," << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", pw.maxCoeff());
    f << "max_pointwise," << buf << "\n";
    std::printf("wrote %s (err_sim = %.6g)\n", out.c_str(), err);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symplectic model reduction with data-driven quadratic manifolds"};
    app.require_subcommand(1);

    int threads = 1;
    std::optional<std::uint64_t> seed;
    app.add_option("--threads", threads, "Eigen thread count (SYMPMOR_THREADS overrides)");
    app.add_option("--seed", seed, "Random seed recorded in study configs");

    // Stage subcommands: each takes a JSON config (schemas in the README).
    std::string config_path;
    auto add_stage = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON config for this stage")->required();
        return sub;
    };
    CLI::App* sc_fom = add_stage("fom-simulate", "Integrate a full-order wave model");
    CLI::App* sc_snap = add_stage("snapshots", "Generate a training snapshot set");
    CLI::App* sc_fit = add_stage("fit-basis", "Fit a reduction basis from snapshots");
    CLI::App* sc_build = add_stage("build-rom", "Assemble a reduced model");
    CLI::App* sc_rsim = add_stage("rom-simulate", "Integrate a reduced model");
    CLI::App* sc_eval = add_stage("evaluate", "Compare a decoded trajectory against a reference");

    // reproduce <study>
    CLI::App* sc_repro = app.add_subcommand("reproduce", "Run a bundled study end-to-end");
    std::string study_name;
    std::string repro_config;
    std::string out_dir;
    std::vector<std::string> overrides;
    sc_repro->add_option("study", study_name, "motivation | lw-parametric | lw-regularization | "
                                              "lw-extrapolation | nw-2d");
    sc_repro->add_option("--config", repro_config, "Study config JSON (defaults to the named study)");
    sc_repro->add_option("--out", out_dir, "Output directory (overrides the config)");
    sc_repro->add_option("--override", overrides, "dotted.path=value config overrides (JSON values)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (const char* env = std::getenv("SYMPMOR_THREADS")) {
        char* end = nullptr;
        const long k = std::strtol(env, &end, 10);
        if (end != env && k > 0) threads = static_cast<int>(k);
    }
    Eigen::setNbThreads(threads);

    try {
        if (sc_fom->parsed()) cmd_fom_simulate(load_json_file(config_path));
        else if (sc_snap->parsed()) cmd_snapshots(load_json_file(config_path));
        else if (sc_fit->parsed()) cmd_fit_basis(load_json_file(config_path));
        else if (sc_build->parsed()) cmd_build_rom(load_json_file(config_path));
        else if (sc_rsim->parsed()) cmd_rom_simulate(load_json_file(config_path));
        else if (sc_eval->parsed()) cmd_evaluate(load_json_file(config_path));
        else if (sc_repro->parsed()) {
            StudyConfig cfg;
            if (!repro_config.empty()) {
                cfg = load_study_config(repro_config);
                if (!study_name.empty() && study_name != cfg.study)
                    throw ConfigError("study name '" + study_name + "' conflicts with config study '" +
                                      cfg.study + "'");
            } else if (!study_name.empty()) {
                cfg = default_study_config(study_name);
            } else {
                throw ConfigError("reproduce needs a study name or --config");
            }
            if (!overrides.empty()) cfg = apply_overrides(cfg, overrides);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (seed) cfg.seed = *seed;
            cfg.threads = threads;
            run_study(cfg);
            std::printf("study %s complete; outputs in %s\n", cfg.study.c_str(), cfg.out_dir.c_str());
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
