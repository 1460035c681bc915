#include "sympmor/study.hpp"

#include "sympmor/basis.hpp"
#include "sympmor/hamiltonian.hpp"
#include "sympmor/integrator.hpp"
#include "sympmor/mapping.hpp"
#include "sympmor/matrix_io.hpp"
#include "sympmor/metrics.hpp"
#include "sympmor/rom.hpp"
#include "sympmor/snapshots.hpp"
#include "sympmor/wave.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sympmor {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// File-name-safe token for a numeric label: 0.51 -> 0p51, 1e+06 -> 1e06.
std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == '.') c = 'p';
        else if (c == '-') c = 'm';
    }
    s.erase(std::remove(s.begin(), s.end(), '+'), s.end());
    return s;
}

std::string run_stem(const std::string& method, Index two_r, bool tag_gamma, double gamma,
                     const std::string& dataset, double mu) {
    std::string s = method + "_2r" + std::to_string(two_r);
    if (tag_gamma) s += "_g" + sanitize(fmt_label(gamma));
    s += "_" + dataset + "_mu" + sanitize(fmt_label(mu));
    return s;
}

/// Collects CSV rows and summary records while a study runs and writes
/// metrics.csv / summary.json at the end.
class StudyWriter {
  public:
    explicit StudyWriter(const StudyConfig& cfg) : cfg_(cfg), out_(cfg.out_dir) {
        fs::create_directories(out_ / "energy");
        fs::create_directories(out_ / "series");
        fs::create_directories(out_ / "traj");
        save_study_config(cfg, (out_ / "config.json").string());
        start_ = std::chrono::steady_clock::now();
    }

    void metric(const std::string& method, Index two_r, double gamma, const std::string& dataset,
                const std::string& mu_label, const std::string& name, double value) {
        rows_.push_back(cfg_.study + "," + method + "," + std::to_string(two_r) + "," +
                        fmt17(gamma) + "," + dataset + "," + mu_label + "," + name + "," +
                        fmt17(value));
    }

    void run_record(json rec) { runs_.push_back(std::move(rec)); }

    void series_csv(const std::string& subdir, const std::string& stem,
                    const std::vector<double>& t, const Vector& v) const {
        const fs::path path = out_ / subdir / (stem + ".csv");
        std::ofstream f(path);
        if (!f) throw ConfigError("cannot open for writing: " + path.string());
        f << "t,value\n";
        for (Index k = 0; k < v.size(); ++k)
            f << fmt17(t[static_cast<std::size_t>(k)]) << ',' << fmt17(v(k)) << '\n';
    }

    void trajectory(const std::string& stem, const Matrix& Z) const {
        save_matrix((out_ / "traj" / (stem + ".mrx1")).string(), Z);
    }

    void finish() const {
        {
            std::ofstream f(out_ / "metrics.csv");
            if (!f) throw ConfigError("cannot open for writing: " + (out_ / "metrics.csv").string());
            f << "study,method,two_r,gamma,dataset,mu,metric,value\n";
            for (const auto& row : rows_) f << row << '\n';
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json summary;
        summary["study"] = cfg_.study;
        summary["wall_seconds"] = wall;
        summary["runs"] = runs_;
        std::ofstream f(out_ / "summary.json");
        if (!f) throw ConfigError("cannot open for writing: " + (out_ / "summary.json").string());
        f << summary.dump(2) << '\n';
    }

  private:
    StudyConfig cfg_;
    fs::path out_;
    std::vector<std::string> rows_;
    json runs_ = json::array();
    std::chrono::steady_clock::time_point start_;
};

std::vector<Vector> to_params(const std::vector<double>& mus) {
    std::vector<Vector> out;
    out.reserve(mus.size());
    for (double m : mus) {
        Vector v(1);
        v(0) = m;
        out.push_back(v);
    }
    return out;
}

FomFamily make_wave1d_family(Index n) {
    FomFamily fam;
    fam.build = [n](const Vector& mu) {
        Wave1DConfig cfg;
        cfg.n = n;
        cfg.mu = mu(0);
        return build_wave1d(cfg);
    };
    fam.initial_state = [n](const Vector& mu) {
        Wave1DConfig cfg;
        cfg.n = n;
        cfg.mu = mu(0);
        return wave1d_initial_state(cfg);
    };
    return fam;
}

FomFamily make_wave2d_family(Index nx, Index ny) {
    FomFamily fam;
    fam.build = [nx, ny](const Vector& mu) {
        Wave2DConfig cfg;
        cfg.nx = nx;
        cfg.ny = ny;
        cfg.mu = mu(0);
        return build_wave2d(cfg);
    };
    fam.initial_state = [nx, ny](const Vector& mu) {
        Wave2DConfig cfg;
        cfg.nx = nx;
        cfg.ny = ny;
        cfg.mu = mu(0);
        return wave2d_initial_state(cfg);
    };
    return fam;
}

/// One integrated reduced run, sampled every `stride` steps.
struct RomRun {
    bool stable = true;
    std::string failure;
    Matrix Z;              ///< strided reduced states
    std::vector<double> t; ///< strided times
    Index newton_total = 0;
    Index newton_max = 0;
    double seconds = 0.0;
};

RomRun run_reduced(const ReducedModel& rm, const Vector& z0, double dt, Index steps, Index stride) {
    RomRun out;
    const auto tic = std::chrono::steady_clock::now();
    try {
        Trajectory tr = integrate_rom(rm, z0, dt, steps);
        out.newton_total = tr.total_newton_iters;
        out.newton_max = tr.max_newton_iters;
        const Index cols = steps / stride + 1;
        out.Z.resize(z0.size(), cols);
        out.t.resize(static_cast<std::size_t>(cols));
        for (Index c = 0; c < cols; ++c) {
            out.Z.col(c) = tr.states.col(c * stride);
            out.t[static_cast<std::size_t>(c)] = tr.times[static_cast<std::size_t>(c * stride)];
        }
    } catch (const NumericalError& e) {
        out.stable = false;
        out.failure = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    return out;
}

Matrix decode_model_columns(const ReducedModel& rm, const Matrix& Z) {
    return decode_trajectory(rm, Z);
}

/// Full-order trajectory sampled every `stride` steps, streamed (never stores
/// the full-resolution trajectory).
Matrix fom_eval_matrix(const HamiltonianFOM& fom, const PartitionedState& y0, double dt,
                       Index steps, Index stride, std::vector<double>* times = nullptr) {
    const Index cols = steps / stride + 1;
    Matrix Y(2 * fom.half_dim(), cols);
    if (times) times->resize(static_cast<std::size_t>(cols));
    stream_fom_trajectory(fom, y0, dt, steps, [&](Index k, const Vector& y) {
        if (k % stride != 0) return;
        const Index c = k / stride;
        if (c >= cols) return;
        Y.col(c) = y;
        if (times) (*times)[static_cast<std::size_t>(c)] = static_cast<double>(k) * dt;
    });
    return Y;
}

/// Full states of one parameter block of a snapshot set, stacked (q; p) and
/// sampled every `stride` columns.
Matrix block_full_states(const SnapshotSet& snaps, std::size_t block, Index stride) {
    const ParameterBlock& b = snaps.parameters().at(block);
    const Index n = snaps.half_dim();
    const Index cols = (b.num_cols - 1) / stride + 1;
    Matrix Y(2 * n, cols);
    for (Index c = 0; c < cols; ++c) {
        const Index src = b.col_offset + c * stride;
        Y.col(c).head(n) = snaps.Q_raw().col(src);
        Y.col(c).tail(n) = snaps.P_raw().col(src);
    }
    return Y;
}

json base_record(const std::string& method, Index two_r, double gamma, const std::string& dataset,
                 double mu, const RomRun& run) {
    json rec;
    rec["method"] = method;
    rec["two_r"] = two_r;
    rec["gamma"] = gamma;
    rec["dataset"] = dataset;
    rec["mu"] = mu;
    rec["stable"] = run.stable;
    if (!run.stable) rec["failure"] = run.failure;
    rec["newton_total"] = run.newton_total;
    rec["newton_max"] = run.newton_max;
    rec["seconds"] = run.seconds;
    return rec;
}

BasisKind basis_kind_for(const std::string& method) {
    if (method == "lsl") return BasisKind::lsl;
    if (method == "smg-qmcl") return BasisKind::qmcl;
    if (method == "galerkin-bq") return BasisKind::bq;
    throw ConfigError("no basis kind for method: " + method);
}

ReducedModel build_rom_for(const std::string& method, const HamiltonianFOM& fom, const Mapping& m) {
    if (method == "lsl") return build_lsl_rom(fom, m);
    if (method == "smg-qmcl") return build_qmcl_rom(fom, m);
    if (method == "galerkin-bq") return build_bq_rom(fom, m);
    throw ConfigError("cannot build reduced model for method: " + method);
}

double resolved_eval_T(const StudyConfig& cfg) { return cfg.eval_T > 0.0 ? cfg.eval_T : cfg.train_T; }

Index steps_for(double T, double dt) { return static_cast<Index>(std::llround(T / dt)); }

/// Shared driver for the parameter-sweep studies (1D parametric, 1D
/// regularization sweep, 2D): train on a parameter family, evaluate on train
/// and test parameters over the training horizon.
void run_sweep_study(const StudyConfig& cfg, const FomFamily& family, StudyWriter& writer) {
    const Index steps_train = steps_for(cfg.train_T, cfg.dt);
    const Index steps_eval = steps_for(resolved_eval_T(cfg), cfg.dt);
    const Index stride = cfg.eval_stride;
    const ReferenceKind ref_kind = reference_kind_from_string(cfg.reference);

    const SnapshotSet snaps = generate_snapshots(family, to_params(cfg.train_mu), cfg.dt,
                                                 steps_train, ref_kind, cfg.momentum_scale);

    const Index max_two_r = *std::max_element(cfg.reduced_dims.begin(), cfg.reduced_dims.end());
    const TruncatedSvd svd = extended_svd(snaps, max_two_r / 2);

    // Full-order data for the held-out parameters, over the evaluation horizon.
    std::vector<HamiltonianFOM> test_fom;
    std::vector<Matrix> test_Y;
    std::vector<PartitionedState> test_y0;
    std::vector<double> eval_times;
    for (const Vector& mu : to_params(cfg.test_mu)) {
        test_fom.push_back(family.build(mu));
        test_y0.push_back(family.initial_state(mu));
        test_Y.push_back(fom_eval_matrix(test_fom.back(), test_y0.back(), cfg.dt, steps_eval,
                                         stride, eval_times.empty() ? &eval_times : nullptr));
    }
    if (eval_times.empty())
        for (Index k = 0; k <= steps_eval / stride; ++k)
            eval_times.push_back(static_cast<double>(k * stride) * cfg.dt);

    std::vector<HamiltonianFOM> train_fom;
    for (const Vector& mu : to_params(cfg.train_mu)) train_fom.push_back(family.build(mu));

    const std::vector<double> gammas = cfg.gamma_grid.empty() ? std::vector<double>{cfg.gamma_q}
                                                              : cfg.gamma_grid;
    const bool tag_gamma = !cfg.gamma_grid.empty();
    const Index train_cols = steps_train / stride + 1;

    for (double gamma : gammas) {
        const double gamma_p = tag_gamma ? gamma : cfg.gamma_p;
        for (Index two_r : cfg.reduced_dims) {
            const Index r = two_r / 2;
            for (const std::string& method : cfg.methods) {
                const double row_gamma = method == "lsl" ? 0.0 : gamma;
                ReductionBasis basis = fit_bases_from_svd(snaps, svd, r, basis_kind_for(method),
                                                          gamma, gamma_p);
                Mapping mapping(std::move(basis), snaps.reference());

                const ProjectionErrors pe = projection_errors(snaps, mapping);
                writer.metric(method, two_r, row_gamma, "train", "mean", "proj_err_q", pe.q);
                writer.metric(method, two_r, row_gamma, "train", "mean", "proj_err_p", pe.p);

                // Training parameters: compare against the snapshot columns.
                bool all_stable = true;
                double err_sum = 0.0;
                for (std::size_t b = 0; b < cfg.train_mu.size(); ++b) {
                    const double mu = cfg.train_mu[b];
                    const ReducedModel rom = build_rom_for(method, train_fom[b], mapping);
                    const Vector z0 = encode(mapping, family.initial_state(to_params({mu})[0]));
                    RomRun run = run_reduced(rom, z0, cfg.dt, steps_eval, stride);
                    json rec = base_record(method, two_r, row_gamma, "train", mu, run);
                    const std::string stem = run_stem(method, two_r, tag_gamma, gamma, "train", mu);
                    if (run.stable) {
                        const Matrix Y_rec = decode_model_columns(rom, run.Z);
                        const Matrix Y_fom = block_full_states(snaps, b, stride);
                        const double err = relative_state_error(Y_fom, Y_rec.leftCols(train_cols));
                        err_sum += err;
                        const Vector drift = hamiltonian_drift_series(Y_rec, train_fom[b]);
                        const Vector mism = hamiltonian_mismatch_series(Y_rec.leftCols(train_cols),
                                                                        Y_fom, train_fom[b]);
                        writer.metric(method, two_r, row_gamma, "train", fmt_label(mu), "state_err", err);
                        writer.metric(method, two_r, row_gamma, "train", fmt_label(mu), "max_drift",
                                      drift.maxCoeff());
                        writer.metric(method, two_r, row_gamma, "train", fmt_label(mu), "max_mismatch",
                                      mism.maxCoeff());
                        writer.series_csv("energy", stem, run.t, drift);
                        writer.trajectory(stem, run.Z);
                        rec["metrics"] = {{"state_err", err},
                                          {"max_drift", drift.maxCoeff()},
                                          {"max_mismatch", mism.maxCoeff()}};
                    } else {
                        all_stable = false;
                    }
                    writer.run_record(std::move(rec));
                }
                if (all_stable && !cfg.train_mu.empty())
                    writer.metric(method, two_r, row_gamma, "train", "mean", "state_err",
                                  err_sum / static_cast<double>(cfg.train_mu.size()));

                // Held-out parameters: compare against freshly integrated FOMs.
                all_stable = true;
                err_sum = 0.0;
                for (std::size_t i = 0; i < cfg.test_mu.size(); ++i) {
                    const double mu = cfg.test_mu[i];
                    const ReducedModel rom = build_rom_for(method, test_fom[i], mapping);
                    const Vector z0 = encode(mapping, test_y0[i]);
                    RomRun run = run_reduced(rom, z0, cfg.dt, steps_eval, stride);
                    json rec = base_record(method, two_r, row_gamma, "test", mu, run);
                    const std::string stem = run_stem(method, two_r, tag_gamma, gamma, "test", mu);
                    if (run.stable) {
                        const Matrix Y_rec = decode_model_columns(rom, run.Z);
                        const double err = relative_state_error(test_Y[i], Y_rec);
                        err_sum += err;
                        const Vector drift = hamiltonian_drift_series(Y_rec, test_fom[i]);
                        const Vector mism = hamiltonian_mismatch_series(Y_rec, test_Y[i], test_fom[i]);
                        writer.metric(method, two_r, row_gamma, "test", fmt_label(mu), "state_err", err);
                        writer.metric(method, two_r, row_gamma, "test", fmt_label(mu), "max_drift",
                                      drift.maxCoeff());
                        writer.metric(method, two_r, row_gamma, "test", fmt_label(mu), "max_mismatch",
                                      mism.maxCoeff());
                        writer.series_csv("energy", stem, run.t, drift);
                        writer.series_csv("energy", stem + "_mismatch", run.t, mism);
                        writer.trajectory(stem, run.Z);
                        rec["metrics"] = {{"state_err", err},
                                          {"max_drift", drift.maxCoeff()},
                                          {"max_mismatch", mism.maxCoeff()}};
                    } else {
                        all_stable = false;
                    }
                    writer.run_record(std::move(rec));
                }
                if (all_stable && !cfg.test_mu.empty())
                    writer.metric(method, two_r, row_gamma, "test", "mean", "state_err",
                                  err_sum / static_cast<double>(cfg.test_mu.size()));
            }
        }
    }
}

/// Extrapolation study: train on [0, train_T] at a single parameter, then
/// integrate the reduced models far beyond the training horizon.
void run_extrapolation_study(const StudyConfig& cfg, StudyWriter& writer) {
    const FomFamily family = make_wave1d_family(cfg.n1d);
    const Index steps_train = steps_for(cfg.train_T, cfg.dt);
    const Index steps_eval = steps_for(resolved_eval_T(cfg), cfg.dt);
    const Index stride = cfg.eval_stride;
    const ReferenceKind ref_kind = reference_kind_from_string(cfg.reference);
    const double mu = cfg.train_mu.front();

    const SnapshotSet snaps = generate_snapshots(family, to_params({mu}), cfg.dt, steps_train,
                                                 ref_kind, cfg.momentum_scale);
    const Index max_two_r = *std::max_element(cfg.reduced_dims.begin(), cfg.reduced_dims.end());
    const TruncatedSvd svd = extended_svd(snaps, max_two_r / 2);

    const HamiltonianFOM fom = family.build(to_params({mu})[0]);
    const PartitionedState y0 = family.initial_state(to_params({mu})[0]);
    std::vector<double> eval_times;
    const Matrix Y_eval = fom_eval_matrix(fom, y0, cfg.dt, steps_eval, stride, &eval_times);

    for (Index two_r : cfg.reduced_dims) {
        const Index r = two_r / 2;
        for (const std::string& method : cfg.methods) {
            const double row_gamma = method == "lsl" ? 0.0 : cfg.gamma_q;
            ReductionBasis basis = fit_bases_from_svd(snaps, svd, r, basis_kind_for(method),
                                                      cfg.gamma_q, cfg.gamma_p);
            Mapping mapping(std::move(basis), snaps.reference());

            const ProjectionErrors pe = projection_errors(snaps, mapping);
            writer.metric(method, two_r, row_gamma, "train", "mean", "proj_err_q", pe.q);
            writer.metric(method, two_r, row_gamma, "train", "mean", "proj_err_p", pe.p);

            const ReducedModel rom = build_rom_for(method, fom, mapping);
            const Vector z0 = encode(mapping, y0);
            RomRun run = run_reduced(rom, z0, cfg.dt, steps_eval, stride);
            json rec = base_record(method, two_r, row_gamma, "extrapolation", mu, run);
            const std::string stem = run_stem(method, two_r, false, 0.0, "extrapolation", mu);
            if (run.stable) {
                const Matrix Y_rec = decode_model_columns(rom, run.Z);
                const double err = relative_state_error(Y_eval, Y_rec);
                const Vector pw = pointwise_state_error(Y_eval, Y_rec);
                const Vector drift = hamiltonian_drift_series(Y_rec, fom);
                double tail = 0.0;
                for (Index k = 0; k < drift.size(); ++k)
                    if (eval_times[static_cast<std::size_t>(k)] > cfg.train_T + 0.5 * cfg.dt)
                        tail = std::max(tail, drift(k));
                writer.metric(method, two_r, row_gamma, "extrapolation", fmt_label(mu), "state_err", err);
                writer.metric(method, two_r, row_gamma, "extrapolation", fmt_label(mu), "max_drift",
                              drift.maxCoeff());
                writer.metric(method, two_r, row_gamma, "extrapolation", fmt_label(mu),
                              "max_drift_tail", tail);
                writer.series_csv("energy", stem, run.t, drift);
                writer.series_csv("series", stem, run.t, pw);
                writer.trajectory(stem, run.Z);
                rec["metrics"] = {{"state_err", err},
                                  {"max_drift", drift.maxCoeff()},
                                  {"max_drift_tail", tail}};
            }
            writer.run_record(std::move(rec));
        }
    }
}

/// Motivation study: plain Galerkin reduced model on a joint (non-symplectic)
/// quadratic manifold, showing the energy drift and eventual blow-up that the
/// structure-preserving variants avoid.
void run_motivation_study(const StudyConfig& cfg, StudyWriter& writer) {
    const FomFamily family = make_wave1d_family(cfg.n1d);
    const Index steps_train = steps_for(cfg.train_T, cfg.dt);
    const Index steps_eval = steps_for(resolved_eval_T(cfg), cfg.dt);
    const Index stride = cfg.eval_stride;
    const ReferenceKind ref_kind = reference_kind_from_string(cfg.reference);
    const double mu = cfg.train_mu.front();
    const std::string method = "naive-qm";

    const SnapshotSet snaps = generate_snapshots(family, to_params({mu}), cfg.dt, steps_train,
                                                 ref_kind, cfg.momentum_scale);
    const Index n = snaps.half_dim();
    Matrix Yc(2 * n, snaps.num_cols());
    Yc.topRows(n) = snaps.Q();
    Yc.bottomRows(n) = snaps.P();

    const Index max_two_r = *std::max_element(cfg.reduced_dims.begin(), cfg.reduced_dims.end());
    const TruncatedSvd pod = pod_svd(Yc, max_two_r);
    if (pod.U.cols() < max_two_r)
        throw NumericalError("snapshot data does not support the requested dimension");

    const HamiltonianFOM fom = family.build(to_params({mu})[0]);
    const PartitionedState y0 = family.initial_state(to_params({mu})[0]);
    const Vector y_ref_full = snaps.reference().to_full();

    Matrix Y_train(2 * n, steps_train / stride + 1);
    for (Index c = 0; c < Y_train.cols(); ++c) {
        Y_train.col(c).head(n) = snaps.Q_raw().col(c * stride);
        Y_train.col(c).tail(n) = snaps.P_raw().col(c * stride);
    }
    const Index train_cols = Y_train.cols();

    for (Index two_r : cfg.reduced_dims) {
        JointQuadraticMap map;
        map.V = pod.U.leftCols(two_r);
        const Matrix Z = map.V.transpose() * Yc;
        const Matrix R = Yc - map.V * Z;
        map.Vbar = fit_vbar(Z, R, cfg.gamma_q);
        map.y_ref = y_ref_full;

        const ReducedModel rom = build_naive_qm_rom(fom, map);
        const Vector z0 = map.encode(y0.to_full());
        RomRun run = run_reduced(rom, z0, cfg.dt, steps_eval, stride);
        json rec = base_record(method, two_r, cfg.gamma_q, "train", mu, run);
        const std::string stem = run_stem(method, two_r, false, 0.0, "train", mu);
        if (run.stable) {
            const Matrix Y_rec = decode_model_columns(rom, run.Z);
            const double err = relative_state_error(Y_train, Y_rec.leftCols(train_cols));
            const Vector drift = hamiltonian_drift_series(Y_rec, fom);
            writer.metric(method, two_r, cfg.gamma_q, "train", fmt_label(mu), "state_err", err);
            writer.metric(method, two_r, cfg.gamma_q, "train", fmt_label(mu), "max_drift",
                          drift.maxCoeff());
            writer.series_csv("energy", stem, run.t, drift);
            writer.trajectory(stem, run.Z);
            rec["metrics"] = {{"state_err", err}, {"max_drift", drift.maxCoeff()}};
        }
        writer.run_record(std::move(rec));
    }
}

const std::set<std::string>& known_method_set() {
    static const std::set<std::string> methods{"lsl", "smg-qmcl", "galerkin-bq", "naive-qm"};
    return methods;
}

} // namespace

std::vector<std::string> known_studies() {
    return {"motivation", "lw-parametric", "lw-regularization", "lw-extrapolation", "nw-2d"};
}

void StudyConfig::validate() const {
    const auto names = known_studies();
    if (std::find(names.begin(), names.end(), study) == names.end()) {
        std::string msg = "unknown study '" + study + "'; valid names:";
        for (const auto& s : names) msg += " " + s;
        throw ConfigError(msg);
    }
    if (n1d < 2 || nx < 2 || ny < 2) throw ConfigError("grid sizes must be at least 2");
    if (train_mu.empty()) throw ConfigError("train_mu must not be empty");
    if (dt <= 0.0) throw ConfigError("dt must be positive");
    if (train_T <= 0.0) throw ConfigError("train_T must be positive");
    if (eval_stride < 1) throw ConfigError("eval_stride must be at least 1");
    if (reduced_dims.empty()) throw ConfigError("reduced_dims must not be empty");
    for (Index k : reduced_dims)
        if (k < 2 || k % 2 != 0) throw ConfigError("reduced dimensions must be even and >= 2");
    if (gamma_q < 0.0 || gamma_p < 0.0) throw ConfigError("regularization weights must be >= 0");
    for (double g : gamma_grid)
        if (g < 0.0) throw ConfigError("regularization weights must be >= 0");
    if (momentum_scale <= 0.0) throw ConfigError("momentum_scale must be positive");
    if (methods.empty()) throw ConfigError("methods must not be empty");
    for (const auto& m : methods) {
        if (known_method_set().count(m) == 0) throw ConfigError("unknown method '" + m + "'");
        if (study == "motivation" && m != "naive-qm")
            throw ConfigError("the motivation study supports only the naive-qm method");
        if (study != "motivation" && m == "naive-qm")
            throw ConfigError("naive-qm is only available in the motivation study");
    }
    reference_kind_from_string(reference); // throws on bad values
    if (study == "lw-regularization" && gamma_grid.empty())
        throw ConfigError("lw-regularization requires a non-empty gamma_grid");
}

StudyConfig default_study_config(const std::string& study) {
    StudyConfig cfg;
    cfg.study = study;
    if (study == "motivation") {
        cfg.n1d = 2048;
        cfg.train_mu = {0.5};
        cfg.dt = 1e-3;
        cfg.train_T = 4.0;
        cfg.eval_T = 12.0;
        cfg.reduced_dims = {4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
        cfg.gamma_q = cfg.gamma_p = 1e2;
        cfg.reference = "initial-condition";
        cfg.methods = {"naive-qm"};
    } else if (study == "lw-parametric" || study == "lw-regularization") {
        cfg.n1d = 2048;
        const double lo = 5.0 / 12.0, hi = 5.0 / 7.0;
        for (int i = 0; i < 6; ++i) cfg.train_mu.push_back(lo + (hi - lo) * i / 5.0);
        cfg.test_mu = {0.51, 0.625};
        cfg.dt = 2.5e-4;
        cfg.train_T = 1.0;
        cfg.gamma_q = cfg.gamma_p = 1e2;
        cfg.reference = "zero";
        if (study == "lw-parametric") {
            cfg.reduced_dims = {4, 6, 8, 10, 12, 14, 16, 18, 20};
            cfg.methods = {"lsl", "smg-qmcl", "galerkin-bq"};
        } else {
            cfg.reduced_dims = {16};
            cfg.gamma_grid = {1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
            cfg.methods = {"smg-qmcl", "galerkin-bq"};
        }
    } else if (study == "lw-extrapolation") {
        cfg.n1d = 2048;
        cfg.train_mu = {0.5};
        cfg.dt = 1e-3;
        cfg.train_T = 4.0;
        cfg.eval_T = 40.0;
        cfg.eval_stride = 10;
        cfg.reduced_dims = {4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
        cfg.gamma_q = cfg.gamma_p = 1e6;
        cfg.reference = "initial-condition";
        cfg.methods = {"lsl", "smg-qmcl", "galerkin-bq"};
    } else if (study == "nw-2d") {
        cfg.nx = cfg.ny = 100;
        for (int i = 1; i <= 10; ++i) cfg.train_mu.push_back(0.1 * i);
        cfg.test_mu = {1.25, 1.5, 2.0, 3.0};
        cfg.dt = 0.1;
        cfg.train_T = 8.0;
        cfg.reduced_dims = {40, 44, 48, 52, 56, 60};
        cfg.gamma_q = cfg.gamma_p = 1e-1;
        cfg.reference = "zero";
        cfg.methods = {"lsl", "smg-qmcl", "galerkin-bq"};
    } else {
        std::string msg = "unknown study '" + study + "'; valid names:";
        for (const auto& s : known_studies()) msg += " " + s;
        throw ConfigError(msg);
    }
    return cfg;
}

namespace {

json config_to_json_obj(const StudyConfig& cfg) {
    json j;
    j["study"] = cfg.study;
    j["n1d"] = cfg.n1d;
    j["nx"] = cfg.nx;
    j["ny"] = cfg.ny;
    j["train_mu"] = cfg.train_mu;
    j["test_mu"] = cfg.test_mu;
    j["dt"] = cfg.dt;
    j["train_T"] = cfg.train_T;
    j["eval_T"] = cfg.eval_T;
    j["eval_stride"] = cfg.eval_stride;
    j["reduced_dims"] = cfg.reduced_dims;
    j["gamma_q"] = cfg.gamma_q;
    j["gamma_p"] = cfg.gamma_p;
    j["gamma_grid"] = cfg.gamma_grid;
    j["reference"] = cfg.reference;
    j["momentum_scale"] = cfg.momentum_scale;
    j["methods"] = cfg.methods;
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

template <typename T>
void get_if_present(const json& j, const char* key, T& value) {
    if (j.contains(key)) j.at(key).get_to(value);
}

StudyConfig config_from_json_obj(const json& j) {
    if (!j.is_object()) throw ConfigError("study configuration must be a JSON object");
    if (!j.contains("study") || !j.at("study").is_string())
        throw ConfigError("study configuration needs a \"study\" string field");
    StudyConfig cfg = default_study_config(j.at("study").get<std::string>());
    get_if_present(j, "n1d", cfg.n1d);
    get_if_present(j, "nx", cfg.nx);
    get_if_present(j, "ny", cfg.ny);
    get_if_present(j, "train_mu", cfg.train_mu);
    get_if_present(j, "test_mu", cfg.test_mu);
    get_if_present(j, "dt", cfg.dt);
    get_if_present(j, "train_T", cfg.train_T);
    get_if_present(j, "eval_T", cfg.eval_T);
    get_if_present(j, "eval_stride", cfg.eval_stride);
    get_if_present(j, "reduced_dims", cfg.reduced_dims);
    get_if_present(j, "gamma_q", cfg.gamma_q);
    get_if_present(j, "gamma_p", cfg.gamma_p);
    get_if_present(j, "gamma_grid", cfg.gamma_grid);
    get_if_present(j, "reference", cfg.reference);
    get_if_present(j, "momentum_scale", cfg.momentum_scale);
    get_if_present(j, "methods", cfg.methods);
    get_if_present(j, "out_dir", cfg.out_dir);
    get_if_present(j, "seed", cfg.seed);
    get_if_present(j, "threads", cfg.threads);
    return cfg;
}

} // namespace

std::string study_config_to_json(const StudyConfig& cfg) {
    return config_to_json_obj(cfg).dump(2) + "\n";
}

StudyConfig study_config_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("study configuration is not valid JSON");
    return config_from_json_obj(j);
}

StudyConfig load_study_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open study configuration: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return study_config_from_json(text);
}

void save_study_config(const StudyConfig& cfg, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f << study_config_to_json(cfg);
}

StudyConfig apply_overrides(const StudyConfig& cfg, const std::vector<std::string>& overrides) {
    json j = config_to_json_obj(cfg);
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override must look like key=value: " + ov);
        std::string key = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);
        std::string pointer = "/" + key;
        for (char& c : pointer)
            if (c == '.') c = '/';
        json parsed = json::parse(value, nullptr, false);
        if (parsed.is_discarded()) parsed = value;
        try {
            j[json::json_pointer(pointer)] = parsed;
        } catch (const json::exception& e) {
            throw ConfigError("cannot apply override '" + ov + "': " + e.what());
        }
    }
    return config_from_json_obj(j);
}

void run_study(const StudyConfig& cfg) {
    cfg.validate();
    StudyWriter writer(cfg);
    if (cfg.study == "motivation") {
        run_motivation_study(cfg, writer);
    } else if (cfg.study == "lw-extrapolation") {
        run_extrapolation_study(cfg, writer);
    } else if (cfg.study == "nw-2d") {
        run_sweep_study(cfg, make_wave2d_family(cfg.nx, cfg.ny), writer);
    } else {
        run_sweep_study(cfg, make_wave1d_family(cfg.n1d), writer);
    }
    writer.finish();
}

} // namespace sympmor
