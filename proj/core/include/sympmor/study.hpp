#pragma once

#include "sympmor/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sympmor {

/// Everything a reproduction run needs, serializable to/from JSON.
struct StudyConfig {
    std::string study; ///< one of known_studies()

    // Spatial discretization (1D studies use n1d; the 2D study nx/ny).
    Index n1d = 2048;
    Index nx = 100;
    Index ny = 100;

    std::vector<double> train_mu;
    std::vector<double> test_mu;

    double dt = 1e-3;     ///< sampling/integration step
    double train_T = 4.0; ///< training horizon
    double eval_T = -1.0; ///< evaluation horizon; <= 0 means train_T
    Index eval_stride = 1; ///< evaluate/export every k-th step of long runs

    std::vector<Index> reduced_dims; ///< even values 2r
    double gamma_q = 0.0;
    double gamma_p = 0.0;
    std::vector<double> gamma_grid; ///< regularization sweep values

    std::string reference = "zero"; ///< zero | initial-condition
    double momentum_scale = 1.0;
    std::vector<std::string> methods; ///< lsl | smg-qmcl | galerkin-bq | naive-qm

    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

/// Names run_study understands.
std::vector<std::string> known_studies();

/// Paper-matched default configuration for a named study; throws ConfigError
/// for unknown names (message lists the valid ones).
StudyConfig default_study_config(const std::string& study);

/// JSON (de)serialization and file helpers.
std::string study_config_to_json(const StudyConfig& cfg);
StudyConfig study_config_from_json(const std::string& text);
StudyConfig load_study_config(const std::string& path);
void save_study_config(const StudyConfig& cfg, const std::string& path);

/// Apply "dotted.path=value" overrides on the JSON form of a config; values
/// parse as JSON when possible, else as strings.
StudyConfig apply_overrides(const StudyConfig& cfg, const std::vector<std::string>& overrides);

/// Run the full pipeline for one study: generate snapshots, fit bases, build
/// the reduced models, integrate them, and evaluate.  Writes into
/// cfg.out_dir:
///   config.json    resolved configuration
///   metrics.csv    study,method,two_r,gamma,dataset,mu,metric,value
///   energy/*.csv   energy-error time series per run
///   series/*.csv   pointwise state-error series (extrapolation study)
///   traj/*.mrx1    reduced trajectories
///   summary.json   per-run stability flags, Newton statistics, timings
/// Individual unstable runs (Newton failure, blow-up) are recorded in the
/// summary rather than aborting the study.
void run_study(const StudyConfig& cfg);

} // namespace sympmor
