#pragma once

#include "sympmor/hamiltonian.hpp"
#include "sympmor/mapping.hpp"
#include "sympmor/snapshots.hpp"

#include <functional>

namespace sympmor {

/// Full-state decoder z -> y used by the error measures, so that reduced
/// models over Mapping and over JointQuadraticMap share one code path.
using Decoder = std::function<Matrix(const Matrix&)>; ///< column-wise decode

Decoder make_decoder(const Mapping& m);
Decoder make_decoder(const JointQuadraticMap& m);

/// Mean over parameter blocks of the relative squared projection error
///   || X - X_rec ||_F^2 / || X ||_F^2
/// of raw position (q) and momentum (p) snapshots, where each column is
/// encoded and decoded through the mapping.
struct ProjectionErrors {
    double q = 0.0;
    double p = 0.0;
};
ProjectionErrors projection_errors(const SnapshotSet& snapshots, const Mapping& m);

/// Relative squared trajectory error || Y - Y_rec ||_F^2 / || Y ||_F^2 for
/// one run; Y holds raw full states, Y_rec the decoded reduced trajectory,
/// column-aligned.
double relative_state_error(const Matrix& Y, const Matrix& Y_rec);

/// Same from the reduced trajectory directly.
double relative_state_error(const Matrix& Y, const Matrix& Z, const Decoder& decode);

/// Column-wise relative squared error e_k = ||Y_k - Yrec_k||^2 / ||Y_k||^2.
Vector pointwise_state_error(const Matrix& Y, const Matrix& Y_rec);

/// Energies H(y_k) of the columns of a full-state trajectory.
Vector energy_series(const Matrix& Y, const HamiltonianFOM& fom);

/// Energy drift |H(y_k) - H(y_0)| along a (decoded) trajectory; the
/// conserved-quantity check for reduced models of autonomous systems.
Vector hamiltonian_drift_series(const Matrix& Y_rec, const HamiltonianFOM& fom);

/// Energy mismatch |H(yrec_k) - H(yfom_k)| against a reference trajectory.
Vector hamiltonian_mismatch_series(const Matrix& Y_rec, const Matrix& Y_fom,
                                   const HamiltonianFOM& fom);

/// Incremental version of relative_state_error for streamed FOM states.
class StateErrorAccumulator {
public:
    void add(const Vector& y_ref_state, const Vector& y_approx);
    double value() const;     ///< sum ||diff||^2 / sum ||ref||^2
    Vector pointwise() const; ///< per-column relative squared errors

private:
    double num_ = 0.0;
    double den_ = 0.0;
    std::vector<double> pointwise_;
};

} // namespace sympmor
