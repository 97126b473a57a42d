#pragma once

// Frequency-dependent emission rates: the exact ground-manifold rates from the
// eigenvalues of H_eff, and the three-branch rate model (quadratic dip,
// plateau, Lorentzian wing) used by the statistical analysis.

#include <span>
#include <vector>

#include "darksearch/errors.hpp"
#include "darksearch/quantum_core.hpp"

namespace darksearch::rates {

/// Piecewise emission rate: tau0^-1 (d/dQ)^2 inside the dip, tau0^-1 on the
/// plateau, tau0^-1 (dL/d)^2 in the wings.
struct RateModel {
    double tau0 = 0.0;
    double delta_q = 0.0;
    double delta_l = 0.0;

    void validate() const;
};

struct GroundRates {
    double gamma_minus = 0.0;  ///< dark (pseudo-dark) branch
    double gamma_plus = 0.0;   ///< bright branch
    double weight_minus = 0.0;
    double weight_plus = 0.0;
};

/// Weak-driving values tau0 = gamma/rabi^2, delta_Q = sqrt(2) rabi^2/gamma,
/// delta_L = gamma/2. Warns above rabi = 0.3 gamma.
[[nodiscard]] RateModel characteristic_params(double rabi, double gamma = 1.0, Warnings* warnings = nullptr);
[[nodiscard]] RateModel characteristic_params(const quantum::LambdaParams& p, Warnings* warnings = nullptr);

[[nodiscard]] double model_rate(const RateModel& m, double delta);

/// The two smallest decay rates -2 Im(lambda_j) of H_eff with their ground-state
/// weights (1/2) sum_{n=0,1} |<n|psi_j>|^2, the chance that a jump into |0> or
/// |1> (equally likely) populates mode j. Eigenvectors are unit-normalized.
[[nodiscard]] GroundRates exact_ground_rates(const quantum::LambdaParams& p);

/// Ground rates over a detuning grid with the dark/bright labels following
/// eigenvector continuity from one grid point to the next.
[[nodiscard]] std::vector<GroundRates> ground_rate_sweep(double rabi, double gamma, std::span<const double> detunings);

struct RateComparison {
    double delta = 0.0;
    double exact = 0.0;  ///< Gamma_-(delta)
    double model = 0.0;  ///< R(delta) of the piecewise model
    double ratio = 0.0;  ///< exact / model, NaN where the model vanishes
};

/// Pointwise exact-vs-model comparison.
[[nodiscard]] std::vector<RateComparison> model_discrepancy(const quantum::LambdaParams& p, std::span<const double> detunings);

}  // namespace darksearch::rates
