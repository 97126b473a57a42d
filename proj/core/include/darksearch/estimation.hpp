#pragma once

// Fisher information of a uniform frequency scan versus the information
// equivalent of the random search.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "darksearch/errors.hpp"
#include "darksearch/quantum_core.hpp"

namespace darksearch::estimation {

struct ScanConfig {
    double delta_max = 0.1;
    double horizon = 6e6;
    double rel_tolerance = 1e-6;
    /// Half-width of the window around resonance left out of the quadrature;
    /// its contribution is added as exclusion * integrand(exclusion).
    double exclusion = 1e-4;

    void validate() const;
};

struct VarianceTerms {
    double rate = 0.0;                    ///< R~ = Gamma rho_22
    std::array<double, 2> correlation{};  ///< int_0^inf G~_i(tau) dtau per channel
    double variance = 0.0;                ///< R~ + 2 sum_i int G~_i

    [[nodiscard]] double fano() const { return variance / rate; }
};

[[nodiscard]] VarianceTerms photocount_variance_terms(const quantum::LambdaParams& p);
/// V(delta) in photons^2 per unit time.
[[nodiscard]] double photocount_variance_rate(const quantum::LambdaParams& p);

struct RateDerivative {
    double value = 0.0;      ///< Richardson-extrapolated dR~/d delta
    double centered = 0.0;   ///< plain centered difference at step h
    double step = 0.0;
    double discrepancy = 0.0;  ///< |value - centered|
};

/// Step is min(h, |delta|/2) so the stencil never touches resonance.
[[nodiscard]] RateDerivative rate_derivative(const quantum::LambdaParams& p, double h = 1e-4);

/// (dR~/d delta)^2 / V at p.detuning.
[[nodiscard]] double scan_integrand(const quantum::LambdaParams& p);

struct ScanInformation {
    double information = 0.0;
    double error_estimate = 0.0;
    double window_contribution = 0.0;  ///< already included in `information`
};

/// I = (T/2 delta_max) int_{-delta_max}^{delta_max} (dR~/d delta)^2 / V d delta.
[[nodiscard]] ScanInformation scan_fisher_information(const ScanConfig& cfg, const quantum::LambdaParams& p);

/// Sigma-equivalent of the 59% interval as quoted.
inline constexpr double kQuotedSigmaEquivalent = 0.82;

/// (0.82 / delta_T)^2.
[[nodiscard]] double random_search_information(double delta_t);

/// sqrt(2) erf^-1(fraction): the Gaussian half-width holding `fraction` of the mass.
[[nodiscard]] double gaussian_sigma_equivalent(double central_fraction);

/// Width delta_T = delta_Q (tau0/T)^(1/2) of the trapped distribution for p.
[[nodiscard]] double search_width(const quantum::LambdaParams& p, double horizon);

struct CrossoverOptions {
    double rel_tolerance = 1e-6;
    double exclusion = 1e-4;
    /// Empty: (delta_Q, delta_L) of the rate model.
    std::optional<std::array<double, 2>> bracket;
};

/// delta_max at which I_scan equals I_aut. delta_pds only validates the bracket.
[[nodiscard]] double crossover_delta_max(const quantum::LambdaParams& p, double delta_pds, double horizon,
                                         const CrossoverOptions& opts = {});

struct FisherResult {
    std::vector<double> delta_max;
    std::vector<double> scan_information;
    std::vector<double> search_information;
    std::vector<bool> outside_validity;  ///< delta_max < delta_Q
    std::optional<double> crossover;
};

[[nodiscard]] FisherResult fisher_sweep(const quantum::LambdaParams& p, double delta_pds, double horizon,
                                        std::span<const double> delta_max_grid, const CrossoverOptions& opts = {});

/// Two terms of the Gaussian Fisher information for N equally weighted
/// points with diagonal covariance: sum (n_k')^2/v_k and (1/2) sum (v_k'/v_k)^2.
struct DiscreteTerms {
    double mean_term = 0.0;
    double covariance_term = 0.0;
};

[[nodiscard]] DiscreteTerms discrete_information_terms(const quantum::LambdaParams& p, double delta_max, double horizon,
                                                       std::size_t n_points);

}  // namespace darksearch::estimation
