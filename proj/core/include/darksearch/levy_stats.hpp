#pragma once

// Closed-form Levy/renewal predictions for the random search and the
// estimators that confront them with simulated ensembles.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "darksearch/errors.hpp"
#include "darksearch/rates.hpp"
#include "darksearch/rng.hpp"

namespace darksearch::levy {

/// Large-time tail of the trapping-time density, mu tau_b^mu / tau^(1+mu).
struct TrappingTail {
    double mu = 0.5;
    double tau_b = 0.0;
    /// tau0 (delta_Q/delta_pds)^2: quadratic-branch waiting time at the PDS edge.
    double tau_pds = 0.0;
};

struct LevyParams {
    double mu = 0.5;
    double tau_b = 0.0;
    double mean_recycle = 0.0;
    double delta_pds = 0.0;
    double tau_pds = 0.0;

    void validate() const;
};

/// mu = 1/2, tau_b = tau0 pi (delta_Q/delta_pds)^2 / 16.
[[nodiscard]] TrappingTail trapping_tail_params(const rates::RateModel& m, double delta_pds);
/// Trapping tail plus the mean recycling time for a uniform redraw on [-delta_max, delta_max].
[[nodiscard]] LevyParams levy_params(const rates::RateModel& m, double delta_pds, double delta_max);

/// Warns below tau_b, where the power law is not valid.
[[nodiscard]] double trapping_pdf_tail(double tau, const LevyParams& lp, Warnings* warnings = nullptr);
/// (tau_b/tau)^mu.
[[nodiscard]] double trapping_survival_tail(double tau, const LevyParams& lp);

/// <tau_r> = tau0 delta_max / delta_pds: geometric number of plateau dwells
/// before a uniform redraw lands within delta_pds.
[[nodiscard]] double mean_recycling_time(double tau0, double delta_max, double delta_pds);

/// Discrete Laplace transform of the first-return step distribution,
/// L P1 = L Ptrap / (1 + L Ptrap) with constant trap probability.
[[nodiscard]] double first_return_transform(double p_trap, double s);
[[nodiscard]] std::complex<double> first_return_transform(double p_trap, std::complex<double> s);

/// f_E(T) = 1 - sin(pi mu)/pi * <tau_r> / (tau_b^mu T^(1-mu)).
[[nodiscard]] double ensemble_trapped_fraction(double horizon, const LevyParams& lp, Warnings* warnings = nullptr);

/// One-sided stable variate normalized so E exp(-s xi) = exp(-Gamma(1-mu) s^mu).
/// For mu = 1/2 this is xi = (pi/2)/Z^2 with Z standard normal.
[[nodiscard]] double sample_levy_increment(double mu, Rng& rng);
/// Closed-form CDF of the mu = 1/2 increment: erfc(sqrt(pi/(4x))).
[[nodiscard]] double levy_increment_cdf_half(double x);

struct TimeAverageSample {
    double value = 0.0;
    bool clamped = false;
};

/// f_T(T) = 1 - xi <tau_r>/tau_b^mu T^(mu-1), clamped to [0, 1].
[[nodiscard]] TimeAverageSample sample_time_avg_trapped_fraction(double horizon, const LevyParams& lp, Rng& rng);

/// Sums of `count` Pareto variates with survival (tau_b/t)^mu, t >= tau_b.
[[nodiscard]] std::vector<double> pareto_sums(double mu, double tau_b, std::uint64_t count, std::size_t reps, Rng& rng);

struct CltFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    std::vector<double> counts;
    std::vector<double> medians;
};

/// Log-log regression of the median of T_N against N.
[[nodiscard]] CltFit generalized_clt_check(double mu, double tau_b, std::span<const std::uint64_t> counts,
                                           std::size_t reps, Rng& rng);

/// delta_T = delta_Q (tau0/T)^mu, equivalently R(delta_T) T = 1 on the dip.
[[nodiscard]] double characteristic_width(const rates::RateModel& m, double horizon, double mu);
/// h(T) = (tau_pds/tau_b)^mu sin(pi mu) / (pi mu delta_T).
[[nodiscard]] double distribution_height(const LevyParams& lp, double delta_t);

// ---- form factor -------------------------------------------------------------

/// D(x) = exp(-x^2) int_0^x exp(t^2) dt, absolute error < 1e-15 for all finite x.
[[nodiscard]] double dawson(double x);

/// G(q) = mu int_0^1 u^(mu-1) exp(-(1-u) |q|^(1/mu)) du; D(q)/q at mu = 1/2.
[[nodiscard]] double form_factor(double q, double mu);
/// Adaptive quadrature of the defining integral regardless of mu.
[[nodiscard]] double form_factor_quadrature(double q, double mu, double rel_tol = 1e-10);
/// Full-line area 2 Gamma(1+mu)^2 Gamma(1-mu); pi^(3/2)/2 at mu = 1/2.
[[nodiscard]] double form_factor_area(double mu);
/// Mass of G within |q| <= 1 relative to its full-line area.
[[nodiscard]] double peak_fraction(double mu);
/// Full width at half maximum of G.
[[nodiscard]] double form_factor_fwhm(double mu);

/// G tabulated on a geometric q grid; cubic B-spline of log G in log q.
class FormFactorTable {
public:
    explicit FormFactorTable(double mu, double q_min = 1e-3, double q_max = 1e3, std::size_t points_per_decade = 128);

    [[nodiscard]] double operator()(double q) const;
    [[nodiscard]] double mu() const { return mu_; }
    [[nodiscard]] const std::vector<double>& nodes() const { return q_; }
    [[nodiscard]] const std::vector<double>& values() const { return g_; }

private:
    FormFactorTable(double mu, std::vector<double> nodes);

    double mu_;
    std::vector<double> q_;
    std::vector<double> g_;
    boost::math::interpolators::cardinal_cubic_b_spline<double> log_g_;
};

struct FrequencyDistribution {
    double horizon = 0.0;
    double height = 0.0;  ///< h(T)
    double width = 0.0;   ///< delta_T
    std::vector<double> q;
    std::vector<double> form;  ///< G(q) on the q grid
};

[[nodiscard]] FrequencyDistribution frequency_distribution(const rates::RateModel& m, const LevyParams& lp,
                                                           double horizon, std::span<const double> q_grid);

/// Normalized density of trapped final detunings, f_E G(delta/delta_T)/(delta_T area).
[[nodiscard]] double trapped_detuning_density(double delta, double delta_t, double trapped_fraction, double mu);

// ---- ensemble summaries ---------------------------------------------------------

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    double density = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct EnsembleSummary {
    double horizon = 0.0;
    std::size_t n_trajectories = 0;
    double trapped_fraction = 0.0;
    double trapped_fraction_err = 0.0;  ///< binomial standard error
    Interval trapped_fraction_wilson;   ///< 95% Wilson score interval
    std::vector<HistogramBin> histogram;
    double fitted_width = 0.0;  ///< delta_T from the f_peak quantile of trapped |delta|
    double peak_fraction = 0.0; ///< trapped finals with |delta| <= analytic delta_T
};

struct HistogramSpec {
    int bins_per_decade = 25;
    double min_abs_detuning = 1e-8;
    double max_abs_detuning = 0.0;  ///< 0: use the largest |delta|
};

/// Mirrored log-spaced histogram in |delta|; a central bin (-lo, lo) takes the
/// finals below the first edge. Integrates to one.
[[nodiscard]] std::vector<HistogramBin> detuning_histogram(std::span<const double> finals, const HistogramSpec& spec);

[[nodiscard]] Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

/// Quantile estimate of delta_T: the |delta| below which a fraction f_peak(mu)
/// of the trapped finals lies.
[[nodiscard]] double estimate_width(std::span<const double> finals, double delta_pds, double mu);

[[nodiscard]] EnsembleSummary summarize_ensemble(std::span<const double> finals, double horizon, const LevyParams& lp,
                                                 double delta_t, const HistogramSpec& spec = {});

}  // namespace darksearch::levy

namespace darksearch::trajectory {
struct TrajectoryRecord;
}

namespace darksearch::levy {
/// Records must share horizon and configuration.
[[nodiscard]] EnsembleSummary summarize_ensemble(std::span<const trajectory::TrajectoryRecord> records,
                                                 const LevyParams& lp, double delta_t, const HistogramSpec& spec = {});

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

/// Least-squares line through (log x, log y).
[[nodiscard]] PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace darksearch::levy
