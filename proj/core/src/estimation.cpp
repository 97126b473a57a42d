#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

#include "darksearch/estimation.hpp"
#include "darksearch/levy_stats.hpp"
#include "darksearch/rates.hpp"

namespace darksearch::estimation {

using quantum::LambdaParams;

void ScanConfig::validate() const {
    if (!(delta_max > 0.0) || !std::isfinite(delta_max)) throw InvalidArgument("delta_max must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
    if (!(rel_tolerance > 0.0)) throw InvalidArgument("quadrature tolerance must be positive");
    if (!(exclusion > 0.0) || exclusion >= delta_max)
        throw InvalidArgument("exclusion window must lie in (0, delta_max)");
}

VarianceTerms photocount_variance_terms(const LambdaParams& p) {
    const quantum::CountingMoments m = quantum::counting_moments(p);
    VarianceTerms t;
    t.rate = std::max(m.channel_rate[0] + m.channel_rate[1], 0.0);
    t.correlation = m.residual_integral;
    t.variance = t.rate + 2.0 * (t.correlation[0] + t.correlation[1]);
    return t;
}

double photocount_variance_rate(const LambdaParams& p) { return photocount_variance_terms(p).variance; }

RateDerivative rate_derivative(const LambdaParams& p, double h) {
    if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    const double d = p.detuning;
    RateDerivative out;
    out.step = std::min(h, 0.5 * std::abs(d));
    if (!(out.step > 0.0)) throw InvalidArgument("rate_derivative: detuning must be nonzero");
    const auto diff = [&](double s) {
        return (quantum::mean_fluorescence_rate(p.with_detuning(d + s)) -
                quantum::mean_fluorescence_rate(p.with_detuning(d - s))) / (2.0 * s);
    };
    out.centered = diff(out.step);
    const double half = diff(0.5 * out.step);
    out.value = (4.0 * half - out.centered) / 3.0;
    out.discrepancy = std::abs(out.value - out.centered);
    return out;
}

double scan_integrand(const LambdaParams& p) {
    const double v = photocount_variance_rate(p);
    if (!(v > 0.0)) throw NumericalError("non-positive photocount variance at delta = " + std::to_string(p.detuning));
    const double r = rate_derivative(p).value;
    return r * r / v;
}

ScanInformation scan_fisher_information(const ScanConfig& cfg, const LambdaParams& p) {
    cfg.validate();
    p.validate();
    const auto f = [&](double delta) { return scan_integrand(p.with_detuning(delta)); };

    // The integrand is even; integrate one side and double.
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0;
    double l1 = 0.0;
    const double half = GK::integrate(f, cfg.exclusion, cfg.delta_max, 18, cfg.rel_tolerance, &err, &l1);
    if (!(err <= cfg.rel_tolerance * std::max(std::abs(half), 1e-300) * 10.0))
        throw QuadratureNotConverged("scan information: estimated error " + std::to_string(err) + " on " +
                                     std::to_string(half));

    const double window = cfg.exclusion * f(cfg.exclusion);
    const double prefactor = cfg.horizon / (2.0 * cfg.delta_max);
    ScanInformation out;
    out.window_contribution = prefactor * 2.0 * window;
    out.information = prefactor * 2.0 * (half + window);
    out.error_estimate = prefactor * 2.0 * err;
    return out;
}

double random_search_information(double delta_t) {
    if (!(delta_t > 0.0)) throw InvalidArgument("delta_T must be positive");
    return (kQuotedSigmaEquivalent / delta_t) * (kQuotedSigmaEquivalent / delta_t);
}

double gaussian_sigma_equivalent(double central_fraction) {
    if (!(central_fraction > 0.0 && central_fraction < 1.0)) throw InvalidArgument("fraction must lie in (0, 1)");
    return std::sqrt(2.0) * boost::math::erf_inv(central_fraction);
}

double search_width(const LambdaParams& p, double horizon) {
    const rates::RateModel m = rates::characteristic_params(p);
    return levy::characteristic_width(m, horizon, 0.5);
}

double crossover_delta_max(const LambdaParams& p, double delta_pds, double horizon, const CrossoverOptions& opts) {
    p.validate();
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    const rates::RateModel m = rates::characteristic_params(p);
    if (!(delta_pds > 0.0)) throw InvalidArgument("delta_pds must be positive");
    const auto [lo, hi] = opts.bracket.value_or(std::array<double, 2>{m.delta_q, m.delta_l});
    if (!(lo > opts.exclusion && hi > lo)) throw InvalidArgument("crossover bracket must be increasing and clear the exclusion window");

    const double i_aut = random_search_information(search_width(p, horizon));
    const auto g = [&](double dm) {
        ScanConfig cfg;
        cfg.delta_max = dm;
        cfg.horizon = horizon;
        cfg.rel_tolerance = opts.rel_tolerance;
        cfg.exclusion = opts.exclusion;
        // Relative difference keeps the root independent of T's magnitude.
        return scan_fisher_information(cfg, p).information / i_aut - 1.0;
    };
    const double g_lo = g(lo);
    const double g_hi = g(hi);
    if (g_lo * g_hi > 0.0)
        throw NoCrossover("scan and search information do not cross on [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    std::uintmax_t iters = 100;
    const auto tol = [](double a, double b) { return std::abs(b - a) < 1e-11; };
    const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, tol, iters);
    return 0.5 * (a + b);
}

FisherResult fisher_sweep(const LambdaParams& p, double delta_pds, double horizon, std::span<const double> grid,
                          const CrossoverOptions& opts) {
    const rates::RateModel m = rates::characteristic_params(p);
    const double i_aut = random_search_information(search_width(p, horizon));
    FisherResult r;
    for (const double dm : grid) {
        ScanConfig cfg;
        cfg.delta_max = dm;
        cfg.horizon = horizon;
        cfg.rel_tolerance = opts.rel_tolerance;
        cfg.exclusion = opts.exclusion;
        r.delta_max.push_back(dm);
        r.scan_information.push_back(scan_fisher_information(cfg, p).information);
        r.search_information.push_back(i_aut);
        r.outside_validity.push_back(dm < m.delta_q);
    }
    try {
        r.crossover = crossover_delta_max(p, delta_pds, horizon, opts);
    } catch (const NoCrossover&) {
        r.crossover.reset();
    }
    return r;
}

DiscreteTerms discrete_information_terms(const LambdaParams& p, double delta_max, double horizon,
                                         std::size_t n_points) {
    if (n_points < 2) throw InvalidArgument("need at least two scan points");
    if (!(delta_max > 0.0) || !(horizon > 0.0)) throw InvalidArgument("delta_max and horizon must be positive");
    const double t = horizon / static_cast<double>(n_points);
    constexpr double h = 1e-4;
    DiscreteTerms out;
    for (std::size_t k = 0; k < n_points; ++k) {
        // Midpoints keep the grid off resonance for even and odd N alike.
        const double delta = -delta_max + (static_cast<double>(k) + 0.5) * 2.0 * delta_max / static_cast<double>(n_points);
        const LambdaParams pk = p.with_detuning(delta);
        const double v = photocount_variance_rate(pk);
        const double dr = rate_derivative(pk, h).value;
        const double s = std::min(h, 0.5 * std::abs(delta));
        const double dv = (photocount_variance_rate(p.with_detuning(delta + s)) -
                           photocount_variance_rate(p.with_detuning(delta - s))) / (2.0 * s);
        out.mean_term += (dr * t) * (dr * t) / (v * t);
        out.covariance_term += 0.5 * (dv / v) * (dv / v);
    }
    return out;
}

}  // namespace darksearch::estimation
