#include <algorithm>
#include <cmath>
#include <numbers>

#include "darksearch/levy_stats.hpp"

namespace darksearch::levy {

using std::numbers::pi;

void LevyParams::validate() const {
    if (!(mu > 0.0 && mu < 1.0)) throw InvalidArgument("mu must lie in (0, 1)");
    if (!(tau_b > 0.0) || !std::isfinite(tau_b)) throw InvalidArgument("tau_b must be positive");
    if (!(mean_recycle > 0.0) || !std::isfinite(mean_recycle)) throw InvalidArgument("mean recycling time must be positive");
    if (!(delta_pds > 0.0)) throw InvalidArgument("delta_pds must be positive");
}

TrappingTail trapping_tail_params(const rates::RateModel& m, double delta_pds) {
    m.validate();
    if (!(delta_pds > 0.0)) throw InvalidArgument("delta_pds must be positive");
    const double ratio = m.delta_q / delta_pds;
    TrappingTail t;
    t.mu = 0.5;
    t.tau_pds = m.tau0 * ratio * ratio;
    t.tau_b = pi * t.tau_pds / 16.0;
    return t;
}

double mean_recycling_time(double tau0, double delta_max, double delta_pds) {
    if (!(tau0 > 0.0)) throw InvalidArgument("tau0 must be positive");
    if (!(delta_pds > 0.0) || !(delta_max >= delta_pds))
        throw InvalidArgument("need 0 < delta_pds <= delta_max");
    return tau0 * delta_max / delta_pds;
}

LevyParams levy_params(const rates::RateModel& m, double delta_pds, double delta_max) {
    const TrappingTail t = trapping_tail_params(m, delta_pds);
    LevyParams lp;
    lp.mu = t.mu;
    lp.tau_b = t.tau_b;
    lp.tau_pds = t.tau_pds;
    lp.delta_pds = delta_pds;
    lp.mean_recycle = mean_recycling_time(m.tau0, delta_max, delta_pds);
    return lp;
}

double trapping_pdf_tail(double tau, const LevyParams& lp, Warnings* warnings) {
    lp.validate();
    if (!(tau > 0.0)) throw InvalidArgument("trapping_pdf_tail: tau must be positive");
    if (tau < lp.tau_b) warn(warnings, "trapping tail evaluated below tau_b; power law not valid there");
    return lp.mu * std::pow(lp.tau_b, lp.mu) / std::pow(tau, 1.0 + lp.mu);
}

double trapping_survival_tail(double tau, const LevyParams& lp) {
    lp.validate();
    if (!(tau > 0.0)) throw InvalidArgument("trapping_survival_tail: tau must be positive");
    return std::pow(lp.tau_b / tau, lp.mu);
}

double first_return_transform(double p_trap, double s) {
    return first_return_transform(p_trap, std::complex<double>(s, 0.0)).real();
}

std::complex<double> first_return_transform(double p_trap, std::complex<double> s) {
    if (!(p_trap > 0.0 && p_trap <= 1.0)) throw InvalidArgument("trap probability must lie in (0, 1]");
    if (!(s.real() > 0.0)) throw InvalidArgument("transform variable needs Re s > 0");
    const std::complex<double> z = std::exp(-s);
    const std::complex<double> lp = p_trap * z / (1.0 - z);
    return lp / (1.0 + lp);
}

double ensemble_trapped_fraction(double horizon, const LevyParams& lp, Warnings* warnings) {
    lp.validate();
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    const double correction = std::sin(pi * lp.mu) / pi * lp.mean_recycle /
                              (std::pow(lp.tau_b, lp.mu) * std::pow(horizon, 1.0 - lp.mu));
    if (horizon < 10.0 * std::max(lp.tau_b, lp.mean_recycle))
        warn(warnings, "horizon not asymptotic (T < 10 max(tau_b, <tau_r>)); f_E is indicative only");
    if (correction >= 1.0) warn(warnings, "f_E correction exceeds one; asymptotic formula has broken down");
    return 1.0 - correction;
}

double sample_levy_increment(double mu, Rng& rng) {
    if (!(mu > 0.0 && mu < 1.0)) throw InvalidArgument("mu must lie in (0, 1)");
    if (mu == 0.5) {
        const double z = rng.normal();
        return 0.5 * pi / (z * z);
    }
    // Kanter's representation of the unit one-sided stable law.
    const double u = rng.uniform(0.0, pi);
    const double w = rng.exponential();
    const double a = std::pow(std::sin(mu * u), mu / (1.0 - mu)) * std::sin((1.0 - mu) * u) /
                     std::pow(std::sin(u), 1.0 / (1.0 - mu));
    const double unit = std::pow(a / w, (1.0 - mu) / mu);
    return std::pow(std::tgamma(1.0 - mu), 1.0 / mu) * unit;
}

double levy_increment_cdf_half(double x) {
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    return std::erfc(std::sqrt(pi / (4.0 * x)));
}

TimeAverageSample sample_time_avg_trapped_fraction(double horizon, const LevyParams& lp, Rng& rng) {
    lp.validate();
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    const double xi = sample_levy_increment(lp.mu, rng);
    const double raw = 1.0 - xi * lp.mean_recycle / std::pow(lp.tau_b, lp.mu) * std::pow(horizon, lp.mu - 1.0);
    TimeAverageSample s;
    s.clamped = raw < 0.0 || raw > 1.0;
    s.value = std::clamp(raw, 0.0, 1.0);
    return s;
}

std::vector<double> pareto_sums(double mu, double tau_b, std::uint64_t count, std::size_t reps, Rng& rng) {
    if (!(mu > 0.0)) throw InvalidArgument("mu must be positive");
    if (!(tau_b > 0.0)) throw InvalidArgument("tau_b must be positive");
    if (count == 0 || reps == 0) throw InvalidArgument("pareto_sums: count and reps must be positive");
    std::vector<double> sums(reps, 0.0);
    for (auto& s : sums) {
        for (std::uint64_t i = 0; i < count; ++i) s += tau_b * std::pow(rng.uniform(), -1.0 / mu);
    }
    return sums;
}

namespace {
double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    const double upper = v[n / 2];
    if (n % 2 == 1) return upper;
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2)));
}
}  // namespace

CltFit generalized_clt_check(double mu, double tau_b, std::span<const std::uint64_t> counts, std::size_t reps,
                             Rng& rng) {
    if (counts.size() < 2) throw InvalidArgument("generalized_clt_check: need at least two counts");
    CltFit fit;
    for (const std::uint64_t n : counts) {
        fit.counts.push_back(static_cast<double>(n));
        fit.medians.push_back(median(pareto_sums(mu, tau_b, n, reps, rng)));
    }
    const PowerLawFit pl = fit_power_law(fit.counts, fit.medians);
    fit.slope = pl.slope;
    fit.slope_stderr = pl.slope_stderr;
    return fit;
}

double characteristic_width(const rates::RateModel& m, double horizon, double mu) {
    m.validate();
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    return m.delta_q * std::pow(m.tau0 / horizon, mu);
}

double distribution_height(const LevyParams& lp, double delta_t) {
    lp.validate();
    if (!(delta_t > 0.0)) throw InvalidArgument("delta_T must be positive");
    return std::pow(lp.tau_pds / lp.tau_b, lp.mu) * std::sin(pi * lp.mu) / (pi * lp.mu * delta_t);
}

FrequencyDistribution frequency_distribution(const rates::RateModel& m, const LevyParams& lp, double horizon,
                                             std::span<const double> q_grid) {
    FrequencyDistribution d;
    d.horizon = horizon;
    d.width = characteristic_width(m, horizon, lp.mu);
    d.height = distribution_height(lp, d.width);
    d.q.assign(q_grid.begin(), q_grid.end());
    d.form.reserve(d.q.size());
    for (const double q : d.q) d.form.push_back(form_factor(q, lp.mu));
    return d;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_power_law: need matching spans of size >= 2");
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("fit_power_law: values must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit_power_law: x values must not all coincide");
    PowerLawFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ly[i] - f.intercept - f.slope * lx[i];
            sse += r * r;
        }
        f.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

}  // namespace darksearch::levy
