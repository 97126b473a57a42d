#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "darksearch/levy_stats.hpp"

namespace darksearch::levy {

namespace {

void check_mu(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw InvalidArgument("form factor: mu must lie in (0, 1)");
}

bool is_half(double mu) { return mu == 0.5; }

double integrate(auto&& f, double a, double b, double rel_tol) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, rel_tol, &err);
    return v;
}

}  // namespace

double form_factor_quadrature(double q, double mu, double rel_tol) {
    check_mu(mu);
    const double a = std::pow(std::abs(q), 1.0 / mu);
    if (a == 0.0) return 1.0;
    if (a <= 120.0) {
        // u = v^(1/mu) removes the u^(mu-1) endpoint singularity:
        //   G(q) = int_0^1 exp(-(1 - v^(1/mu)) a) dv,  a = |q|^(1/mu).
        const auto f = [&](double v) { return std::exp(-(1.0 - std::pow(v, 1.0 / mu)) * a); };
        return integrate(f, 0.0, 1.0, rel_tol);
    }
    // w = (1 - u) a: G = (mu/a) int_0^a (1 - w/a)^(mu-1) exp(-w) dw; beyond w = 60
    // the remainder is below exp(-60) a/mu relative to G.
    const auto f = [&](double w) { return std::pow(1.0 - w / a, mu - 1.0) * std::exp(-w); };
    return mu / a * integrate(f, 0.0, 60.0, rel_tol);
}

double form_factor(double q, double mu) {
    check_mu(mu);
    if (!is_half(mu)) return form_factor_quadrature(q, mu);
    const double aq = std::abs(q);
    if (aq < 1e-4) {
        const double q2 = aq * aq;
        return 1.0 - 2.0 * q2 / 3.0 + 4.0 * q2 * q2 / 15.0;
    }
    return dawson(aq) / aq;
}

double form_factor_area(double mu) {
    check_mu(mu);
    const double g = std::tgamma(1.0 + mu);
    return 2.0 * g * g * std::tgamma(1.0 - mu);
}

double peak_fraction(double mu) {
    check_mu(mu);
    const double inner = integrate([&](double q) { return form_factor(q, mu); }, 0.0, 1.0, 1e-12);
    return inner / (0.5 * form_factor_area(mu));
}

double form_factor_fwhm(double mu) {
    check_mu(mu);
    const auto f = [&](double q) { return form_factor(q, mu) - 0.5; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    double lo = 0.05;
    double hi = 1.0;
    while (f(hi) > 0.0) hi *= 2.0;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return a + b;  // 2 * midpoint of the final bracket
}

namespace {

std::vector<double> log_nodes(double q_min, double q_max, std::size_t points_per_decade) {
    if (!(q_min > 0.0 && q_max > q_min)) throw InvalidArgument("FormFactorTable: need 0 < q_min < q_max");
    const auto n = static_cast<std::size_t>(std::ceil(std::log10(q_max / q_min) * static_cast<double>(points_per_decade))) + 1;
    const double step = std::log(q_max / q_min) / static_cast<double>(n - 1);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = q_min * std::exp(step * static_cast<double>(i));
    return q;
}

std::vector<double> log_values(const std::vector<double>& q, double mu) {
    check_mu(mu);
    std::vector<double> out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = std::log(form_factor_quadrature(q[i], mu, 1e-12));
    return out;
}

}  // namespace

FormFactorTable::FormFactorTable(double mu, double q_min, double q_max, std::size_t points_per_decade)
    : FormFactorTable(mu, log_nodes(q_min, q_max, points_per_decade)) {}

FormFactorTable::FormFactorTable(double mu, std::vector<double> nodes) : mu_(mu), q_(std::move(nodes)) {
    const std::vector<double> lg = log_values(q_, mu);
    g_.resize(lg.size());
    std::transform(lg.begin(), lg.end(), g_.begin(), [](double v) { return std::exp(v); });
    const double step = std::log(q_[1] / q_[0]);
    const auto slope = [mu](double q) {
        constexpr double h = 1e-4;
        return (std::log(form_factor_quadrature(q * std::exp(h), mu, 1e-13)) -
                std::log(form_factor_quadrature(q * std::exp(-h), mu, 1e-13))) / (2.0 * h);
    };
    log_g_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(lg.begin(), lg.end(), std::log(q_.front()), step,
                                                                         slope(q_.front()), slope(q_.back()));
}

double FormFactorTable::operator()(double q) const {
    const double aq = std::abs(q);
    if (aq < q_.front() || aq > q_.back()) return form_factor_quadrature(aq, mu_, 1e-12);
    return std::exp(log_g_(std::log(aq)));
}

double trapped_detuning_density(double delta, double delta_t, double trapped_fraction, double mu) {
    if (!(delta_t > 0.0)) throw InvalidArgument("trapped_detuning_density: delta_t must be positive");
    return trapped_fraction * form_factor(delta / delta_t, mu) / (delta_t * form_factor_area(mu));
}

}  // namespace darksearch::levy
