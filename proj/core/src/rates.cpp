#include "darksearch/rates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace darksearch::rates {

namespace {

struct Mode {
    double rate;
    double real_part;
    double ground_weight;
    quantum::StateVector vec;
};

std::array<Mode, 3> sorted_modes(const quantum::LambdaParams& p) {
    const quantum::EffectivePropagator prop(p);
    if (!prop.diagonalizable())
        throw DefectiveMatrix("H_eff is defective at detuning " + std::to_string(p.detuning));
    std::array<Mode, 3> modes{};
    for (int j = 0; j < 3; ++j) {
        const quantum::StateVector v = prop.eigenvectors().col(j).normalized();
        modes[j] = Mode{-2.0 * prop.eigenvalues()(j).imag(), prop.eigenvalues()(j).real(),
                        0.5 * (std::norm(v(0)) + std::norm(v(1))), v};
    }
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.rate != b.rate) return a.rate < b.rate;
        return a.real_part < b.real_part;
    });
    return modes;
}

}  // namespace

void RateModel::validate() const {
    if (!(tau0 > 0.0)) throw InvalidArgument("RateModel: tau0 must be positive");
    if (!(delta_q > 0.0 && delta_q < delta_l))
        throw InvalidArgument("RateModel: need 0 < delta_q < delta_l");
}

RateModel characteristic_params(double rabi, double gamma, Warnings* warnings) {
    if (!(rabi > 0.0) || !(gamma > 0.0)) throw InvalidArgument("characteristic_params: rabi and gamma must be positive");
    if (rabi > 0.3 * gamma)
        warn(warnings, "characteristic_params: rabi = " + std::to_string(rabi / gamma) +
                           " gamma is outside the weak-driving regime (> 0.3 gamma)");
    const double r2 = rabi * rabi;
    return RateModel{gamma / r2, std::sqrt(2.0) * r2 / gamma, 0.5 * gamma};
}

RateModel characteristic_params(const quantum::LambdaParams& p, Warnings* warnings) {
    return characteristic_params(p.rabi, p.gamma, warnings);
}

double model_rate(const RateModel& m, double delta) {
    const double a = std::abs(delta);
    const double plateau = 1.0 / m.tau0;
    if (a < m.delta_q) {
        const double x = a / m.delta_q;
        return plateau * x * x;
    }
    if (a <= m.delta_l) return plateau;
    const double x = m.delta_l / a;
    return plateau * x * x;
}

GroundRates exact_ground_rates(const quantum::LambdaParams& p) {
    const auto modes = sorted_modes(p);
    return GroundRates{modes[0].rate, modes[1].rate, modes[0].ground_weight, modes[1].ground_weight};
}

std::vector<GroundRates> ground_rate_sweep(double rabi, double gamma, std::span<const double> detunings) {
    std::vector<GroundRates> out;
    out.reserve(detunings.size());
    quantum::StateVector prev_dark;
    bool have_prev = false;
    for (double delta : detunings) {
        const auto modes = sorted_modes(quantum::LambdaParams{rabi, gamma, delta});
        int dark = 0;
        int bright = 1;
        if (have_prev) {
            const double o0 = std::abs(prev_dark.dot(modes[0].vec));
            const double o1 = std::abs(prev_dark.dot(modes[1].vec));
            if (o1 > o0) std::swap(dark, bright);
        }
        out.push_back(GroundRates{modes[dark].rate, modes[bright].rate, modes[dark].ground_weight,
                                  modes[bright].ground_weight});
        prev_dark = modes[dark].vec;
        have_prev = true;
    }
    return out;
}

std::vector<RateComparison> model_discrepancy(const quantum::LambdaParams& p, std::span<const double> detunings) {
    const RateModel m = characteristic_params(p);
    std::vector<RateComparison> out;
    out.reserve(detunings.size());
    for (double delta : detunings) {
        const double exact = exact_ground_rates(p.with_detuning(delta)).gamma_minus;
        const double model = model_rate(m, delta);
        const double ratio = model > 0.0 ? exact / model : std::numeric_limits<double>::quiet_NaN();
        out.push_back(RateComparison{delta, exact, model, ratio});
    }
    return out;
}

}  // namespace darksearch::rates
