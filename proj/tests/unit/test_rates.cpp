#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "darksearch/rates.hpp"

using namespace darksearch;
using namespace darksearch::rates;

namespace {

const double kRabi = 0.1 / std::sqrt(2.0);

quantum::LambdaParams params(double delta) { return {kRabi, 1.0, delta}; }

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return out;
}

// Decay rates of H - (i gamma/2)|2><2| from an independent eigen-solve, ascending.
std::vector<double> oracle_rates(double delta) {
    oracle::Mat3 heff = oracle::hamiltonian({kRabi, 1.0, delta});
    heff(2, 2) += oracle::Complex(0.0, -0.5);
    Eigen::ComplexEigenSolver<oracle::Mat3> es(heff);
    std::vector<double> r;
    for (int i = 0; i < 3; ++i) r.push_back(-2.0 * es.eigenvalues()(i).imag());
    std::sort(r.begin(), r.end());
    return r;
}

}  // namespace

TEST_SUITE("rate model") {
    TEST_CASE("characteristic parameters") {
        const RateModel m = characteristic_params(kRabi);
        CHECK(m.tau0 == doctest::Approx(200.0).epsilon(1e-14));
        CHECK(m.delta_q == doctest::Approx(7.0710678118654752e-3).epsilon(1e-14));
        CHECK(m.delta_l == 0.5);

        Warnings w;
        CHECK(characteristic_params(1.0, 1.0, &w).tau0 == doctest::Approx(1.0));
        CHECK(w.size() == 1);

        Warnings quiet;
        (void)characteristic_params(0.3, 1.0, &quiet);
        CHECK(quiet.empty());

        const RateModel doubled = characteristic_params(2.0 * kRabi);
        CHECK(doubled.tau0 == doctest::Approx(m.tau0 / 4.0).epsilon(1e-14));
        CHECK(doubled.delta_q == doctest::Approx(m.delta_q * 4.0).epsilon(1e-14));

        CHECK(characteristic_params(quantum::LambdaParams{kRabi, 2.0, 0.0}).delta_l == 1.0);
        CHECK_THROWS_AS((void)characteristic_params(0.0, 1.0), InvalidArgument);
    }

    TEST_CASE("piecewise rate") {
        const RateModel m = characteristic_params(kRabi);
        CHECK(model_rate(m, 0.0) == 0.0);
        CHECK(model_rate(m, m.delta_q) == doctest::Approx(1.0 / m.tau0).epsilon(1e-14));
        CHECK(model_rate(m, -m.delta_l) == doctest::Approx(1.0 / m.tau0).epsilon(1e-14));
        CHECK(model_rate(m, 2.0 * m.delta_l) == doctest::Approx(0.25 / m.tau0).epsilon(1e-14));
        CHECK(model_rate(m, 0.5 * m.delta_q) == doctest::Approx(0.25 / m.tau0).epsilon(1e-14));
        CHECK(model_rate(m, 0.01) == doctest::Approx(0.005).epsilon(1e-12));
        for (double d : log_grid(1e-6, 10.0, 200)) CHECK(model_rate(m, d) == model_rate(m, -d));
        for (double edge : {m.delta_q, m.delta_l}) {
            CHECK(model_rate(m, edge * (1 - 1e-12)) == doctest::Approx(model_rate(m, edge * (1 + 1e-12))).epsilon(1e-10));
        }
    }

    TEST_CASE("model validation") {
        CHECK_THROWS_AS(RateModel({0.0, 0.1, 0.5}).validate(), InvalidArgument);
        CHECK_THROWS_AS(RateModel({200.0, 0.6, 0.5}).validate(), InvalidArgument);
        CHECK_NOTHROW(characteristic_params(kRabi).validate());
    }
}

TEST_SUITE("exact rates") {
    TEST_CASE("agree with an independent eigen-solve") {
        for (double d : log_grid(1e-4, 10.0, 60)) {
            const GroundRates g = exact_ground_rates(params(d));
            const auto r = oracle_rates(d);
            CHECK(g.gamma_minus == doctest::Approx(r[0]).epsilon(1e-9));
            CHECK(g.gamma_plus == doctest::Approx(r[1]).epsilon(1e-9));
        }
    }

    TEST_CASE("resonance") {
        const GroundRates g = exact_ground_rates(params(0.0));
        CHECK(g.gamma_minus == 0.0);
        CHECK(g.gamma_plus == doctest::Approx(2.0 * kRabi * kRabi).epsilon(0.03));
    }

    TEST_CASE("quadratic dip") {
        const RateModel m = characteristic_params(kRabi);
        double previous = 1.0;
        for (double frac : {0.2, 0.1, 0.03, 0.01, 1e-3}) {
            const double d = frac * m.delta_q;
            const double ratio = exact_ground_rates(params(d)).gamma_minus / model_rate(m, d);
            const double dev = std::abs(ratio - 1.0);
            CHECK(dev <= 0.05);
            CHECK(dev <= previous + 1e-9);
            previous = dev;
        }
        CHECK(previous < 1e-3);
    }

    TEST_CASE("model fidelity across the dip") {
        const RateModel m = characteristic_params(kRabi);
        double worst = 0.0;
        for (int i = 1; i <= 200; ++i) {
            const double d = m.delta_q / 5.0 * i / 200.0;
            worst = std::max(worst, std::abs(exact_ground_rates(params(d)).gamma_minus * m.tau0 *
                                                 (m.delta_q / d) * (m.delta_q / d) -
                                             1.0));
        }
        CHECK(worst <= 0.05);
    }

    TEST_CASE("lorentzian wing") {
        const RateModel m = characteristic_params(kRabi);
        const double ratio = exact_ground_rates(params(5.0)).gamma_minus / model_rate(m, 5.0);
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.2));
    }

    TEST_CASE("plateau within a factor two") {
        const RateModel m = characteristic_params(kRabi);
        double peak = 0.0;
        for (double d : log_grid(1e-4, 10.0, 400)) peak = std::max(peak, exact_ground_rates(params(d)).gamma_minus);
        CHECK(peak * m.tau0 >= 0.5);
        CHECK(peak * m.tau0 <= 2.0);
    }

    TEST_CASE("ordering, weights and evenness") {
        for (double d : log_grid(1e-4, 10.0, 120)) {
            const GroundRates g = exact_ground_rates(params(d));
            const GroundRates n = exact_ground_rates(params(-d));
            CHECK(g.gamma_minus <= g.gamma_plus);
            CHECK(g.weight_minus >= 0.0);
            CHECK(g.weight_minus <= 1.0);
            CHECK(g.weight_plus >= 0.0);
            CHECK(g.weight_plus <= 1.0);
            CHECK(g.weight_minus + g.weight_plus <= 1.0 + 1e-10);
            CHECK(std::abs(g.gamma_minus - n.gamma_minus) <= 1e-10);
            CHECK(std::abs(g.gamma_plus - n.gamma_plus) <= 1e-10);
        }
    }

    TEST_CASE("post-jump weights near resonance") {
        // The bright mode carries an excited-state admixture of order Omega^2/Gamma^2.
        const double admixture = 2.0 * kRabi * kRabi;
        for (double d : {0.0, 1e-6, 1e-4}) {
            const GroundRates g = exact_ground_rates(params(d));
            CHECK(g.weight_minus == doctest::Approx(0.5).epsilon(1e-3));
            CHECK(std::abs(g.weight_plus - 0.5) <= admixture + 1e-3);
        }
    }

    TEST_CASE("sweep follows branches continuously") {
        const auto grid = log_grid(1e-4, 10.0, 400);
        const auto sweep = ground_rate_sweep(kRabi, 1.0, grid);
        REQUIRE(sweep.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const GroundRates g = exact_ground_rates(params(grid[i]));
            const double lo = std::min(sweep[i].gamma_minus, sweep[i].gamma_plus);
            const double hi = std::max(sweep[i].gamma_minus, sweep[i].gamma_plus);
            CHECK(lo == doctest::Approx(g.gamma_minus).epsilon(1e-10));
            CHECK(hi == doctest::Approx(g.gamma_plus).epsilon(1e-10));
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double step = std::abs(std::log(sweep[i].gamma_minus / sweep[i - 1].gamma_minus));
            CHECK(step < 0.2);
        }
    }

    TEST_CASE("pointwise discrepancy table") {
        const std::vector<double> grid{0.0, 1e-3, 0.1, 5.0};
        const auto rows = model_discrepancy(params(0.0), grid);
        REQUIRE(rows.size() == 4);
        CHECK(std::isnan(rows[0].ratio));
        CHECK(rows[0].exact == 0.0);
        CHECK(rows[1].ratio == doctest::Approx(1.0).epsilon(0.05));
        CHECK(rows[3].model == doctest::Approx(1.0 / 200.0 * 0.01).epsilon(1e-12));
    }
}
