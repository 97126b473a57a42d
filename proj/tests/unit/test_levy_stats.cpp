#include <cmath>
#include <algorithm>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "oracles.hpp"

#include "darksearch/levy_stats.hpp"
#include "darksearch/trajectory.hpp"

using namespace darksearch;
using namespace darksearch::levy;
using std::numbers::pi;

namespace {

const double kRabi = 0.1 / std::sqrt(2.0);

rates::RateModel model() { return rates::characteristic_params(kRabi); }

LevyParams paper_params() { return levy_params(model(), 0.01, 0.1); }

// Trapping durations by direct two-step sampling: a detuning uniform in the
// PDS window, then an exponential wait at the model rate.
std::vector<double> two_step_trapping_times(std::size_t n, Rng& rng) {
    const rates::RateModel m = model();
    std::vector<double> out(n);
    for (auto& t : out) {
        const double d = 0.01 * (2.0 * rng.uniform() - 1.0);
        t = trajectory::sample_waiting_time_rate_model(d, m, rng);
    }
    return out;
}

}  // namespace

TEST_SUITE("trapping tail") {
    TEST_CASE("parameters") {
        const TrappingTail t = trapping_tail_params(model(), 0.01);
        CHECK(t.mu == 0.5);
        CHECK(t.tau_b == doctest::Approx(6.25 * pi).epsilon(1e-12));
        CHECK(t.tau_b == doctest::Approx(19.63).epsilon(1e-3));
        CHECK(t.tau_pds == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(t.tau_pds == doctest::Approx(1.0 / (std::pow(0.01 / model().delta_q, 2) / model().tau0)).epsilon(1e-12));
        CHECK(trapping_tail_params(model(), 0.005).tau_b == doctest::Approx(4.0 * t.tau_b).epsilon(1e-12));
        CHECK_THROWS_AS((void)trapping_tail_params(model(), 0.0), InvalidArgument);
    }

    TEST_CASE("power-law density and survival") {
        const LevyParams lp = paper_params();
        CHECK(trapping_pdf_tail(lp.tau_b, lp) == doctest::Approx(0.5 / lp.tau_b).epsilon(1e-14));
        Warnings w;
        (void)trapping_pdf_tail(0.5 * lp.tau_b, lp, &w);
        CHECK(w.size() == 1);
        for (double tau : {1e2, 1e3, 1e5}) {
            double err = 0.0;
            auto f = [&](double u) { return trapping_pdf_tail(tau / (u * u), lp) * 2.0 * tau / (u * u * u); };
            const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-12, &err);
            CHECK(integral == doctest::Approx(trapping_survival_tail(tau, lp)).epsilon(1e-9));
            CHECK(trapping_survival_tail(tau, lp) == doctest::Approx(std::sqrt(lp.tau_b / tau)).epsilon(1e-14));
        }
    }

    TEST_CASE("two-step sampling follows a square-root tail") {
        // Exact constant for a uniform entry into the quadratic dip: (pi/4) tau_pds.
        const LevyParams lp = paper_params();
        const double tau_b_exact = pi / 4.0 * lp.tau_pds;
        Rng rng(1);
        auto taus = two_step_trapping_times(1000000, rng);
        std::sort(taus.begin(), taus.end());
        const double n = static_cast<double>(taus.size());
        double sup = 0.0;
        for (double tau = 1e2 * lp.tau_b; tau <= 1e4 * lp.tau_b; tau *= 1.25) {
            const auto it = std::upper_bound(taus.begin(), taus.end(), tau);
            const double empirical = static_cast<double>(taus.end() - it) / n;
            const double analytic = std::sqrt(tau_b_exact / tau);
            CHECK(empirical == doctest::Approx(analytic).epsilon(0.10));
            sup = std::max(sup, std::abs(empirical - analytic));
            // The quoted scale is a factor four smaller, i.e. half the survival.
            CHECK(empirical / trapping_survival_tail(tau, lp) == doctest::Approx(2.0).epsilon(0.1));
        }
        CHECK(sup <= 0.02);
    }
}

TEST_SUITE("recycling") {
    TEST_CASE("mean recycling time") {
        CHECK(mean_recycling_time(200.0, 0.1, 0.01) == doctest::Approx(2000.0).epsilon(1e-14));
        CHECK(mean_recycling_time(200.0, 0.01, 0.01) == doctest::Approx(200.0).epsilon(1e-14));
        CHECK(paper_params().mean_recycle == doctest::Approx(2000.0).epsilon(1e-14));
        CHECK_THROWS_AS((void)mean_recycling_time(200.0, 0.001, 0.01), InvalidArgument);
    }

    TEST_CASE("geometric first returns") {
        // A recycling period starts at a detuning outside the PDS; each detection
        // redraws it, and the period ends with the first redraw inside.
        const rates::RateModel m = model();
        Rng rng(2);
        double steps = 0.0;
        double time = 0.0;
        constexpr int returns = 1000000;
        for (int r = 0; r < returns; ++r) {
            double d = 0.0;
            do d = trajectory::draw_detuning(rng, 0.1);
            while (std::abs(d) <= 0.01);
            int n = 0;
            while (std::abs(d) > 0.01) {
                time += trajectory::sample_waiting_time_rate_model(d, m, rng);
                d = trajectory::draw_detuning(rng, 0.1);
                ++n;
            }
            steps += n;
        }
        CHECK(steps / returns == doctest::Approx(10.0).epsilon(0.01));
        CHECK(time / returns == doctest::Approx(mean_recycling_time(m.tau0, 0.1, 0.01)).epsilon(0.02));
    }

    TEST_CASE("first-return transform") {
        const double p = 0.1;
        for (double s : {1e-5, 1e-6}) CHECK((first_return_transform(p, s) - 1.0) / s == doctest::Approx(-1.0 / p).epsilon(1e-3));
        CHECK(first_return_transform(p, 30.0) / (p * std::exp(-30.0)) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(first_return_transform(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
        CHECK_THROWS_AS((void)first_return_transform(0.0, 1.0), InvalidArgument);
        CHECK_THROWS_AS((void)first_return_transform(0.5, 0.0), InvalidArgument);
    }

    TEST_CASE("contour inversion recovers the geometric law") {
        const double p = 0.1;
        auto generating = [p](std::complex<double> z) { return first_return_transform(p, -std::log(z)); };
        CHECK(std::abs(oracle::contour_coefficient(generating, 0, 0.8)) < 1e-12);
        for (int n = 1; n <= 20; ++n) {
            const double expect = std::pow(1.0 - p, n - 1) * p;
            CHECK(std::abs(oracle::contour_coefficient(generating, n, 0.8) - expect) < 1e-10);
        }
    }
}

TEST_SUITE("renewal predictions") {
    TEST_CASE("ensemble trapped fraction") {
        const LevyParams lp = paper_params();
        CHECK(ensemble_trapped_fraction(6e6, lp) == doctest::Approx(0.941).epsilon(5e-4));
        CHECK(ensemble_trapped_fraction(6e6, lp) == doctest::Approx(0.941347).epsilon(1e-6));
        CHECK(ensemble_trapped_fraction(1e14, lp) == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(ensemble_trapped_fraction(1e8, lp) > ensemble_trapped_fraction(1e7, lp));
        Warnings w;
        (void)ensemble_trapped_fraction(1e3, lp, &w);
        CHECK(w.size() == 2);
        Warnings quiet;
        (void)ensemble_trapped_fraction(6e6, lp, &quiet);
        CHECK(quiet.empty());
    }

    TEST_CASE("stable increment at mu = 1/2") {
        Rng rng(3);
        std::vector<double> xi(100000);
        for (auto& x : xi) x = sample_levy_increment(0.5, rng);
        CHECK(oracle::ks_one_sample(xi, levy_increment_cdf_half).p_value > 0.01);
    }

    TEST_CASE("stable increments match their Laplace transform") {
        for (double mu : {0.3, 0.5, 0.7}) {
            Rng rng(4);
            constexpr int n = 200000;
            std::vector<double> xi(n);
            for (auto& x : xi) x = sample_levy_increment(mu, rng);
            for (double s : {0.1, 1.0, 10.0}) {
                std::vector<double> e(n);
                for (int i = 0; i < n; ++i) e[i] = std::exp(-s * xi[i]);
                const double expect = std::exp(-std::tgamma(1.0 - mu) * std::pow(s, mu));
                CHECK(std::abs(oracle::mean(e) - expect) < 4.0 * oracle::stddev(e) / std::sqrt(n) + 1e-12);
            }
        }
        Rng rng(5);
        CHECK_THROWS_AS((void)sample_levy_increment(1.5, rng), InvalidArgument);
    }

    TEST_CASE("time-averaged fraction scales as T^(mu - 1)") {
        // Short recycling keeps the formula inside [0, 1] across the whole range.
        LevyParams lp = paper_params();
        lp.mean_recycle = 20.0;
        std::vector<double> horizons;
        std::vector<double> medians;
        for (double t = 1e5; t <= 1e8 * 1.0001; t *= std::sqrt(10.0)) {
            Rng rng(6);
            std::vector<double> deficit;
            for (int i = 0; i < 100000; ++i) deficit.push_back(1.0 - sample_time_avg_trapped_fraction(t, lp, rng).value);
            horizons.push_back(t);
            medians.push_back(oracle::median(deficit));
        }
        const PowerLawFit fit = fit_power_law(horizons, medians);
        CHECK(fit.slope == doctest::Approx(-0.5).epsilon(0.1));
    }

    TEST_CASE("time-averaged fluctuations persist") {
        const LevyParams lp = paper_params();
        auto spread = [&](int n) {
            Rng rng(7);
            std::vector<double> v;
            for (int i = 0; i < n; ++i) v.push_back(sample_time_avg_trapped_fraction(1e8, lp, rng).value);
            return oracle::stddev(v);
        };
        const double small = spread(10000);
        const double large = spread(100000);
        CHECK(large > 0.01);
        CHECK(large / small == doctest::Approx(1.0).epsilon(0.1));
    }

    TEST_CASE("clamping is reported") {
        const LevyParams lp = paper_params();
        Rng rng(8);
        int clamped = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto s = sample_time_avg_trapped_fraction(1e4, lp, rng);
            CHECK(s.value >= 0.0);
            CHECK(s.value <= 1.0);
            clamped += s.clamped;
        }
        CHECK(clamped > 0);
    }
}

TEST_SUITE("generalized CLT") {
    TEST_CASE("heavy tail sums grow as N^(1/mu)") {
        const std::vector<std::uint64_t> counts{100, 1000, 10000};
        Rng rng(9);
        const CltFit half = generalized_clt_check(0.5, 1.0, counts, 1000, rng);
        CHECK(half.slope == doctest::Approx(2.0).epsilon(0.05));
        const CltFit finite = generalized_clt_check(1.5, 1.0, counts, 1000, rng);
        CHECK(finite.slope == doctest::Approx(1.0).epsilon(0.05));
        CHECK(half.medians.size() == 3);
        CHECK(half.slope_stderr >= 0.0);
    }

    TEST_CASE("rescaled sums share one distribution") {
        Rng rng(10);
        auto small = pareto_sums(0.5, 2.0, 100, 1000, rng);
        auto large = pareto_sums(0.5, 2.0, 10000, 1000, rng);
        for (auto& v : small) v /= 2.0 * 1e4;
        for (auto& v : large) v /= 2.0 * 1e8;
        CHECK(oracle::ks_two_sample(small, large).p_value > 0.01);
    }

    TEST_CASE("pareto draws respect the scale") {
        Rng rng(11);
        for (double v : pareto_sums(0.5, 3.0, 1, 1000, rng)) CHECK(v >= 3.0);
        CHECK_THROWS_AS((void)pareto_sums(0.5, 1.0, 0, 10, rng), InvalidArgument);
    }
}

TEST_SUITE("frequency distribution scales") {
    TEST_CASE("characteristic width") {
        const rates::RateModel m = model();
        const double dt = characteristic_width(m, 6e6, 0.5);
        CHECK(dt == doctest::Approx(4.08e-5).epsilon(1e-3));
        CHECK(characteristic_width(m, m.tau0, 0.5) == doctest::Approx(m.delta_q).epsilon(1e-14));
        CHECK(rates::model_rate(m, dt) * 6e6 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(characteristic_width(m, 2.4e7, 0.5) == doctest::Approx(dt / 2.0).epsilon(1e-14));
    }

    TEST_CASE("height") {
        const rates::RateModel m = model();
        const LevyParams lp = paper_params();
        const double dt = characteristic_width(m, 6e6, 0.5);
        const double h = distribution_height(lp, dt);
        CHECK(h == doctest::Approx(3.52e4).epsilon(2e-3));
        CHECK(distribution_height(lp, characteristic_width(m, 2.4e7, 0.5)) == doctest::Approx(2.0 * h).epsilon(1e-12));
        CHECK(distribution_height(lp, characteristic_width(m, 1.2e7, 0.5)) == doctest::Approx(std::sqrt(2.0) * h).epsilon(1e-12));
        // The quoted height carries four times the area of G in units of delta_T.
        CHECK(h * dt * form_factor_area(0.5) == doctest::Approx(4.0).epsilon(1e-12));
    }

    TEST_CASE("tabulated distribution") {
        const std::vector<double> q{0.0, 0.5, 1.0, 2.0};
        const auto d = frequency_distribution(model(), paper_params(), 6e6, q);
        CHECK(d.height > 0.0);
        CHECK(d.width > 0.0);
        CHECK(d.form[0] == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(d.form[2] == doctest::Approx(oracle::kDawsonReference[1].value).epsilon(1e-12));
    }

    TEST_CASE("parameter validation") {
        LevyParams lp = paper_params();
        lp.mu = 1.2;
        CHECK_THROWS_AS(lp.validate(), InvalidArgument);
        lp = paper_params();
        lp.tau_b = 0.0;
        CHECK_THROWS_AS(lp.validate(), InvalidArgument);
    }

    TEST_CASE("power-law fit") {
        const std::vector<double> x{1.0, 10.0, 100.0, 1000.0};
        std::vector<double> y;
        for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
        const PowerLawFit fit = fit_power_law(x, y);
        CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(fit.slope_stderr < 1e-12);
    }
}
