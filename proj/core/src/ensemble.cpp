#include <algorithm>
#include <cmath>
#include <limits>

#include "darksearch/levy_stats.hpp"
#include "darksearch/trajectory.hpp"

namespace darksearch::levy {

std::vector<HistogramBin> detuning_histogram(std::span<const double> finals, const HistogramSpec& spec) {
    if (finals.empty()) throw EmptyEnsemble("detuning_histogram: no finals");
    if (spec.bins_per_decade <= 0) throw InvalidArgument("bins_per_decade must be positive");
    if (!(spec.min_abs_detuning > 0.0)) throw InvalidArgument("min_abs_detuning must be positive");

    double top = spec.max_abs_detuning;
    if (top <= 0.0) {
        for (const double d : finals) top = std::max(top, std::abs(d));
    }
    const double lo0 = spec.min_abs_detuning;
    std::size_t n_bins = 0;
    if (top > lo0) n_bins = static_cast<std::size_t>(std::ceil(std::log10(top / lo0) * spec.bins_per_decade - 1e-9));
    std::vector<double> edges(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i)
        edges[i] = lo0 * std::pow(10.0, static_cast<double>(i) / spec.bins_per_decade);

    std::size_t central = 0;
    std::vector<std::size_t> counts(n_bins, 0);
    for (const double d : finals) {
        const double a = std::abs(d);
        if (a < lo0) {
            ++central;
            continue;
        }
        if (n_bins == 0) continue;
        auto it = std::upper_bound(edges.begin(), edges.end(), a);
        std::size_t k = static_cast<std::size_t>(it - edges.begin());
        k = k == 0 ? 0 : k - 1;
        if (k >= n_bins) {
            if (spec.max_abs_detuning > 0.0 && a > edges.back()) continue;  // outside the requested range
            k = n_bins - 1;
        }
        ++counts[k];
    }

    const double n = static_cast<double>(finals.size());
    std::vector<HistogramBin> bins;
    bins.reserve(2 * n_bins + 1);
    for (std::size_t i = n_bins; i-- > 0;)
        bins.push_back({-edges[i + 1], -edges[i], static_cast<double>(counts[i]) / (2.0 * n * (edges[i + 1] - edges[i]))});
    bins.push_back({-lo0, lo0, static_cast<double>(central) / (n * 2.0 * lo0)});
    for (std::size_t i = 0; i < n_bins; ++i)
        bins.push_back({edges[i], edges[i + 1], static_cast<double>(counts[i]) / (2.0 * n * (edges[i + 1] - edges[i]))});
    return bins;
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) throw EmptyEnsemble("wilson_interval: n = 0");
    if (successes > n) throw InvalidArgument("wilson_interval: successes exceed n");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double estimate_width(std::span<const double> finals, double delta_pds, double mu) {
    std::vector<double> trapped;
    for (const double d : finals)
        if (std::abs(d) <= delta_pds) trapped.push_back(std::abs(d));
    if (trapped.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(trapped.begin(), trapped.end());
    const double pos = peak_fraction(mu) * static_cast<double>(trapped.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= trapped.size()) return trapped.back();
    const double t = pos - static_cast<double>(i);
    return trapped[i] + t * (trapped[i + 1] - trapped[i]);
}

EnsembleSummary summarize_ensemble(std::span<const double> finals, double horizon, const LevyParams& lp,
                                   double delta_t, const HistogramSpec& spec) {
    lp.validate();
    if (finals.empty()) throw EmptyEnsemble("summarize_ensemble: no trajectories");
    EnsembleSummary s;
    s.horizon = horizon;
    s.n_trajectories = finals.size();
    std::size_t trapped = 0;
    std::size_t in_peak = 0;
    for (const double d : finals) {
        const double a = std::abs(d);
        if (a <= lp.delta_pds) {
            ++trapped;
            if (a <= delta_t) ++in_peak;
        }
    }
    const double n = static_cast<double>(finals.size());
    s.trapped_fraction = static_cast<double>(trapped) / n;
    s.trapped_fraction_err = std::sqrt(s.trapped_fraction * (1.0 - s.trapped_fraction) / n);
    s.trapped_fraction_wilson = wilson_interval(trapped, finals.size());
    s.histogram = detuning_histogram(finals, spec);
    s.fitted_width = estimate_width(finals, lp.delta_pds, lp.mu);
    s.peak_fraction = trapped > 0 ? static_cast<double>(in_peak) / static_cast<double>(trapped)
                                  : std::numeric_limits<double>::quiet_NaN();
    return s;
}

EnsembleSummary summarize_ensemble(std::span<const trajectory::TrajectoryRecord> records, const LevyParams& lp,
                                   double delta_t, const HistogramSpec& spec) {
    if (records.empty()) throw EmptyEnsemble("summarize_ensemble: no trajectories");
    const auto& ref = records.front().config;
    std::vector<double> finals;
    finals.reserve(records.size());
    for (const auto& r : records) {
        if (r.config.horizon != ref.horizon || r.config.delta_max != ref.delta_max || r.config.mode != ref.mode)
            throw InvalidArgument("summarize_ensemble: records differ in horizon or configuration");
        finals.push_back(r.final_detuning);
    }
    return summarize_ensemble(finals, ref.horizon, lp, delta_t, spec);
}

}  // namespace darksearch::levy
