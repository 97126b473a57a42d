#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>

#include "darksearch/estimation.hpp"
#include "darksearch/levy_stats.hpp"
#include "darksearch/rates.hpp"
#include "darksearch/rng.hpp"
#include "darksearch/trajectory.hpp"

#include "pool.hpp"
#include "table.hpp"

namespace darksearch::runner {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kPeakFractionTarget = 0.59;
constexpr double kPeakFractionTolerance = 0.03;
constexpr double kWidthSlopeTolerance = 0.05;

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + format_double(xs[i]);
    return s;
}

std::string checkpoint_column(double t) { return "delta_at_" + format_double(t); }

ordered_json nullable(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

struct Theory {
    rates::RateModel model;
    levy::LevyParams levy;
};

Theory theory(const RunConfig& c) {
    Theory t;
    t.model = rates::characteristic_params(c.lambda_params());
    t.levy = levy::levy_params(t.model, c.protocol.delta_pds, c.protocol.delta_max);
    return t;
}

/// Agreement tolerance on f_E: none below 1e5, 0.03 up to the full horizon, 0.02 beyond.
std::optional<double> trapped_fraction_tolerance(double horizon) {
    if (horizon < 1e5) return std::nullopt;
    if (horizon < 6e6) return 0.03;
    return 0.02;
}

}  // namespace

ordered_json result_relevant_config(const RunConfig& c) {
    ordered_json j = to_json(c);
    j["ensemble"].erase("workers");
    j.erase("output");
    return j;
}

// ---- rate ----------------------------------------------------------------------

CommandResult cmd_rate(const RunConfig& c) {
    const auto p = c.lambda_params();
    Warnings warnings;
    const rates::RateModel m = rates::characteristic_params(p, &warnings);

    std::vector<double> grid = logspace(c.rate.delta_min, c.rate.delta_max, c.rate.points);
    grid.push_back(0.0);
    for (const double d : {m.delta_q, m.delta_l, c.protocol.delta_pds, c.protocol.delta_max}) grid.push_back(d);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto sweep = rates::ground_rate_sweep(p.rabi, p.gamma, grid);
    Table t;
    t.add_meta("command", "rate");
    t.add_meta("rabi", format_double(p.rabi));
    t.add_meta("gamma", format_double(p.gamma));
    t.columns = {"delta", "gamma_minus", "gamma_plus", "r_model"};
    for (std::size_t i = 0; i < grid.size(); ++i)
        t.add_row({grid[i], sweep[i].gamma_minus, sweep[i].gamma_plus, rates::model_rate(m, grid[i])});

    CommandResult r;
    r.files = write_table(c.out_dir(), "rate", t, c.output.formats);
    ordered_json a;
    a["units"] = kUnits;
    a["rabi"] = p.rabi;
    a["gamma"] = p.gamma;
    a["tau0"] = m.tau0;
    a["delta_q"] = m.delta_q;
    a["delta_l"] = m.delta_l;
    a["delta_pds"] = c.protocol.delta_pds;
    a["delta_max"] = c.protocol.delta_max;
    a["warnings"] = warnings;
    write_json(c.out_dir() / "annotations.json", a);
    r.files.push_back(c.out_dir() / "annotations.json");
    r.summary = a;
    return r;
}

// ---- simulate --------------------------------------------------------------------

CommandResult cmd_simulate(const RunConfig& c) {
    const auto p = c.lambda_params();
    const rates::RateModel m = rates::characteristic_params(p);
    const std::vector<double> times = c.checkpoint_times();
    const fs::path dir = c.out_dir();
    ensure_directory(dir);
    const std::uint64_t n = c.ensemble.n_trajectories;
    const unsigned workers = resolve_workers(c.ensemble.workers);
    const std::uint64_t n_event_files = std::min<std::uint64_t>(c.output.event_files, n);

    Warnings warnings;
    trajectory::ProtocolConfig base;
    base.delta_max = c.protocol.delta_max;
    base.horizon = c.protocol.horizon;
    base.mode = c.protocol.mode;
    base.seed = c.ensemble.seed;
    base.validate(m, &warnings);

    ordered_json manifest;
    manifest["command"] = "simulate";
    manifest["complete"] = false;
    manifest["units"] = kUnits;
    manifest["mode"] = std::string(trajectory::to_string(c.protocol.mode));
    manifest["seed"] = c.ensemble.seed;
    manifest["n_trajectories"] = n;
    manifest["checkpoints"] = times;
    manifest["config"] = to_json(c);
    write_json(dir / "manifest.json", manifest);

    if (n_event_files > 0) ensure_directory(dir / "events");
    std::vector<std::vector<double>> finals(n);
    std::vector<std::uint64_t> n_events(n, 0);
    std::vector<std::vector<std::uint64_t>> per_worker(workers);

    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(n, workers, [&](std::uint64_t i, unsigned w) {
        trajectory::ProtocolConfig pc = base;
        pc.stream = i;
        if (i < n_event_files) {
            const auto rec = trajectory::run_trajectory(pc, p);
            std::vector<double> d;
            for (const double t : times) d.push_back(rec.detuning_at(t));
            finals[i] = std::move(d);
            n_events[i] = rec.events.size();
            char name[32];
            std::snprintf(name, sizeof name, "traj_%06llu.csv", static_cast<unsigned long long>(i));
            const fs::path path = dir / "events" / name;
            std::ofstream out(path, std::ios::binary);
            if (!out) throw IoError("cannot write " + path.string());
            trajectory::write_record(out, rec);
            if (!out) throw IoError("write failed for " + path.string());
        } else {
            auto run = trajectory::run_checkpoints(pc, p, times);
            finals[i] = std::move(run.detunings);
            n_events[i] = run.n_events;
        }
        per_worker[w].push_back(i);
    });
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Table t;
    t.add_meta("command", "simulate");
    t.add_meta("mode", std::string(trajectory::to_string(c.protocol.mode)));
    t.add_meta("seed", std::to_string(c.ensemble.seed));
    t.add_meta("checkpoints", join(times));
    t.columns = {"trajectory", "n_events"};
    for (const double time : times) t.columns.push_back(checkpoint_column(time));
    for (std::uint64_t i = 0; i < n; ++i) {
        std::vector<double> row{static_cast<double>(i), static_cast<double>(n_events[i])};
        row.insert(row.end(), finals[i].begin(), finals[i].end());
        t.add_row(std::move(row));
    }
    CommandResult r;
    r.files = write_table(dir, "checkpoints", t, c.output.formats);

    ordered_json subs = ordered_json::array();
    for (unsigned w = 0; w < workers; ++w) {
        auto& ids = per_worker[w];
        std::sort(ids.begin(), ids.end());
        ordered_json ranges = ordered_json::array();
        for (std::size_t k = 0; k < ids.size();) {
            std::size_t e = k;
            while (e + 1 < ids.size() && ids[e + 1] == ids[e] + 1) ++e;
            ranges.push_back({ids[k], ids[e]});
            k = e + 1;
        }
        subs.push_back({{"worker", w}, {"trajectories", ids.size()}, {"streams", ranges}});
    }
    manifest["complete"] = true;
    manifest["substreams"] = {{"generator", "xoshiro256** seeded by SplitMix64 from (seed, trajectory index)"},
                              {"workers", subs}};
    manifest["event_files"] = n_event_files;
    manifest["wall_clock_seconds"] = wall;
    manifest["warnings"] = warnings;
    write_json(dir / "manifest.json", manifest);
    r.files.push_back(dir / "manifest.json");
    r.summary = manifest;
    return r;
}

// ---- analyze ----------------------------------------------------------------------

CommandResult cmd_analyze(const RunConfig& c) {
    const fs::path dir = c.out_dir();
    const nlohmann::json manifest = read_json(dir / "manifest.json");
    if (!manifest.value("complete", false)) throw MissingArtifacts(dir.string() + ": simulate run is incomplete");
    const Table data = read_table(dir, "checkpoints");

    const Theory th = theory(c);
    const double mu = th.levy.mu;
    const double f_peak = levy::peak_fraction(mu);
    levy::HistogramSpec spec;
    spec.bins_per_decade = c.analysis.bins_per_decade;
    spec.min_abs_detuning = c.analysis.min_abs_detuning;

    std::vector<double> times;
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < data.columns.size(); ++k) {
        const std::string& name = data.columns[k];
        if (name.rfind("delta_at_", 0) != 0) continue;
        times.push_back(std::stod(name.substr(9)));
        cols.push_back(k);
    }
    if (times.empty()) throw MissingArtifacts("checkpoints table has no delta_at_* columns");

    CommandResult r;
    ordered_json checkpoints = ordered_json::array();
    std::vector<double> fit_t, fit_w;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double horizon = times[k];
        std::vector<double> finals;
        finals.reserve(data.rows.size());
        for (const auto& row : data.rows) finals.push_back(row[cols[k]]);

        Warnings warnings;
        const double delta_t = levy::characteristic_width(th.model, horizon, mu);
        const double f_e = levy::ensemble_trapped_fraction(horizon, th.levy, &warnings);
        const double h = levy::distribution_height(th.levy, delta_t);
        const auto s = levy::summarize_ensemble(finals, horizon, th.levy, delta_t, spec);

        const auto tol = trapped_fraction_tolerance(horizon);
        ordered_json flags;
        flags["trapped_fraction"] = tol ? ordered_json(std::abs(s.trapped_fraction - f_e) <= *tol)
                                        : ordered_json("not_required");
        flags["peak_fraction"] = std::isfinite(s.peak_fraction) &&
                                 std::abs(s.peak_fraction - kPeakFractionTarget) <= kPeakFractionTolerance;

        ordered_json e;
        e["horizon"] = horizon;
        e["n_trajectories"] = s.n_trajectories;
        e["trapped_fraction"] = s.trapped_fraction;
        e["trapped_fraction_err"] = s.trapped_fraction_err;
        e["trapped_fraction_wilson"] = {s.trapped_fraction_wilson.lo, s.trapped_fraction_wilson.hi};
        e["peak_fraction"] = nullable(s.peak_fraction);
        e["fitted_width"] = nullable(s.fitted_width);
        e["theory"] = {{"trapped_fraction", f_e},
                       {"delta_t", delta_t},
                       {"height", h},
                       {"peak_fraction", f_peak},
                       {"trapped_fraction_tolerance", tol ? ordered_json(*tol) : ordered_json(nullptr)}};
        e["agreement"] = flags;
        e["warnings"] = warnings;
        checkpoints.push_back(e);

        if (horizon >= 1e5 && std::isfinite(s.fitted_width) && s.fitted_width > 0.0) {
            fit_t.push_back(horizon);
            fit_w.push_back(s.fitted_width);
        }

        Table hist;
        hist.add_meta("command", "analyze");
        hist.add_meta("horizon", format_double(horizon));
        hist.add_meta("delta_t", format_double(delta_t));
        hist.columns = {"lo", "hi", "density", "theory_density"};
        for (const auto& b : s.histogram) {
            const double mid = 0.5 * (b.lo + b.hi);
            const double dens = std::abs(mid) <= th.levy.delta_pds
                                    ? levy::trapped_detuning_density(mid, delta_t, f_e, mu)
                                    : std::numeric_limits<double>::quiet_NaN();
            hist.add_row({b.lo, b.hi, b.density, dens});
        }
        const std::string suffix = "_" + std::to_string(k);
        auto f1 = write_table(dir, "histogram" + suffix, hist, c.output.formats);
        r.files.insert(r.files.end(), f1.begin(), f1.end());

        Table form;
        form.add_meta("command", "analyze");
        form.add_meta("horizon", format_double(horizon));
        form.add_meta("height", format_double(h));
        form.add_meta("delta_t", format_double(delta_t));
        form.columns = {"delta", "q", "form_factor", "h_g", "density"};
        for (const double q : logspace(1e-3, th.levy.delta_pds / delta_t, c.analysis.theory_points)) {
            const double g = levy::form_factor(q, mu);
            form.add_row({q * delta_t, q, g, h * g, levy::trapped_detuning_density(q * delta_t, delta_t, f_e, mu)});
        }
        auto f2 = write_table(dir, "theory_form" + suffix, form, c.output.formats);
        r.files.insert(r.files.end(), f2.begin(), f2.end());
    }

    Table curve;
    curve.add_meta("command", "analyze");
    curve.columns = {"horizon", "trapped_fraction", "delta_t", "height"};
    const double t_lo = std::min(times.front(), 1e4);
    const double t_hi = std::max(times.back(), c.protocol.horizon);
    for (const double horizon : logspace(t_lo, t_hi, c.analysis.theory_points)) {
        const double delta_t = levy::characteristic_width(th.model, horizon, mu);
        curve.add_row({horizon, levy::ensemble_trapped_fraction(horizon, th.levy), delta_t,
                       levy::distribution_height(th.levy, delta_t)});
    }
    auto f3 = write_table(dir, "theory_curve", curve, c.output.formats);
    r.files.insert(r.files.end(), f3.begin(), f3.end());

    ordered_json summary;
    summary["command"] = "analyze";
    summary["units"] = kUnits;
    summary["config"] = result_relevant_config(c);
    summary["theory"] = {{"tau0", th.model.tau0},
                         {"delta_q", th.model.delta_q},
                         {"delta_l", th.model.delta_l},
                         {"mu", mu},
                         {"tau_b", th.levy.tau_b},
                         {"tau_pds", th.levy.tau_pds},
                         {"mean_recycle", th.levy.mean_recycle},
                         {"peak_fraction", f_peak}};
    summary["checkpoints"] = checkpoints;
    if (fit_t.size() >= 2) {
        const auto fit = levy::fit_power_law(fit_t, fit_w);
        summary["width_scaling"] = {{"slope", fit.slope},
                                    {"slope_stderr", fit.slope_stderr},
                                    {"expected", -mu},
                                    {"agrees", std::abs(fit.slope + mu) <= kWidthSlopeTolerance}};
    } else {
        summary["width_scaling"] = nullptr;
    }
    write_json(dir / "summary.json", summary);
    r.files.push_back(dir / "summary.json");
    r.summary = summary;
    return r;
}

// ---- fisher / compare ----------------------------------------------------------------

namespace {

estimation::CrossoverOptions crossover_options(const RunConfig& c) {
    estimation::CrossoverOptions o;
    o.rel_tolerance = c.fisher.rel_tolerance;
    o.exclusion = c.fisher.exclusion;
    return o;
}

Table information_table(const RunConfig& c, const std::string& command) {
    const auto p = c.lambda_params();
    const rates::RateModel m = rates::characteristic_params(p);
    const std::vector<double> grid = logspace(c.fisher.scan_delta_min, c.fisher.scan_delta_max, c.fisher.scan_points);
    const double i_aut = estimation::random_search_information(estimation::search_width(p, c.protocol.horizon));
    std::vector<double> scan(grid.size());
    parallel_for(grid.size(), resolve_workers(c.ensemble.workers), [&](std::uint64_t k, unsigned) {
        estimation::ScanConfig cfg;
        cfg.delta_max = grid[k];
        cfg.horizon = c.protocol.horizon;
        cfg.rel_tolerance = c.fisher.rel_tolerance;
        cfg.exclusion = c.fisher.exclusion;
        scan[k] = estimation::scan_fisher_information(cfg, p).information;
    });
    Table t;
    t.add_meta("command", command);
    t.add_meta("horizon", format_double(c.protocol.horizon));
    t.add_meta("search_information", "(0.82/delta_T)^2, the inverse of the quoted (delta_T/0.82)^2");
    t.add_meta("outside_validity", "delta_max < delta_Q = " + format_double(m.delta_q));
    t.columns = {"delta_max", "scan_information", "search_information", "outside_validity"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        t.add_row({grid[k], scan[k], i_aut, grid[k] < m.delta_q ? 1.0 : 0.0});
    return t;
}

}  // namespace

CommandResult cmd_fisher(const RunConfig& c) {
    const auto p = c.lambda_params();
    const std::size_t n = c.fisher.variance_points;
    const std::vector<double> delta = logspace(c.fisher.variance_delta_min, c.fisher.variance_delta_max, n);
    std::vector<double> rate(n), var(n);
    parallel_for(n, resolve_workers(c.ensemble.workers), [&](std::uint64_t k, unsigned) {
        const auto terms = estimation::photocount_variance_terms(p.with_detuning(delta[k]));
        rate[k] = terms.rate;
        var[k] = terms.variance;
    });
    int crossings = 0;
    for (std::size_t k = 1; k < n; ++k)
        if ((var[k - 1] / rate[k - 1] - 1.0) * (var[k] / rate[k] - 1.0) < 0.0) ++crossings;

    Table v;
    v.add_meta("command", "fisher");
    v.add_meta("poisson_crossings", std::to_string(crossings));
    v.columns = {"delta", "rate", "variance", "fano"};
    for (std::size_t k = 0; k < n; ++k) v.add_row({delta[k], rate[k], var[k], var[k] / rate[k]});

    CommandResult r;
    r.files = write_table(c.out_dir(), "variance", v, c.output.formats);
    auto f = write_table(c.out_dir(), "fisher", information_table(c, "fisher"), c.output.formats);
    r.files.insert(r.files.end(), f.begin(), f.end());
    r.summary = {{"poisson_crossings", crossings}};
    return r;
}

CommandResult cmd_compare(const RunConfig& c) {
    const auto p = c.lambda_params();
    const rates::RateModel m = rates::characteristic_params(p);
    CommandResult r;
    r.files = write_table(c.out_dir(), "fisher", information_table(c, "compare"), c.output.formats);

    const auto opts = crossover_options(c);
    const double horizon = c.protocol.horizon;
    const double delta_t = estimation::search_width(p, horizon);
    const double f_peak = levy::peak_fraction(0.5);
    const double sigma = estimation::gaussian_sigma_equivalent(f_peak);

    ordered_json j;
    j["units"] = kUnits;
    j["horizon"] = horizon;
    j["delta_pds"] = c.protocol.delta_pds;
    j["bracket"] = {m.delta_q, m.delta_l};
    j["validity"] = {{"excluded_below", m.delta_q}, {"reason", "delta_max < delta_Q"}};
    j["delta_t"] = delta_t;
    j["search_information"] = estimation::random_search_information(delta_t);
    j["information_convention"] = "I_aut = (0.82/delta_T)^2, the inverse of the quoted (delta_T/0.82)^2";
    j["sigma_equivalent"] = {{"quoted", estimation::kQuotedSigmaEquivalent},
                             {"gaussian_for_peak_fraction", sigma},
                             {"difference", sigma - estimation::kQuotedSigmaEquivalent}};
    try {
        const double x = estimation::crossover_delta_max(p, c.protocol.delta_pds, horizon, opts);
        const double x10 = estimation::crossover_delta_max(p, c.protocol.delta_pds, 10.0 * horizon, opts);
        j["crossover_delta_max"] = x;
        j["crossover_delta_max_at_10T"] = x10;
    } catch (const NoCrossover& e) {
        j["crossover_delta_max"] = nullptr;
        j["crossover_delta_max_at_10T"] = nullptr;
        j["note"] = e.what();
    }
    write_json(c.out_dir() / "crossover.json", j);
    r.files.push_back(c.out_dir() / "crossover.json");
    r.summary = j;
    return r;
}

// ---- clt ------------------------------------------------------------------------------

CommandResult cmd_clt(const RunConfig& c) {
    ordered_json fits = ordered_json::array();
    for (std::size_t k = 0; k < c.clt.mus.size(); ++k) {
        const double mu = c.clt.mus[k];
        Rng rng = Rng::substream(c.ensemble.seed, k);
        const auto fit = levy::generalized_clt_check(mu, c.clt.tau_b, c.clt.counts, c.clt.reps, rng);
        const double expected = mu < 1.0 ? 1.0 / mu : 1.0;
        ordered_json f;
        f["mu"] = mu;
        f["expected_exponent"] = expected;
        f["exponent"] = fit.slope;
        f["exponent_stderr"] = fit.slope_stderr;
        f["ci95"] = {fit.slope - 1.96 * fit.slope_stderr, fit.slope + 1.96 * fit.slope_stderr};
        f["counts"] = fit.counts;
        f["medians"] = fit.medians;
        fits.push_back(f);
    }
    ordered_json j;
    j["units"] = kUnits;
    j["seed"] = c.ensemble.seed;
    j["reps"] = c.clt.reps;
    j["tau_b"] = c.clt.tau_b;
    j["statistic"] = "median of T_N over reps, log-log least squares against N";
    j["fits"] = fits;
    write_json(c.out_dir() / "clt.json", j);
    CommandResult r;
    r.files.push_back(c.out_dir() / "clt.json");
    r.summary = j;
    return r;
}

}  // namespace darksearch::runner
