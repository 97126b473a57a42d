#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace darksearch::runner {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!ok.contains(k)) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

const json& section(const json& root, const char* name) {
    static const json empty = json::object();
    return root.contains(name) ? root.at(name) : empty;
}

}  // namespace

void RunConfig::validate() const {
    const auto fail = [](const std::string& m) { throw ConfigError(m); };
    try {
        lambda_params().validate();
    } catch (const std::exception& e) {
        fail(std::string("physics: ") + e.what());
    }
    if (!(physics.rabi > 0.0)) fail("physics.rabi must be positive");
    if (!(protocol.delta_max > 0.0)) fail("protocol.delta_max must be positive");
    if (!(protocol.horizon > 0.0)) fail("protocol.horizon must be positive");
    if (!(protocol.delta_pds > 0.0) || protocol.delta_pds > protocol.delta_max)
        fail("protocol.delta_pds must lie in (0, delta_max]");
    if (ensemble.n_trajectories == 0) fail("ensemble.n_trajectories must be positive");
    if (analysis.bins_per_decade <= 0) fail("analysis.bins_per_decade must be positive");
    if (!(analysis.min_abs_detuning > 0.0)) fail("analysis.min_abs_detuning must be positive");
    for (const double t : analysis.checkpoints) {
        if (!(t > 0.0) || t > protocol.horizon) fail("analysis.checkpoints must lie in (0, horizon]");
    }
    if (analysis.theory_points < 2) fail("analysis.theory_points must be at least 2");
    if (!(rate.delta_min > 0.0) || !(rate.delta_max > rate.delta_min) || rate.points < 2)
        fail("rate: need 0 < delta_min < delta_max and points >= 2");
    if (!(fisher.variance_delta_min > 0.0) || !(fisher.variance_delta_max > fisher.variance_delta_min) ||
        fisher.variance_points < 2)
        fail("fisher: need 0 < variance_delta_min < variance_delta_max and variance_points >= 2");
    if (!(fisher.scan_delta_min > fisher.exclusion) || !(fisher.scan_delta_max > fisher.scan_delta_min) ||
        fisher.scan_points < 2)
        fail("fisher: need exclusion < scan_delta_min < scan_delta_max and scan_points >= 2");
    if (!(fisher.rel_tolerance > 0.0) || !(fisher.exclusion > 0.0)) fail("fisher: tolerances must be positive");
    if (clt.mus.empty() || clt.counts.size() < 2 || clt.reps < 2 || !(clt.tau_b > 0.0))
        fail("clt: need mus, at least two counts, reps >= 2 and tau_b > 0");
    for (const double mu : clt.mus) {
        if (!(mu > 0.0) || mu == 1.0) fail("clt.mus must be positive and != 1");
    }
    for (const auto n : clt.counts) {
        if (n == 0) fail("clt.counts must be positive");
    }
    if (output.directory.empty()) fail("output.directory must not be empty");
    if (output.formats.empty()) fail("output.formats must not be empty");
    for (const auto& f : output.formats) {
        if (f != "csv" && f != "json") fail("output.formats entries must be 'csv' or 'json', got '" + f + "'");
    }
}

std::vector<double> RunConfig::checkpoint_times() const {
    std::vector<double> t = analysis.checkpoints;
    t.push_back(protocol.horizon);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["physics"] = {{"rabi", c.physics.rabi}, {"gamma", c.physics.gamma}};
    j["protocol"] = {{"delta_max", c.protocol.delta_max},
                     {"horizon", c.protocol.horizon},
                     {"mode", std::string(trajectory::to_string(c.protocol.mode))},
                     {"delta_pds", c.protocol.delta_pds}};
    j["ensemble"] = {{"n_trajectories", c.ensemble.n_trajectories},
                     {"seed", c.ensemble.seed},
                     {"workers", c.ensemble.workers}};
    j["analysis"] = {{"bins_per_decade", c.analysis.bins_per_decade},
                     {"min_abs_detuning", c.analysis.min_abs_detuning},
                     {"checkpoints", c.analysis.checkpoints},
                     {"theory_points", c.analysis.theory_points}};
    j["rate"] = {{"delta_min", c.rate.delta_min}, {"delta_max", c.rate.delta_max}, {"points", c.rate.points}};
    j["fisher"] = {{"variance_delta_min", c.fisher.variance_delta_min},
                   {"variance_delta_max", c.fisher.variance_delta_max},
                   {"variance_points", c.fisher.variance_points},
                   {"scan_delta_min", c.fisher.scan_delta_min},
                   {"scan_delta_max", c.fisher.scan_delta_max},
                   {"scan_points", c.fisher.scan_points},
                   {"rel_tolerance", c.fisher.rel_tolerance},
                   {"exclusion", c.fisher.exclusion}};
    j["clt"] = {{"mus", c.clt.mus}, {"counts", c.clt.counts}, {"reps", c.clt.reps}, {"tau_b", c.clt.tau_b}};
    j["output"] = {{"directory", c.output.directory},
                   {"formats", c.output.formats},
                   {"event_files", c.output.event_files}};
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    check_keys(j, "config", {"physics", "protocol", "ensemble", "analysis", "rate", "fisher", "clt", "output"});

    const json& ph = section(j, "physics");
    check_keys(ph, "physics", {"rabi", "gamma"});
    read(ph, "rabi", c.physics.rabi, "physics");
    read(ph, "gamma", c.physics.gamma, "physics");

    const json& pr = section(j, "protocol");
    check_keys(pr, "protocol", {"delta_max", "horizon", "mode", "delta_pds"});
    read(pr, "delta_max", c.protocol.delta_max, "protocol");
    read(pr, "horizon", c.protocol.horizon, "protocol");
    read(pr, "delta_pds", c.protocol.delta_pds, "protocol");
    if (pr.contains("mode")) {
        std::string m;
        read(pr, "mode", m, "protocol");
        try {
            c.protocol.mode = trajectory::parse_mode(m);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("protocol.mode: ") + e.what());
        }
    }

    const json& en = section(j, "ensemble");
    check_keys(en, "ensemble", {"n_trajectories", "seed", "workers"});
    read(en, "n_trajectories", c.ensemble.n_trajectories, "ensemble");
    read(en, "seed", c.ensemble.seed, "ensemble");
    read(en, "workers", c.ensemble.workers, "ensemble");

    const json& an = section(j, "analysis");
    check_keys(an, "analysis", {"bins_per_decade", "min_abs_detuning", "checkpoints", "theory_points"});
    read(an, "bins_per_decade", c.analysis.bins_per_decade, "analysis");
    read(an, "min_abs_detuning", c.analysis.min_abs_detuning, "analysis");
    read(an, "checkpoints", c.analysis.checkpoints, "analysis");
    read(an, "theory_points", c.analysis.theory_points, "analysis");

    const json& ra = section(j, "rate");
    check_keys(ra, "rate", {"delta_min", "delta_max", "points"});
    read(ra, "delta_min", c.rate.delta_min, "rate");
    read(ra, "delta_max", c.rate.delta_max, "rate");
    read(ra, "points", c.rate.points, "rate");

    const json& fi = section(j, "fisher");
    check_keys(fi, "fisher", {"variance_delta_min", "variance_delta_max", "variance_points", "scan_delta_min", "scan_delta_max",
                              "scan_points", "rel_tolerance", "exclusion"});
    read(fi, "variance_delta_min", c.fisher.variance_delta_min, "fisher");
    read(fi, "variance_delta_max", c.fisher.variance_delta_max, "fisher");
    read(fi, "variance_points", c.fisher.variance_points, "fisher");
    read(fi, "scan_delta_min", c.fisher.scan_delta_min, "fisher");
    read(fi, "scan_delta_max", c.fisher.scan_delta_max, "fisher");
    read(fi, "scan_points", c.fisher.scan_points, "fisher");
    read(fi, "rel_tolerance", c.fisher.rel_tolerance, "fisher");
    read(fi, "exclusion", c.fisher.exclusion, "fisher");

    const json& cl = section(j, "clt");
    check_keys(cl, "clt", {"mus", "counts", "reps", "tau_b"});
    read(cl, "mus", c.clt.mus, "clt");
    read(cl, "counts", c.clt.counts, "clt");
    read(cl, "reps", c.clt.reps, "clt");
    read(cl, "tau_b", c.clt.tau_b, "clt");

    const json& ou = section(j, "output");
    check_keys(ou, "output", {"directory", "formats", "event_files"});
    read(ou, "directory", c.output.directory, "output");
    read(ou, "formats", c.output.formats, "output");
    read(ou, "event_files", c.output.event_files, "output");

    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void apply_overrides(RunConfig& c, const Overrides& o) {
    if (o.seed) c.ensemble.seed = *o.seed;
    if (o.out) c.output.directory = *o.out;
    if (o.workers) c.ensemble.workers = *o.workers;
    if (o.mode) {
        try {
            c.protocol.mode = trajectory::parse_mode(*o.mode);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("--mode: ") + e.what());
        }
    }
    c.validate();
}

}  // namespace darksearch::runner
