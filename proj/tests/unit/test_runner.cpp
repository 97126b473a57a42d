#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "runner/commands.hpp"
#include "runner/config.hpp"
#include "runner/pool.hpp"
#include "runner/table.hpp"

using namespace darksearch;
using namespace darksearch::runner;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("darksearch_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config(const fs::path& out) {
    RunConfig c;
    c.protocol.horizon = 1e5;
    c.ensemble.n_trajectories = 40;
    c.ensemble.seed = 7;
    c.ensemble.workers = 2;
    c.analysis.checkpoints = {1e4, 3e4};
    c.analysis.theory_points = 20;
    c.output.directory = out.string();
    c.output.event_files = 2;
    c.rate.points = 50;
    c.fisher.variance_points = 40;
    c.fisher.scan_points = 6;
    c.clt.counts = {10, 100};
    c.clt.reps = 200;
    c.validate();
    return c;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DARKSEARCH_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("configuration") {
    TEST_CASE("defaults follow the reference parameter set") {
        const RunConfig c;
        CHECK(c.physics.rabi == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-15));
        CHECK(c.protocol.delta_max == 0.1);
        CHECK(c.protocol.delta_pds == 0.01);
        CHECK(c.protocol.horizon == 6e6);
        CHECK(c.ensemble.n_trajectories == 20000);
        CHECK_NOTHROW(c.validate());
    }

    TEST_CASE("round trip is idempotent") {
        RunConfig c = small_config("somewhere");
        c.protocol.mode = trajectory::Mode::ExactWavefunction;
        c.output.formats = {"csv", "json"};
        const auto once = to_json(c);
        const auto twice = to_json(config_from_json(json::parse(once.dump())));
        CHECK(once.dump() == twice.dump());
        CHECK(to_json(config_from_json(json::object())).dump() == to_json(RunConfig{}).dump());
    }

    TEST_CASE("rejects unknown and malformed entries") {
        CHECK_THROWS_AS((void)config_from_json(json{{"physic", json::object()}}), ConfigError);
        CHECK_THROWS_AS((void)config_from_json(json{{"protocol", {{"horizn", 1.0}}}}), ConfigError);
        CHECK_THROWS_AS((void)config_from_json(json{{"protocol", {{"horizon", "long"}}}}), ConfigError);
        CHECK_THROWS_AS((void)config_from_json(json{{"protocol", {{"mode", "fast"}}}}), ConfigError);
        CHECK_THROWS_AS((void)config_from_json(json{{"protocol", {{"delta_pds", 0.2}}}}), ConfigError);
        CHECK_THROWS_AS((void)config_from_json(json{{"analysis", {{"checkpoints", {1e7}}}}}), ConfigError);
        CHECK_THROWS_AS((void)config_from_json(json{{"output", {{"formats", {"xml"}}}}}), ConfigError);
        CHECK_THROWS_AS((void)config_from_json(json::array()), ConfigError);
    }

    TEST_CASE("overrides") {
        RunConfig c;
        Overrides o;
        o.seed = 99;
        o.out = "elsewhere";
        o.workers = 3;
        o.mode = "exact";
        apply_overrides(c, o);
        CHECK(c.ensemble.seed == 99);
        CHECK(c.output.directory == "elsewhere");
        CHECK(c.ensemble.workers == 3);
        CHECK(c.protocol.mode == trajectory::Mode::ExactWavefunction);
        o = {};
        o.mode = "rate";
        apply_overrides(c, o);
        CHECK(c.protocol.mode == trajectory::Mode::RateModel);
        o.mode = "other";
        CHECK_THROWS_AS(apply_overrides(c, o), ConfigError);
    }

    TEST_CASE("checkpoint times include the horizon once") {
        RunConfig c;
        c.analysis.checkpoints = {6e6, 1e5, 1e5};
        CHECK(c.checkpoint_times() == std::vector<double>{1e5, 6e6});
    }

    TEST_CASE("load errors") {
        TempDir tmp;
        CHECK_THROWS_AS((void)load_config(tmp.path / "missing.json"), IoError);
        std::ofstream(tmp.path / "bad.json") << "{ not json";
        CHECK_THROWS_AS((void)load_config(tmp.path / "bad.json"), ConfigError);
    }
}

TEST_SUITE("tables") {
    TEST_CASE("doubles round-trip through text") {
        for (double x : {0.1, 1.0 / 3.0, 6e6, 1e-300, -2.5e-17, 0.0}) CHECK(std::stod(format_double(x)) == x);
    }

    TEST_CASE("csv and json round-trip") {
        TempDir tmp;
        Table t;
        t.add_meta("command", "test");
        t.columns = {"a", "b"};
        t.add_row({0.1, 1.0 / 3.0});
        t.add_row({-1e-12, std::numeric_limits<double>::quiet_NaN()});
        const auto files = write_table(tmp.path, "t", t, {"csv", "json"});
        CHECK(files.size() == 2);
        const std::string text = slurp(tmp.path / "t.csv");
        CHECK(text.rfind("# ", 0) == 0);
        CHECK(text.find("a,b\n") != std::string::npos);
        const Table back = read_csv_table(tmp.path / "t.csv");
        CHECK(back.columns == t.columns);
        REQUIRE(back.rows.size() == 2);
        CHECK(back.rows[0][1] == t.rows[0][1]);
        CHECK(std::isnan(back.rows[1][1]));
        CHECK(back.column("b") == 1);
        fs::remove(tmp.path / "t.csv");
        const Table from_json = read_table(tmp.path, "t");
        CHECK(from_json.rows[0][0] == 0.1);
        CHECK_THROWS((void)back.column("c"));
        CHECK_THROWS_AS(t.add_row({1.0}), std::exception);
    }
}

TEST_SUITE("commands") {
    TEST_CASE("rate output") {
        TempDir tmp;
        const RunConfig c = small_config(tmp.path);
        const CommandResult r = cmd_rate(c);
        const Table t = read_table(tmp.path, "rate");
        const auto m = rates::characteristic_params(c.lambda_params());
        bool found_q = false;
        for (const auto& row : t.rows) {
            if (row[0] == 0.0) CHECK(row[t.column("gamma_minus")] == 0.0);
            if (row[0] == m.delta_q) {
                found_q = true;
                CHECK(row[t.column("r_model")] == doctest::Approx(1.0 / m.tau0).epsilon(1e-15));
            }
            // Columns follow the branches continuously; compare as an unordered pair.
            const auto g = rates::exact_ground_rates(c.lambda_params().with_detuning(row[0]));
            const double a = row[t.column("gamma_minus")];
            const double b = row[t.column("gamma_plus")];
            CHECK(std::min(a, b) == doctest::Approx(g.gamma_minus).epsilon(1e-10));
            CHECK(std::max(a, b) == doctest::Approx(g.gamma_plus).epsilon(1e-10));
        }
        CHECK(found_q);
        const json a = read_json(tmp.path / "annotations.json");
        CHECK(a["delta_q"].get<double>() == m.delta_q);
        CHECK(a["delta_pds"].get<double>() == 0.01);
        CHECK(r.files.size() == 2);
    }

    TEST_CASE("simulate then analyze") {
        TempDir tmp;
        const RunConfig c = small_config(tmp.path);
        (void)cmd_simulate(c);
        const json manifest = read_json(tmp.path / "manifest.json");
        CHECK(manifest["complete"].get<bool>());
        CHECK(manifest["substreams"]["workers"].size() == 2);
        const Table t = read_table(tmp.path, "checkpoints");
        CHECK(t.rows.size() == 40);
        CHECK(t.columns.size() == 2 + 3);
        CHECK(fs::exists(tmp.path / "events" / "traj_000001.csv"));
        CHECK_FALSE(fs::exists(tmp.path / "events" / "traj_000002.csv"));

        // Event files agree with the checkpoint table.
        std::ifstream in(tmp.path / "events" / "traj_000000.csv");
        const auto rec = trajectory::read_record(in);
        CHECK(rec.detuning_at(1e4) == t.rows[0][2]);
        CHECK(rec.final_detuning == t.rows[0][4]);

        const CommandResult a = cmd_analyze(c);
        CHECK(a.summary["checkpoints"].size() == 3);
        CHECK(fs::exists(tmp.path / "summary.json"));
        CHECK(fs::exists(tmp.path / "theory_curve.csv"));
        CHECK(fs::exists(tmp.path / "histogram_2.csv"));
    }

    TEST_CASE("worker count does not change results") {
        TempDir one;
        TempDir many;
        RunConfig a = small_config(one.path);
        a.ensemble.workers = 1;
        RunConfig b = small_config(many.path);
        b.ensemble.workers = 4;
        (void)cmd_simulate(a);
        (void)cmd_simulate(b);
        CHECK(slurp(one.path / "checkpoints.csv") == slurp(many.path / "checkpoints.csv"));
        CHECK(slurp(one.path / "events" / "traj_000001.csv") == slurp(many.path / "events" / "traj_000001.csv"));
        CHECK(cmd_analyze(a).summary.dump() == cmd_analyze(b).summary.dump());
    }

    TEST_CASE("analyze needs a complete run") {
        TempDir tmp;
        const RunConfig c = small_config(tmp.path);
        CHECK_THROWS_AS((void)cmd_analyze(c), IoError);
        write_json(tmp.path / "manifest.json", nlohmann::ordered_json{{"complete", false}});
        CHECK_THROWS_AS((void)cmd_analyze(c), MissingArtifacts);
    }

    TEST_CASE("fisher and compare") {
        TempDir tmp;
        const RunConfig c = small_config(tmp.path);
        const CommandResult f = cmd_fisher(c);
        CHECK(f.summary["poisson_crossings"].get<int>() >= 2);
        const Table v = read_table(tmp.path, "variance");
        for (const auto& row : v.rows) CHECK(row[v.column("fano")] == doctest::Approx(row[2] / row[1]).epsilon(1e-15));
        const std::string first = slurp(tmp.path / "fisher.csv");
        const CommandResult cmp = cmd_compare(c);
        CHECK(cmp.summary["crossover_delta_max"].is_number());
        CHECK(std::abs(cmp.summary["crossover_delta_max"].get<double>() - cmp.summary["crossover_delta_max_at_10T"].get<double>()) < 1e-6);
        const Table info = read_table(tmp.path, "fisher");
        CHECK(info.rows.front()[info.column("outside_validity")] == 1.0);
        CHECK(info.rows.back()[info.column("outside_validity")] == 0.0);
        (void)cmd_fisher(c);
        CHECK(slurp(tmp.path / "fisher.csv").substr(first.find('\n')) == first.substr(first.find('\n')));
    }

    TEST_CASE("clt is deterministic") {
        TempDir a;
        TempDir b;
        const CommandResult x = cmd_clt(small_config(a.path));
        (void)cmd_clt(small_config(b.path));
        CHECK(slurp(a.path / "clt.json") == slurp(b.path / "clt.json"));
        CHECK(x.summary["fits"].size() == 2);
    }

    TEST_CASE("result-relevant config drops scheduling and output") {
        const RunConfig c = small_config("x");
        const auto j = result_relevant_config(c);
        CHECK_FALSE(j.contains("output"));
        CHECK_FALSE(j["ensemble"].contains("workers"));
        CHECK(j["ensemble"]["seed"] == 7);
    }

    TEST_CASE("pool rethrows the first failure") {
        CHECK_THROWS_AS(parallel_for(100, 4, [](std::uint64_t i, unsigned) {
                            if (i == 17) throw std::runtime_error("boom");
                        }),
                        std::runtime_error);
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), 8, [&](std::uint64_t i, unsigned) { ++hits[i]; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
}

TEST_SUITE("command line") {
    TEST_CASE("exit codes") {
        TempDir tmp;
        json ok = to_json(small_config(tmp.path / "out"));
        const fs::path good = write_config(tmp.path, ok);
        CHECK(run_cli("rate --config " + good.string()) == 0);
        CHECK(fs::exists(tmp.path / "out" / "rate.csv"));
        CHECK(run_cli("rate --config " + good.string() + " --out " + (tmp.path / "alt").string()) == 0);
        CHECK(fs::exists(tmp.path / "alt" / "rate.csv"));

        CHECK(run_cli("rate") == 2);
        CHECK(run_cli("bogus --config " + good.string()) == 2);
        CHECK(run_cli("rate --config " + good.string() + " --mode fast") == 2);
        CHECK(run_cli("rate --config " + (tmp.path / "none.json").string()) == 2);

        json unknown = ok;
        unknown["physics"]["omega"] = 1.0;
        CHECK(run_cli("rate --config " + write_config(tmp.path, unknown).string()) == 2);

        json singular = ok;
        singular["fisher"]["exclusion"] = 1e-300;
        singular["fisher"]["scan_delta_min"] = 1e-299;
        CHECK(run_cli("compare --config " + write_config(tmp.path, singular).string()) == 3);

        std::ofstream(tmp.path / "blocker") << "file";
        CHECK(run_cli("rate --config " + write_config(tmp.path, ok).string() + " --out " + (tmp.path / "blocker" / "sub").string()) == 4);
        CHECK(run_cli("analyze --config " + good.string() + " --out " + (tmp.path / "empty").string()) == 4);
    }

    TEST_CASE("seed override changes the ensemble") {
        TempDir tmp;
        const fs::path cfg = write_config(tmp.path, to_json(small_config(tmp.path / "a")));
        CHECK(run_cli("simulate --config " + cfg.string()) == 0);
        CHECK(run_cli("simulate --config " + cfg.string() + " --out " + (tmp.path / "b").string()) == 0);
        CHECK(run_cli("simulate --config " + cfg.string() + " --seed 8 --workers 3 --out " + (tmp.path / "c").string()) == 0);
        CHECK(slurp(tmp.path / "a" / "checkpoints.csv") == slurp(tmp.path / "b" / "checkpoints.csv"));
        CHECK(slurp(tmp.path / "a" / "checkpoints.csv") != slurp(tmp.path / "c" / "checkpoints.csv"));
    }
}
