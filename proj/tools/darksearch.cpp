#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "darksearch/errors.hpp"
#include "runner/commands.hpp"
#include "runner/config.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

using Command = std::function<darksearch::runner::CommandResult(const darksearch::runner::RunConfig&)>;

}  // namespace

int main(int argc, char** argv) {
    using namespace darksearch::runner;

    const std::map<std::string, std::pair<Command, std::string>> commands{
        {"rate", {cmd_rate, "ground-state rates and the piecewise rate model"}},
        {"simulate", {cmd_simulate, "run a trajectory ensemble"}},
        {"analyze", {cmd_analyze, "summarize a simulate run against theory"}},
        {"fisher", {cmd_fisher, "photocount variance and scan information"}},
        {"compare", {cmd_compare, "scan vs. random-search information and crossover"}},
        {"clt", {cmd_clt, "scaling exponents of heavy-tailed sums"}},
    };

    CLI::App app{"darksearch: random-search dark-resonance simulator"};
    app.require_subcommand(1);
    std::string config_path;
    Overrides overrides;
    std::string selected;
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", overrides.seed, "override ensemble.seed");
        sub->add_option("--out", overrides.out, "override output.directory");
        sub->add_option("--workers", overrides.workers, "override ensemble.workers");
        sub->add_option("--mode", overrides.mode, "override protocol.mode")->check(CLI::IsMember({"exact", "rate"}));
        sub->callback([&selected, n = name] { selected = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        RunConfig cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        const CommandResult r = commands.at(selected).first(cfg);
        for (const auto& f : r.files) std::cout << f.string() << '\n';
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "darksearch: config error: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "darksearch: I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "darksearch: I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const darksearch::InvalidArgument& e) {
        std::cerr << "darksearch: config error: " << e.what() << '\n';
        return kConfig;
    } catch (const darksearch::Error& e) {
        std::cerr << "darksearch: numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "darksearch: numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
}
