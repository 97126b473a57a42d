#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "darksearch/quantum_core.hpp"
#include "darksearch/trajectory.hpp"

namespace darksearch::runner {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingArtifacts : IoError {
    using IoError::IoError;
};

struct PhysicsSection {
    double rabi = 0.07071067811865475;  // 0.1/sqrt(2)
    double gamma = 1.0;
};

struct ProtocolSection {
    double delta_max = 0.1;
    double horizon = 6e6;
    trajectory::Mode mode = trajectory::Mode::RateModel;
    double delta_pds = 0.01;
};

struct EnsembleSection {
    std::uint64_t n_trajectories = 20000;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0: hardware concurrency
};

struct AnalysisSection {
    int bins_per_decade = 25;
    double min_abs_detuning = 1e-8;
    std::vector<double> checkpoints{1e5, 1e6, 6e6};
    std::size_t theory_points = 200;
};

struct RateSection {
    double delta_min = 1e-6;
    double delta_max = 10.0;
    std::size_t points = 400;
};

struct FisherSection {
    double variance_delta_min = 1e-3;
    double variance_delta_max = 0.5;
    std::size_t variance_points = 200;
    double scan_delta_min = 0.005;
    double scan_delta_max = 0.5;
    std::size_t scan_points = 40;
    double rel_tolerance = 1e-6;
    double exclusion = 1e-4;
};

struct CltSection {
    std::vector<double> mus{0.5, 1.5};
    std::vector<std::uint64_t> counts{10, 100, 1000, 10000};
    std::size_t reps = 2000;
    double tau_b = 1.0;
};

struct OutputSection {
    std::string directory = "out";
    std::vector<std::string> formats{"csv"};
    std::size_t event_files = 10;
};

/// A run is a pure function of this document.
struct RunConfig {
    PhysicsSection physics;
    ProtocolSection protocol;
    EnsembleSection ensemble;
    AnalysisSection analysis;
    RateSection rate;
    FisherSection fisher;
    CltSection clt;
    OutputSection output;

    /// Throws ConfigError.
    void validate() const;

    [[nodiscard]] quantum::LambdaParams lambda_params() const { return {physics.rabi, physics.gamma, 0.0}; }
    /// Checkpoints with the horizon appended, sorted and deduplicated.
    [[nodiscard]] std::vector<double> checkpoint_times() const;
    [[nodiscard]] std::filesystem::path out_dir() const { return output.directory; }
};

[[nodiscard]] nlohmann::ordered_json to_json(const RunConfig& c);
/// Missing keys take defaults; unknown keys are rejected.
[[nodiscard]] RunConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
    std::optional<std::string> mode;
};

void apply_overrides(RunConfig& c, const Overrides& o);

}  // namespace darksearch::runner
