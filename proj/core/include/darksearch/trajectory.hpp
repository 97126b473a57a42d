#pragma once

// Stochastic simulation of the random-search protocol: the atom is driven at a
// detuning drawn uniformly from [-delta_max, delta_max]; every photodetection
// triggers a fresh uniform draw. The detuning held at the horizon is the
// estimate of the resonance.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "darksearch/errors.hpp"
#include "darksearch/quantum_core.hpp"
#include "darksearch/rates.hpp"
#include "darksearch/rng.hpp"

namespace darksearch::trajectory {

enum class Mode {
    ExactWavefunction,  ///< quantum jumps with the full 3-level H_eff
    RateModel,          ///< Exp(R(delta)) waits from the piecewise rate model
};

[[nodiscard]] std::string_view to_string(Mode mode);
/// Accepts "exact" / "rate" (and the enumerator spellings).
[[nodiscard]] Mode parse_mode(std::string_view text);

struct ProtocolConfig {
    double delta_max = 0.1;
    double horizon = 6e6;
    Mode mode = Mode::RateModel;
    std::uint64_t seed = 0;
    /// Substream index; ensembles use the trajectory index.
    std::uint64_t stream = 0;
    /// Drawn uniformly when empty.
    std::optional<double> initial_detuning;

    /// Throws on non-positive delta_max/horizon; warns outside dQ << delta_max < dL.
    void validate(const rates::RateModel& model, Warnings* warnings = nullptr) const;
};

struct TrajectoryEvent {
    double time = 0.0;
    int channel = 0;
    double detuning_before = 0.0;
};

struct TrajectoryRecord {
    ProtocolConfig config;
    quantum::LambdaParams params;
    std::vector<TrajectoryEvent> events;
    double final_detuning = 0.0;
    std::uint64_t rng_draws = 0;

    /// Detuning held on [t_k, t_{k+1}); times at or beyond the horizon give final_detuning.
    [[nodiscard]] double detuning_at(double t) const;
};

[[nodiscard]] double draw_detuning(Rng& rng, double delta_max);

struct WaitingTime {
    double tau = 0.0;      ///< +inf when censored
    int channel = -1;      ///< -1 when censored
    bool censored = false;
    quantum::PureState post_state;
};

/// Default cap on a single waiting time is kStallCapFactor / max(Gamma_-, kRateFloor * gamma).
inline constexpr double kStallCapFactor = 1e3;
inline constexpr double kRateFloor = 1e-12;
inline constexpr double kWaitRelTolerance = 1e-10;

/// Solves |psi~(tau)|^2 = r, r ~ U(0,1), by bisection on the closed-form norm.
/// A wait longer than the cap is returned censored.
[[nodiscard]] WaitingTime sample_waiting_time_exact(const quantum::PureState& state, const quantum::LambdaParams& p,
                                                    Rng& rng, std::optional<double> t_cap = std::nullopt);
[[nodiscard]] WaitingTime sample_waiting_time_exact(const quantum::PureState& state,
                                                    const quantum::EffectivePropagator& propagator, double gamma,
                                                    Rng& rng, std::optional<double> t_cap = std::nullopt);

/// Exp(R(delta)) with R from the piecewise model; +inf where R vanishes.
[[nodiscard]] double sample_waiting_time_rate_model(double delta, const rates::RateModel& m, Rng& rng);

struct RunOutcome {
    double final_detuning = 0.0;
    std::uint64_t n_events = 0;
    std::uint64_t rng_draws = 0;
};

using EventCallback = std::function<void(const TrajectoryEvent&)>;

/// Runs one trajectory to the horizon, streaming events to the callback
/// (which may be empty). Randomness comes from Rng::substream(cfg.seed, cfg.stream).
RunOutcome simulate(const ProtocolConfig& cfg, const quantum::LambdaParams& p, const EventCallback& on_event);

[[nodiscard]] TrajectoryRecord run_trajectory(const ProtocolConfig& cfg, const quantum::LambdaParams& p);

struct CheckpointRun {
    std::vector<double> detunings;  ///< detuning held at each checkpoint
    std::uint64_t n_events = 0;
    std::uint64_t rng_draws = 0;
};

/// Runs to max(checkpoints) without storing events. Checkpoints must be
/// positive and sorted ascending; cfg.horizon is ignored.
[[nodiscard]] CheckpointRun run_checkpoints(const ProtocolConfig& cfg, const quantum::LambdaParams& p,
                                            std::span<const double> checkpoints);

// ---- line-oriented record format ----------------------------------------------
// line 1: JSON header (config, params, seed); then `time,channel,detuning_before`
// per event; last line `final,<T>,<delta_final>`.

void write_record(std::ostream& out, const TrajectoryRecord& record);
[[nodiscard]] TrajectoryRecord read_record(std::istream& in);

}  // namespace darksearch::trajectory
