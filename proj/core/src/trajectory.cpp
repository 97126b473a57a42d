#include "darksearch/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace darksearch::trajectory {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

quantum::StateVector jump_target(const quantum::StateVector& psi, int channel) {
    quantum::StateVector out = quantum::StateVector::Zero();
    out(channel) = psi(2);
    return out;
}

}  // namespace

std::string_view to_string(Mode mode) {
    return mode == Mode::ExactWavefunction ? "exact" : "rate";
}

Mode parse_mode(std::string_view text) {
    if (text == "exact" || text == "ExactWavefunction") return Mode::ExactWavefunction;
    if (text == "rate" || text == "RateModel") return Mode::RateModel;
    throw InvalidArgument("unknown trajectory mode '" + std::string(text) + "' (expected exact|rate)");
}

void ProtocolConfig::validate(const rates::RateModel& model, Warnings* warnings) const {
    if (!(delta_max > 0.0) || !std::isfinite(delta_max)) throw InvalidArgument("ProtocolConfig: delta_max must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("ProtocolConfig: horizon must be positive");
    if (initial_detuning && std::abs(*initial_detuning) > delta_max)
        throw InvalidArgument("ProtocolConfig: |initial_detuning| exceeds delta_max");
    if (!(delta_max > model.delta_q && delta_max < model.delta_l))
        warn(warnings, "ProtocolConfig: delta_max = " + std::to_string(delta_max) +
                           " is outside the validated window delta_Q << delta_max < delta_L");
}

double TrajectoryRecord::detuning_at(double t) const {
    auto it = std::upper_bound(events.begin(), events.end(), t,
                               [](double value, const TrajectoryEvent& e) { return value < e.time; });
    return it == events.end() ? final_detuning : it->detuning_before;
}

double draw_detuning(Rng& rng, double delta_max) { return delta_max * (2.0 * rng.uniform() - 1.0); }

WaitingTime sample_waiting_time_exact(const quantum::PureState& state, const quantum::EffectivePropagator& propagator,
                                      double gamma, Rng& rng, std::optional<double> t_cap) {
    const double r = rng.uniform();
    double cap = 0.0;
    if (t_cap) {
        cap = *t_cap;
    } else {
        const double slowest = propagator.decay_rates().minCoeff();
        cap = kStallCapFactor / std::max(slowest, kRateFloor * gamma);
    }
    const auto expansion = propagator.expand(state.amplitudes());
    const auto norm_at = [&](double t) { return expansion.norm_squared(t); };

    if (!(cap > 0.0) || norm_at(cap) > r) return WaitingTime{kInf, -1, true, state};

    // Expand a bracket from the excited-state lifetime upward, then bisect.
    double lo = 0.0;
    double hi = std::min(cap, 1.0 / gamma);
    while (norm_at(hi) > r) {
        lo = hi;
        hi = std::min(cap, 8.0 * hi);
    }
    while (hi - lo > kWaitRelTolerance * hi) {
        const double mid = 0.5 * (lo + hi);
        if (norm_at(mid) > r) lo = mid; else hi = mid;
    }
    const double tau = 0.5 * (lo + hi);
    const quantum::StateVector psi = expansion.state(tau);

    // Emission probability per channel is <psi|c_i^dag c_i|psi>; both equal
    // (gamma/2)|psi_2|^2 for this system, but keep the general rule.
    const auto cs = quantum::jump_operators(gamma);
    const double p0 = (cs[0] * psi).squaredNorm();
    const double p1 = (cs[1] * psi).squaredNorm();
    const int channel = rng.uniform() * (p0 + p1) < p0 ? 0 : 1;
    const quantum::StateVector jumped = jump_target(psi, channel);
    const double n = jumped.norm();
    quantum::PureState post = n > 0.0 ? quantum::PureState(jumped / n) : quantum::PureState::basis(channel);
    return WaitingTime{tau, channel, false, post};
}

WaitingTime sample_waiting_time_exact(const quantum::PureState& state, const quantum::LambdaParams& p, Rng& rng,
                                      std::optional<double> t_cap) {
    const quantum::EffectivePropagator prop(p);
    return sample_waiting_time_exact(state.normalized() ? state : state.normalized_copy(), prop, p.gamma, rng, t_cap);
}

double sample_waiting_time_rate_model(double delta, const rates::RateModel& m, Rng& rng) {
    const double rate = rates::model_rate(m, delta);
    const double e = rng.exponential();
    if (!(rate > 0.0)) return kInf;
    return e / rate;
}

RunOutcome simulate(const ProtocolConfig& cfg, const quantum::LambdaParams& p, const EventCallback& on_event) {
    p.validate();
    const rates::RateModel model = rates::characteristic_params(p);
    cfg.validate(model);

    Rng rng = Rng::substream(cfg.seed, cfg.stream);
    double delta = cfg.initial_detuning ? *cfg.initial_detuning : draw_detuning(rng, cfg.delta_max);
    quantum::PureState state = quantum::PureState::basis(0);
    double t = 0.0;
    RunOutcome out;

    for (;;) {
        const double remaining = cfg.horizon - t;
        double tau = kInf;
        int channel = 0;
        if (cfg.mode == Mode::ExactWavefunction) {
            const quantum::EffectivePropagator prop(p.with_detuning(delta));
            const double stall = kStallCapFactor / std::max(prop.decay_rates().minCoeff(), kRateFloor * p.gamma);
            const WaitingTime w = sample_waiting_time_exact(state, prop, p.gamma, rng, std::min(stall, remaining));
            if (!w.censored) {
                tau = w.tau;
                channel = w.channel;
                state = w.post_state;
            }
        } else {
            tau = sample_waiting_time_rate_model(delta, model, rng);
            if (tau < remaining) channel = rng.uniform() < 0.5 ? 0 : 1;
        }
        if (!(tau < remaining)) break;

        t += tau;
        const TrajectoryEvent event{t, channel, delta};
        ++out.n_events;
        if (on_event) on_event(event);
        delta = draw_detuning(rng, cfg.delta_max);
    }
    out.final_detuning = delta;
    out.rng_draws = rng.draws();
    return out;
}

TrajectoryRecord run_trajectory(const ProtocolConfig& cfg, const quantum::LambdaParams& p) {
    TrajectoryRecord rec;
    rec.config = cfg;
    rec.params = p;
    const RunOutcome out = simulate(cfg, p, [&](const TrajectoryEvent& e) { rec.events.push_back(e); });
    rec.final_detuning = out.final_detuning;
    rec.rng_draws = out.rng_draws;
    return rec;
}

CheckpointRun run_checkpoints(const ProtocolConfig& cfg, const quantum::LambdaParams& p,
                              std::span<const double> checkpoints) {
    if (checkpoints.empty()) throw InvalidArgument("run_checkpoints: no checkpoints");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) || !(checkpoints.front() > 0.0))
        throw InvalidArgument("run_checkpoints: checkpoints must be positive and ascending");

    ProtocolConfig full = cfg;
    full.horizon = checkpoints.back();
    CheckpointRun run;
    run.detunings.assign(checkpoints.size(), 0.0);
    std::size_t next = 0;
    const RunOutcome out = simulate(full, p, [&](const TrajectoryEvent& e) {
        // The detuning held just before this event covers every checkpoint it passes.
        while (next < checkpoints.size() && checkpoints[next] < e.time) run.detunings[next++] = e.detuning_before;
    });
    while (next < checkpoints.size()) run.detunings[next++] = out.final_detuning;
    run.n_events = out.n_events;
    run.rng_draws = out.rng_draws;
    return run;
}

}  // namespace darksearch::trajectory
