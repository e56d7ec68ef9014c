#pragma once

#include <optional>

#include "dosreg/dos.hpp"
#include "dosreg/learner.hpp"
#include "dosreg/optimal_control.hpp"
#include "dosreg/plant.hpp"
#include "dosreg/trace.hpp"

namespace dosreg {

// Fills V = ζ̃ᵀP*ζ̃ and the envelopes of each step.
struct LyapunovMonitor {
    Mat P_star;
    ResilienceBound bound;
    double T = 10.0;  // duration divisor used by the relaxed envelope
};

struct InitialState {
    Vec x0;
    Vec z0;
    Vec w0;
};

// Hold-last-value closed loop: u_k = −K ζ_{k_m(k)}, z⁺ = Ez + G2 e_{k_m(k)}.
// Instants run over [start, start + horizon]; the schedule is queried at
// those absolute instants. Held values start at (ζ_start, e_start) even
// when `start` is attacked.
SimTrace simulate_regulation(const LinearPlant& plant, const InternalModel& im,
                             const DoSSchedule& sched, const RowVec& K,
                             const RegulatorSolution& reg, const InitialState& init, long horizon,
                             const std::optional<LyapunovMonitor>& monitor = std::nullopt,
                             long start = 0);

struct LearningRunOptions {
    // false: η_k is applied every instant; true: η_k is zeroed while the
    // channel is denied.
    bool silence_exploration_under_dos = false;
};

struct LearningRun {
    SimTrace trace;
    TrajectoryLog log;
};

// u_k = −K0 ζ_{k_m(k)} + η_k over [start, start + horizon]; returns the trace
// and the allowed-pair log.
LearningRun simulate_learning(const LinearPlant& plant, const InternalModel& im,
                              const DoSSchedule& sched, const RowVec& K0,
                              const ExplorationSignal& exploration, const InitialState& init,
                              long horizon, const LearningRunOptions& opts = {},
                              long start = 0);

struct TrackingMetrics {
    double final_quarter_max_abs_e = 0.0;
    // First instant from which |e| stays below the tolerance; −1 if never.
    long settling_instant = 0;
    // max V/env_exact over steps with a monitor (0 when V = 0).
    double peak_envelope_ratio = 0.0;
    bool envelope_dominated = true;  // ratio ≤ 1 + 1e-6 everywhere
};

TrackingMetrics tracking_metrics(const SimTrace& trace, double tolerance = 1e-3);

}  // namespace dosreg
