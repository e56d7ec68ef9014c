#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dosreg/closed_loop_sim.hpp"
#include "dosreg/config.hpp"
#include "dosreg/dos.hpp"
#include "dosreg/errors.hpp"
#include "dosreg/learner.hpp"
#include "dosreg/optimal_control.hpp"
#include "dosreg/plant.hpp"

namespace dosreg {

// Process exit code for an error category: 2 validation, 3 numerical,
// 4 excitation/rank.
int exit_code(ErrorKind kind) noexcept;

struct OracleResult {
    AssumptionReport assumptions;
    AugmentedSystem aug;
    CostWeights cost;
    RiccatiSolution riccati;
    ResilienceBound bound;  // with the regulation-phase κ
};

// Throws AssumptionViolation naming the first failing assumption.
OracleResult run_oracle(const ExperimentConfig& cfg);

// K* rounded to two significant digits, with digits added until the gain
// stabilizes the augmented system.
RowVec default_initial_gain(const OracleResult& oracle);

// Schedule over the learning window: from file when given, else generated.
DoSSchedule learning_schedule(const ExperimentConfig& cfg);

struct LearningOutcome {
    OracleResult oracle;
    DoSSchedule schedule;
    RowVec K0;
    LearningRun run;  // trace over [0, ks]; log restricted to [k0, ks)
    RankReport rank;
    LearningResult result;
    double relative_gain_error = 0.0;  // ‖K_final − K*‖ / ‖K*‖
};

LearningOutcome run_learning(const ExperimentConfig& cfg);

// DoS parameters of the regulation phase, with T = 2·T* when requested.
DoSParams regulation_params(const ExperimentConfig& cfg, const ResilienceBound& bound);

enum class GainSource { Oracle, Learned, File };

struct SimulationOutcome {
    OracleResult oracle;
    std::optional<LearningOutcome> learning;
    RowVec K;
    DoSParams params;
    DoSSchedule schedule;  // absolute instants
    DoSAssumptionReport schedule_check;
    RegulatorSolution regulator;
    SimTrace trace;
    TrackingMetrics metrics;
};

// Oracle and file gains regulate from k = 0. A learned gain regulates from
// ks, continuing the learning-phase state with z carried over.
SimulationOutcome run_simulation(const ExperimentConfig& cfg, GainSource source,
                                 const std::optional<RowVec>& file_gain = std::nullopt);

// One row of n+q numbers; '#' comments allowed.
RowVec read_gain_file(const std::filesystem::path& path, Eigen::Index expected_size);

}  // namespace dosreg
