#include "dosreg/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace dosreg {

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Dimension:
        case ErrorKind::Validation:
        case ErrorKind::Configuration:
        case ErrorKind::Argument:
        case ErrorKind::AssumptionViolation:
            return 2;
        case ErrorKind::Rank:
        case ErrorKind::Excitation:
            return 4;
        default:
            return 3;
    }
}

namespace {

double round_significant(double v, int digits) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    const double scale = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(v))));
    return std::round(v * scale) / scale;
}

DoSSchedule read_schedule_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Configuration, "cannot open schedule file '" + path + "'");
    return DoSSchedule::read(in);
}

InitialState initial_state(const ExperimentConfig& cfg) {
    return {cfg.x0, cfg.z0, cfg.w0};
}

}  // namespace

OracleResult run_oracle(const ExperimentConfig& cfg) {
    cfg.validate();
    OracleResult out;
    const InternalModel im = cfg.internal_model();
    out.assumptions = check_assumptions(cfg.plant, &im);
    if (!out.assumptions.all_pass()) {
        throw Error(ErrorKind::AssumptionViolation,
                    "assumption failed: " + out.assumptions.first_failure());
    }
    out.aug = build_augmented(cfg.plant, im);
    out.cost = CostWeights{cfg.Q, cfg.R};
    out.cost.validate(out.aug.dim());
    out.riccati = solve_optimal_control(out.aug, out.cost);
    const double kappa = cfg.sim_kappa.value_or(cfg.dos.kappa);
    out.bound = compute_resilience_bound(out.riccati, out.aug, out.cost, kappa);
    return out;
}

RowVec default_initial_gain(const OracleResult& oracle) {
    const RowVec& K = oracle.riccati.K_star;
    for (int digits = 2; digits <= 17; ++digits) {
        RowVec K0 = K;
        for (Eigen::Index i = 0; i < K0.size(); ++i) K0(i) = round_significant(K(i), digits);
        if (kit::is_schur(oracle.aug.Abar - oracle.aug.Bbar * K0)) return K0;
    }
    return K;
}

DoSSchedule learning_schedule(const ExperimentConfig& cfg) {
    if (!cfg.dos_schedule_file.empty()) return read_schedule_file(cfg.dos_schedule_file);
    return generate_schedule(cfg.dos, cfg.learn_ks, cfg.dos_seed);
}

LearningOutcome run_learning(const ExperimentConfig& cfg) {
    LearningOutcome out;
    out.oracle = run_oracle(cfg);
    out.schedule = learning_schedule(cfg);
    out.K0 = cfg.K0 ? *cfg.K0 : default_initial_gain(out.oracle);

    const ExplorationSignal exploration(cfg.explore_seed, cfg.explore_amplitude);
    LearningRunOptions opts;
    opts.silence_exploration_under_dos = cfg.explore_silence_under_dos;
    out.run = simulate_learning(cfg.plant, cfg.internal_model(), out.schedule, out.K0,
                                exploration, initial_state(cfg), cfg.learn_ks, opts);

    auto& samples = out.run.log.samples;
    std::erase_if(samples, [&](const TrajectorySample& s) { return s.k < cfg.learn_k0; });
    if (samples.empty()) {
        throw Error(ErrorKind::Excitation,
                    "no usable samples in the learning window; lengthen [k0, ks]");
    }

    out.rank = check_rank(build_data_matrices(out.run.log));
    LearningOptions lo;
    lo.epsilon0 = cfg.epsilon0;
    out.result = run_algorithm_1(out.run.log, out.oracle.cost, out.K0, lo);
    const RowVec& Ks = out.oracle.riccati.K_star;
    out.relative_gain_error = (out.result.K_final - Ks).norm() / Ks.norm();
    return out;
}

DoSParams regulation_params(const ExperimentConfig& cfg, const ResilienceBound& bound) {
    DoSParams p = cfg.dos;
    if (cfg.sim_eta) p.eta = *cfg.sim_eta;
    if (cfg.sim_tau_D) p.tau_D = *cfg.sim_tau_D;
    if (cfg.sim_kappa) p.kappa = *cfg.sim_kappa;
    if (cfg.sim_T_auto) {
        p.T = 2.0 * bound.T_star;
    } else if (cfg.sim_T) {
        p.T = *cfg.sim_T;
    }
    p.validate();
    return p;
}

SimulationOutcome run_simulation(const ExperimentConfig& cfg, GainSource source,
                                 const std::optional<RowVec>& file_gain) {
    SimulationOutcome out;
    InitialState init = initial_state(cfg);
    long start = 0;
    if (source == GainSource::Learned) {
        out.learning = run_learning(cfg);
        out.oracle = out.learning->oracle;
        out.K = out.learning->result.K_final;
        const SimStep& last = out.learning->run.trace.steps.back();
        init = {last.x, last.z, last.w};
        start = last.k;
    } else {
        out.oracle = run_oracle(cfg);
        if (source == GainSource::Oracle) {
            out.K = out.oracle.riccati.K_star;
        } else {
            if (!file_gain) throw Error(ErrorKind::Argument, "gain file source needs a gain");
            if (file_gain->size() != out.oracle.aug.dim()) {
                throw Error(ErrorKind::Dimension, "gain must have n+q entries");
            }
            out.K = *file_gain;
        }
    }

    out.params = regulation_params(cfg, out.oracle.bound);
    const DoSSchedule local = cfg.sim_schedule_file.empty()
                                  ? generate_schedule(out.params, cfg.sim_horizon, cfg.sim_dos_seed)
                                  : read_schedule_file(cfg.sim_schedule_file);
    out.schedule_check = verify_assumptions(local, out.params, cfg.sim_horizon);
    out.schedule = local.shifted(start);

    const InternalModel im = cfg.internal_model();
    out.regulator = solve_regulator_equations(cfg.plant, im, out.K);
    const LyapunovMonitor monitor{out.oracle.riccati.P_star, out.oracle.bound, out.params.T};
    out.trace = simulate_regulation(cfg.plant, im, out.schedule, out.K, out.regulator, init,
                                    cfg.sim_horizon, monitor, start);
    out.metrics = tracking_metrics(out.trace);
    return out;
}

RowVec read_gain_file(const std::filesystem::path& path, Eigen::Index expected_size) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Configuration, "cannot open gain file '" + path.string() + "'");
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (auto pos = line.find('='); pos != std::string::npos) line.erase(0, pos + 1);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
                throw Error(ErrorKind::Validation, "gain file: '" + tok + "' is not a number");
            }
            vals.push_back(v);
        }
    }
    if (static_cast<Eigen::Index>(vals.size()) != expected_size) {
        throw Error(ErrorKind::Dimension, "gain file has " + std::to_string(vals.size()) +
                                              " entries, expected " +
                                              std::to_string(expected_size));
    }
    return Eigen::Map<const RowVec>(vals.data(), expected_size);
}

}  // namespace dosreg
