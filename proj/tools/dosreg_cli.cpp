#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dosreg/config.hpp"
#include "dosreg/pipeline.hpp"
#include "dosreg/report.hpp"

namespace fs = std::filesystem;
using namespace dosreg;

namespace {

std::mutex g_log_mutex;

void log_line(const std::string& msg) {
    const std::lock_guard lock(g_log_mutex);
    std::cerr << msg << '\n';
}

struct RunRequest {
    std::string command;
    fs::path config;
    fs::path out;
    std::optional<std::uint64_t> seed;
    std::string gain = "oracle";
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
    os << text;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
    fn(os);
}

KeyValues oracle_report(const OracleResult& o, double T) {
    KeyValues kv{
        {"K_star", format_numbers(o.riccati.K_star)},
        {"vecs_P_star", format_numbers(kit::vecs(o.riccati.P_star).transpose())},
        {"dare_residual", format_number(o.riccati.dare_residual)},
        {"hewer_iterations", std::to_string(o.riccati.iterations)},
        {"assumptions", "pass"},
    };
    for (auto& entry : bound_report(o.bound, T)) kv.push_back(std::move(entry));
    return kv;
}

void write_learning(const fs::path& dir, const LearningOutcome& l) {
    const auto& o = l.oracle;
    write_file(dir / "history.csv", [&](std::ostream& os) {
        write_history_csv(os, l.result, o.riccati.K_star, o.riccati.P_star);
    });
    write_text(dir / "learned_gain.txt", "K = " + format_numbers(l.result.K_final) + "\n");
    write_file(dir / "learning_schedule.txt", [&](std::ostream& os) { l.schedule.write(os); });
    write_file(dir / "learning_trace.csv",
               [&](std::ostream& os) { write_trace_csv(os, l.run.trace); });
    const KeyValues kv{
        {"K0", format_numbers(l.K0)},
        {"K_final", format_numbers(l.result.K_final)},
        {"K_star", format_numbers(o.riccati.K_star)},
        {"relative_gain_error", format_number(l.relative_gain_error)},
        {"iterations", std::to_string(l.result.iterations())},
        {"samples", std::to_string(l.run.log.size())},
        {"rank_achieved", std::to_string(l.rank.achieved)},
        {"rank_required", std::to_string(l.rank.required)},
        {"dependent_w_columns", std::to_string(l.rank.dependent_w_columns)},
    };
    write_file(dir / "learn_report.txt", [&](std::ostream& os) { write_key_values(os, kv); });
}

void write_simulation(const fs::path& dir, const SimulationOutcome& s, const std::string& gain) {
    if (s.learning) write_learning(dir, *s.learning);
    write_file(dir / "schedule.txt", [&](std::ostream& os) { s.schedule.write(os); });
    write_file(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, s.trace); });
    const auto& m = s.metrics;
    const KeyValues kv{
        {"gain_source", gain},
        {"K", format_numbers(s.K)},
        {"start", std::to_string(s.trace.steps.front().k)},
        {"horizon", std::to_string(s.trace.steps.size() - 1)},
        {"dos_eta", format_number(s.params.eta)},
        {"dos_tau_D", format_number(s.params.tau_D)},
        {"dos_kappa", format_number(s.params.kappa)},
        {"dos_T", format_number(s.params.T)},
        {"T_star", format_number(s.oracle.bound.T_star)},
        {"T_exceeds_T_star", s.params.T > s.oracle.bound.T_star ? "true" : "false"},
        {"schedule_passes_assumption", s.schedule_check.all_pass() ? "true" : "false"},
        {"final_quarter_max_abs_e", format_number(m.final_quarter_max_abs_e)},
        {"settling_instant", std::to_string(m.settling_instant)},
        {"peak_envelope_ratio", format_number(m.peak_envelope_ratio)},
        {"envelope_dominated", m.envelope_dominated ? "true" : "false"},
    };
    write_file(dir / "metrics.txt", [&](std::ostream& os) { write_key_values(os, kv); });
}

// Returns the process exit code; never throws.
int execute(const RunRequest& req) {
    try {
        ExperimentConfig cfg = load_config(req.config);
        if (req.seed) apply_seed(cfg, *req.seed);
        const std::string extra = req.command == "simulate" ? "gain=" + req.gain : "";
        const fs::path dir = req.out / (req.command + "-" + config_hash(cfg, extra));
        fs::create_directories(dir);
        write_text(dir / "config.txt", serialize_config(cfg));

        if (req.command == "oracle") {
            const OracleResult o = run_oracle(cfg);
            const double T = regulation_params(cfg, o.bound).T;
            write_file(dir / "oracle_report.txt",
                       [&](std::ostream& os) { write_key_values(os, oracle_report(o, T)); });
        } else if (req.command == "bound") {
            const OracleResult o = run_oracle(cfg);
            const double T = regulation_params(cfg, o.bound).T;
            write_file(dir / "bound_report.txt",
                       [&](std::ostream& os) { write_key_values(os, bound_report(o.bound, T)); });
        } else if (req.command == "learn") {
            write_learning(dir, run_learning(cfg));
        } else if (req.command == "simulate") {
            GainSource src = GainSource::File;
            std::optional<RowVec> file_gain;
            if (req.gain == "oracle") {
                src = GainSource::Oracle;
            } else if (req.gain == "learned") {
                src = GainSource::Learned;
            } else {
                file_gain = read_gain_file(req.gain, cfg.plant.n() + cfg.plant.q());
            }
            write_simulation(dir, run_simulation(cfg, src, file_gain), req.gain);
        } else {
            throw Error(ErrorKind::Argument, "unknown command '" + req.command + "'");
        }
        log_line(dir.string());
        return 0;
    } catch (const DivergenceError& e) {
        log_line(req.config.string() + ": error (divergence at k=" + std::to_string(e.instant()) +
                 "): " + e.what());
        return exit_code(e.kind());
    } catch (const Error& e) {
        log_line(req.config.string() + ": error (" + to_string(e.kind()) + "): " + e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        log_line(req.config.string() + ": error: " + e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DoS-resilient learning-based output regulation"};
    app.require_subcommand(1);

    RunRequest req;
    std::string out = "out";
    std::uint64_t seed = 0;
    std::vector<std::string> sweep_configs;
    std::string sweep_command = "simulate";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    const auto add_common = [&](CLI::App* sub, bool many) {
        if (many) {
            sub->add_option("--config", sweep_configs, "Experiment config files")
                ->required()
                ->check(CLI::ExistingFile);
        } else {
            sub->add_option("--config", req.config, "Experiment config file")
                ->required()
                ->check(CLI::ExistingFile);
        }
        sub->add_option("--out", out, "Output root directory")->capture_default_str();
        sub->add_option("--seed", seed, "Master seed for every random stream");
    };

    const std::pair<const char*, const char*> plain[] = {
        {"oracle", "Model-based optimal gain, Riccati solution and resilience bound"},
        {"learn", "Learn the optimal gain from DoS-interrupted data"},
        {"bound", "Resilience bound T* and envelope coefficients"},
    };
    for (const auto& [name, desc] : plain) add_common(app.add_subcommand(name, desc), false);
    auto* sim = app.add_subcommand("simulate", "Regulate under a DoS schedule and record traces");
    add_common(sim, false);
    sim->add_option("--gain", req.gain, "oracle, learned or a gain file")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Run one command over several configs in parallel");
    add_common(sweep, true);
    sweep->add_option("--command", sweep_command, "Command run for every config")
        ->check(CLI::IsMember({"oracle", "learn", "simulate", "bound"}))
        ->capture_default_str();
    sweep->add_option("--gain", req.gain, "Gain source for simulate")->capture_default_str();
    sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    req.out = out;
    if (chosen->count("--seed") > 0) req.seed = seed;

    if (chosen->get_name() != "sweep") {
        req.command = chosen->get_name();
        return execute(req);
    }

    std::vector<int> codes(sweep_configs.size(), 0);
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex next_mutex;
    const auto worker = [&] {
        for (;;) {
            std::size_t i = 0;
            {
                const std::lock_guard lock(next_mutex);
                if (next >= sweep_configs.size()) return;
                i = next++;
            }
            RunRequest r = req;
            r.command = sweep_command;
            r.config = sweep_configs[i];
            codes[i] = execute(r);
        }
    };
    const auto n = std::min<std::size_t>(threads, sweep_configs.size());
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return *std::max_element(codes.begin(), codes.end());
}
