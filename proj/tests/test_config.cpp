#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dosreg/config.hpp"
#include "dosreg/errors.hpp"
#include "dosreg/pipeline.hpp"
#include "dosreg/report.hpp"
#include "support.hpp"

using namespace dosreg;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, const fs::path& base = {}) {
    std::istringstream is(text);
    return parse_config(is, base);
}

ErrorKind parse_error_kind(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected a parse error");
    return ErrorKind::Numerical;
}

const char* kScalarConfig =
    "A = 0.5\nB = 1\nC = 1\nD = 0.1\nE = 1\nF = -1\nG2 = 1\n"
    "Q = 1 0\nQ = 0 1\nw0 = 1\n";

}  // namespace

TEST_CASE("pendulum preset config") {
    const ExperimentConfig cfg = parse("preset = pendulum\n");
    CHECK(cfg == pendulum_config());
    CHECK(cfg.plant.n() == 4);
    CHECK(cfg.Q(4, 4) == 15.0);
    CHECK(cfg.x0(0) == 0.5);
    CHECK(cfg.w0(0) == 1.0);
    CHECK(cfg.dos.kappa == 40.0);
}

TEST_CASE("inline plant and overrides") {
    const ExperimentConfig cfg = parse(std::string(kScalarConfig) +
                                       "Q_diag = 2 3\nR = 4\nsim.dos.T = auto\nK0 = 1 2\n"
                                       "explore.silence_under_dos = true\n");
    CHECK(cfg.plant.A(0, 0) == 0.5);
    CHECK(cfg.Q(1, 1) == 3.0);
    CHECK(cfg.R == 4.0);
    CHECK(cfg.sim_T_auto);
    REQUIRE(cfg.K0.has_value());
    CHECK((*cfg.K0)(1) == 2.0);
    CHECK(cfg.explore_silence_under_dos);
    CHECK(cfg.x0.size() == 1);
    CHECK(cfg.z0.size() == 1);
}

TEST_CASE("config errors") {
    CHECK(parse_error_kind("preset = pendulum\nbogus = 1\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = cartpole\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\nR = abc\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\nx0 = 1 2\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\nQ_diag = 1 1 1\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\nA = 1 2\nA = 3\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\nlearn.ks = 0\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\ndos.schedule_file = /nonexistent/x\n") ==
          ErrorKind::Configuration);
    CHECK(parse_error_kind("R = 1\n") == ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\nthis line has no equals\n") ==
          ErrorKind::Configuration);
    CHECK(parse_error_kind("preset = pendulum\ndos.eta = 0.5\n") == ErrorKind::Validation);
    CHECK(parse_error_kind("preset = pendulum\nB = 1\n") == ErrorKind::Dimension);
}

TEST_CASE("relative schedule paths resolve against the config directory") {
    const fs::path dir = fs::temp_directory_path() / "dosreg_cfg_paths";
    fs::create_directories(dir);
    std::ofstream(dir / "sched.txt") << "3 2\n";
    const ExperimentConfig cfg = parse("preset = pendulum\ndos.schedule_file = sched.txt\n", dir);
    CHECK(fs::equivalent(cfg.dos_schedule_file, dir / "sched.txt"));
    std::ofstream(dir / "exp.cfg") << "preset = pendulum\nsim.dos.schedule_file = sched.txt\n";
    CHECK(fs::equivalent(load_config(dir / "exp.cfg").sim_schedule_file, dir / "sched.txt"));
    fs::remove_all(dir);
}

TEST_CASE("property: config round trip") {
    testsupport::Gen g(301);
    for (int trial = 0; trial < 40; ++trial) {
        ExperimentConfig cfg;
        const auto n = g.integer(1, 5);
        const auto q = g.integer(1, 3);
        cfg.plant = g.plant(n, q);
        cfg.G2 = g.matrix(q, 1);
        cfg.Q = g.spd(n + q);
        cfg.R = g.uniform(0.1, 3.0);
        cfg.dos = {g.uniform(1.0, 3.0), g.uniform(1.0, 20.0), g.uniform(0.5, 50.0),
                   g.uniform(1.5, 100.0)};
        cfg.dos_seed = static_cast<std::uint64_t>(g.integer(0, 1L << 40));
        cfg.learn_k0 = g.integer(0, 10);
        cfg.learn_ks = cfg.learn_k0 + g.integer(1, 300);
        cfg.explore_seed = static_cast<std::uint64_t>(g.integer(0, 1000));
        cfg.explore_amplitude = g.uniform(0.0, 2.0);
        cfg.explore_silence_under_dos = g.uniform() > 0.0;
        cfg.epsilon0 = g.uniform(1e-6, 1.0);
        if (g.uniform() > 0.0) cfg.K0 = g.matrix(1, n + q);
        cfg.x0 = g.vector(n);
        cfg.z0 = g.vector(q);
        cfg.w0 = g.vector(q);
        cfg.sim_horizon = g.integer(1, 5000);
        if (g.uniform() > 0.0) cfg.sim_eta = g.uniform(1.0, 2.0);
        if (g.uniform() > 0.0) cfg.sim_kappa = g.uniform(1.0, 2.0);
        if (g.uniform() > 0.0) cfg.sim_tau_D = g.uniform(1.0, 2.0);
        const double pick = g.uniform();
        if (pick > 0.3) {
            cfg.sim_T_auto = true;
        } else if (pick > -0.3) {
            cfg.sim_T = g.uniform(2.0, 1e7);
        }
        cfg.sim_dos_seed = static_cast<std::uint64_t>(g.integer(0, 1000));

        const std::string text = serialize_config(cfg);
        const ExperimentConfig back = parse(text);
        CHECK(back == cfg);
        CHECK(serialize_config(back) == text);
        CHECK(config_hash(back) == config_hash(cfg));
    }
    CHECK(parse(serialize_config(pendulum_config())) == pendulum_config());
}

TEST_CASE("hash and seed") {
    ExperimentConfig a = pendulum_config();
    ExperimentConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    apply_seed(b, 99);
    CHECK(b.dos_seed == 99);
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a, "x") != config_hash(a));
}

TEST_CASE("format_number round trips") {
    testsupport::Gen g(302);
    for (int i = 0; i < 200; ++i) {
        const double v = g.uniform(-1.0, 1.0) * std::pow(10.0, g.integer(-300, 300));
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    }
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("key-value reports round trip") {
    const ResilienceBound b = ResilienceBound::from_rates(0.5, 3.0, 2.0);
    const KeyValues kv = bound_report(b, 4.0);
    std::stringstream ss;
    write_key_values(ss, kv);
    const KeyValues back = read_key_values(ss);
    CHECK(back == kv);
    bool found = false;
    for (const auto& [k, v] : kv) {
        if (k == "T_star") {
            CHECK(std::strtod(v.c_str(), nullptr) == doctest::Approx(3.0));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("trace CSV header") {
    SimTrace t;
    t.n = 2;
    t.q = 1;
    SimStep st;
    st.x = Vec::Zero(2);
    st.z = Vec::Zero(1);
    st.w = Vec::Ones(1);
    t.steps.push_back(st);
    std::stringstream ss;
    write_trace_csv(ss, t);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "k,x1,x2,z1,w1,u,e,y_d,attacked,V,env_exact,env_relaxed");
    std::string row;
    std::getline(ss, row);
    CHECK(row == "0,0,0,0,1,0,0,0,0,0,0,0");
}

TEST_CASE("pipeline: oracle names the failing assumption") {
    ExperimentConfig cfg = pendulum_config();
    cfg.plant.B.setZero();
    try {
        run_oracle(cfg);
        FAIL("expected assumption violation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AssumptionViolation);
        CHECK(std::string(e.what()).find("Assumption 1") != std::string::npos);
        CHECK(exit_code(e.kind()) == 2);
    }
}

TEST_CASE("pipeline: default initial gain is a rounded stabilizing gain") {
    const OracleResult o = run_oracle(pendulum_config());
    const RowVec K0 = default_initial_gain(o);
    CHECK(kit::is_schur(o.aug.Abar - o.aug.Bbar * K0));
    CHECK(K0 != o.riccati.K_star);
    CHECK((K0 - o.riccati.K_star).norm() <= 0.05 * o.riccati.K_star.norm());
}

TEST_CASE("pipeline: learning and learned-gain regulation") {
    ExperimentConfig cfg = pendulum_config();
    cfg.sim_T_auto = true;
    const LearningOutcome l = run_learning(cfg);
    CHECK(l.relative_gain_error < 1e-3);
    CHECK(l.result.iterations() <= 10);
    CHECK(l.rank.satisfied);

    const SimulationOutcome s = run_simulation(cfg, GainSource::Learned);
    CHECK(s.trace.steps.front().k == cfg.learn_ks);
    CHECK(s.trace.steps.front().x == l.run.trace.steps.back().x);
    CHECK(s.trace.steps.front().z == l.run.trace.steps.back().z);
    CHECK(s.schedule_check.all_pass());
    CHECK(s.metrics.final_quarter_max_abs_e < 1e-3);
    CHECK(s.metrics.envelope_dominated);
}

TEST_CASE("pipeline: learning window start filters samples") {
    ExperimentConfig cfg = pendulum_config();
    cfg.learn_k0 = 20;
    cfg.learn_ks = 120;
    const LearningOutcome l = run_learning(cfg);
    for (const auto& s : l.run.log.samples) CHECK(s.k >= 20);
    CHECK(l.relative_gain_error < 1e-3);
}

TEST_CASE("pipeline: exit code mapping") {
    CHECK(exit_code(ErrorKind::Validation) == 2);
    CHECK(exit_code(ErrorKind::Dimension) == 2);
    CHECK(exit_code(ErrorKind::Configuration) == 2);
    CHECK(exit_code(ErrorKind::Numerical) == 3);
    CHECK(exit_code(ErrorKind::Divergence) == 3);
    CHECK(exit_code(ErrorKind::Convergence) == 3);
    CHECK(exit_code(ErrorKind::Rank) == 4);
    CHECK(exit_code(ErrorKind::Excitation) == 4);
}

TEST_CASE("pipeline: gain file parsing") {
    const fs::path dir = fs::temp_directory_path() / "dosreg_gain_file";
    fs::create_directories(dir);
    std::ofstream(dir / "ok.txt") << "# learned\nK = 1 2 3 4 5\n";
    std::ofstream(dir / "short.txt") << "1 2 3\n";
    CHECK(read_gain_file(dir / "ok.txt", 5)(4) == 5.0);
    try {
        read_gain_file(dir / "short.txt", 5);
        FAIL("expected dimension error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Dimension);
    }
    fs::remove_all(dir);
}

TEST_CASE("scalar config oracle matches an independent value iteration") {
    const ExperimentConfig cfg = parse(kScalarConfig);
    const OracleResult o = run_oracle(cfg);
    Mat P = Mat::Zero(2, 2);
    const Mat& A = o.aug.Abar;
    const Mat& B = o.aug.Bbar;
    for (int i = 0; i < 20000; ++i) {
        const Mat BtPA = B.transpose() * P * A;
        P = cfg.Q + A.transpose() * P * A -
            BtPA.transpose() * BtPA / (1.0 + (B.transpose() * P * B)(0));
    }
    const RowVec K = (B.transpose() * P * A) / (1.0 + (B.transpose() * P * B)(0));
    CHECK(testsupport::rel_err(o.riccati.P_star, P) < 1e-10);
    CHECK(testsupport::rel_err(o.riccati.K_star, K) < 1e-10);
}
