#include "dosreg/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "dosreg/errors.hpp"
#include "dosreg/report.hpp"

namespace dosreg {

namespace {

[[noreturn]] void config_error(const std::string& msg) {
    throw Error(ErrorKind::Configuration, "config: " + msg);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
            config_error("'" + key + "': '" + tok + "' is not a finite number");
        }
        out.push_back(v);
    }
    if (out.empty()) config_error("'" + key + "' has no value");
    return out;
}

double parse_scalar(const std::string& key, const std::string& text) {
    const auto v = parse_numbers(key, text);
    if (v.size() != 1) config_error("'" + key + "' expects a single number");
    return v[0];
}

long parse_long(const std::string& key, const std::string& text) {
    const double v = parse_scalar(key, text);
    if (v != std::floor(v)) config_error("'" + key + "' expects an integer");
    return static_cast<long>(v);
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || *end != '\0' || errno == ERANGE) {
        config_error("'" + key + "' expects a non-negative integer seed");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    config_error("'" + key + "' expects true or false");
}

Mat parse_rows(const std::string& key, const std::vector<std::string>& rows) {
    std::vector<std::vector<double>> vals;
    for (const auto& r : rows) vals.push_back(parse_numbers(key, r));
    const std::size_t cols = vals.front().size();
    Mat m(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i].size() != cols) config_error("'" + key + "' rows have unequal lengths");
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i][j];
        }
    }
    return m;
}

Vec parse_vector(const std::string& key, const std::string& text) {
    const auto v = parse_numbers(key, text);
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal().string();
}

void write_matrix(std::ostream& os, const char* key, const Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << key << " = " << format_numbers(m.row(i)) << '\n';
    }
}

bool same(const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

void ExperimentConfig::validate() const {
    plant.validate();
    const auto n = plant.n();
    const auto q = plant.q();
    if (G2.rows() != q || G2.cols() != 1) config_error("G2 must be q x 1");
    kit::require_finite(G2, "G2");
    if (Q.rows() != n + q || Q.cols() != n + q) config_error("Q must be (n+q) x (n+q)");
    kit::require_finite(Q, "Q");
    if (!(R > 0.0)) config_error("R must be positive");
    dos.validate();
    if (learn_k0 < 0 || learn_ks <= learn_k0) config_error("learning window needs 0 <= k0 < ks");
    if (!(explore_amplitude >= 0.0)) config_error("exploration amplitude must be >= 0");
    if (!(epsilon0 > 0.0)) config_error("epsilon0 must be positive");
    if (K0 && K0->size() != n + q) config_error("K0 must have n+q entries");
    if (x0.size() != n) config_error("x0 must have n entries");
    if (z0.size() != q) config_error("z0 must have q entries");
    if (w0.size() != q) config_error("w0 must have q entries");
    if (sim_horizon < 1) config_error("sim.horizon must be >= 1");
    for (const auto* f : {&dos_schedule_file, &sim_schedule_file}) {
        if (!f->empty() && !std::filesystem::exists(*f)) {
            config_error("schedule file '" + *f + "' does not exist");
        }
    }
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return preset == o.preset && same(plant.A, o.plant.A) && same(plant.B, o.plant.B) &&
           same(plant.C, o.plant.C) && same(plant.D, o.plant.D) && same(plant.E, o.plant.E) &&
           same(plant.F, o.plant.F) && same(G2, o.G2) && same(Q, o.Q) && R == o.R &&
           dos == o.dos && dos_seed == o.dos_seed && dos_schedule_file == o.dos_schedule_file &&
           learn_k0 == o.learn_k0 && learn_ks == o.learn_ks && explore_seed == o.explore_seed &&
           explore_amplitude == o.explore_amplitude &&
           explore_silence_under_dos == o.explore_silence_under_dos &&
           epsilon0 == o.epsilon0 && K0.has_value() == o.K0.has_value() &&
           (!K0 || same(*K0, *o.K0)) && same(x0, o.x0) && same(z0, o.z0) && same(w0, o.w0) &&
           sim_horizon == o.sim_horizon && sim_eta == o.sim_eta && sim_tau_D == o.sim_tau_D &&
           sim_kappa == o.sim_kappa && sim_T == o.sim_T && sim_T_auto == o.sim_T_auto &&
           sim_dos_seed == o.sim_dos_seed && sim_schedule_file == o.sim_schedule_file;
}

ExperimentConfig pendulum_config() {
    ExperimentConfig cfg;
    cfg.preset = "pendulum";
    cfg.plant = pendulum_plant();
    cfg.G2 = pendulum_internal_model().G2;
    Vec qd(5);
    qd << 1000, 1000, 1000, 1000, 15;
    cfg.Q = qd.asDiagonal();
    cfg.R = 1.0;
    cfg.dos = DoSParams{1.0, 15.0, 40.0, 10.0};
    cfg.x0 = Vec::Zero(4);
    cfg.x0(0) = 0.5;
    cfg.z0 = Vec::Zero(1);
    cfg.w0 = Vec::Ones(1);
    return cfg;
}

ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    ExperimentConfig cfg;
    for (const auto& [k, v] : entries) {
        if (k == "preset") {
            if (v != "pendulum") config_error("unknown preset '" + v + "'");
            cfg = pendulum_config();
        }
    }

    // Matrix rows are grouped so a repeated key replaces the preset wholesale.
    std::map<std::string, std::vector<std::string>> rows;
    for (const auto& [k, v] : entries) {
        if (k == "preset") continue;
        if (k == "A" || k == "B" || k == "C" || k == "D" || k == "E" || k == "F" ||
            k == "G2" || k == "Q") {
            rows[k].push_back(v);
        } else if (k == "Q_diag") {
            rows.erase("Q");
            cfg.Q = parse_vector(k, v).asDiagonal();
        } else if (k == "R") {
            cfg.R = parse_scalar(k, v);
        } else if (k == "dos.eta") {
            cfg.dos.eta = parse_scalar(k, v);
        } else if (k == "dos.tau_D") {
            cfg.dos.tau_D = parse_scalar(k, v);
        } else if (k == "dos.kappa") {
            cfg.dos.kappa = parse_scalar(k, v);
        } else if (k == "dos.T") {
            cfg.dos.T = parse_scalar(k, v);
        } else if (k == "dos.seed") {
            cfg.dos_seed = parse_seed(k, v);
        } else if (k == "dos.schedule_file") {
            cfg.dos_schedule_file = resolve_path(v, base_dir);
        } else if (k == "learn.k0") {
            cfg.learn_k0 = parse_long(k, v);
        } else if (k == "learn.ks") {
            cfg.learn_ks = parse_long(k, v);
        } else if (k == "explore.seed") {
            cfg.explore_seed = parse_seed(k, v);
        } else if (k == "explore.amplitude") {
            cfg.explore_amplitude = parse_scalar(k, v);
        } else if (k == "explore.silence_under_dos") {
            cfg.explore_silence_under_dos = parse_bool(k, v);
        } else if (k == "epsilon0") {
            cfg.epsilon0 = parse_scalar(k, v);
        } else if (k == "K0") {
            cfg.K0 = parse_vector(k, v).transpose();
        } else if (k == "x0") {
            cfg.x0 = parse_vector(k, v);
        } else if (k == "z0") {
            cfg.z0 = parse_vector(k, v);
        } else if (k == "w0") {
            cfg.w0 = parse_vector(k, v);
        } else if (k == "sim.horizon") {
            cfg.sim_horizon = parse_long(k, v);
        } else if (k == "sim.dos.eta") {
            cfg.sim_eta = parse_scalar(k, v);
        } else if (k == "sim.dos.tau_D") {
            cfg.sim_tau_D = parse_scalar(k, v);
        } else if (k == "sim.dos.kappa") {
            cfg.sim_kappa = parse_scalar(k, v);
        } else if (k == "sim.dos.T") {
            if (v == "auto") {
                cfg.sim_T_auto = true;
                cfg.sim_T.reset();
            } else {
                cfg.sim_T = parse_scalar(k, v);
                cfg.sim_T_auto = false;
            }
        } else if (k == "sim.dos.seed") {
            cfg.sim_dos_seed = parse_seed(k, v);
        } else if (k == "sim.dos.schedule_file") {
            cfg.sim_schedule_file = resolve_path(v, base_dir);
        } else {
            config_error("unknown key '" + k + "'");
        }
    }
    for (const auto& [k, r] : rows) {
        Mat m = parse_rows(k, r);
        if (k == "A") cfg.plant.A = std::move(m);
        else if (k == "B") cfg.plant.B = std::move(m);
        else if (k == "C") cfg.plant.C = std::move(m);
        else if (k == "D") cfg.plant.D = std::move(m);
        else if (k == "E") cfg.plant.E = std::move(m);
        else if (k == "F") cfg.plant.F = std::move(m);
        else if (k == "G2") cfg.G2 = std::move(m);
        else if (k == "Q") cfg.Q = std::move(m);
    }
    if (cfg.plant.A.size() == 0 || cfg.plant.E.size() == 0) {
        config_error("plant matrices missing (give A..F and G2, or preset = pendulum)");
    }
    if (cfg.x0.size() == 0) cfg.x0 = Vec::Zero(cfg.plant.n());
    if (cfg.z0.size() == 0) cfg.z0 = Vec::Zero(cfg.plant.q());
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open '" + path.string() + "'");
    return parse_config(in, path.parent_path());
}

void write_config(std::ostream& os, const ExperimentConfig& cfg) {
    os << "# dosreg experiment config\n";
    if (!cfg.preset.empty()) os << "preset = " << cfg.preset << '\n';
    write_matrix(os, "A", cfg.plant.A);
    write_matrix(os, "B", cfg.plant.B);
    write_matrix(os, "C", cfg.plant.C);
    write_matrix(os, "D", cfg.plant.D);
    write_matrix(os, "E", cfg.plant.E);
    write_matrix(os, "F", cfg.plant.F);
    write_matrix(os, "G2", cfg.G2);
    write_matrix(os, "Q", cfg.Q);
    os << "R = " << format_number(cfg.R) << '\n';
    os << "dos.eta = " << format_number(cfg.dos.eta) << '\n';
    os << "dos.tau_D = " << format_number(cfg.dos.tau_D) << '\n';
    os << "dos.kappa = " << format_number(cfg.dos.kappa) << '\n';
    os << "dos.T = " << format_number(cfg.dos.T) << '\n';
    os << "dos.seed = " << cfg.dos_seed << '\n';
    if (!cfg.dos_schedule_file.empty()) os << "dos.schedule_file = " << cfg.dos_schedule_file << '\n';
    os << "learn.k0 = " << cfg.learn_k0 << '\n';
    os << "learn.ks = " << cfg.learn_ks << '\n';
    os << "explore.seed = " << cfg.explore_seed << '\n';
    os << "explore.amplitude = " << format_number(cfg.explore_amplitude) << '\n';
    os << "explore.silence_under_dos = " << (cfg.explore_silence_under_dos ? "true" : "false")
       << '\n';
    os << "epsilon0 = " << format_number(cfg.epsilon0) << '\n';
    if (cfg.K0) os << "K0 = " << format_numbers(*cfg.K0) << '\n';
    os << "x0 = " << format_numbers(cfg.x0.transpose()) << '\n';
    os << "z0 = " << format_numbers(cfg.z0.transpose()) << '\n';
    os << "w0 = " << format_numbers(cfg.w0.transpose()) << '\n';
    os << "sim.horizon = " << cfg.sim_horizon << '\n';
    if (cfg.sim_eta) os << "sim.dos.eta = " << format_number(*cfg.sim_eta) << '\n';
    if (cfg.sim_tau_D) os << "sim.dos.tau_D = " << format_number(*cfg.sim_tau_D) << '\n';
    if (cfg.sim_kappa) os << "sim.dos.kappa = " << format_number(*cfg.sim_kappa) << '\n';
    if (cfg.sim_T_auto) {
        os << "sim.dos.T = auto\n";
    } else if (cfg.sim_T) {
        os << "sim.dos.T = " << format_number(*cfg.sim_T) << '\n';
    }
    os << "sim.dos.seed = " << cfg.sim_dos_seed << '\n';
    if (!cfg.sim_schedule_file.empty()) {
        os << "sim.dos.schedule_file = " << cfg.sim_schedule_file << '\n';
    }
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    write_config(os, cfg);
    return os.str();
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.dos_seed = seed;
    cfg.explore_seed = seed + 1;
    cfg.sim_dos_seed = seed + 2;
}

std::string config_hash(const ExperimentConfig& cfg, const std::string& extra) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : serialize_config(cfg) + extra) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dosreg
