#include "dosreg/report.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace dosreg {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_numbers(const Eigen::Ref<const Mat>& values) {
    std::string out;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (!out.empty()) out += ' ';
            out += format_number(values(i, j));
        }
    }
    return out;
}

void write_key_values(std::ostream& os, const KeyValues& kv) {
    for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
}

KeyValues read_key_values(std::istream& is) {
    KeyValues kv;
    std::string line;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

KeyValues bound_report(const ResilienceBound& bound, double T) {
    return {
        {"omega1", format_number(bound.omega1)},
        {"omega2", format_number(bound.omega2)},
        {"alpha1", format_number(bound.alpha1)},
        {"alpha2", format_number(bound.alpha2)},
        {"T_star", format_number(bound.T_star)},
        {"kappa", format_number(bound.kappa)},
        {"envelope_coeff", format_number(bound.envelope_coeff())},
        {"log_envelope_coeff", format_number(bound.log_envelope_coeff())},
        {"T", format_number(T)},
        {"delta_at_T", format_number(bound.delta(T))},
        {"T_exceeds_T_star", T > bound.T_star ? "true" : "false"},
    };
}

void write_history_csv(std::ostream& os, const LearningResult& result, const RowVec& K_ref,
                       const Mat& P_ref) {
    os << "j,K_error,P_error,residual\n";
    for (const auto& it : result.history) {
        os << it.j << ',' << format_number((it.K - K_ref).norm()) << ','
           << format_number((it.P - P_ref).norm()) << ',' << format_number(it.residual) << '\n';
    }
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
    os << 'k';
    for (Eigen::Index i = 1; i <= trace.n; ++i) os << ",x" << i;
    for (Eigen::Index i = 1; i <= trace.q; ++i) os << ",z" << i;
    for (Eigen::Index i = 1; i <= trace.q; ++i) os << ",w" << i;
    os << ",u,e,y_d,attacked,V,env_exact,env_relaxed\n";
    for (const auto& st : trace.steps) {
        os << st.k;
        for (Eigen::Index i = 0; i < st.x.size(); ++i) os << ',' << format_number(st.x(i));
        for (Eigen::Index i = 0; i < st.z.size(); ++i) os << ',' << format_number(st.z(i));
        for (Eigen::Index i = 0; i < st.w.size(); ++i) os << ',' << format_number(st.w(i));
        os << ',' << format_number(st.u) << ',' << format_number(st.e) << ','
           << format_number(st.y_d) << ',' << (st.attacked ? 1 : 0) << ','
           << format_number(st.V) << ',' << format_number(st.env_exact) << ','
           << format_number(st.env_relaxed) << '\n';
    }
}

}  // namespace dosreg
