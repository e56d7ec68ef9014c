#pragma once

#include <vector>

#include "dosreg/matrix_kit.hpp"

namespace dosreg {

// One instant of a closed-loop run. Lyapunov fields are NaN when the run had
// no Lyapunov monitor attached.
struct SimStep {
    long k = 0;
    Vec x;
    Vec z;
    Vec w;
    double u = 0.0;
    double e = 0.0;
    double y_d = 0.0;
    bool attacked = false;
    Vec zeta_held;  // ζ at the last communication-allowed instant
    double e_held = 0.0;
    long last_update = 0;
    Vec zeta_tilde;
    double V = 0.0;
    double env_exact = 0.0;
    double env_relaxed = 0.0;

    [[nodiscard]] Vec zeta() const {
        Vec out(x.size() + z.size());
        out << x, z;
        return out;
    }
};

struct SimTrace {
    std::vector<SimStep> steps;  // horizon + 1 entries
    Eigen::Index n = 0;
    Eigen::Index q = 0;

    [[nodiscard]] bool empty() const { return steps.empty(); }
    [[nodiscard]] long first_instant() const { return steps.empty() ? 0 : steps.front().k; }
};

}  // namespace dosreg
