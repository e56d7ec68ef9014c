#include "dosreg/closed_loop_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "dosreg/errors.hpp"

namespace dosreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_initial(const LinearPlant& plant, const RowVec& K, const InitialState& init,
                   long horizon) {
    plant.validate();
    if (init.x0.size() != plant.n() || init.z0.size() != plant.q() ||
        init.w0.size() != plant.q()) {
        throw Error(ErrorKind::Dimension, "initial state dimensions do not match the plant");
    }
    if (K.size() != plant.n() + plant.q()) {
        throw Error(ErrorKind::Dimension, "gain must have n+q entries");
    }
    if (horizon < 1) throw Error(ErrorKind::Argument, "horizon must be >= 1");
}

using InputOffset = std::function<double(long k, bool attacked)>;

SimTrace run_loop(const LinearPlant& plant, const InternalModel& im, const DoSSchedule& sched,
                  const RowVec& K, const InitialState& init, long horizon, long start,
                  const InputOffset& offset, const RegulatorSolution* reg,
                  const LyapunovMonitor* monitor) {
    SimTrace trace;
    trace.n = plant.n();
    trace.q = plant.q();
    trace.steps.reserve(static_cast<std::size_t>(horizon + 1));

    Vec x = init.x0;
    Vec z = init.z0;
    Vec w = init.w0;
    Vec zeta_held;
    double e_held = 0.0;
    long last_update = start;
    double V0 = 0.0;

    for (long k = start; k <= start + horizon; ++k) {
        SimStep st;
        st.k = k;
        st.x = x;
        st.z = z;
        st.w = w;
        st.e = (plant.C * x)(0) + (plant.F * w)(0);
        st.y_d = plant.reference(w);
        st.attacked = sched.is_denied(k);
        const Vec zeta = st.zeta();
        if (k == start || !st.attacked) {
            zeta_held = zeta;
            e_held = st.e;
            last_update = k;
        }
        st.zeta_held = zeta_held;
        st.e_held = e_held;
        st.last_update = last_update;
        st.u = -(K * zeta_held)(0) + offset(k, st.attacked);

        if (reg != nullptr) {
            st.zeta_tilde = zeta - reg->Xi * w;
        } else {
            st.zeta_tilde = Vec::Constant(zeta.size(), kNaN);
        }
        if (monitor != nullptr && reg != nullptr) {
            st.V = st.zeta_tilde.dot(monitor->P_star * st.zeta_tilde);
            if (k == start) V0 = st.V;
            const EnvelopeValues env =
                lyapunov_envelope(monitor->bound, sched, V0, k - start, monitor->T, start);
            st.env_exact = env.exact;
            st.env_relaxed = env.relaxed;
        } else {
            st.V = st.env_exact = st.env_relaxed = kNaN;
        }

        if (!x.allFinite() || !z.allFinite() || !std::isfinite(st.u)) {
            throw DivergenceError("closed loop diverged at instant " + std::to_string(k), k);
        }
        trace.steps.push_back(std::move(st));

        if (k == start + horizon) break;
        x = plant.A * x + plant.B.col(0) * trace.steps.back().u + plant.D * w;
        z = plant.E * z + im.G2.col(0) * e_held;
        w = plant.E * w;
    }
    return trace;
}

}  // namespace

SimTrace simulate_regulation(const LinearPlant& plant, const InternalModel& im,
                             const DoSSchedule& sched, const RowVec& K,
                             const RegulatorSolution& reg, const InitialState& init, long horizon,
                             const std::optional<LyapunovMonitor>& monitor, long start) {
    check_initial(plant, K, init, horizon);
    if (reg.Xi.rows() != plant.n() + plant.q() || reg.Xi.cols() != plant.q()) {
        throw Error(ErrorKind::Dimension, "regulator solution does not match the plant");
    }
    const auto no_offset = [](long, bool) { return 0.0; };
    return run_loop(plant, im, sched, K, init, horizon, start, no_offset, &reg,
                    monitor ? &*monitor : nullptr);
}

LearningRun simulate_learning(const LinearPlant& plant, const InternalModel& im,
                              const DoSSchedule& sched, const RowVec& K0,
                              const ExplorationSignal& exploration, const InitialState& init,
                              long horizon, const LearningRunOptions& opts, long start) {
    check_initial(plant, K0, init, horizon);
    const auto offset = [&](long k, bool attacked) {
        if (attacked && opts.silence_exploration_under_dos) return 0.0;
        return exploration(k);
    };
    LearningRun run;
    try {
        run.trace = run_loop(plant, im, sched, K0, init, horizon, start, offset, nullptr, nullptr);
    } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " during learning; K0 may not stabilize",
                              e.instant());
    }
    run.log = collect_log(run.trace, sched);
    return run;
}

TrackingMetrics tracking_metrics(const SimTrace& trace, double tolerance) {
    TrackingMetrics m;
    const auto len = trace.steps.size();
    if (len == 0) return m;
    const std::size_t quarter = std::max<std::size_t>(1, (len + 3) / 4);
    for (std::size_t i = len - quarter; i < len; ++i) {
        m.final_quarter_max_abs_e =
            std::max(m.final_quarter_max_abs_e, std::abs(trace.steps[i].e));
    }
    m.settling_instant = -1;
    for (std::size_t i = len; i-- > 0;) {
        if (!(std::abs(trace.steps[i].e) < tolerance)) break;
        m.settling_instant = trace.steps[i].k;
    }
    for (const auto& st : trace.steps) {
        if (std::isnan(st.V) || std::isnan(st.env_exact)) continue;
        double ratio = 0.0;
        if (st.V > 0.0) {
            ratio = st.env_exact > 0.0 ? st.V / st.env_exact
                                       : std::numeric_limits<double>::infinity();
        }
        m.peak_envelope_ratio = std::max(m.peak_envelope_ratio, ratio);
    }
    m.envelope_dominated = m.peak_envelope_ratio <= 1.0 + 1e-6;
    return m;
}

}  // namespace dosreg
