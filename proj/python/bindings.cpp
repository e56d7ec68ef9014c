#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dosreg/config.hpp"
#include "dosreg/errors.hpp"
#include "dosreg/pipeline.hpp"

namespace py = pybind11;
using namespace dosreg;

namespace {

ExperimentConfig config_from_text(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

py::dict trace_dict(const SimTrace& trace) {
    const auto n = static_cast<Eigen::Index>(trace.steps.size());
    Eigen::VectorXi k(n);
    Vec u(n), e(n), V(n), env(n);
    Mat x(n, trace.n), z(n, trace.q), w(n, trace.q);
    Eigen::VectorXi attacked(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const SimStep& st = trace.steps[static_cast<std::size_t>(i)];
        k(i) = static_cast<int>(st.k);
        x.row(i) = st.x.transpose();
        z.row(i) = st.z.transpose();
        w.row(i) = st.w.transpose();
        u(i) = st.u;
        e(i) = st.e;
        V(i) = st.V;
        env(i) = st.env_exact;
        attacked(i) = st.attacked ? 1 : 0;
    }
    py::dict d;
    d["k"] = k;
    d["x"] = x;
    d["z"] = z;
    d["w"] = w;
    d["u"] = u;
    d["e"] = e;
    d["attacked"] = attacked;
    d["V"] = V;
    d["env_exact"] = env;
    return d;
}

py::dict oracle_dict(const OracleResult& o) {
    py::dict d;
    d["K_star"] = Vec(o.riccati.K_star.transpose());
    d["P_star"] = o.riccati.P_star;
    d["iterations"] = o.riccati.iterations;
    d["dare_residual"] = o.riccati.dare_residual;
    d["T_star"] = o.bound.T_star;
    d["omega1"] = o.bound.omega1;
    d["omega2"] = o.bound.omega2;
    return d;
}

std::vector<std::pair<long, long>> intervals_of(const DoSSchedule& s) {
    std::vector<std::pair<long, long>> out;
    for (const auto& iv : s.intervals()) out.emplace_back(iv.onset, iv.duration);
    return out;
}

DoSSchedule schedule_of(const std::vector<std::pair<long, long>>& pairs) {
    std::vector<AttackInterval> ivs;
    for (const auto& [h, tau] : pairs) ivs.push_back({h, tau});
    return DoSSchedule(std::move(ivs));
}

}  // namespace

PYBIND11_MODULE(_dosreg, m) {
    m.doc() = "Learning-based optimal output regulation under DoS attacks";

    static py::exception<Error> error(m, "DosregError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error;
            py::object inst = exc(e.what());
            inst.attr("kind") = to_string(e.kind());
            inst.attr("exit_code") = exit_code(e.kind());
            PyErr_SetObject(exc.ptr(), inst.ptr());
        }
    });

    m.def("vecv", [](const Vec& v) { return kit::vecv(v); });
    m.def("vecs", [](const Mat& P) { return kit::vecs(P); });
    m.def("unvecs", [](const Vec& v, Eigen::Index n) { return kit::unvecs(v, n); });
    m.def("kron", &kit::kron);

    m.def(
        "hewer",
        [](const Mat& A, const Mat& B, const Mat& Q, double R, const Vec& K0) {
            AugmentedSystem aug;
            aug.Abar = A;
            aug.Bbar = B;
            aug.n = A.rows();
            const auto sol = hewer_policy_iteration(aug, {Q, R}, K0.transpose());
            return py::make_tuple(sol.P_star, Vec(sol.K_star.transpose()), sol.iterations);
        },
        py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"), py::arg("K0"),
        "Hewer policy iteration for a single-input system; returns (P, K, iterations).");

    m.def("pendulum_config", [] { return serialize_config(pendulum_config()); },
          "Pendulum preset as config text.");

    m.def("oracle", [](const std::string& text) { return oracle_dict(run_oracle(config_from_text(text))); },
          py::arg("config"));

    m.def(
        "learn",
        [](const std::string& text) {
            const LearningOutcome l = run_learning(config_from_text(text));
            py::dict d;
            d["K_final"] = Vec(l.result.K_final.transpose());
            d["K_star"] = Vec(l.oracle.riccati.K_star.transpose());
            d["relative_gain_error"] = l.relative_gain_error;
            d["iterations"] = l.result.iterations();
            d["rank"] = l.rank.achieved;
            d["rank_required"] = l.rank.required;
            d["samples"] = l.run.log.size();
            return d;
        },
        py::arg("config"));

    m.def(
        "simulate",
        [](const std::string& text, const std::string& gain) {
            const ExperimentConfig cfg = config_from_text(text);
            const GainSource src = gain == "learned" ? GainSource::Learned : GainSource::Oracle;
            if (gain != "learned" && gain != "oracle") {
                throw Error(ErrorKind::Argument, "gain must be 'oracle' or 'learned'");
            }
            const SimulationOutcome s = run_simulation(cfg, src);
            py::dict d = trace_dict(s.trace);
            d["K"] = Vec(s.K.transpose());
            d["schedule"] = intervals_of(s.schedule);
            d["final_quarter_max_abs_e"] = s.metrics.final_quarter_max_abs_e;
            d["envelope_dominated"] = s.metrics.envelope_dominated;
            d["T"] = s.params.T;
            return d;
        },
        py::arg("config"), py::arg("gain") = "oracle");

    m.def(
        "generate_schedule",
        [](double eta, double tau_D, double kappa, double T, long horizon, std::uint64_t seed) {
            const DoSParams p{eta, tau_D, kappa, T};
            p.validate();
            return intervals_of(generate_schedule(p, horizon, seed));
        },
        py::arg("eta"), py::arg("tau_D"), py::arg("kappa"), py::arg("T"), py::arg("horizon"),
        py::arg("seed"));

    m.def(
        "verify_schedule",
        [](const std::vector<std::pair<long, long>>& intervals, double eta, double tau_D,
           double kappa, double T, long horizon) {
            return verify_assumptions(schedule_of(intervals), {eta, tau_D, kappa, T}, horizon)
                .all_pass();
        },
        py::arg("intervals"), py::arg("eta"), py::arg("tau_D"), py::arg("kappa"), py::arg("T"),
        py::arg("horizon"));
}
