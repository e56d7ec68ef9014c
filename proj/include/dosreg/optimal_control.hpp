#pragma once

#include <vector>

#include "dosreg/dos.hpp"
#include "dosreg/matrix_kit.hpp"
#include "dosreg/plant.hpp"

namespace dosreg {

// Stage cost ζᵀQζ + R u². The Riccati formulas are written for R = 1, so
// `normalized()` folds R into Q.
struct CostWeights {
    Mat Q;
    double R = 1.0;

    void validate(Eigen::Index dim) const;
    [[nodiscard]] Mat normalized_Q() const { return Q / R; }
};

struct RiccatiSolution {
    Mat P_star;
    RowVec K_star;
    double dare_residual = 0.0;
    int iterations = 0;
    std::vector<Mat> P_history;  // P_0, P_1, … as evaluated
};

struct HewerOptions {
    int max_iterations = 500;
    // Stop when ‖P_j − P_{j−1}‖_F < tolerance·(1 + ‖P_j‖_F).
    double tolerance = 1e-12;
};

// K = (1 + B̄ᵀPB̄)⁻¹ B̄ᵀPĀ
RowVec riccati_gain(const AugmentedSystem& aug, const Mat& P);

double dare_residual(const Mat& P, const AugmentedSystem& aug, const CostWeights& cost);

// Model-based policy iteration from a stabilizing K0.
RiccatiSolution hewer_policy_iteration(const AugmentedSystem& aug, const CostWeights& cost,
                                       const RowVec& K0, const HewerOptions& opts = {});

// Riccati value iteration from P = 0, stopped as soon as the induced gain is
// stabilizing. Needs no initial gain, so it seeds the policy iteration.
RowVec stabilizing_gain(const AugmentedSystem& aug, const CostWeights& cost,
                        int max_iterations = 200000);

// Value iteration followed by policy iteration.
RiccatiSolution solve_optimal_control(const AugmentedSystem& aug, const CostWeights& cost);

// Resilience certificate: a DoS duration divisor T > T_star keeps the
// Lyapunov envelope contracting.
struct ResilienceBound {
    double omega1 = 0.0;
    double omega2 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double T_star = 1.0;
    double kappa = 0.0;
    double lambda_min_P = 1.0;
    double lambda_max_P = 1.0;
    double cbar_norm = 1.0;
    // ω1 = 1: the allowed-step contraction is deadbeat and T* collapses to 1.
    bool deadbeat = false;

    // ((1+ω2)/(1−ω1))^κ, in log form because it overflows for realistic data.
    [[nodiscard]] double log_envelope_coeff() const;
    [[nodiscard]] double envelope_coeff() const;
    // Δ(T) = (1−ω1)^((T−1)/T) (1+ω2)^(1/T)
    [[nodiscard]] double delta(double T) const;
    [[nodiscard]] double log_delta(double T) const;

    // KL bounds on |ζ̃_k| and |e_k| given |ζ̃_0| = r and DoS divisor T.
    [[nodiscard]] double beta_zeta_tilde(double r, long k, double T) const;
    [[nodiscard]] double beta_e(double r, long k, double T) const;

    // Bound with only the rates set (no plant data behind it).
    static ResilienceBound from_rates(double omega1, double omega2, double kappa);
};

ResilienceBound compute_resilience_bound(const RiccatiSolution& sol, const AugmentedSystem& aug,
                                         const CostWeights& cost, double kappa);

struct EnvelopeValues {
    double exact = 0.0;    // (1−ω1)^{#allowed steps}(1+ω2)^{#denied steps} V0
    double relaxed = 0.0;  // ((1+ω2)/(1−ω1))^κ Δ(T)^k V0
};

// Envelope on V(ζ̃_k) for steps [start, start + k); a step counts as denied
// when its starting instant is denied.
EnvelopeValues lyapunov_envelope(const ResilienceBound& bound, const DoSSchedule& sched,
                                 double V0, long k, double T, long start = 0);

// Exact envelope from step counts.
double exact_envelope(const ResilienceBound& bound, long allowed_steps, long denied_steps,
                      double V0);

}  // namespace dosreg
