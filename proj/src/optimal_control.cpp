#include "dosreg/optimal_control.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dosreg/errors.hpp"

namespace dosreg {

void CostWeights::validate(Eigen::Index dim) const {
    if (Q.rows() != dim || Q.cols() != dim) {
        throw Error(ErrorKind::Dimension, "Q must be " + std::to_string(dim) + "x" +
                                              std::to_string(dim));
    }
    const Mat qs = kit::symmetrized(Q, "Q");
    if (!(kit::min_eigenvalue(qs) > 0.0)) {
        throw Error(ErrorKind::Validation, "Q must be positive definite");
    }
    if (!(R > 0.0) || !std::isfinite(R)) {
        throw Error(ErrorKind::Validation, "R must be a positive scalar");
    }
}

RowVec riccati_gain(const AugmentedSystem& aug, const Mat& P) {
    const Mat pb = P * aug.Bbar;
    const double denom = 1.0 + (aug.Bbar.transpose() * pb)(0);
    return (pb.transpose() * aug.Abar) / denom;
}

double dare_residual(const Mat& P, const AugmentedSystem& aug, const CostWeights& cost) {
    const Mat& A = aug.Abar;
    const Mat& B = aug.Bbar;
    const Mat Q = cost.normalized_Q();
    const Mat atpb = A.transpose() * P * B;
    const double denom = 1.0 + (B.transpose() * P * B)(0);
    const Mat lhs = A.transpose() * P * A - P + Q - atpb * atpb.transpose() / denom;
    return lhs.norm();
}

RiccatiSolution hewer_policy_iteration(const AugmentedSystem& aug, const CostWeights& cost,
                                       const RowVec& K0, const HewerOptions& opts) {
    const Eigen::Index m = aug.dim();
    cost.validate(m);
    if (K0.size() != m) {
        throw Error(ErrorKind::Dimension, "initial gain must have n+q entries");
    }
    const Mat Q = cost.normalized_Q();
    if (!kit::is_schur(aug.Abar - aug.Bbar * K0)) {
        throw Error(ErrorKind::Stability, "initial gain K0 is not stabilizing");
    }

    RiccatiSolution sol;
    RowVec K = K0;
    Mat P_prev;
    for (int j = 0; j < opts.max_iterations; ++j) {
        const Mat closed = aug.Abar - aug.Bbar * K;
        Mat P = kit::solve_discrete_lyapunov(closed, Q + K.transpose() * K);
        sol.P_history.push_back(P);
        K = riccati_gain(aug, P);
        const bool done =
            j > 0 && (P - P_prev).norm() < opts.tolerance * (1.0 + P.norm());
        P_prev = std::move(P);
        if (done) {
            sol.P_star = P_prev;
            sol.K_star = K;
            sol.iterations = j + 1;
            sol.dare_residual = dare_residual(sol.P_star, aug, cost);
            return sol;
        }
    }
    throw Error(ErrorKind::Convergence, "policy iteration did not converge within " +
                                            std::to_string(opts.max_iterations) + " iterations");
}

RowVec stabilizing_gain(const AugmentedSystem& aug, const CostWeights& cost,
                        int max_iterations) {
    const Eigen::Index m = aug.dim();
    cost.validate(m);
    const Mat Q = cost.normalized_Q();
    const Mat& A = aug.Abar;
    const Mat& B = aug.Bbar;
    Mat P = Mat::Zero(m, m);
    for (int i = 0; i < max_iterations; ++i) {
        const RowVec K = riccati_gain(aug, P);
        if (i % 16 == 0 && kit::is_schur(A - B * K)) return K;
        const Mat closed = A - B * K;
        P = closed.transpose() * P * closed + Q + K.transpose() * K;
        P = 0.5 * (P + P.transpose());
        if (!P.allFinite()) break;
    }
    throw Error(ErrorKind::Convergence, "Riccati value iteration found no stabilizing gain");
}

RiccatiSolution solve_optimal_control(const AugmentedSystem& aug, const CostWeights& cost) {
    return hewer_policy_iteration(aug, cost, stabilizing_gain(aug, cost));
}

double ResilienceBound::log_envelope_coeff() const {
    if (deadbeat) return std::numeric_limits<double>::infinity();
    return kappa * (std::log1p(omega2) - std::log1p(-omega1));
}

double ResilienceBound::envelope_coeff() const { return std::exp(log_envelope_coeff()); }

double ResilienceBound::log_delta(double T) const {
    if (deadbeat) return -std::numeric_limits<double>::infinity();
    return ((T - 1.0) / T) * std::log1p(-omega1) + std::log1p(omega2) / T;
}

double ResilienceBound::delta(double T) const { return std::exp(log_delta(T)); }

double ResilienceBound::beta_zeta_tilde(double r, long k, double T) const {
    if (r == 0.0) return 0.0;
    const double log_sq = log_envelope_coeff() + std::log(lambda_max_P / lambda_min_P) +
                          static_cast<double>(k) * log_delta(T);
    return std::exp(0.5 * log_sq) * r;
}

double ResilienceBound::beta_e(double r, long k, double T) const {
    return cbar_norm * beta_zeta_tilde(r, k, T);
}

ResilienceBound ResilienceBound::from_rates(double omega1, double omega2, double kappa) {
    ResilienceBound b;
    b.omega1 = omega1;
    b.omega2 = omega2;
    b.kappa = kappa;
    b.deadbeat = omega1 >= 1.0;
    b.T_star = b.deadbeat ? 1.0 : 1.0 + std::log1p(omega2) / -std::log1p(-omega1);
    return b;
}

ResilienceBound compute_resilience_bound(const RiccatiSolution& sol, const AugmentedSystem& aug,
                                         const CostWeights& cost, double kappa) {
    const Mat& P = sol.P_star;
    const Mat Q = cost.normalized_Q();
    const Mat bk = aug.Bbar * sol.K_star;
    const double n_bk = kit::induced_norm(bk.transpose() * P * bk);
    const double n_a = kit::induced_norm(aug.Abar.transpose() * P * aug.Abar);
    const double n_d = kit::induced_norm(aug.Dtilde.transpose() * P * aug.Dtilde);

    ResilienceBound b;
    b.kappa = kappa;
    b.alpha1 = 1.0 + 2.0 * n_bk * n_bk + 2.0 * n_a * n_a;
    b.alpha2 = 2.0 + 4.0 * n_bk * n_bk + 4.0 * n_d * n_d;
    b.lambda_min_P = kit::min_eigenvalue(P);
    b.lambda_max_P = kit::max_eigenvalue(P);
    b.cbar_norm = kit::induced_norm(aug.Cbar);
    if (!(b.lambda_min_P > 0.0)) {
        throw Error(ErrorKind::Numerical, "P* is not positive definite");
    }
    b.omega1 = kit::min_eigenvalue(Q) / b.lambda_max_P;
    b.omega2 = (b.alpha1 + 4.0 * b.alpha2) / b.lambda_min_P;
    constexpr double kBoundaryTol = 1e-12;
    if (b.omega1 > 1.0 + kBoundaryTol) {
        throw Error(ErrorKind::Numerical,
                    "omega1 = " + std::to_string(b.omega1) +
                        " exceeds 1; P* does not dominate Q");
    }
    if (b.omega1 >= 1.0 - kBoundaryTol) {
        b.omega1 = 1.0;
        b.deadbeat = true;
        b.T_star = 1.0;
    } else {
        b.T_star = 1.0 + std::log1p(b.omega2) / -std::log1p(-b.omega1);
    }
    return b;
}

double exact_envelope(const ResilienceBound& bound, long allowed_steps, long denied_steps,
                      double V0) {
    if (V0 == 0.0) return 0.0;
    double log_factor = 0.0;
    if (allowed_steps > 0) {
        log_factor += static_cast<double>(allowed_steps) * std::log1p(-bound.omega1);
    }
    if (denied_steps > 0) {
        log_factor += static_cast<double>(denied_steps) * std::log1p(bound.omega2);
    }
    return std::exp(log_factor) * V0;
}

EnvelopeValues lyapunov_envelope(const ResilienceBound& bound, const DoSSchedule& sched,
                                 double V0, long k, double T, long start) {
    if (k < 0) throw Error(ErrorKind::Argument, "envelope step count must be >= 0");
    if (V0 < 0.0) throw Error(ErrorKind::Argument, "V0 must be >= 0");
    EnvelopeValues env;
    const long denied = k > 0 ? sched.lambda_D(start, start + k - 1) : 0;
    env.exact = exact_envelope(bound, k - denied, denied, V0);
    if (V0 == 0.0) {
        env.relaxed = 0.0;
    } else if (bound.deadbeat) {
        env.relaxed = std::numeric_limits<double>::infinity();
    } else if (k == 0) {
        env.relaxed = std::exp(bound.log_envelope_coeff()) * V0;
    } else {
        env.relaxed =
            std::exp(bound.log_envelope_coeff() + static_cast<double>(k) * bound.log_delta(T)) *
            V0;
    }
    return env;
}

}  // namespace dosreg
