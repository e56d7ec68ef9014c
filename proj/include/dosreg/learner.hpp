#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dosreg/dos.hpp"
#include "dosreg/matrix_kit.hpp"
#include "dosreg/optimal_control.hpp"
#include "dosreg/trace.hpp"

namespace dosreg {

// A communication-allowed instant whose successor was also received.
struct TrajectorySample {
    long k = 0;
    Vec zeta;
    Vec zeta_next;
    double u = 0.0;
    Vec w;
};

struct TrajectoryLog {
    std::vector<TrajectorySample> samples;
    Eigen::Index dim_zeta = 0;
    Eigen::Index q = 0;

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    // Increasing instants and consistent dimensions.
    void validate() const;
};

// Keeps instant k iff both k and k+1 are communication-allowed.
TrajectoryLog collect_log(const SimTrace& trace, const DoSSchedule& sched);

// Row-per-sample regressors. With m = dim ζ:
//   Xi_zeta      vecv(ζ⁺) − vecv(ζ)     s × m(m+1)/2
//   J_zeta       vecv(ζ)                s × m(m+1)/2
//   J_zeta_u     ζ ⊗ u                  s × m
//   J_zeta_zeta  ζ ⊗ ζ                  s × m²
//   J_u          u²                     s × 1
//   J_w_zeta     w ⊗ ζ                  s × qm
//   J_w_u        w ⊗ u                  s × q
//   J_w          vecv(w)                s × q(q+1)/2
struct DataMatrices {
    Mat Xi_zeta;
    Mat J_zeta;
    Mat J_zeta_u;
    Mat J_zeta_zeta;
    Mat J_u;
    Mat J_w_zeta;
    Mat J_w_u;
    Mat J_w;
    Mat zeta_rows;  // s × m, used for J_{Kζ}
    Eigen::Index m = 0;
    Eigen::Index q = 0;

    [[nodiscard]] Eigen::Index samples() const { return Xi_zeta.rows(); }
};

DataMatrices build_data_matrices(const TrajectoryLog& log);

// Positions of the unknown blocks inside θ = [vecs(P), vec(Γ1), Γ2, vec(Θ1),
// vec(Θ2), vecs(Θ3)].
struct UnknownLayout {
    Eigen::Index m = 0;
    Eigen::Index q = 0;

    [[nodiscard]] Eigen::Index p_size() const { return kit::tri(m); }
    [[nodiscard]] Eigen::Index gamma1_offset() const { return p_size(); }
    [[nodiscard]] Eigen::Index gamma2_offset() const { return gamma1_offset() + m; }
    [[nodiscard]] Eigen::Index theta1_offset() const { return gamma2_offset() + 1; }
    [[nodiscard]] Eigen::Index theta2_offset() const { return theta1_offset() + m * q; }
    [[nodiscard]] Eigen::Index theta3_offset() const { return theta2_offset() + q; }
    [[nodiscard]] Eigen::Index total() const { return theta3_offset() + kit::tri(q); }
    // Columns from here on come from the exosystem regressors and may be
    // dropped by column reduction.
    [[nodiscard]] Eigen::Index first_w_column() const { return theta1_offset(); }
};

struct PsiSystem {
    Mat Psi;
    Vec rhs;  // −J_{ζ,ζ} vec(Q + KᵀK)
    UnknownLayout layout;
};

// Ψ = [Ξ_ζ, −2J_{ζ,u} − 2J_{ζ,ζ}(I ⊗ Kᵀ), J_{Kζ} − J_u, −2J_{w,ζ}, −2J_{w,u}, −J_w]
// with I of dimension dim ζ.
PsiSystem build_psi(const DataMatrices& data, const RowVec& K, const Mat& Q);

struct ReducedPsi {
    Mat Psi_bar;
    std::vector<Eigen::Index> kept;     // original column indices, in order
    std::vector<Eigen::Index> dropped;  // exosystem columns found dependent
};

// Drops linearly dependent exosystem-block columns. Deficiency among the
// remaining columns is an excitation failure.
ReducedPsi reduce_columns(const Mat& Psi, const UnknownLayout& layout);

struct RankReport {
    bool satisfied = false;
    Eigen::Index achieved = 0;
    Eigen::Index required = 0;
    Eigen::Index dependent_w_columns = 0;  // N
};

// rank [J_ζ, J_{ζ,u}, J_u, J_{w,ζ}, J_{w,u}, J_w] against
// m(m+1)/2 + m + 1 + mq + q + q(q+1)/2 − N.
RankReport check_rank(const DataMatrices& data);

struct PIIterate {
    int j = 0;
    RowVec K;  // gain this iterate evaluated
    Mat P;
    RowVec Gamma1;
    double Gamma2 = 0.0;
    // Θ entries whose columns were dropped hold NaN ("not identified").
    Mat Theta1;
    RowVec Theta2;
    Mat Theta3;
    Vec theta;  // full-length, NaN at dropped positions
    std::vector<Eigen::Index> dropped_columns;
    double residual = 0.0;
};

PIIterate solve_iteration(const ReducedPsi& reduced, const Vec& rhs, const UnknownLayout& layout,
                          const RowVec& K, int j);

// K_{j+1} = Γ1 / (1 + Γ2).
RowVec policy_improvement(const PIIterate& iterate);

struct LearningOptions {
    double epsilon0 = 0.5;
    int max_iterations = 50;
};

struct LearningResult {
    RowVec K_final;
    Mat P_final;
    std::vector<PIIterate> history;

    [[nodiscard]] int iterations() const { return static_cast<int>(history.size()); }
};

// Model-free policy iteration on logged data. Stops at the first j ≥ 1 with
// ‖P_j − P_{j−1}‖_F ≤ ε0 and returns the improved gain from P_j.
LearningResult run_algorithm_1(const TrajectoryLog& log, const CostWeights& cost,
                               const RowVec& K0, const LearningOptions& opts = {});

// Model-based θ̄ for a gain K: the quantities the data-driven identity should
// recover. Used to pin the regressor layout against a known model.
Vec model_theta(const AugmentedSystem& aug, const CostWeights& cost, const RowVec& K);

// η_k = Σ a_i sin(ω_i k + φ_i) with ω_i ∈ (0, π), Σ a_i = amplitude.
class ExplorationSignal {
public:
    ExplorationSignal() = default;
    ExplorationSignal(std::uint64_t seed, double amplitude, int components = 10);

    [[nodiscard]] double operator()(long k) const;
    [[nodiscard]] double amplitude() const { return amplitude_; }

private:
    std::vector<double> freq_;
    std::vector<double> phase_;
    std::vector<double> weight_;
    double amplitude_ = 0.0;
};

}  // namespace dosreg
