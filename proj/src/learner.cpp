#include "dosreg/learner.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "dosreg/errors.hpp"

namespace dosreg {

void TrajectoryLog::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.zeta.size() != dim_zeta || s.zeta_next.size() != dim_zeta || s.w.size() != q) {
            throw Error(ErrorKind::Dimension, "trajectory sample has inconsistent dimensions");
        }
        if (i > 0 && samples[i - 1].k >= s.k) {
            throw Error(ErrorKind::Validation, "trajectory instants must be strictly increasing");
        }
    }
}

TrajectoryLog collect_log(const SimTrace& trace, const DoSSchedule& sched) {
    TrajectoryLog log;
    log.dim_zeta = trace.n + trace.q;
    log.q = trace.q;
    for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) {
        const SimStep& cur = trace.steps[i];
        const SimStep& nxt = trace.steps[i + 1];
        if (sched.is_denied(cur.k) || sched.is_denied(nxt.k)) continue;
        log.samples.push_back({cur.k, cur.zeta(), nxt.zeta(), cur.u, cur.w});
    }
    if (log.samples.empty()) {
        throw Error(ErrorKind::Excitation,
                    "no pair of consecutive communication-allowed instants in the trace");
    }
    return log;
}

DataMatrices build_data_matrices(const TrajectoryLog& log) {
    log.validate();
    if (log.samples.empty()) throw Error(ErrorKind::Excitation, "empty trajectory log");
    const auto s = static_cast<Eigen::Index>(log.samples.size());
    const Eigen::Index m = log.dim_zeta;
    const Eigen::Index q = log.q;
    DataMatrices d;
    d.m = m;
    d.q = q;
    d.Xi_zeta.resize(s, kit::tri(m));
    d.J_zeta.resize(s, kit::tri(m));
    d.J_zeta_u.resize(s, m);
    d.J_zeta_zeta.resize(s, m * m);
    d.J_u.resize(s, 1);
    d.J_w_zeta.resize(s, q * m);
    d.J_w_u.resize(s, q);
    d.J_w.resize(s, kit::tri(q));
    d.zeta_rows.resize(s, m);
    for (Eigen::Index r = 0; r < s; ++r) {
        const auto& smp = log.samples[static_cast<std::size_t>(r)];
        const Vec vz = kit::vecv(smp.zeta);
        d.Xi_zeta.row(r) = (kit::vecv(smp.zeta_next) - vz).transpose();
        d.J_zeta.row(r) = vz.transpose();
        d.J_zeta_u.row(r) = (smp.zeta * smp.u).transpose();
        d.J_zeta_zeta.row(r) = kit::kron(smp.zeta, smp.zeta).col(0).transpose();
        d.J_u(r, 0) = smp.u * smp.u;
        d.J_w_zeta.row(r) = kit::kron(smp.w, smp.zeta).col(0).transpose();
        d.J_w_u.row(r) = (smp.w * smp.u).transpose();
        d.J_w.row(r) = kit::vecv(smp.w).transpose();
        d.zeta_rows.row(r) = smp.zeta.transpose();
    }
    return d;
}

PsiSystem build_psi(const DataMatrices& data, const RowVec& K, const Mat& Q) {
    const Eigen::Index m = data.m;
    const Eigen::Index q = data.q;
    if (K.size() != m) throw Error(ErrorKind::Dimension, "gain K_j must have dim(zeta) entries");
    if (Q.rows() != m || Q.cols() != m) throw Error(ErrorKind::Dimension, "Q has wrong size");
    const Eigen::Index s = data.samples();

    PsiSystem sys;
    sys.layout = UnknownLayout{m, q};
    const UnknownLayout& L = sys.layout;
    sys.Psi.resize(s, L.total());

    const Mat id_kron_kt = kit::kron(Mat::Identity(m, m), Mat(K.transpose()));
    const Vec k_zeta = data.zeta_rows * K.transpose();

    sys.Psi.leftCols(L.p_size()) = data.Xi_zeta;
    sys.Psi.middleCols(L.gamma1_offset(), m) =
        -2.0 * data.J_zeta_u - 2.0 * data.J_zeta_zeta * id_kron_kt;
    sys.Psi.col(L.gamma2_offset()) = k_zeta.array().square().matrix() - data.J_u.col(0);
    sys.Psi.middleCols(L.theta1_offset(), m * q) = -2.0 * data.J_w_zeta;
    sys.Psi.middleCols(L.theta2_offset(), q) = -2.0 * data.J_w_u;
    sys.Psi.middleCols(L.theta3_offset(), kit::tri(q)) = -data.J_w;

    const Mat Qj = Q + K.transpose() * K;
    sys.rhs = -data.J_zeta_zeta * kit::vec(Qj);
    return sys;
}

namespace {

// Greedy pass over the exosystem columns: keep a column only if it raises the
// rank of what has been kept so far.
void greedy_w_columns(const Mat& full, Eigen::Index first_w, std::vector<Eigen::Index>& kept,
                      std::vector<Eigen::Index>& dropped) {
    Mat acc = full.leftCols(first_w);
    Eigen::Index rank = kit::equilibrated_rank(acc);
    for (Eigen::Index c = first_w; c < full.cols(); ++c) {
        Mat trial(acc.rows(), acc.cols() + 1);
        trial << acc, full.col(c);
        const Eigen::Index r = kit::equilibrated_rank(trial);
        if (r > rank) {
            acc = std::move(trial);
            rank = r;
            kept.push_back(c);
        } else {
            dropped.push_back(c);
        }
    }
}

}  // namespace

ReducedPsi reduce_columns(const Mat& Psi, const UnknownLayout& layout) {
    if (Psi.cols() != layout.total()) {
        throw Error(ErrorKind::Dimension, "Psi column count does not match the unknown layout");
    }
    const Eigen::Index first_w = layout.first_w_column();
    const Eigen::Index base_rank = kit::equilibrated_rank(Psi.leftCols(first_w));
    if (base_rank < first_w) {
        throw RankError(ErrorKind::Excitation,
                        "data are not exciting enough: rank " + std::to_string(base_rank) +
                            " of " + std::to_string(first_w) +
                            " in the state/input blocks; lengthen the horizon or raise "
                            "the exploration amplitude",
                        base_rank, first_w);
    }
    ReducedPsi out;
    for (Eigen::Index c = 0; c < first_w; ++c) out.kept.push_back(c);
    greedy_w_columns(Psi, first_w, out.kept, out.dropped);
    out.Psi_bar.resize(Psi.rows(), static_cast<Eigen::Index>(out.kept.size()));
    for (std::size_t i = 0; i < out.kept.size(); ++i) {
        out.Psi_bar.col(static_cast<Eigen::Index>(i)) = Psi.col(out.kept[i]);
    }
    return out;
}

RankReport check_rank(const DataMatrices& data) {
    const UnknownLayout L{data.m, data.q};
    Mat full(data.samples(), L.total());
    full << data.J_zeta, data.J_zeta_u, data.J_u, data.J_w_zeta, data.J_w_u, data.J_w;
    std::vector<Eigen::Index> kept;
    std::vector<Eigen::Index> dropped;
    greedy_w_columns(full, L.first_w_column(), kept, dropped);
    RankReport rep;
    rep.dependent_w_columns = static_cast<Eigen::Index>(dropped.size());
    rep.required = L.total() - rep.dependent_w_columns;
    rep.achieved = kit::equilibrated_rank(full);
    rep.satisfied = rep.achieved == rep.required;
    return rep;
}

PIIterate solve_iteration(const ReducedPsi& reduced, const Vec& rhs, const UnknownLayout& layout,
                          const RowVec& K, int j) {
    kit::LeastSquaresResult ls;
    try {
        ls = kit::solve_least_squares(reduced.Psi_bar, rhs);
    } catch (const RankError& e) {
        throw RankError(ErrorKind::Excitation,
                        std::string("policy evaluation is not identifiable: ") + e.what(),
                        e.rank(), e.required());
    }
    const Eigen::Index m = layout.m;
    const Eigen::Index q = layout.q;
    PIIterate it;
    it.j = j;
    it.K = K;
    it.residual = ls.residual_norm;
    it.dropped_columns = reduced.dropped;
    it.theta = Vec::Constant(layout.total(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < reduced.kept.size(); ++i) {
        it.theta(reduced.kept[i]) = ls.solution(static_cast<Eigen::Index>(i));
    }
    it.P = kit::unvecs(it.theta.head(layout.p_size()), m);
    it.Gamma1 = it.theta.segment(layout.gamma1_offset(), m).transpose();
    it.Gamma2 = it.theta(layout.gamma2_offset());
    const Vec t1 = it.theta.segment(layout.theta1_offset(), m * q);
    it.Theta1 = Eigen::Map<const Mat>(t1.data(), m, q);
    it.Theta2 = it.theta.segment(layout.theta2_offset(), q).transpose();
    it.Theta3 = kit::unvecs(it.theta.segment(layout.theta3_offset(), kit::tri(q)), q);
    return it;
}

RowVec policy_improvement(const PIIterate& iterate) {
    const double denom = 1.0 + iterate.Gamma2;
    if (!(denom > 0.0)) {
        throw Error(ErrorKind::Indefinite,
                    "1 + Gamma2 = " + std::to_string(denom) +
                        " is not positive; identification is corrupted");
    }
    return iterate.Gamma1 / denom;
}

LearningResult run_algorithm_1(const TrajectoryLog& log, const CostWeights& cost,
                               const RowVec& K0, const LearningOptions& opts) {
    const DataMatrices data = build_data_matrices(log);
    cost.validate(data.m);
    const Mat Q = cost.normalized_Q();
    if (K0.size() != data.m) {
        throw Error(ErrorKind::Dimension, "initial gain must have dim(zeta) entries");
    }
    LearningResult result;
    RowVec K = K0;
    for (int j = 0; j < opts.max_iterations; ++j) {
        const PsiSystem sys = build_psi(data, K, Q);
        const ReducedPsi reduced = reduce_columns(sys.Psi, sys.layout);
        PIIterate it = solve_iteration(reduced, sys.rhs, sys.layout, K, j);
        const RowVec K_next = policy_improvement(it);
        const bool done =
            j >= 1 && (it.P - result.history.back().P).norm() <= opts.epsilon0;
        result.history.push_back(std::move(it));
        if (done) {
            result.K_final = K_next;
            result.P_final = result.history.back().P;
            return result;
        }
        K = K_next;
    }
    throw Error(ErrorKind::Convergence, "model-free policy iteration did not converge within " +
                                            std::to_string(opts.max_iterations) + " iterations");
}

Vec model_theta(const AugmentedSystem& aug, const CostWeights& cost, const RowVec& K) {
    const Mat Q = cost.normalized_Q();
    const Mat& A = aug.Abar;
    const Mat& B = aug.Bbar;
    const Mat& D = aug.Dbar;
    const Mat P = kit::solve_discrete_lyapunov(A - B * K, Q + K.transpose() * K);
    const UnknownLayout L{aug.dim(), aug.q};
    Vec theta(L.total());
    theta.head(L.p_size()) = kit::vecs(P);
    theta.segment(L.gamma1_offset(), L.m) = kit::vec(B.transpose() * P * A);
    theta(L.gamma2_offset()) = (B.transpose() * P * B)(0);
    theta.segment(L.theta1_offset(), L.m * L.q) = kit::vec(A.transpose() * P * D);
    theta.segment(L.theta2_offset(), L.q) = kit::vec(B.transpose() * P * D);
    theta.segment(L.theta3_offset(), kit::tri(L.q)) = kit::vecs(D.transpose() * P * D);
    return theta;
}

ExplorationSignal::ExplorationSignal(std::uint64_t seed, double amplitude, int components)
    : amplitude_(amplitude) {
    if (components < 1) throw Error(ErrorKind::Argument, "exploration needs >= 1 component");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    double total = 0.0;
    for (int i = 0; i < components; ++i) {
        double f = freq(rng);
        while (f == 0.0) f = freq(rng);
        freq_.push_back(f);
        phase_.push_back(phase(rng));
        weight_.push_back(weight(rng));
        total += weight_.back();
    }
    for (double& w : weight_) w *= amplitude / total;
}

double ExplorationSignal::operator()(long k) const {
    double v = 0.0;
    for (std::size_t i = 0; i < freq_.size(); ++i) {
        v += weight_[i] * std::sin(freq_[i] * static_cast<double>(k) + phase_[i]);
    }
    return v;
}

}  // namespace dosreg
