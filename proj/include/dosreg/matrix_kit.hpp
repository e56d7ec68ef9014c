#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace dosreg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

namespace kit {

// Relative singular-value threshold below which a direction counts as null.
inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kSchurMargin = 1e-9;  // ρ must stay below 1 − margin
// Relative asymmetry admitted before a "symmetric" input is rejected.
inline constexpr double kSymmetryTolerance = 1e-10;

// Throws a dimension error if `m` is not square.
void require_square(const Mat& m, std::string_view what);
// Throws a validation error if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Mat>& m, std::string_view what);

// Returns (P + Pᵀ)/2, or throws a validation error if P is further than
// kSymmetryTolerance (relative to its largest entry) from symmetric.
Mat symmetrized(const Mat& p, std::string_view what = "matrix");

/// Quadratic monomials of v, upper triangle row by row:
/// [v1², v1v2, …, v1vn, v2², …, vn²].
Vec vecv(const Eigen::Ref<const Vec>& v);

/// Half-vectorization of a symmetric matrix with doubled off-diagonals:
/// [p11, 2p12, …, 2p1m, p22, …, pmm]. Paired with vecv so that
/// vecv(x)ᵀ vecs(P) = xᵀPx.
Vec vecs(const Mat& p);

/// Inverse of vecs: rebuilds the symmetric m×m matrix.
Mat unvecs(const Eigen::Ref<const Vec>& v, Eigen::Index m);

/// Column stacking.
Vec vec(const Mat& t);

Mat kron(const Mat& a, const Mat& b);

// Length of vecv/vecs output for dimension n.
constexpr Eigen::Index tri(Eigen::Index n) { return n * (n + 1) / 2; }

// Singular values below rel_tol × σ_max count as zero.
Eigen::Index numerical_rank(const Mat& m, double rel_tol = kRankTolerance);

// Rank after scaling every non-zero column to unit norm; zero columns count as
// dependent. Used for data matrices whose column norms span many decades.
Eigen::Index equilibrated_rank(const Mat& m, double rel_tol = kRankTolerance);

struct LeastSquaresResult {
    Vec solution;
    double residual_norm = 0.0;
    Eigen::Index rank = 0;
};

// argmin ‖Mθ − b‖₂ for a tall, full-column-rank M. Rank is decided on the
// column-equilibrated matrix; a deficient M raises a RankError carrying the
// rank found.
LeastSquaresResult solve_least_squares(const Mat& m, const Eigen::Ref<const Vec>& b);

// Solves AᵀPA − P + Q = 0 for Schur A via the Kronecker-linearized system
// (I − Aᵀ⊗Aᵀ) vec(P) = vec(Q), with one refinement pass.
Mat solve_discrete_lyapunov(const Mat& a, const Mat& q);

// Frobenius norm of AᵀPA − P + Q.
double lyapunov_residual(const Mat& a, const Mat& p, const Mat& q);

double spectral_radius(const Mat& a);
bool is_schur(const Mat& a);

// Extreme eigenvalues of a symmetric matrix.
double min_eigenvalue(const Mat& sym);
double max_eigenvalue(const Mat& sym);

// Induced 2-norm (largest singular value).
double induced_norm(const Mat& m);

}  // namespace kit
}  // namespace dosreg
