#include "dosreg/matrix_kit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dosreg/errors.hpp"

namespace dosreg::kit {

namespace {

std::string dims(const Mat& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

}  // namespace

void require_square(const Mat& m, std::string_view what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorKind::Dimension,
                    std::string(what) + " must be square and non-empty, got " + dims(m));
    }
}

void require_finite(const Eigen::Ref<const Mat>& m, std::string_view what) {
    if (!m.allFinite()) {
        throw Error(ErrorKind::Validation, std::string(what) + " contains NaN or Inf");
    }
}

Mat symmetrized(const Mat& p, std::string_view what) {
    require_square(p, what);
    require_finite(p, what);
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
    const double asym = (p - p.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
        throw Error(ErrorKind::Validation,
                    std::string(what) + " is not symmetric (max |p_ij - p_ji| = " +
                        std::to_string(asym) + ")");
    }
    return 0.5 * (p + p.transpose());
}

Vec vecv(const Eigen::Ref<const Vec>& v) {
    const Eigen::Index n = v.size();
    if (n == 0) throw Error(ErrorKind::Dimension, "vecv of an empty vector");
    Vec out(tri(n));
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) out(idx++) = v(i) * v(j);
    }
    return out;
}

Vec vecs(const Mat& p) {
    const Mat s = symmetrized(p, "vecs input");
    const Eigen::Index m = s.rows();
    Vec out(tri(m));
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        out(idx++) = s(i, i);
        for (Eigen::Index j = i + 1; j < m; ++j) out(idx++) = 2.0 * s(i, j);
    }
    return out;
}

Mat unvecs(const Eigen::Ref<const Vec>& v, Eigen::Index m) {
    if (m <= 0 || v.size() != tri(m)) {
        throw Error(ErrorKind::Dimension, "unvecs: length " + std::to_string(v.size()) +
                                              " does not match dimension " + std::to_string(m));
    }
    Mat p(m, m);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        p(i, i) = v(idx++);
        for (Eigen::Index j = i + 1; j < m; ++j) {
            p(i, j) = p(j, i) = 0.5 * v(idx++);
        }
    }
    return p;
}

Vec vec(const Mat& t) {
    return Eigen::Map<const Vec>(t.data(), t.size());
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

namespace {

// Column scales that bring every non-zero column to unit norm.
Vec column_scales(const Mat& m) {
    Vec scales(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double nrm = m.col(j).norm();
        scales(j) = nrm > 0.0 ? 1.0 / nrm : 1.0;
    }
    return scales;
}

Eigen::Index rank_from_singular_values(const Vec& sv, Eigen::Index cols, double rel_tol) {
    if (sv.size() == 0) return 0;
    const double smax = sv(0);
    if (smax == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * smax) ++r;
    }
    return std::min(r, cols);
}

}  // namespace

Eigen::Index numerical_rank(const Mat& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    return rank_from_singular_values(svd.singularValues(), m.cols(), rel_tol);
}

Eigen::Index equilibrated_rank(const Mat& m, double rel_tol) {
    if (m.size() == 0) return 0;
    return numerical_rank(m * column_scales(m).asDiagonal(), rel_tol);
}

LeastSquaresResult solve_least_squares(const Mat& m, const Eigen::Ref<const Vec>& b) {
    if (m.rows() != b.size()) {
        throw Error(ErrorKind::Dimension, "least squares: M is " + dims(m) +
                                              " but b has length " + std::to_string(b.size()));
    }
    require_finite(m, "least-squares matrix");
    require_finite(b, "least-squares right-hand side");
    const Eigen::Index p = m.cols();
    if (m.rows() < p) {
        throw RankError(ErrorKind::Rank,
                        "least squares: fewer rows (" + std::to_string(m.rows()) +
                            ") than unknowns (" + std::to_string(p) + ")",
                        m.rows(), p);
    }
    const Vec scales = column_scales(m);
    const Mat scaled = m * scales.asDiagonal();
    Eigen::JacobiSVD<Mat> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index r = rank_from_singular_values(svd.singularValues(), p, kRankTolerance);
    if (r < p) {
        throw RankError(ErrorKind::Rank,
                        "least squares: matrix is rank deficient (rank " + std::to_string(r) +
                            " of " + std::to_string(p) + ")",
                        r, p);
    }
    LeastSquaresResult out;
    out.solution = scales.asDiagonal() * svd.solve(b);
    out.residual_norm = (m * out.solution - b).norm();
    out.rank = r;
    return out;
}

Mat solve_discrete_lyapunov(const Mat& a, const Mat& q) {
    require_square(a, "Lyapunov A");
    require_finite(a, "Lyapunov A");
    const Mat qs = symmetrized(q, "Lyapunov Q");
    if (qs.rows() != a.rows()) {
        throw Error(ErrorKind::Dimension, "Lyapunov: A is " + dims(a) + " but Q is " + dims(q));
    }
    const double rho = spectral_radius(a);
    if (!(rho < 1.0 - kSchurMargin)) {
        throw Error(ErrorKind::Stability,
                    "Lyapunov: A is not Schur (spectral radius " + std::to_string(rho) + ")");
    }
    const Eigen::Index n = a.rows();
    const Mat at = a.transpose();
    const Mat lhs = Mat::Identity(n * n, n * n) - kron(at, at);
    Eigen::PartialPivLU<Mat> lu(lhs);
    const Vec rhs = vec(qs);
    Vec x = lu.solve(rhs);
    x += lu.solve(rhs - lhs * x);
    const Mat p = Eigen::Map<const Mat>(x.data(), n, n);
    return 0.5 * (p + p.transpose());
}

double lyapunov_residual(const Mat& a, const Mat& p, const Mat& q) {
    return (a.transpose() * p * a - p + q).norm();
}

double spectral_radius(const Mat& a) {
    require_square(a, "spectral radius input");
    require_finite(a, "spectral radius input");
    Eigen::EigenSolver<Mat> es(a, false);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::Numerical, "eigenvalue iteration did not converge");
    }
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur(const Mat& a) { return spectral_radius(a) < 1.0 - kSchurMargin; }

double min_eigenvalue(const Mat& sym) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double max_eigenvalue(const Mat& sym) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double induced_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

}  // namespace dosreg::kit
