#include "dosreg/plant.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "dosreg/errors.hpp"

namespace dosreg {

namespace {

using CMat = Eigen::MatrixXcd;

void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw Error(ErrorKind::Dimension,
                    std::string(name) + " must be " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
    }
    kit::require_finite(m, name);
}

Eigen::Index complex_rank(const CMat& m) {
    Eigen::JacobiSVD<CMat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > kit::kRankTolerance * sv(0)) ++r;
    }
    return r;
}

std::string format_lambda(std::complex<double> l) {
    return "(" + std::to_string(l.real()) + (l.imag() < 0 ? "" : "+") +
           std::to_string(l.imag()) + "i)";
}

// Solves the square system M x = b, refusing numerically singular M.
Vec solve_square(const Mat& m, const Vec& b, const char* what) {
    const Eigen::Index r = kit::numerical_rank(m);
    if (r < m.cols()) {
        throw Error(ErrorKind::AssumptionViolation,
                    std::string(what) + ": linear system is singular (rank " +
                        std::to_string(r) + " of " + std::to_string(m.cols()) + ")");
    }
    Eigen::PartialPivLU<Mat> lu(m);
    Vec x = lu.solve(b);
    x += lu.solve(b - m * x);
    return x;
}

}  // namespace

void LinearPlant::validate() const {
    kit::require_square(A, "A");
    kit::require_square(E, "E");
    const Eigen::Index nn = n();
    const Eigen::Index qq = q();
    require_shape(A, nn, nn, "A");
    require_shape(B, nn, 1, "B");
    require_shape(C, 1, nn, "C");
    require_shape(D, nn, qq, "D");
    require_shape(E, qq, qq, "E");
    require_shape(F, 1, qq, "F");
}

std::string AssumptionReport::first_failure() const {
    if (!stabilizable) return "Assumption 1 (stabilizability of (A,B))";
    if (!exosystem_spectrum) return "Assumption 1 (simple unit-circle spectrum of E)";
    if (!transmission_zeros) return "Assumption 2 (transmission-zero rank condition)";
    if (!internal_model_controllable) return "internal model (E,G2) controllability";
    return {};
}

InternalModel InternalModel::for_exosystem(const Mat& E, const Mat& G2) {
    return InternalModel{E, G2};
}

bool InternalModel::controllable() const {
    const Eigen::Index qq = G1.rows();
    if (G1.cols() != qq || G2.rows() != qq || G2.cols() != 1) return false;
    Mat ctrb(qq, qq);
    Mat col = G2;
    for (Eigen::Index i = 0; i < qq; ++i) {
        ctrb.col(i) = col;
        col = G1 * col;
    }
    Eigen::JacobiSVD<Mat> svd(ctrb);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0) return false;
    return sv(qq - 1) > kit::kRankTolerance * sv(0);
}

AssumptionReport check_assumptions(const LinearPlant& plant, const InternalModel* im) {
    plant.validate();
    AssumptionReport rep;
    const Eigen::Index n = plant.n();
    const CMat A = plant.A.cast<std::complex<double>>();
    const CMat B = plant.B.cast<std::complex<double>>();
    const CMat C = plant.C.cast<std::complex<double>>();

    // PBH test on the eigenvalues outside the open unit disc.
    Eigen::EigenSolver<Mat> esa(plant.A, false);
    rep.stabilizable = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> l = esa.eigenvalues()(i);
        if (std::abs(l) < 1.0) continue;
        CMat pbh(n, n + 1);
        pbh << A - l * CMat::Identity(n, n), B;
        if (complex_rank(pbh) < n) {
            rep.stabilizable = false;
            rep.diagnostics.push_back("(A,B) not stabilizable: uncontrollable mode " +
                                      format_lambda(l));
        }
    }

    Eigen::EigenSolver<Mat> ese(plant.E, false);
    const auto& lam = ese.eigenvalues();
    rep.exosystem_spectrum = true;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (std::abs(std::abs(lam(i)) - 1.0) > 1e-9) {
            rep.exosystem_spectrum = false;
            rep.diagnostics.push_back("E eigenvalue " + format_lambda(lam(i)) +
                                      " is not on the unit circle");
        }
        for (Eigen::Index j = i + 1; j < lam.size(); ++j) {
            // Defective blocks split their eigenvalues by O(sqrt(eps)).
            if (std::abs(lam(i) - lam(j)) < 1e-6) {
                rep.exosystem_spectrum = false;
                rep.diagnostics.push_back("E eigenvalue " + format_lambda(lam(i)) +
                                          " is repeated");
            }
        }
    }

    rep.transmission_zeros = true;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        CMat m = CMat::Zero(n + 1, n + 1);
        m.topLeftCorner(n, n) = A - lam(i) * CMat::Identity(n, n);
        m.topRightCorner(n, 1) = B;
        m.bottomLeftCorner(1, n) = C;
        if (complex_rank(m) < n + 1) {
            rep.transmission_zeros = false;
            rep.diagnostics.push_back("rank [A - lI, B; C, 0] < n+1 at l = " +
                                      format_lambda(lam(i)));
        }
    }

    if (im != nullptr) {
        rep.internal_model_controllable = im->controllable();
        if (!rep.internal_model_controllable) {
            rep.diagnostics.push_back("(G1,G2) is not controllable");
        }
    }
    return rep;
}

AugmentedSystem build_augmented(const LinearPlant& plant, const InternalModel& im) {
    plant.validate();
    const Eigen::Index n = plant.n();
    const Eigen::Index q = plant.q();
    require_shape(im.G1, q, q, "G1");
    require_shape(im.G2, q, 1, "G2");
    if ((im.G1 - plant.E).cwiseAbs().maxCoeff() > 1e-12) {
        throw Error(ErrorKind::Configuration, "internal model G1 must equal the exosystem E");
    }
    AugmentedSystem aug;
    aug.n = n;
    aug.q = q;
    const Eigen::Index m = n + q;
    aug.Abar = Mat::Zero(m, m);
    aug.Abar.topLeftCorner(n, n) = plant.A;
    aug.Abar.bottomLeftCorner(q, n) = im.G2 * plant.C;
    aug.Abar.bottomRightCorner(q, q) = plant.E;
    aug.Bbar = Mat::Zero(m, 1);
    aug.Bbar.topRows(n) = plant.B;
    aug.Cbar = Mat::Zero(1, m);
    aug.Cbar.leftCols(n) = plant.C;
    aug.Dbar = Mat::Zero(m, q);
    aug.Dbar.topRows(n) = plant.D;
    aug.Dbar.bottomRows(q) = im.G2 * plant.F;
    aug.Dtilde = Mat::Zero(m, m);
    aug.Dtilde.bottomRows(q) = im.G2 * aug.Cbar;
    return aug;
}

RegulatorSolution solve_regulator_equations(const LinearPlant& plant, const InternalModel& im,
                                            const std::optional<RowVec>& gain) {
    plant.validate();
    const Eigen::Index n = plant.n();
    const Eigen::Index q = plant.q();
    require_shape(im.G2, q, 1, "G2");
    const Mat In = Mat::Identity(n, n);
    const Mat Iq = Mat::Identity(q, q);

    // Unknowns [vec(X); vec(U)].
    const Eigen::Index nx = n * q;
    Mat sys = Mat::Zero(nx + q, nx + q);
    Vec rhs(nx + q);
    sys.topLeftCorner(nx, nx) = kit::kron(plant.E.transpose(), In) - kit::kron(Iq, plant.A);
    sys.topRightCorner(nx, q) = -kit::kron(Iq, plant.B);
    sys.bottomLeftCorner(q, nx) = kit::kron(Iq, plant.C);
    rhs.head(nx) = kit::vec(plant.D);
    rhs.tail(q) = -kit::vec(plant.F);
    const Vec xu = solve_square(sys, rhs, "regulator equations");

    RegulatorSolution sol;
    sol.X = Eigen::Map<const Mat>(xu.data(), n, q);
    sol.U = Eigen::Map<const Mat>(xu.data() + nx, 1, q);
    sol.Z = Mat::Zero(q, q);

    if (gain) {
        if (gain->size() != n + q) {
            throw Error(ErrorKind::Dimension, "regulator gain must have n+q entries");
        }
        const Mat Kx = gain->head(n);
        const Mat Kz = gain->tail(q);
        const Eigen::Index nz = q * q;
        Mat joint = Mat::Zero(nx + nz, nx + nz);
        Vec jrhs(nx + nz);
        joint.topLeftCorner(nx, nx) =
            kit::kron(plant.E.transpose(), In) - kit::kron(Iq, plant.A - plant.B * Kx);
        joint.topRightCorner(nx, nz) = kit::kron(Iq, plant.B * Kz);
        joint.bottomLeftCorner(nz, nx) = -kit::kron(Iq, im.G2 * plant.C);
        joint.bottomRightCorner(nz, nz) =
            kit::kron(plant.E.transpose(), Iq) - kit::kron(Iq, plant.E);
        jrhs.head(nx) = kit::vec(plant.D);
        jrhs.tail(nz) = kit::vec(im.G2 * plant.F);
        const Vec xz = solve_square(joint, jrhs, "closed-loop regulator equations");
        sol.Z = Eigen::Map<const Mat>(xz.data() + nx, q, q);
    }
    sol.Xi = Mat(n + q, q);
    sol.Xi << sol.X, sol.Z;
    return sol;
}

RegulatorResiduals regulator_residuals(const LinearPlant& plant, const InternalModel& im,
                                       const RegulatorSolution& sol) {
    RegulatorResiduals r;
    const Mat out = plant.C * sol.X + plant.F;
    r.state = (sol.X * plant.E - plant.A * sol.X - plant.B * sol.U - plant.D).norm();
    r.output = out.norm();
    r.internal = (sol.Z * plant.E - plant.E * sol.Z - im.G2 * out).norm();
    return r;
}

StepResult plant_step(const LinearPlant& plant, const Vec& x, double u, const Vec& w) {
    if (x.size() != plant.n() || w.size() != plant.q()) {
        throw Error(ErrorKind::Dimension, "plant_step: state or exostate has wrong length");
    }
    StepResult s;
    s.e = (plant.C * x)(0) + (plant.F * w)(0);
    s.x_next = plant.A * x + plant.B.col(0) * u + plant.D * w;
    s.w_next = plant.E * w;
    return s;
}

LinearPlant pendulum_plant(const PendulumParameters& p) {
    const double M = p.cart_mass;
    const double m = p.pole_mass;
    const double b = p.friction;
    const double g = p.gravity;
    const double l = p.pole_length;
    const double T = p.sample_period;
    LinearPlant plant;
    plant.A = Mat(4, 4);
    plant.A << 1, T, 0, 0,
               0, 1 - b * T / M, -m * g * T / M, 0,
               0, 0, 1, T,
               0, b * T / (l * M), (M + m) * g * T / (l * M), 1;
    plant.B = Mat(4, 1);
    plant.B << 0, T / M, 0, -T / (l * M);
    plant.C = Mat(1, 4);
    plant.C << 1, 0, 0, 0;
    plant.D = Mat(4, 1);
    plant.D << 0, 0.01, 0, 0.01;
    plant.E = Mat::Constant(1, 1, 1.0);
    plant.F = Mat::Constant(1, 1, -1.0);
    return plant;
}

InternalModel pendulum_internal_model() {
    return InternalModel{Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 0.5)};
}

}  // namespace dosreg
