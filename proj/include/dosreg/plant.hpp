#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dosreg/matrix_kit.hpp"

namespace dosreg {

// x⁺ = Ax + Bu + Dw,  w⁺ = Ew,  e = Cx + Fw.  Single input, single output;
// the reference is y_d = −Fw.
struct LinearPlant {
    Mat A;  // n×n
    Mat B;  // n×1
    Mat C;  // 1×n
    Mat D;  // n×q
    Mat E;  // q×q
    Mat F;  // 1×q

    [[nodiscard]] Eigen::Index n() const { return A.rows(); }
    [[nodiscard]] Eigen::Index q() const { return E.rows(); }

    // Throws a dimension/validation error on inconsistent or non-finite data.
    void validate() const;

    [[nodiscard]] double reference(const Vec& w) const { return -(F * w)(0); }
};

// z⁺ = G1 z + G2 e with G1 = E.
struct InternalModel {
    Mat G1;  // q×q
    Mat G2;  // q×1

    static InternalModel for_exosystem(const Mat& E, const Mat& G2);
    [[nodiscard]] bool controllable() const;
};

// ζ = [x; z] dynamics: ζ⁺ = Ābar ζ + B̄ u + D̄ w, e = C̄ζ + Fw.
struct AugmentedSystem {
    Mat Abar;    // (n+q)×(n+q)
    Mat Bbar;    // (n+q)×1
    Mat Cbar;    // 1×(n+q)
    Mat Dbar;    // (n+q)×q
    Mat Dtilde;  // (n+q)×(n+q), [0; G2·C̄]
    Eigen::Index n = 0;
    Eigen::Index q = 0;

    [[nodiscard]] Eigen::Index dim() const { return n + q; }
};

struct AssumptionReport {
    bool stabilizable = false;          // (A,B) via PBH on |λ| ≥ 1
    bool exosystem_spectrum = false;    // σ(E) simple and on the unit circle
    bool transmission_zeros = false;    // rank [A−λI B; C 0] = n+1 for λ ∈ σ(E)
    bool internal_model_controllable = true;  // only set when an IM is supplied
    std::vector<std::string> diagnostics;

    [[nodiscard]] bool all_pass() const {
        return stabilizable && exosystem_spectrum && transmission_zeros &&
               internal_model_controllable;
    }
    // Name of the first failing assumption, empty when all pass.
    [[nodiscard]] std::string first_failure() const;
};

struct RegulatorSolution {
    Mat X;   // n×q
    Mat U;   // 1×q
    Mat Z;   // q×q
    Mat Xi;  // (n+q)×q, [X; Z]
};

struct RegulatorResiduals {
    double state = 0.0;     // ‖XE − AX − BU − D‖
    double output = 0.0;    // ‖CX + F‖
    double internal = 0.0;  // ‖ZE − EZ − G2(CX+F)‖
};

struct StepResult {
    Vec x_next;
    Vec w_next;
    double e = 0.0;
};

AssumptionReport check_assumptions(const LinearPlant& plant,
                                   const InternalModel* im = nullptr);

AugmentedSystem build_augmented(const LinearPlant& plant, const InternalModel& im);

// Solves XE = AX + BU + D, CX + F = 0 as one Kronecker-vectorized system.
// Without a gain, Z = 0. With a gain K = [Kx Kz], Z comes from the joint
// system XE = (A − BKx)X − BKzZ + D, ZE = EZ + G2(CX + F).
RegulatorSolution solve_regulator_equations(const LinearPlant& plant, const InternalModel& im,
                                            const std::optional<RowVec>& gain = std::nullopt);

RegulatorResiduals regulator_residuals(const LinearPlant& plant, const InternalModel& im,
                                       const RegulatorSolution& sol);

StepResult plant_step(const LinearPlant& plant, const Vec& x, double u, const Vec& w);

// Inverted pendulum on a cart, discretized with forward Euler.
struct PendulumParameters {
    double cart_mass = 1.0;       // M [kg]
    double pole_mass = 0.1;       // m [kg]
    double friction = 0.1;        // b [N·s/m]
    double gravity = 9.8;         // g [m/s²]
    double pole_length = 0.5;     // l [m]
    double sample_period = 0.01;  // [s]
};

LinearPlant pendulum_plant(const PendulumParameters& p = {});
// G2 = 0.5 for the pendulum preset.
InternalModel pendulum_internal_model();

}  // namespace dosreg
