#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dosreg/closed_loop_sim.hpp"
#include "dosreg/learner.hpp"
#include "dosreg/matrix_kit.hpp"
#include "dosreg/optimal_control.hpp"
#include "dosreg/plant.hpp"

namespace testsupport {

using namespace dosreg;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }

    Mat matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
        Mat m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * uniform();
        return m;
    }
    Vec vector(Eigen::Index n, double scale = 1.0) { return matrix(n, 1, scale); }

    Mat symmetric(Eigen::Index n) {
        const Mat m = matrix(n, n);
        return (m + m.transpose()) / 2.0;
    }
    Mat spd(Eigen::Index n) {
        const Mat m = matrix(n, n);
        return m * m.transpose() + Mat::Identity(n, n);
    }
    // Spectral radius scaled to `radius`.
    Mat stable(Eigen::Index n, double radius = 0.8) {
        Mat m = matrix(n, n);
        const double r = kit::spectral_radius(m);
        if (r > 0.0) m *= radius / r;
        return m;
    }

    // Simple unit-circle spectrum: ±1 for q = 1, a rotation for q = 2,
    // rotation plus ±1 for q = 3.
    Mat exosystem(Eigen::Index q) {
        const double sign = uniform() < 0.0 ? -1.0 : 1.0;
        if (q == 1) return Mat::Constant(1, 1, sign);
        Mat E = Mat::Zero(q, q);
        const double th = uniform(0.2, 2.8);
        E.topLeftCorner(2, 2) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        if (q == 3) E(2, 2) = sign;
        return E;
    }

    // Random plant passing Assumptions 1 and 2.
    LinearPlant plant(Eigen::Index n, Eigen::Index q) {
        for (;;) {
            LinearPlant p{matrix(n, n, 1.2), matrix(n, 1), matrix(1, n), matrix(n, q),
                          exosystem(q), matrix(1, q)};
            if (check_assumptions(p).all_pass()) return p;
        }
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Two states, unstable open loop, sinusoidal exosystem.
inline LinearPlant toy_plant() {
    LinearPlant p;
    p.A = Mat(2, 2);
    p.A << 1.05, 0.3, 0.0, 0.7;
    p.B = Mat(2, 1);
    p.B << 0.0, 1.0;
    p.C = Mat(1, 2);
    p.C << 1.0, 0.0;
    p.D = Mat(2, 2);
    p.D << 0.1, 0.0, 0.0, 0.2;
    const double th = 0.3;
    p.E = Mat(2, 2);
    p.E << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    p.F = Mat(1, 2);
    p.F << -1.0, 0.0;
    return p;
}

inline InternalModel toy_internal_model() {
    Mat G2(2, 1);
    G2 << 0.5, 0.5;
    return {toy_plant().E, G2};
}

inline CostWeights toy_cost() {
    return {Mat::Identity(4, 4), 1.0};
}

// Scalar plant A=0.5, B=1, C=1, E=1, F=-1 used for hand-checked examples.
inline LinearPlant scalar_plant(double d = 0.0) {
    return {Mat::Constant(1, 1, 0.5), Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0),
            Mat::Constant(1, 1, d),   Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, -1.0)};
}

inline AugmentedSystem scalar_augmented(double a, double b) {
    AugmentedSystem aug;
    aug.Abar = Mat::Constant(1, 1, a);
    aug.Bbar = Mat::Constant(1, 1, b);
    aug.Cbar = Mat::Constant(1, 1, 1.0);
    aug.Dbar = Mat::Zero(1, 0);
    aug.Dtilde = Mat::Zero(1, 1);
    aug.n = 1;
    aug.q = 0;
    return aug;
}

inline CostWeights pendulum_cost() {
    Vec d(5);
    d << 1000, 1000, 1000, 1000, 15;
    return {d.asDiagonal(), 1.0};
}

inline double rel_err(const Mat& a, const Mat& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace testsupport
