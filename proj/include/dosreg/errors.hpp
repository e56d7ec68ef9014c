#pragma once

#include <stdexcept>
#include <string>

namespace dosreg {

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Dimension,
    Validation,
    Configuration,
    Argument,
    AssumptionViolation,
    Stability,
    Convergence,
    Numerical,
    Divergence,
    Indefinite,
    Rank,
    Excitation,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised by least-squares / rank-revealing routines; carries the rank found.
class RankError : public Error {
public:
    RankError(ErrorKind kind, const std::string& what, long rank, long required)
        : Error(kind, what), rank_(rank), required_(required) {}

    [[nodiscard]] long rank() const noexcept { return rank_; }
    [[nodiscard]] long required() const noexcept { return required_; }

private:
    long rank_;
    long required_;
};

// Simulation blew up; `instant` is the first step with a non-finite value.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, long instant)
        : Error(ErrorKind::Divergence, what), instant_(instant) {}

    [[nodiscard]] long instant() const noexcept { return instant_; }

private:
    long instant_;
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Configuration: return "configuration";
        case ErrorKind::Argument: return "argument";
        case ErrorKind::AssumptionViolation: return "assumption";
        case ErrorKind::Stability: return "stability";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::Indefinite: return "indefinite";
        case ErrorKind::Rank: return "rank";
        case ErrorKind::Excitation: return "excitation";
    }
    return "unknown";
}

}  // namespace dosreg
