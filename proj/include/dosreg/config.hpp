#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dosreg/dos.hpp"
#include "dosreg/matrix_kit.hpp"
#include "dosreg/plant.hpp"

namespace dosreg {

// Flat `key = value` experiment description. Matrices are written one row per
// line with the key repeated; `preset = pendulum` fills every field first so
// later keys only override.
struct ExperimentConfig {
    std::string preset;

    LinearPlant plant;
    Mat G2;
    Mat Q;
    double R = 1.0;

    // Learning phase.
    DoSParams dos;
    std::uint64_t dos_seed = 7;
    std::string dos_schedule_file;  // overrides the generator when set
    long learn_k0 = 0;
    long learn_ks = 100;
    std::uint64_t explore_seed = 11;
    double explore_amplitude = 1.0;
    bool explore_silence_under_dos = false;
    double epsilon0 = 0.5;
    std::optional<RowVec> K0;

    Vec x0;
    Vec z0;
    Vec w0;

    // Regulation phase. Unset DoS fields inherit the learning-phase values;
    // sim_T_auto picks T = 2·T*.
    long sim_horizon = 1500;
    std::optional<double> sim_eta;
    std::optional<double> sim_tau_D;
    std::optional<double> sim_kappa;
    std::optional<double> sim_T;
    bool sim_T_auto = false;
    std::uint64_t sim_dos_seed = 13;
    std::string sim_schedule_file;

    // Throws Configuration/Dimension errors on inconsistent data.
    void validate() const;

    [[nodiscard]] InternalModel internal_model() const { return {plant.E, G2}; }

    bool operator==(const ExperimentConfig& other) const;
};

ExperimentConfig pendulum_config();

// Relative file paths are resolved against `base_dir`.
ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& os, const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

// Applies a master seed to every random stream in the config.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

// 64-bit FNV-1a of the canonical serialization followed by `extra`, as 16 hex
// digits.
std::string config_hash(const ExperimentConfig& cfg, const std::string& extra = {});

}  // namespace dosreg
