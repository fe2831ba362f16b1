#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "rydsim/constants.hpp"

namespace rydsim {

/// Deterministic per-shot random stream: splitmix64 keyed by (seed,
/// shot_index). Gaussian draws use an explicit Box-Muller transform, so
/// sequences are identical across platforms and thread counts.
class ShotRng {
  public:
    ShotRng(std::uint64_t seed, std::uint64_t stream);

    double uniform();      // (0, 1)
    double normal();       // standard normal
    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;

    std::uint64_t next_u64();
};

/// Quasi-static noise channels: one draw per shot, frozen during the shot.
struct NoiseSpec {
    double temperature = 0.0; // K
    double k_eff = 0.0;       // rad/m
    double mass = constants::rb87_mass;
    /// Drive name -> (absolute sigma in rad/s, nominal Rabi in rad/s).
    /// The sampled multiplier is N(1, sigma/nominal) truncated positive.
    std::map<std::string, std::pair<double, double>> rabi_sigmas;
    bool doppler_enabled = true;
    bool rabi_enabled = true;

    void validate() const;
};

struct ShotSample {
    double doppler_detuning = 0.0;            // rad/s, k_eff * v_axial of the (control) atom
    double doppler_detuning_target = 0.0;     // rad/s, second atom for two-qubit runs
    std::array<double, 3> velocity{};         // m/s, 3D Maxwell-Boltzmann draw
    std::array<double, 3> velocity_target{};  // m/s
    double thermal_energy = 0.0;              // J, Gamma(3, kB T) trap energy draw
    std::map<std::string, double> rabi_scale; // drive -> multiplier
    std::uint64_t shot_index = 0;

    double scale(const std::string& drive) const;
};

/// Doppler-induced quasi-static detuning spread, sigma = k_eff sqrt(kB T / m).
double doppler_sigma(double temperature, double k_eff, double mass);

/// Deterministic function of (seed, shot_index); evaluation-order independent.
/// Draw order per shot: 3 velocity normals + 3 velocity normals (target atom),
/// 3 uniforms (trap energy), then one normal per rabi channel in name order.
/// Disabled channels are still drawn and then forced to their neutral value.
ShotSample sample_shot(const NoiseSpec& spec, std::uint64_t seed, std::uint64_t shot_index);

} // namespace rydsim
