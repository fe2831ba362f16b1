#pragma once

#include <numbers>

namespace rydsim::constants {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double pi = std::numbers::pi;

// 2019 SI values.
inline constexpr double k_boltzmann = 1.380649e-23; // J/K
inline constexpr double hbar = 1.054571817e-34;     // J s

inline constexpr double rb87_mass = 1.443e-25; // kg

} // namespace rydsim::constants
