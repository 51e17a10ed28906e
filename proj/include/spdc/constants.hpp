#pragma once

#include <numbers>

// CODATA 2018 values; the only place physical constants are defined.
namespace spdc::constants {

inline constexpr double kSpeedOfLight = 299'792'458.0;       // m/s (exact)
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kPi = std::numbers::pi;

// Public rates are quoted per milliwatt of pump power.
inline constexpr double kWattsPerMilliwatt = 1.0e-3;

}  // namespace spdc::constants
