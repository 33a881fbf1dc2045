#pragma once

#include <cmath>

// CODATA 2018 values, SI units.
namespace hrs::constants {

inline constexpr double c = 299792458.0;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double G = 6.67430e-11;
inline constexpr double electron_mass = 9.1093837015e-31;
inline constexpr double bohr_radius = 5.29177210903e-11;

inline double planck_mass() { return std::sqrt(hbar * c / G); }
inline double planck_length() { return std::sqrt(hbar * G / (c * c * c)); }
inline double planck_energy() { return planck_mass() * c * c; }
inline double planck_density() {
  const double lp = planck_length();
  return planck_mass() / (lp * lp * lp);
}

}  // namespace hrs::constants
