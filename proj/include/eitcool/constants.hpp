#pragma once

#include <numbers>
#include <string_view>

namespace eitcool::constants {

// CODATA 2018. Bump kTableVersion whenever a value changes; it is stamped
// into every output file.
inline constexpr std::string_view kTableVersion = "codata2018-1";

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kPlanck = 6.62607015e-34;        // J s
inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kBoltzmann = 1.380649e-23;       // J / K
inline constexpr double kBohrMagneton = 9.2740100783e-24; // J / T
inline constexpr double kAtomicMassUnit = 1.66053906660e-27; // kg
inline constexpr double kSpeedOfLight = 299792458.0;     // m / s
inline constexpr double kGaussToTesla = 1.0e-4;

// 40Ca+
inline constexpr double kCa40MassAmu = 39.962590863;
inline constexpr double kCa40Mass = kCa40MassAmu * kAtomicMassUnit;
inline constexpr double kCaS12P12Wavelength = 396.959e-9; // m, vacuum
inline constexpr double kCaP12Linewidth = kTwoPi * 20.0e6; // rad/s
inline constexpr double kLandeS12 = 2.00225;
inline constexpr double kLandeP12 = 2.0 / 3.0;
// P1/2 -> D3/2 : P1/2 -> S1/2. Not part of the dynamics.
inline constexpr double kBranchingPD = 1.0 / 16.0;

struct Entry {
  std::string_view name;
  double value;
  std::string_view unit;
};

inline constexpr Entry kTable[] = {
    {"planck", kPlanck, "J s"},
    {"hbar", kHbar, "J s"},
    {"boltzmann", kBoltzmann, "J/K"},
    {"bohr_magneton", kBohrMagneton, "J/T"},
    {"atomic_mass_unit", kAtomicMassUnit, "kg"},
    {"speed_of_light", kSpeedOfLight, "m/s"},
    {"ca40_mass_amu", kCa40MassAmu, "u"},
    {"ca40_mass", kCa40Mass, "kg"},
    {"ca_s12_p12_wavelength", kCaS12P12Wavelength, "m"},
    {"ca_p12_linewidth", kCaP12Linewidth, "rad/s"},
    {"lande_s12", kLandeS12, "1"},
    {"lande_p12", kLandeP12, "1"},
    {"branching_p12_d32", kBranchingPD, "1"},
};

}  // namespace eitcool::constants

namespace eitcool {

// `_hz` quantities everywhere in configuration and output are ordinary
// frequencies; the engine works in rad/s. These two functions are the only
// place the conversion happens.
constexpr double hz_to_angular(double hz) { return constants::kTwoPi * hz; }
constexpr double angular_to_hz(double w) { return w / constants::kTwoPi; }

}  // namespace eitcool
