#pragma once

#include <span>
#include <utility>
#include <vector>

#include "eitcool/atom_model.hpp"
#include "eitcool/liouville.hpp"

namespace eitcool {

enum class PeriodicMethod { Fourier, Propagation };

// Everything needed to solve the optical Bloch equations at one point.
struct SystemConfig {
  LevelScheme scheme;
  MagneticField field;
  BeamSet beams;
  Variant variant = Variant::FourLevelGeometry;
  BeatTreatment beat_treatment = BeatTreatment::Periodic;
  PeriodicMethod periodic_method = PeriodicMethod::Fourier;
  int fourier_harmonics = 4;
  PeriodicOptions periodic{};
};

// Detunings measured from the beams' nominal transitions: S- -> P+ for the
// coupling beam, S+ -> P+ for the cooling beam. Delta_pi = Delta_sigma is
// two-photon resonance.
double coupling_detuning(const SystemConfig& cfg);
double cooling_detuning(const SystemConfig& cfg);
// Rabi frequency of the coupling beam on S- -> P+, as quoted for Omega_sigma.
double coupling_transition_rabi(const SystemConfig& cfg);

SystemConfig with_cooling_detuning(SystemConfig cfg, double delta_pi);
SystemConfig with_coupling_detuning(SystemConfig cfg, double delta_sigma);
// Sets the coupling beam so its S- -> P+ Rabi frequency equals omega_sigma.
SystemConfig with_coupling_rabi(SystemConfig cfg, double omega_sigma);
// Sets the cooling beam so a pure-pi beam would have Rabi frequency
// omega_pi on S+ -> P+.
SystemConfig with_cooling_rabi(SystemConfig cfg, double omega_pi);

// delta = (sqrt(Omega^2 + Delta^2) - |Delta|) / 2
double ac_stark_shift(double omega_sigma, double delta_sigma);
double ac_stark_shift_approx(double omega_sigma, double delta_sigma);
// Inverse of ac_stark_shift in Omega: 2 sqrt(delta (delta + |Delta|)).
double coupling_for_target_shift(double target_shift, double delta_sigma);
double coupling_for_target_shift_approx(double target_shift, double delta_sigma);

struct DressedState {
  double ground;   // amplitude on |S,->
  double excited;  // amplitude on |P,+>
};
DressedState dressed_state(double omega_sigma, double delta_sigma);

struct BeamRates {
  double cooling = 0.0;
  double coupling = 0.0;
};

struct Solution {
  DrivenSystem system;
  DensityMatrix rho;           // steady (or period-averaged) state
  Eigen::MatrixXcd harmonic;   // < rho e^{-i nu t} >, zero for static systems
};

// Builds and solves the configured system at its current detunings.
Solution solve(const SystemConfig& cfg);

// Photons absorbed per second from each beam: Im(Omega rho_lu) summed over
// the beam's couplings, beat couplings time-averaged, incoherent pumps as
// R (rho_ll - rho_uu).
BeamRates absorption_rates(const Solution& s);
double excited_population(const Solution& s);

struct SpectrumSample {
  double detuning_pi;
  double W;           // cooling-beam scattering rate, 1/s
  double W_coupling;  // coupling-beam scattering rate, 1/s
  double rho_P_total;
};

SpectrumSample scattering_rate(const SystemConfig& cfg, double delta_pi);
std::vector<SpectrumSample> scan_spectrum(const SystemConfig& cfg, std::span<const double> detunings,
                                          unsigned threads = 1);

struct FanoFeatures {
  double dark_point = 0.0;
  double bright_peak = 0.0;
  double stark_shift = 0.0;
  double W_dark = 0.0;
  double W_bright = 0.0;
  bool degenerate = false;  // no resolvable structure (e.g. coupling beam off)
};

// Grid scan over [lo, hi] with `points` samples, then golden-section
// refinement of the extremes to 1e-4 of the grid estimate of the spacing.
// Throws InvalidArgument if an extreme sits on the scan boundary.
FanoFeatures fano_features(const SystemConfig& cfg, double lo, double hi, std::size_t points);

}  // namespace eitcool
