#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace eitcool {

enum class Sideband { Red, Blue, Carrier };
std::string_view to_string(Sideband s);

class ThermalState {
 public:
  // Cutoff defaults to the smallest n with cumulative weight >= 1 - 1e-6,
  // capped at kMaxCutoff.
  explicit ThermalState(double n_bar);
  ThermalState(double n_bar, std::size_t cutoff);

  static constexpr std::size_t kMaxCutoff = 2000;
  static constexpr double kTailTolerance = 1e-6;
  static std::size_t default_cutoff(double n_bar);

  double n_bar() const { return n_bar_; }
  std::size_t cutoff() const { return cutoff_; }
  // p_n = n_bar^n / (n_bar + 1)^(n + 1)
  double probability(std::size_t n) const;
  double retained_weight() const;

 private:
  double n_bar_;
  std::size_t cutoff_;
};

struct FlopRecord {
  std::vector<double> times;
  std::vector<double> excitation;
  Sideband sideband = Sideband::Blue;
};

// Excitation after a pulse of length t:
//   sum_n p_n (1 - e^{-decay t} cos(Omega_n t)) / 2
// with Omega_n = omega0 eta sqrt(n+1) (blue), omega0 eta sqrt(n) (red),
// omega0 e^{-eta^2/2} L_n(eta^2) (carrier). decay_rate = 0 gives the ideal
// sin^2(Omega_n t / 2) signal. Requires eta sqrt(cutoff) < 0.5.
FlopRecord sideband_flops(const ThermalState& state, double eta_probe, double omega0,
                          Sideband sideband, std::span<const double> times,
                          double decay_rate = 0.0);

struct ThermalFit {
  double n_bar;
  double residual;  // sum of squared deviations
};

inline constexpr double kFitUpperBound = 1.0e3;

// One-parameter least-squares fit of the thermal flop model over
// n_bar in [0, 1e3]. The model keeps 1 - 1e-6 of the thermal weight at
// every n_bar in the bracket, past kMaxCutoff where needed.
ThermalFit fit_thermal(const FlopRecord& record, double eta_probe, double omega0,
                       double decay_rate = 0.0);

// Long-time average of the flop signal: half of the coupled population.
double time_averaged_excitation(const ThermalState& state, Sideband sideband);

// n = R / (1 - R), R = P_red / P_blue.
double sideband_ratio_n(double p_red, double p_blue);

double ground_state_probability(double n_bar);

}  // namespace eitcool
