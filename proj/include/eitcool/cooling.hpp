#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eitcool/atom_model.hpp"
#include "eitcool/spectrum.hpp"

namespace eitcool {

class TrapMode {
 public:
  TrapMode(std::string label, double omega, const Vec3& axis, double mass);

  const std::string& label() const { return label_; }
  double omega() const { return omega_; }
  const Vec3& axis() const { return axis_; }
  double mass() const { return mass_; }
  // rms extent of the motional ground state, sqrt(hbar / (2 m omega)).
  double ground_state_size() const;

  TrapMode with_omega(double omega) const { return TrapMode(label_, omega, axis_, mass_); }

 private:
  std::string label_;
  double omega_;
  Vec3 axis_;
  double mass_;
};

// Throws unless the axes are pairwise orthogonal within 1e-10.
void check_orthogonal_axes(std::span<const TrapMode> modes);

struct ModeGeometry {
  Vec3 delta_k;      // k_cooling - k_coupling, 1/m
  double ground_state_size = 0.0;
  double eta_total = 0.0;  // |delta_k| a0
  double cos_phi = 0.0;    // angle between delta_k and the mode axis
  bool coolable = false;   // false when delta_k = 0 or delta_k is perpendicular to the axis

  // Lamb-Dicke parameter along the mode axis, eta |cos phi|.
  double eta_projected() const { return eta_total * std::abs(cos_phi); }
};

ModeGeometry lamb_dicke(const TrapMode& mode, const Vec3& k_cooling, const Vec3& k_coupling);
ModeGeometry lamb_dicke(const TrapMode& mode, const BeamSet& beams);

struct CoolingCoefficients {
  double a_plus = 0.0;
  double a_minus = 0.0;
};

// A+- = eta^2 cos^2(phi) W(Delta_pi -+ omega). The configuration must sit at
// two-photon resonance Delta_pi = Delta_sigma.
CoolingCoefficients cooling_coefficients(const SystemConfig& cfg, const TrapMode& mode,
                                         const ModeGeometry& geometry);
// Same, from already-evaluated W on the heating and cooling sidebands.
CoolingCoefficients cooling_coefficients(const ModeGeometry& geometry, double w_heating,
                                         double w_cooling);

// Closed-form solution of dn/dt = -(A- - A+) n + A+.
double evolve_n(double a_plus, double a_minus, double n0, double t);

struct CoolingReport {
  std::string label;
  double omega = 0.0;
  double a_plus = 0.0;
  double a_minus = 0.0;
  double rate = 0.0;            // A- - A+
  double n_ss = 0.0;            // NaN when not cooling
  double time_constant = 0.0;   // 1 / rate, NaN when not cooling
  double eta_projected = 0.0;
  double lamb_dicke_check = 0.0;  // eta_projected sqrt(n_ss)
  bool cooling = false;           // A- > A+
  bool coolable = false;
  bool deep_lamb_dicke = false;   // lamb_dicke_check < 0.1
};

inline constexpr double kDeepLambDickeLimit = 0.1;

CoolingReport make_report(const TrapMode& mode, const ModeGeometry& geometry,
                          const CoolingCoefficients& coefficients);

// All modes share one spectrum; W is evaluated once per distinct sideband.
std::vector<CoolingReport> multimode_report(const SystemConfig& cfg, std::span<const TrapMode> modes,
                                            unsigned threads = 1);

struct SweepPoint {
  double value;  // swept quantity, rad/s
  std::optional<CoolingReport> report;
  std::string error;  // set when the point failed
};

// Mode frequency swept at fixed beams.
std::vector<SweepPoint> sweep_mode_frequency(const SystemConfig& cfg, const TrapMode& mode,
                                             std::span<const double> omegas, unsigned threads = 1);
// AC-Stark shift swept by re-solving for Omega_sigma at each point; the
// cooling beam and all detunings stay fixed.
std::vector<SweepPoint> sweep_stark_shift(const SystemConfig& cfg, const TrapMode& mode,
                                          std::span<const double> shifts, unsigned threads = 1);

// Logarithmic grid from lo to hi (inclusive) with the given density.
std::vector<double> log_grid(double lo, double hi, double points_per_decade);

}  // namespace eitcool
