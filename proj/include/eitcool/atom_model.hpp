#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace eitcool {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Complex = std::complex<double>;

// Zeeman sublevels of S1/2 and P1/2. The enumerator value is the row/column
// of the level in a full four-level density matrix.
enum class Level : int { SMinus = 0, SPlus = 1, PMinus = 2, PPlus = 3 };

inline constexpr std::array<Level, 4> kAllLevels = {Level::SMinus, Level::SPlus,
                                                    Level::PMinus, Level::PPlus};

std::string_view to_string(Level level);
constexpr bool is_excited(Level level) {
  return level == Level::PMinus || level == Level::PPlus;
}
constexpr double magnetic_quantum_number(Level level) {
  return (level == Level::SPlus || level == Level::PPlus) ? 0.5 : -0.5;
}

// One electric-dipole channel between a P1/2 and an S1/2 sublevel, labelled
// by the spherical polarization q = m_upper - m_lower.
//
// Amplitudes are the Clebsch-Gordan coefficients <1/2 m_l; 1 q | 1/2 m_u>
// in the Condon-Shortley convention:
//   S- -> P+ (q=+1): +sqrt(2/3)     S+ -> P+ (q= 0): -sqrt(1/3)
//   S- -> P- (q= 0): +sqrt(1/3)     S+ -> P- (q=-1): -sqrt(2/3)
// This table is the only place the signs are fixed.
struct DipoleChannel {
  Level lower;
  Level upper;
  int q;
  double cg_squared;
  double cg_amplitude;
};

class LevelScheme {
 public:
  LevelScheme(double lande_g_s, double lande_g_p, double gamma, double branching_pd);

  // 40Ca+ defaults: g_S = 2.00225, g_P = 2/3, Gamma = 2 pi x 20 MHz.
  static LevelScheme calcium40();

  double lande_g_s() const { return lande_g_s_; }
  double lande_g_p() const { return lande_g_p_; }
  double gamma() const { return gamma_; }
  double branching_pd() const { return branching_pd_; }

  const std::array<DipoleChannel, 4>& channels() const { return channels_; }
  std::optional<DipoleChannel> channel(Level lower, Level upper) const;
  // Sum of squared CG weights over all decay channels leaving `upper`.
  double decay_weight_sum(Level upper) const;

 private:
  double lande_g_s_;
  double lande_g_p_;
  double gamma_;
  double branching_pd_;
  std::array<DipoleChannel, 4> channels_;
};

class MagneticField {
 public:
  MagneticField(double magnitude_gauss, const Vec3& direction);

  double magnitude_gauss() const { return magnitude_; }
  const Vec3& direction() const { return direction_; }

 private:
  double magnitude_;
  Vec3 direction_;
};

enum class BeamRole { Coupling, Cooling };
std::string_view to_string(BeamRole role);

// `rabi` is the Rabi frequency for a unit Clebsch-Gordan transition with the
// full field in one polarization component; the coupling on a particular
// channel is rabi * cg_amplitude * amp_q. `detuning` is measured from the
// zero-field S1/2 -> P1/2 resonance.
class Beam {
 public:
  Beam(BeamRole role, double rabi, double detuning, const Vec3& k_hat, double wavelength,
       const CVec3& polarization);

  BeamRole role() const { return role_; }
  double rabi() const { return rabi_; }
  double detuning() const { return detuning_; }
  const Vec3& k_hat() const { return k_hat_; }
  double wavelength() const { return wavelength_; }
  const CVec3& polarization() const { return polarization_; }
  Vec3 wavevector() const;

  Beam with_rabi(double rabi) const;
  Beam with_detuning(double detuning) const;
  Beam with_polarization(const CVec3& polarization) const;

 private:
  BeamRole role_;
  double rabi_;
  double detuning_;
  Vec3 k_hat_;
  double wavelength_;
  CVec3 polarization_;
};

// Right-handed frame (x, y, z) with z along the quantization axis.
struct SphericalFrame {
  Vec3 x;
  Vec3 y;
  Vec3 z;
};

// x is the component of `reference` perpendicular to the field. Throws if
// `reference` is parallel to the field.
SphericalFrame make_frame(const MagneticField& field, const Vec3& reference);

struct PolarizationComponents {
  std::array<Complex, 3> amp{};  // indexed by q + 1

  Complex operator()(int q) const { return amp.at(static_cast<std::size_t>(q + 1)); }
  double weight(int q) const { return std::norm((*this)(q)); }
  double total_weight() const { return weight(-1) + weight(0) + weight(1); }
};

// amp_q = conj(e_q) . epsilon with e_{+1} = -(x + i y)/sqrt 2, e_0 = z,
// e_{-1} = (x - i y)/sqrt 2. For a field E ~ epsilon exp(-i w t) this puts
// light circulating counter-clockwise about the field into q = +1.
PolarizationComponents decompose_polarization(const Beam& beam, const SphericalFrame& frame);
// Frame built from the beam's own propagation direction.
PolarizationComponents decompose_polarization(const Beam& beam, const MagneticField& field);

// Full m = -1/2 <-> +1/2 splittings as angular frequencies.
struct ZeemanSplitting {
  double ground;
  double excited;
};
ZeemanSplitting zeeman_splitting(const LevelScheme& scheme, const MagneticField& field);

// Level energy / hbar relative to the zero-field P1/2 (excited) or S1/2
// (ground) centroid.
double level_shift(const ZeemanSplitting& split, Level level);
// Resonance frequency of lower -> upper minus the zero-field resonance.
double transition_offset(const ZeemanSplitting& split, Level lower, Level upper);

struct DopplerLimit {
  double temperature;  // K
  double n_bar;
};
DopplerLimit doppler_limit_occupation(double gamma, double omega);
double thermal_occupation(double temperature, double omega);

// Unit-CG Rabi frequency that produces `transition_rabi` on `channel` for a
// beam whose polarization is entirely in the channel's q component.
double bare_rabi_for(const DipoleChannel& channel, double transition_rabi);

}  // namespace eitcool
