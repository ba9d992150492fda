#include "eitcool/atom_model.hpp"

#include <cmath>

#include "eitcool/constants.hpp"
#include "eitcool/errors.hpp"

namespace eitcool {

namespace {

constexpr double kUnitTolerance = 1e-12;

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::SMinus: return "S-";
    case Level::SPlus: return "S+";
    case Level::PMinus: return "P-";
    case Level::PPlus: return "P+";
  }
  return "?";
}

std::string_view to_string(BeamRole role) {
  return role == BeamRole::Coupling ? "coupling" : "cooling";
}

LevelScheme::LevelScheme(double lande_g_s, double lande_g_p, double gamma, double branching_pd)
    : lande_g_s_(lande_g_s), lande_g_p_(lande_g_p), gamma_(gamma), branching_pd_(branching_pd) {
  if (!(gamma > 0.0)) throw InvalidArgument("LevelScheme: gamma must be > 0");
  const double third = 1.0 / 3.0;
  const double two_thirds = 2.0 / 3.0;
  channels_ = {{
      {Level::SMinus, Level::PPlus, +1, two_thirds, std::sqrt(two_thirds)},
      {Level::SPlus, Level::PPlus, 0, third, -std::sqrt(third)},
      {Level::SMinus, Level::PMinus, 0, third, std::sqrt(third)},
      {Level::SPlus, Level::PMinus, -1, two_thirds, -std::sqrt(two_thirds)},
  }};
}

LevelScheme LevelScheme::calcium40() {
  return LevelScheme(constants::kLandeS12, constants::kLandeP12, constants::kCaP12Linewidth,
                     constants::kBranchingPD);
}

std::optional<DipoleChannel> LevelScheme::channel(Level lower, Level upper) const {
  for (const auto& c : channels_) {
    if (c.lower == lower && c.upper == upper) return c;
  }
  return std::nullopt;
}

double LevelScheme::decay_weight_sum(Level upper) const {
  double sum = 0.0;
  for (const auto& c : channels_) {
    if (c.upper == upper) sum += c.cg_squared;
  }
  return sum;
}

MagneticField::MagneticField(double magnitude_gauss, const Vec3& direction)
    : magnitude_(magnitude_gauss), direction_(direction) {
  if (!(magnitude_gauss >= 0.0)) throw InvalidArgument("MagneticField: magnitude must be >= 0");
  if (std::abs(direction.norm() - 1.0) > kUnitTolerance)
    throw InvalidArgument("MagneticField: direction must be a unit vector");
}

Beam::Beam(BeamRole role, double rabi, double detuning, const Vec3& k_hat, double wavelength,
           const CVec3& polarization)
    : role_(role),
      rabi_(rabi),
      detuning_(detuning),
      k_hat_(k_hat),
      wavelength_(wavelength),
      polarization_(polarization) {
  if (!(wavelength > 0.0)) throw InvalidArgument("Beam: wavelength must be > 0");
  if (!(rabi >= 0.0)) throw InvalidArgument("Beam: rabi frequency must be >= 0");
  if (std::abs(k_hat.norm() - 1.0) > kUnitTolerance)
    throw InvalidArgument("Beam: k_hat must be a unit vector");
  if (std::abs(polarization.norm() - 1.0) > kUnitTolerance)
    throw InvalidArgument("Beam: polarization must have unit norm");
  const Complex transverse = polarization.dot(k_hat.cast<Complex>());
  if (std::abs(transverse) > kUnitTolerance)
    throw InvalidArgument("Beam: polarization must be orthogonal to k_hat");
}

Vec3 Beam::wavevector() const { return (constants::kTwoPi / wavelength_) * k_hat_; }

Beam Beam::with_rabi(double rabi) const {
  return Beam(role_, rabi, detuning_, k_hat_, wavelength_, polarization_);
}

Beam Beam::with_detuning(double detuning) const {
  return Beam(role_, rabi_, detuning, k_hat_, wavelength_, polarization_);
}

Beam Beam::with_polarization(const CVec3& polarization) const {
  return Beam(role_, rabi_, detuning_, k_hat_, wavelength_, polarization);
}

SphericalFrame make_frame(const MagneticField& field, const Vec3& reference) {
  const Vec3& z = field.direction();
  Vec3 x = reference - reference.dot(z) * z;
  if (x.norm() < 1e-9) {
    throw InvalidArgument(
        "spherical frame is degenerate: reference direction is parallel to the field; "
        "supply an explicit transverse axis");
  }
  x.normalize();
  return {x, z.cross(x), z};
}

PolarizationComponents decompose_polarization(const Beam& beam, const SphericalFrame& frame) {
  const CVec3& e = beam.polarization();
  const Complex ex = frame.x.cast<Complex>().dot(e);
  const Complex ey = frame.y.cast<Complex>().dot(e);
  const Complex ez = frame.z.cast<Complex>().dot(e);
  const Complex i(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  PolarizationComponents out;
  out.amp[0] = s * (ex + i * ey);   // q = -1
  out.amp[1] = ez;                  // q =  0
  out.amp[2] = -s * (ex - i * ey);  // q = +1
  return out;
}

PolarizationComponents decompose_polarization(const Beam& beam, const MagneticField& field) {
  return decompose_polarization(beam, make_frame(field, beam.k_hat()));
}

ZeemanSplitting zeeman_splitting(const LevelScheme& scheme, const MagneticField& field) {
  const double larmor =
      constants::kBohrMagneton * field.magnitude_gauss() * constants::kGaussToTesla /
      constants::kHbar;
  return {scheme.lande_g_s() * larmor, scheme.lande_g_p() * larmor};
}

double level_shift(const ZeemanSplitting& split, Level level) {
  const double splitting = is_excited(level) ? split.excited : split.ground;
  return magnetic_quantum_number(level) * splitting;
}

double transition_offset(const ZeemanSplitting& split, Level lower, Level upper) {
  return level_shift(split, upper) - level_shift(split, lower);
}

DopplerLimit doppler_limit_occupation(double gamma, double omega) {
  if (!(gamma > 0.0) || !(omega > 0.0))
    throw InvalidArgument("doppler_limit_occupation: gamma and omega must be > 0");
  const double temperature = constants::kHbar * gamma / (2.0 * constants::kBoltzmann);
  return {temperature, thermal_occupation(temperature, omega)};
}

double thermal_occupation(double temperature, double omega) {
  if (!(temperature > 0.0) || !(omega > 0.0))
    throw InvalidArgument("thermal_occupation: temperature and omega must be > 0");
  return 1.0 / std::expm1(constants::kHbar * omega / (constants::kBoltzmann * temperature));
}

double bare_rabi_for(const DipoleChannel& channel, double transition_rabi) {
  return transition_rabi / std::abs(channel.cg_amplitude);
}

}  // namespace eitcool
