#include "eitcool/cooling.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "eitcool/constants.hpp"
#include "eitcool/errors.hpp"
#include "eitcool/numerics.hpp"

namespace eitcool {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_two_photon_resonance(const SystemConfig& cfg) {
  const double d_sigma = coupling_detuning(cfg);
  const double d_pi = cooling_detuning(cfg);
  if (std::abs(d_pi - d_sigma) > 1e-9 * std::max(std::abs(d_sigma), cfg.scheme.gamma()))
    throw InvalidArgument("cooling coefficients are defined at Delta_pi = Delta_sigma");
}

}  // namespace

TrapMode::TrapMode(std::string label, double omega, const Vec3& axis, double mass)
    : label_(std::move(label)), omega_(omega), axis_(axis), mass_(mass) {
  if (!(omega > 0.0)) throw InvalidArgument("TrapMode: omega must be > 0");
  if (!(mass > 0.0)) throw InvalidArgument("TrapMode: mass must be > 0");
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw InvalidArgument("TrapMode: axis must be a unit vector");
}

double TrapMode::ground_state_size() const {
  return std::sqrt(constants::kHbar / (2.0 * mass_ * omega_));
}

void check_orthogonal_axes(std::span<const TrapMode> modes) {
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j)
      if (std::abs(modes[i].axis().dot(modes[j].axis())) > 1e-10)
        throw InvalidArgument("trap axes " + modes[i].label() + " and " + modes[j].label() +
                              " are not orthogonal");
}

ModeGeometry lamb_dicke(const TrapMode& mode, const Vec3& k_cooling, const Vec3& k_coupling) {
  if (k_cooling.norm() == 0.0 || k_coupling.norm() == 0.0)
    throw InvalidArgument("lamb_dicke: wavevectors must be nonzero");
  ModeGeometry g;
  g.delta_k = k_cooling - k_coupling;
  g.ground_state_size = mode.ground_state_size();
  const double dk = g.delta_k.norm();
  g.eta_total = dk * g.ground_state_size;
  g.cos_phi = dk > 0.0 ? g.delta_k.dot(mode.axis()) / dk : 0.0;
  g.coolable = g.eta_projected() > 0.0;
  return g;
}

ModeGeometry lamb_dicke(const TrapMode& mode, const BeamSet& beams) {
  return lamb_dicke(mode, beams.cooling.wavevector(), beams.coupling.wavevector());
}

CoolingCoefficients cooling_coefficients(const ModeGeometry& geometry, double w_heating,
                                         double w_cooling) {
  const double prefactor = geometry.eta_projected() * geometry.eta_projected();
  return {prefactor * w_heating, prefactor * w_cooling};
}

CoolingCoefficients cooling_coefficients(const SystemConfig& cfg, const TrapMode& mode,
                                         const ModeGeometry& geometry) {
  require_two_photon_resonance(cfg);
  if (!geometry.coolable) return {0.0, 0.0};
  const double d_pi = cooling_detuning(cfg);
  const double w_heating = scattering_rate(cfg, d_pi - mode.omega()).W;
  const double w_cooling = scattering_rate(cfg, d_pi + mode.omega()).W;
  return cooling_coefficients(geometry, w_heating, w_cooling);
}

double evolve_n(double a_plus, double a_minus, double n0, double t) {
  const double rate = a_minus - a_plus;
  // (1 - e^{-rate t}) / rate, continuous through rate = 0.
  const double x = rate * t;
  const double growth = x == 0.0 ? t : -std::expm1(-x) / rate;
  return n0 * std::exp(-x) + a_plus * growth;
}

CoolingReport make_report(const TrapMode& mode, const ModeGeometry& geometry,
                          const CoolingCoefficients& c) {
  CoolingReport r;
  r.label = mode.label();
  r.omega = mode.omega();
  r.a_plus = c.a_plus;
  r.a_minus = c.a_minus;
  r.rate = c.a_minus - c.a_plus;
  r.coolable = geometry.coolable;
  r.eta_projected = geometry.eta_projected();
  r.cooling = geometry.coolable && c.a_minus > c.a_plus;
  if (r.cooling) {
    r.n_ss = c.a_plus / r.rate;
    r.time_constant = 1.0 / r.rate;
    r.lamb_dicke_check = r.eta_projected * std::sqrt(r.n_ss);
    r.deep_lamb_dicke = r.lamb_dicke_check < kDeepLambDickeLimit;
  } else {
    r.n_ss = r.time_constant = r.lamb_dicke_check = kNaN;
  }
  return r;
}

std::vector<CoolingReport> multimode_report(const SystemConfig& cfg, std::span<const TrapMode> modes,
                                            unsigned threads) {
  std::vector<CoolingReport> out(modes.size());
  parallel_for(modes.size(), threads, [&](std::size_t i) {
    const ModeGeometry g = lamb_dicke(modes[i], cfg.beams);
    out[i] = make_report(modes[i], g, cooling_coefficients(cfg, modes[i], g));
  });
  return out;
}

std::vector<SweepPoint> sweep_mode_frequency(const SystemConfig& cfg, const TrapMode& mode,
                                             std::span<const double> omegas, unsigned threads) {
  std::vector<SweepPoint> out(omegas.size());
  parallel_for(omegas.size(), threads, [&](std::size_t i) {
    out[i].value = omegas[i];
    try {
      const TrapMode m = mode.with_omega(omegas[i]);
      const ModeGeometry g = lamb_dicke(m, cfg.beams);
      out[i].report = make_report(m, g, cooling_coefficients(cfg, m, g));
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<SweepPoint> sweep_stark_shift(const SystemConfig& cfg, const TrapMode& mode,
                                          std::span<const double> shifts, unsigned threads) {
  const double d_sigma = coupling_detuning(cfg);
  const ModeGeometry g = lamb_dicke(mode, cfg.beams);
  std::vector<SweepPoint> out(shifts.size());
  parallel_for(shifts.size(), threads, [&](std::size_t i) {
    out[i].value = shifts[i];
    try {
      if (!(shifts[i] > 0.0)) throw InvalidArgument("sweep values must be positive");
      const SystemConfig c = with_coupling_rabi(cfg, coupling_for_target_shift(shifts[i], d_sigma));
      out[i].report = make_report(mode, g, cooling_coefficients(c, mode, g));
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<double> log_grid(double lo, double hi, double points_per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || !(points_per_decade > 0.0))
    throw InvalidArgument("log_grid: need 0 < lo <= hi and a positive density");
  const auto intervals =
      static_cast<std::size_t>(std::max(1.0, std::round(std::log10(hi / lo) * points_per_decade)));
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(intervals));
  grid.back() = hi;
  return grid;
}

}  // namespace eitcool
