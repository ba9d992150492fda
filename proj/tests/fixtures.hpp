#pragma once

// Shared setups and independent reference computations for the tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "eitcool/constants.hpp"
#include "eitcool/cooling.hpp"
#include "eitcool/spectrum.hpp"

namespace fixtures {

using namespace eitcool;

inline double deg(double d) { return d * constants::kPi / 180.0; }
inline double mhz(double f) { return hz_to_angular(f * 1e6); }

// B along z, coupling beam along B and pure sigma+, cooling beam at
// `angle_deg` to the coupling beam in the x-z plane, linearly polarized in
// the (k, B) plane.
inline SystemConfig lab_config(double omega_sigma = mhz(21.4), double omega_pi = mhz(3.0),
                               double delta = mhz(70.0), Variant variant = Variant::FourLevelGeometry,
                               double angle_deg = 125.0) {
  const Vec3 z = Vec3::UnitZ();
  const Vec3 k_cool(std::sin(deg(angle_deg)), 0.0, std::cos(deg(angle_deg)));
  Vec3 eps = z - z.dot(k_cool) * k_cool;
  eps.normalize();
  const CVec3 sigma_plus = (Vec3::UnitX().cast<Complex>() + Complex(0, 1) * Vec3::UnitY().cast<Complex>()) / std::sqrt(2.0);
  const Beam coupling(BeamRole::Coupling, 1.0, 0.0, z, constants::kCaS12P12Wavelength, sigma_plus);
  const Beam cooling(BeamRole::Cooling, 1.0, 0.0, k_cool, constants::kCaS12P12Wavelength, eps.cast<Complex>());
  SystemConfig cfg{LevelScheme::calcium40(), MagneticField(4.4, z), BeamSet{coupling, cooling}};
  cfg.variant = variant;
  cfg = with_coupling_rabi(cfg, omega_sigma);
  cfg = with_cooling_rabi(cfg, omega_pi);
  cfg = with_coupling_detuning(cfg, delta);
  cfg = with_cooling_detuning(cfg, delta);
  return cfg;
}

inline TrapMode mode_along(const Vec3& axis, double omega_hz, std::string label = "m") {
  return TrapMode(std::move(label), hz_to_angular(omega_hz), axis.normalized(), constants::kCa40Mass);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Eigen::MatrixXcd random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  return 0.5 * (a + a.adjoint());
}

inline Eigen::MatrixXcd random_density(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Near-resonant static system whose slowest relaxation rate is at least
// 0.1 Gamma, so 200/Gamma of propagation settles to ~1e-9. Draws that
// relax more slowly are rejected: propagation is no oracle for them.
inline Liouvillian random_relaxing_liouvillian(std::mt19937_64& rng, Variant v) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double gamma = LevelScheme::calcium40().gamma();
  for (;;) {
    SystemConfig cfg = lab_config(mhz(10 + 30 * u(rng)), mhz(10 + 30 * u(rng)), mhz(-20 + 40 * u(rng)), v);
    cfg.field = MagneticField(1.0 + 9.0 * u(rng), Vec3::UnitZ());
    cfg = with_cooling_detuning(cfg, coupling_detuning(cfg) + mhz(-10 + 20 * u(rng)));
    Liouvillian L = build_liouvillian(build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant, cfg.beat_treatment));
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(L.static_part, false).eigenvalues();
    std::vector<double> rates;
    for (Eigen::Index i = 0; i < ev.size(); ++i) rates.push_back(-ev[i].real());
    std::sort(rates.begin(), rates.end());
    if (rates[1] >= 0.1 * gamma) return L;
  }
}

// --- oracles -------------------------------------------------------------

// Master-equation right-hand side evaluated with plain matrix products.
inline Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& h, const std::vector<Eigen::MatrixXcd>& jumps,
                                     const Eigen::MatrixXcd& rho) {
  const Complex i(0, 1);
  Eigen::MatrixXcd out = -i * (h * rho - rho * h);
  for (const auto& c : jumps) {
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
  }
  return out;
}

// Upper-state population of a driven two-level atom.
inline double two_level_population(double rabi, double detuning, double gamma) {
  const double s = rabi * rabi / 4.0;
  return s / (detuning * detuning + rabi * rabi / 2.0 + gamma * gamma / 4.0);
}

// Omega with ac_stark_shift(Omega, Delta) = target, by bisection on the
// untransformed formula.
inline double bisect_coupling(double target, double delta) {
  auto shift = [&](double w) { return 0.5 * (std::sqrt(w * w + delta * delta) - std::abs(delta)); };
  double lo = 0.0, hi = 1.0;
  while (shift(hi) < target) hi *= 2.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (shift(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Fixed-step classical RK4 for dn/dt = -(a_minus - a_plus) n + a_plus.
inline double rk4_rate_equation(double a_plus, double a_minus, double n0, double t) {
  const double rate = a_minus - a_plus;
  auto f = [&](double n) { return -rate * n + a_plus; };
  const std::size_t steps = static_cast<std::size_t>(std::ceil(std::max(1.0, std::abs(rate) * t) * 4000.0));
  const double h = t / static_cast<double>(steps);
  double n = n0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double k1 = f(n), k2 = f(n + 0.5 * h * k1), k3 = f(n + 0.5 * h * k2), k4 = f(n + h * k3);
    n += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return n;
}

// Four-point Lagrange interpolation on a uniform grid.
inline double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  const double h = x[1] - x[0];
  auto i = static_cast<std::ptrdiff_t>(std::floor((at - x[0]) / h)) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(x.size()) - 4);
  double sum = 0.0;
  for (std::ptrdiff_t a = i; a < i + 4; ++a) {
    double w = 1.0;
    for (std::ptrdiff_t b = i; b < i + 4; ++b)
      if (b != a) w *= (at - x[static_cast<std::size_t>(b)]) / (x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)]);
    sum += w * y[static_cast<std::size_t>(a)];
  }
  return sum;
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace fixtures
