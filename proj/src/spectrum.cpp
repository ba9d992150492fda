#include "eitcool/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eitcool/errors.hpp"
#include "eitcool/numerics.hpp"

namespace eitcool {

namespace {

double nominal_offset(const SystemConfig& cfg, Level lower, Level upper) {
  return transition_offset(zeeman_splitting(cfg.scheme, cfg.field), lower, upper);
}

const DipoleChannel& channel_of(const LevelScheme& scheme, Level lower, Level upper) {
  for (const auto& c : scheme.channels())
    if (c.lower == lower && c.upper == upper) return c;
  throw InvalidArgument("no dipole channel between the requested levels");
}

}  // namespace

double coupling_detuning(const SystemConfig& cfg) {
  return cfg.beams.coupling.detuning() - nominal_offset(cfg, Level::SMinus, Level::PPlus);
}

double cooling_detuning(const SystemConfig& cfg) {
  return cfg.beams.cooling.detuning() - nominal_offset(cfg, Level::SPlus, Level::PPlus);
}

double coupling_transition_rabi(const SystemConfig& cfg) {
  const auto frame = make_frame(cfg.field, cfg.beams.cooling.k_hat());
  const auto pol = decompose_polarization(cfg.beams.coupling, frame);
  const auto& ch = channel_of(cfg.scheme, Level::SMinus, Level::PPlus);
  return cfg.beams.coupling.rabi() * std::abs(ch.cg_amplitude) * std::abs(pol(+1));
}

SystemConfig with_cooling_detuning(SystemConfig cfg, double delta_pi) {
  const double offset = nominal_offset(cfg, Level::SPlus, Level::PPlus);
  cfg.beams.cooling = cfg.beams.cooling.with_detuning(delta_pi + offset);
  return cfg;
}

SystemConfig with_coupling_detuning(SystemConfig cfg, double delta_sigma) {
  const double offset = nominal_offset(cfg, Level::SMinus, Level::PPlus);
  cfg.beams.coupling = cfg.beams.coupling.with_detuning(delta_sigma + offset);
  return cfg;
}

SystemConfig with_coupling_rabi(SystemConfig cfg, double omega_sigma) {
  const auto frame = make_frame(cfg.field, cfg.beams.cooling.k_hat());
  const double weight = std::abs(decompose_polarization(cfg.beams.coupling, frame)(+1));
  if (weight < 1e-12) throw InvalidArgument("coupling beam has no sigma+ component");
  const auto& ch = channel_of(cfg.scheme, Level::SMinus, Level::PPlus);
  cfg.beams.coupling = cfg.beams.coupling.with_rabi(bare_rabi_for(ch, omega_sigma) / weight);
  return cfg;
}

SystemConfig with_cooling_rabi(SystemConfig cfg, double omega_pi) {
  const auto& ch = channel_of(cfg.scheme, Level::SPlus, Level::PPlus);
  cfg.beams.cooling = cfg.beams.cooling.with_rabi(bare_rabi_for(ch, omega_pi));
  return cfg;
}

double ac_stark_shift(double omega_sigma, double delta_sigma) {
  // Rationalized form of (sqrt(W^2 + D^2) - |D|) / 2; no cancellation at small W.
  const double root = std::hypot(omega_sigma, delta_sigma);
  if (root == 0.0) return 0.0;
  return 0.5 * omega_sigma * omega_sigma / (root + std::abs(delta_sigma));
}

double ac_stark_shift_approx(double omega_sigma, double delta_sigma) {
  if (delta_sigma == 0.0) throw InvalidArgument("ac_stark_shift_approx: delta_sigma must be nonzero");
  return omega_sigma * omega_sigma / (4.0 * delta_sigma);
}

double coupling_for_target_shift(double target_shift, double delta_sigma) {
  if (target_shift < 0.0) throw InvalidArgument("coupling_for_target_shift: shift must be >= 0");
  return 2.0 * std::sqrt(target_shift * (target_shift + std::abs(delta_sigma)));
}

double coupling_for_target_shift_approx(double target_shift, double delta_sigma) {
  if (target_shift < 0.0 || delta_sigma <= 0.0)
    throw InvalidArgument("coupling_for_target_shift_approx: needs shift >= 0, delta_sigma > 0");
  return 2.0 * std::sqrt(target_shift * delta_sigma);
}

DressedState dressed_state(double omega_sigma, double delta_sigma) {
  if (omega_sigma == 0.0 && delta_sigma == 0.0)
    throw InvalidArgument("dressed_state: omega_sigma and delta_sigma both zero");
  if (omega_sigma == 0.0) return {1.0, 0.0};
  const double two_delta = 2.0 * ac_stark_shift(omega_sigma, delta_sigma);
  const double norm = std::hypot(two_delta, omega_sigma);
  return {omega_sigma / norm, two_delta / norm};
}

Solution solve(const SystemConfig& cfg) {
  Solution s{build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant, cfg.beat_treatment), {}, {}};
  const Liouvillian L = build_liouvillian(s.system);
  if (!L.time_dependent()) {
    s.rho = steady_state(L);
    s.harmonic = Eigen::MatrixXcd::Zero(L.dim, L.dim);
    return s;
  }
  PeriodicState ps = cfg.periodic_method == PeriodicMethod::Fourier
                         ? periodic_steady_state_fourier(L, cfg.fourier_harmonics)
                         : periodic_steady_state(L, cfg.scheme.gamma(), cfg.periodic);
  s.rho = std::move(ps.average);
  s.harmonic = std::move(ps.harmonic);
  return s;
}

BeamRates absorption_rates(const Solution& s) {
  BeamRates rates;
  auto credit = [&](BeamRole beam, double r) {
    (beam == BeamRole::Cooling ? rates.cooling : rates.coupling) += r;
  };
  for (const auto& c : s.system.couplings) {
    Complex coherence;  // time average of e^{i residual t} rho_lu(t)
    if (c.residual == 0.0)
      coherence = s.rho(c.lower, c.upper);
    else if (c.residual > 0.0)
      coherence = std::conj(s.harmonic(c.upper, c.lower));
    else
      coherence = s.harmonic(c.lower, c.upper);
    credit(c.beam, std::imag(c.rabi * coherence));
  }
  for (const auto& p : s.system.pumps) {
    const double flow = p.rate * s.rho.population(p.from);
    const bool absorbing = !is_excited(s.system.levels[static_cast<std::size_t>(p.from)]);
    credit(p.beam, absorbing ? flow : -flow);
  }
  return rates;
}

double excited_population(const Solution& s) {
  double p = 0.0;
  for (int i : s.system.excited_indices()) p += s.rho.population(i);
  return p;
}

SpectrumSample scattering_rate(const SystemConfig& cfg, double delta_pi) {
  const Solution s = solve(with_cooling_detuning(cfg, delta_pi));
  const BeamRates r = absorption_rates(s);
  return {delta_pi, r.cooling, r.coupling, excited_population(s)};
}

std::vector<SpectrumSample> scan_spectrum(const SystemConfig& cfg, std::span<const double> detunings,
                                          unsigned threads) {
  std::vector<SpectrumSample> out(detunings.size());
  parallel_for(detunings.size(), threads,
               [&](std::size_t i) { out[i] = scattering_rate(cfg, detunings[i]); });
  return out;
}

FanoFeatures fano_features(const SystemConfig& cfg, double lo, double hi, std::size_t points) {
  if (!(hi > lo) || points < 5) throw InvalidArgument("fano_features: need hi > lo and >= 5 points");
  FanoFeatures f;
  // No coupling light, no interference: nothing to locate.
  if (coupling_transition_rabi(cfg) == 0.0) {
    f.degenerate = true;
    return f;
  }
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  std::vector<double> w(points);
  for (std::size_t i = 0; i < points; ++i) w[i] = scattering_rate(cfg, grid[i]).W;

  const auto [min_it, max_it] = std::minmax_element(w.begin(), w.end());
  const double w_max = *max_it;
  if (!(w_max > 0.0) || (w_max - *min_it) <= 1e-9 * w_max) {
    f.degenerate = true;
    return f;
  }
  const auto i_min = static_cast<std::size_t>(min_it - w.begin());
  const auto i_max = static_cast<std::size_t>(max_it - w.begin());
  if (i_min == 0 || i_min + 1 == points || i_max == 0 || i_max + 1 == points)
    throw InvalidArgument("fano_features: scan range does not bracket the dark point and bright peak");

  const double tol = 1e-4 * std::abs(grid[i_max] - grid[i_min]);
  auto W = [&](double x) { return scattering_rate(cfg, x).W; };
  const Minimum dark = golden_section_minimize(W, grid[i_min - 1], grid[i_min + 1], tol);
  const Minimum bright =
      golden_section_minimize([&](double x) { return -W(x); }, grid[i_max - 1], grid[i_max + 1], tol);
  f.dark_point = dark.x;
  f.W_dark = dark.value;
  f.bright_peak = bright.x;
  f.W_bright = -bright.value;
  f.stark_shift = f.bright_peak - f.dark_point;
  return f;
}

}  // namespace eitcool
