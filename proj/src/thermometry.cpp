#include "eitcool/thermometry.hpp"

#include <algorithm>
#include <cmath>

#include "eitcool/errors.hpp"
#include "eitcool/numerics.hpp"

namespace eitcool {

namespace {

void check_n_bar(double n_bar) {
  if (!(n_bar >= 0.0) || !std::isfinite(n_bar))
    throw InvalidArgument("mean occupation must be finite and >= 0");
}

// Smallest n with cumulative weight 1 - ratio^(n + 1) >= 1 - 1e-6.
std::size_t adequate_cutoff(double n_bar) {
  check_n_bar(n_bar);
  if (n_bar == 0.0) return 0;
  const double ratio = n_bar / (n_bar + 1.0);
  double tail = ratio;
  std::size_t n = 0;
  while (tail > ThermalState::kTailTolerance) {
    tail *= ratio;
    ++n;
  }
  return n;
}

// Rabi frequency of the n -> n +- 1 (or n -> n) component.
std::vector<double> fock_rabi(std::size_t cutoff, double eta, double omega0, Sideband sideband) {
  std::vector<double> out(cutoff + 1);
  if (sideband == Sideband::Carrier) {
    const double x = eta * eta;
    const double debye_waller = std::exp(-0.5 * x);
    double prev = 1.0, cur = 1.0 - x;
    for (std::size_t n = 0; n <= cutoff; ++n) {
      double laguerre;
      if (n == 0) {
        laguerre = 1.0;
      } else if (n == 1) {
        laguerre = cur;
      } else {
        const double k = static_cast<double>(n - 1);
        const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
        laguerre = cur;
      }
      out[n] = omega0 * debye_waller * laguerre;
    }
    return out;
  }
  for (std::size_t n = 0; n <= cutoff; ++n) {
    const double quanta = sideband == Sideband::Blue ? static_cast<double>(n + 1) : static_cast<double>(n);
    out[n] = omega0 * eta * std::sqrt(quanta);
  }
  return out;
}

// cos(Omega_n t_i) e^{-decay t_i}, laid out row n, column i.
struct FlopTable {
  std::size_t cutoff;
  std::size_t samples;
  std::vector<double> damped_cos;
  std::vector<double> damping;

  FlopTable(std::size_t cutoff_, double eta, double omega0, Sideband sideband,
            std::span<const double> times, double decay)
      : cutoff(cutoff_), samples(times.size()), damped_cos((cutoff_ + 1) * times.size()),
        damping(times.size()) {
    const auto rabi = fock_rabi(cutoff, eta, omega0, sideband);
    for (std::size_t i = 0; i < samples; ++i) damping[i] = std::exp(-decay * times[i]);
    for (std::size_t n = 0; n <= cutoff; ++n)
      for (std::size_t i = 0; i < samples; ++i)
        damped_cos[n * samples + i] = damping[i] * std::cos(rabi[n] * times[i]);
  }

  // Excitation for every sample; terms past the table are dropped.
  void evaluate(double n_bar, std::size_t top, std::vector<double>& out) const {
    out.assign(samples, 0.0);
    top = std::min(cutoff, top);
    const double ratio = n_bar / (n_bar + 1.0);
    double p = 1.0 / (n_bar + 1.0);
    // Red sideband: the n = 0 term has Omega = 0 and contributes cos(0) = 1,
    // i.e. no excitation, which the generic formula already encodes.
    for (std::size_t n = 0; n <= top && p > 0.0; ++n, p *= ratio) {
      const double* row = &damped_cos[n * samples];
      for (std::size_t i = 0; i < samples; ++i) out[i] += 0.5 * p * (1.0 - row[i]);
    }
  }
};

}  // namespace

std::string_view to_string(Sideband s) {
  switch (s) {
    case Sideband::Red: return "red";
    case Sideband::Blue: return "blue";
    case Sideband::Carrier: return "carrier";
  }
  return "?";
}

std::size_t ThermalState::default_cutoff(double n_bar) { return std::min(adequate_cutoff(n_bar), kMaxCutoff); }

ThermalState::ThermalState(double n_bar) : ThermalState(n_bar, default_cutoff(n_bar)) {}

ThermalState::ThermalState(double n_bar, std::size_t cutoff) : n_bar_(n_bar), cutoff_(cutoff) {
  check_n_bar(n_bar);
  if (retained_weight() < 1.0 - kTailTolerance * (1.0 + 1e-9))
    throw InvalidArgument("ThermalState: cutoff " + std::to_string(cutoff) +
                          " retains less than 1 - 1e-6 of the thermal weight");
}

double ThermalState::probability(std::size_t n) const {
  if (n > cutoff_) return 0.0;
  if (n_bar_ == 0.0) return n == 0 ? 1.0 : 0.0;
  const double ratio = n_bar_ / (n_bar_ + 1.0);
  return std::pow(ratio, static_cast<double>(n)) / (n_bar_ + 1.0);
}

double ThermalState::retained_weight() const {
  if (n_bar_ == 0.0) return 1.0;
  const double ratio = n_bar_ / (n_bar_ + 1.0);
  return -std::expm1(static_cast<double>(cutoff_ + 1) * std::log(ratio));
}

FlopRecord sideband_flops(const ThermalState& state, double eta_probe, double omega0,
                          Sideband sideband, std::span<const double> times, double decay_rate) {
  if (!(eta_probe >= 0.0) || !(omega0 >= 0.0) || !(decay_rate >= 0.0))
    throw InvalidArgument("sideband_flops: eta, omega0 and decay rate must be >= 0");
  if (eta_probe * std::sqrt(static_cast<double>(state.cutoff())) >= 0.5)
    throw InvalidArgument("sideband_flops: eta sqrt(cutoff) >= 0.5, outside the Lamb-Dicke regime");
  FlopRecord rec;
  rec.sideband = sideband;
  rec.times.assign(times.begin(), times.end());
  FlopTable table(state.cutoff(), eta_probe, omega0, sideband, times, decay_rate);
  table.evaluate(state.n_bar(), state.cutoff(), rec.excitation);
  return rec;
}

ThermalFit fit_thermal(const FlopRecord& record, double eta_probe, double omega0, double decay_rate) {
  if (record.times.size() != record.excitation.size() || record.times.empty())
    throw InvalidArgument("fit_thermal: record needs matching, non-empty time and excitation lists");
  // The model is not subject to the ThermalState cap: it must stay
  // normalized up to the top of the bracket.
  const FlopTable table(adequate_cutoff(kFitUpperBound), eta_probe, omega0, record.sideband, record.times,
                        decay_rate);
  std::vector<double> model;
  auto objective = [&](double u) {
    const double n_bar = std::expm1(std::max(u, 0.0));
    table.evaluate(n_bar, adequate_cutoff(n_bar), model);
    double ss = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      const double d = model[i] - record.excitation[i];
      ss += d * d;
    }
    return ss;
  };

  // Coarse scan in u = ln(1 + n_bar), then golden-section refinement.
  constexpr std::size_t kGrid = 400;
  const double u_max = std::log1p(kFitUpperBound);
  std::size_t best = 0;
  double best_value = objective(0.0);
  for (std::size_t i = 1; i <= kGrid; ++i) {
    const double v = objective(u_max * static_cast<double>(i) / kGrid);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == kGrid)
    throw ConvergenceError("fit_thermal: best fit sits at the upper bound n_bar = 1e3 (not bracketed)");
  const double step = u_max / kGrid;
  const double lo = best == 0 ? 0.0 : (static_cast<double>(best) - 1.0) * step;
  const double hi = (static_cast<double>(best) + 1.0) * step;
  const Minimum m = golden_section_minimize(objective, lo, hi, 1e-13);
  if (m.value > best_value) return {std::expm1(static_cast<double>(best) * step), best_value};
  return {std::expm1(m.x), m.value};
}

double time_averaged_excitation(const ThermalState& state, Sideband sideband) {
  double coupled = 0.0;
  for (std::size_t n = (sideband == Sideband::Red ? 1 : 0); n <= state.cutoff(); ++n)
    coupled += state.probability(n);
  return 0.5 * coupled;
}

double sideband_ratio_n(double p_red, double p_blue) {
  if (!(p_red >= 0.0) || !(p_blue <= 1.0))
    throw InvalidArgument("sideband_ratio_n: probabilities must lie in [0, 1]");
  if (!(p_red < p_blue))
    throw InvalidArgument("sideband_ratio_n: P_red >= P_blue, the state is not thermal or not in "
                          "the Lamb-Dicke regime");
  const double r = p_red / p_blue;
  return r / (1.0 - r);
}

double ground_state_probability(double n_bar) {
  check_n_bar(n_bar);
  return 1.0 / (1.0 + n_bar);
}

}  // namespace eitcool
