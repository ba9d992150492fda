#include "eitcool/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "eitcool/constants.hpp"
#include "eitcool/numerics.hpp"
#include "eitcool/thermometry.hpp"

namespace eitcool {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void invalid(const ConfigFile& cfg, std::string_view key, const std::string& what) {
  throw ConfigError(cfg.name() + ": " + std::string(key) + ": " + what, std::string(key));
}

double required(const ConfigFile& cfg, std::string_view key) {
  if (!cfg.has(key)) invalid(cfg, key, "missing required key for task " + cfg.text_value("task"));
  return cfg.number(key);
}

double positive(const ConfigFile& cfg, std::string_view key) {
  const double v = required(cfg, key);
  if (!(v > 0.0) || !std::isfinite(v)) invalid(cfg, key, "must be a positive finite number");
  return v;
}

double angle(const ConfigFile& cfg, std::string_view key) {
  const double v = required(cfg, key);
  if (!(v >= 0.0 && v <= 180.0)) invalid(cfg, key, "angle must lie in [0, 180] degrees");
  return v * constants::kPi / 180.0;
}

std::size_t count(const ConfigFile& cfg, std::string_view key, std::size_t minimum) {
  const double v = required(cfg, key);
  if (!(v >= static_cast<double>(minimum)) || v != std::floor(v) || v > 1e7)
    invalid(cfg, key, "must be an integer >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

Task parse_task(const ConfigFile& cfg) {
  const std::string t = cfg.text_value("task");
  static constexpr std::array<Task, 6> all = {Task::Spectrum, Task::SweepOmega, Task::SweepDelta,
                                              Task::Dynamics, Task::Multimode, Task::Thermometry};
  for (Task k : all)
    if (to_string(k) == t) return k;
  invalid(cfg, "task", "unknown task '" + t + "'");
}

Variant variant_of(const ConfigFile& cfg, std::string_view key, const std::string& text) {
  if (auto v = parse_variant(text)) return *v;
  invalid(cfg, key, "unknown variant '" + text + "'");
}

std::string hz_text(double angular) { return format_double(angular_to_hz(angular)); }

void check_mode_label(const ConfigFile& cfg, std::string_view key, const std::string& label) {
  if (label != "x" && label != "y" && label != "z") invalid(cfg, key, "mode must be x, y or z, got '" + label + "'");
}

struct Range {
  double lo;
  double hi;
};

Range range(const ConfigFile& cfg, std::string_view lo_key, std::string_view hi_key) {
  const Range r{hz_to_angular(positive(cfg, lo_key)), hz_to_angular(positive(cfg, hi_key))};
  if (!(r.hi > r.lo)) invalid(cfg, hi_key, "must exceed " + std::string(lo_key));
  return r;
}

struct ThermometryPlan {
  std::vector<double> n_bars;
  double eta;
  double omega0;
  std::vector<double> times;
  double decay;
  Sideband sideband;
};

ThermometryPlan thermometry_plan(const ConfigFile& cfg) {
  ThermometryPlan p;
  p.n_bars = cfg.number_list("thermometry.n_bar");
  for (double n : p.n_bars)
    if (!(n >= 0.0) || !(n <= kFitUpperBound)) invalid(cfg, "thermometry.n_bar", "values must lie in [0, 1e3]");
  p.eta = positive(cfg, "thermometry.eta_probe");
  p.omega0 = hz_to_angular(positive(cfg, "thermometry.rabi_hz"));
  const double t_stop = positive(cfg, "thermometry.t_stop_s");
  const std::size_t points = count(cfg, "thermometry.points", 2);
  p.decay = cfg.number("thermometry.decay_rate_per_s");
  if (!(p.decay >= 0.0)) invalid(cfg, "thermometry.decay_rate_per_s", "must be >= 0");
  const std::string sb = cfg.text_value("thermometry.sideband");
  if (sb == "blue") p.sideband = Sideband::Blue;
  else if (sb == "red") p.sideband = Sideband::Red;
  else if (sb == "carrier") p.sideband = Sideband::Carrier;
  else invalid(cfg, "thermometry.sideband", "must be blue, red or carrier");
  p.times.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    p.times[i] = t_stop * static_cast<double>(i) / static_cast<double>(points - 1);
  for (double n : p.n_bars) {
    const std::size_t cutoff = ThermalState::default_cutoff(n);
    if (p.eta * std::sqrt(static_cast<double>(cutoff)) >= 0.5)
      invalid(cfg, "thermometry.eta_probe",
              "eta sqrt(cutoff) >= 0.5 for n_bar = " + format_double(n) + " (outside the Lamb-Dicke regime)");
  }
  return p;
}

// ---- CSV assembly ------------------------------------------------------

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string render(const std::vector<std::string>& comments) const {
    std::ostringstream os;
    for (const auto& c : comments) os << "# " << c << '\n';
    write_row(os, columns_);
    for (const auto& r : rows_) write_row(os, r);
    return os.str();
  }

 private:
  static void write_row(std::ostream& os, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double v) { return format_double(v); }

std::string status_of(const CoolingReport& r) {
  if (!r.coolable) return "uncoolable";
  return r.cooling ? "ok" : "no-cooling";
}

struct Context {
  const ConfigFile& cfg;
  unsigned threads;
  std::ostream* log;
  std::vector<std::string> summary;
  std::vector<std::string> failures;

  void note(const std::string& s) {
    if (log) *log << s << '\n';
  }
};

// ---- tasks -------------------------------------------------------------

Table run_spectrum(const Experiment& ex, Context& ctx) {
  const Range r = range(ctx.cfg, "spectrum.start_hz", "spectrum.stop_hz");
  const std::size_t points = count(ctx.cfg, "spectrum.points", 2);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(points - 1);

  std::vector<std::optional<SpectrumSample>> samples(points);
  std::vector<std::string> errors(points);
  ctx.note("spectrum: " + std::to_string(points) + " points");
  parallel_for(points, ctx.threads, [&](std::size_t i) {
    try {
      samples[i] = scattering_rate(ex.system, grid[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  Table t({"detuning_pi_Hz", "W_cooling_per_s", "W_coupling_per_s", "rho_P_total", "status"});
  std::optional<std::size_t> lo, hi;
  for (std::size_t i = 0; i < points; ++i) {
    if (!samples[i]) {
      t.add({hz_text(grid[i]), "nan", "nan", "nan", "FAILED"});
      ctx.failures.push_back("detuning_pi_Hz=" + hz_text(grid[i]) + ": " + errors[i]);
      continue;
    }
    const auto& s = *samples[i];
    t.add({hz_text(grid[i]), num(s.W), num(s.W_coupling), num(s.rho_P_total), "ok"});
    if (!lo || s.W < samples[*lo]->W) lo = i;
    if (!hi || s.W > samples[*hi]->W) hi = i;
  }
  if (lo && hi) {
    ctx.summary.push_back("grid_min_W_at_detuning_pi_Hz = " + hz_text(grid[*lo]));
    ctx.summary.push_back("grid_max_W_at_detuning_pi_Hz = " + hz_text(grid[*hi]));
    ctx.summary.push_back("min_over_max_W = " + num(samples[*lo]->W / samples[*hi]->W));
  }
  return t;
}

Table run_sweep_omega(const Experiment& ex, Context& ctx) {
  const Range r = range(ctx.cfg, "sweep.start_hz", "sweep.stop_hz");
  const double ppd = positive(ctx.cfg, "sweep.points_per_decade");
  const std::vector<double> grid = log_grid(r.lo, r.hi, ppd);
  const std::string label = ctx.cfg.text_value("sweep.mode");
  const TrapMode& mode = ex.mode(label);

  std::vector<Variant> variants;
  if (ctx.cfg.has("sweep.variants"))
    for (const auto& v : ctx.cfg.text_list("sweep.variants")) variants.push_back(variant_of(ctx.cfg, "sweep.variants", v));
  else
    variants.push_back(ex.system.variant);

  const std::size_t n = grid.size();
  std::vector<SweepPoint> points(variants.size() * n);
  ctx.note("sweep-omega: " + std::to_string(variants.size()) + " variants x " + std::to_string(n) + " points");
  parallel_for(points.size(), ctx.threads, [&](std::size_t k) {
    SystemConfig sys = ex.system;
    sys.variant = variants[k / n];
    points[k] = sweep_mode_frequency(sys, mode, std::span<const double>(&grid[k % n], 1), 1).front();
  });

  Table t({"variant", "omega_Hz", "n_ss", "A_plus_per_s", "A_minus_per_s", "status"});
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const std::string name(to_string(variants[v]));
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
      const SweepPoint& p = points[v * n + i];
      if (!p.report) {
        t.add({name, hz_text(p.value), "nan", "nan", "nan", "FAILED"});
        ctx.failures.push_back(name + " omega_Hz=" + hz_text(p.value) + ": " + p.error);
        continue;
      }
      const CoolingReport& c = *p.report;
      t.add({name, hz_text(p.value), num(c.n_ss), num(c.a_plus), num(c.a_minus), status_of(c)});
      if (c.cooling && (!best || c.n_ss < points[v * n + *best].report->n_ss)) best = i;
    }
    if (best)
      ctx.summary.push_back(name + ".min_n_ss = " + num(points[v * n + *best].report->n_ss) + " at omega_Hz = " +
                            hz_text(grid[*best]));
  }
  return t;
}

Table run_sweep_delta(const Experiment& ex, Context& ctx) {
  const Range r = range(ctx.cfg, "sweep.start_hz", "sweep.stop_hz");
  const double ppd = positive(ctx.cfg, "sweep.points_per_decade");
  const std::vector<double> grid = log_grid(r.lo, r.hi, ppd);
  const TrapMode& mode = ex.mode(ctx.cfg.text_value("sweep.mode"));
  ctx.note("sweep-delta: " + std::to_string(grid.size()) + " points");
  const auto points = sweep_stark_shift(ex.system, mode, grid, ctx.threads);
  const double d_sigma = coupling_detuning(ex.system);

  Table t({"delta_Hz", "n_ss", "A_plus_per_s", "A_minus_per_s", "coupling_rabi_Hz", "status"});
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    const std::string rabi = hz_text(coupling_for_target_shift(p.value, d_sigma));
    if (!p.report) {
      t.add({hz_text(p.value), "nan", "nan", "nan", rabi, "FAILED"});
      ctx.failures.push_back("delta_Hz=" + hz_text(p.value) + ": " + p.error);
      continue;
    }
    const CoolingReport& c = *p.report;
    t.add({hz_text(p.value), num(c.n_ss), num(c.a_plus), num(c.a_minus), rabi, status_of(c)});
    if (c.cooling && (!best || c.n_ss < points[*best].report->n_ss)) best = i;
  }
  if (best)
    ctx.summary.push_back("min_n_ss = " + num(points[*best].report->n_ss) + " at delta_Hz = " +
                          hz_text(grid[*best]));
  return t;
}

Table run_dynamics(const Experiment& ex, Context& ctx) {
  const std::string label = ctx.cfg.text_value("dynamics.mode");
  const TrapMode& mode = ex.mode(label);
  const double n0 = ctx.cfg.number("dynamics.n0");
  if (!(n0 >= 0.0)) invalid(ctx.cfg, "dynamics.n0", "must be >= 0");
  const double t_stop = positive(ctx.cfg, "dynamics.t_stop_s");
  const std::size_t points = count(ctx.cfg, "dynamics.points", 2);

  ctx.note("dynamics: cooling coefficients for mode " + label);
  const ModeGeometry g = lamb_dicke(mode, ex.system.beams);
  const CoolingReport rep = make_report(mode, g, cooling_coefficients(ex.system, mode, g));
  ctx.summary.push_back("mode = " + label);
  ctx.summary.push_back("A_plus_per_s = " + num(rep.a_plus));
  ctx.summary.push_back("A_minus_per_s = " + num(rep.a_minus));
  ctx.summary.push_back("n_ss = " + num(rep.n_ss));
  ctx.summary.push_back("time_constant_s = " + num(rep.time_constant));
  ctx.summary.push_back("status = " + status_of(rep));

  Table t({"t_s", "n_mean", "p0"});
  for (std::size_t i = 0; i < points; ++i) {
    const double time = t_stop * static_cast<double>(i) / static_cast<double>(points - 1);
    const double n = evolve_n(rep.a_plus, rep.a_minus, n0, time);
    t.add({num(time), num(n), num(ground_state_probability(n))});
  }
  return t;
}

Table run_multimode(const Experiment& ex, Context& ctx) {
  std::vector<TrapMode> modes;
  for (const auto& label : ctx.cfg.text_list("multimode.modes")) {
    check_mode_label(ctx.cfg, "multimode.modes", label);
    modes.push_back(ex.mode(label));
  }
  ctx.note("multimode: " + std::to_string(modes.size()) + " modes");
  Table t({"mode", "omega_Hz", "eta_projected", "A_plus_per_s", "A_minus_per_s", "cooling_rate_per_s", "n_ss",
           "time_constant_s", "eta_sqrt_n_ss", "deep_lamb_dicke", "status"});
  std::vector<CoolingReport> reports;
  try {
    reports = multimode_report(ex.system, modes, ctx.threads);
  } catch (const std::exception& e) {
    for (const auto& m : modes) {
      t.add({m.label(), hz_text(m.omega()), "nan", "nan", "nan", "nan", "nan", "nan", "nan", "false", "FAILED"});
      ctx.failures.push_back("mode " + m.label() + ": " + e.what());
    }
    return t;
  }
  for (const auto& r : reports)
    t.add({r.label, hz_text(r.omega), num(r.eta_projected), num(r.a_plus), num(r.a_minus), num(r.rate),
           num(r.n_ss), num(r.time_constant), num(r.lamb_dicke_check), r.deep_lamb_dicke ? "true" : "false",
           status_of(r)});
  return t;
}

Table run_thermometry(Context& ctx) {
  const ThermometryPlan p = thermometry_plan(ctx.cfg);
  struct Row {
    double fit = kNaN, residual = kNaN, ratio = kNaN;
    std::string error;
  };
  std::vector<Row> rows(p.n_bars.size());
  ctx.note("thermometry: " + std::to_string(rows.size()) + " round trips");
  parallel_for(rows.size(), ctx.threads, [&](std::size_t i) {
    try {
      const ThermalState state(p.n_bars[i]);
      const FlopRecord rec = sideband_flops(state, p.eta, p.omega0, p.sideband, p.times, p.decay);
      const ThermalFit fit = fit_thermal(rec, p.eta, p.omega0, p.decay);
      rows[i].fit = fit.n_bar;
      rows[i].residual = fit.residual;
      rows[i].ratio = sideband_ratio_n(time_averaged_excitation(state, Sideband::Red),
                                       time_averaged_excitation(state, Sideband::Blue));
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  Table t({"n_bar", "n_fit", "fit_residual", "n_ratio", "p0", "status"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const bool ok = r.error.empty();
    if (!ok) ctx.failures.push_back("n_bar=" + num(p.n_bars[i]) + ": " + r.error);
    t.add({num(p.n_bars[i]), num(r.fit), num(r.residual), num(r.ratio), num(ground_state_probability(p.n_bars[i])),
           ok ? "ok" : "FAILED"});
  }
  return t;
}

std::string config_label(const ConfigFile& cfg) {
  return std::filesystem::path(cfg.name()).filename().string();
}

std::string hash_text(const ConfigFile& cfg) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(cfg.text());
  return os.str();
}

}  // namespace

std::string_view to_string(Task t) {
  switch (t) {
    case Task::Spectrum: return "spectrum";
    case Task::SweepOmega: return "sweep-omega";
    case Task::SweepDelta: return "sweep-delta";
    case Task::Dynamics: return "dynamics";
    case Task::Multimode: return "multimode";
    case Task::Thermometry: return "thermometry";
  }
  return "?";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const TrapMode& Experiment::mode(std::string_view label) const {
  for (const auto& m : modes)
    if (m.label() == label) return m;
  throw InvalidArgument("no trap mode labelled '" + std::string(label) + "'");
}

Experiment make_experiment(const ConfigFile& cfg) {
  const double mass = positive(cfg, "ion.mass_amu") * constants::kAtomicMassUnit;
  const double wavelength = positive(cfg, "ion.wavelength_m");
  const double gamma = hz_to_angular(positive(cfg, "ion.gamma_hz"));
  const double g_s = positive(cfg, "ion.lande_g_s");
  const double g_p = positive(cfg, "ion.lande_g_p");
  const double branching = cfg.number("ion.branching_pd");
  if (!(branching >= 0.0)) invalid(cfg, "ion.branching_pd", "must be >= 0");
  const LevelScheme scheme(g_s, g_p, gamma, branching);

  // delta k direction from the three mode angles.
  Vec3 d(std::cos(angle(cfg, "geometry.phi_x_deg")), std::cos(angle(cfg, "geometry.phi_y_deg")),
         std::cos(angle(cfg, "geometry.phi_z_deg")));
  if (std::abs(d.norm() - 1.0) > 0.05)
    invalid(cfg, "geometry.phi_x_deg",
            "direction cosines (phi_x, phi_y, phi_z) have norm " + format_double(d.norm()) + ", more than 5% from 1");
  d.normalize();
  Vec3 p = Vec3::UnitZ() - d.z() * d;
  if (p.norm() < 1e-6) p = Vec3::UnitX() - d.x() * d;
  p.normalize();
  const double half = 0.5 * angle(cfg, "geometry.beam_angle_deg");
  if (std::sin(half) < 1e-9 || std::cos(half) < 1e-9)
    invalid(cfg, "geometry.beam_angle_deg", "beams must not be parallel or antiparallel (no polarization frame)");
  const Vec3 k_cool = std::sin(half) * d + std::cos(half) * p;
  const Vec3 k_coupling = -std::sin(half) * d + std::cos(half) * p;

  const MagneticField field(positive(cfg, "field.b_gauss"), k_coupling);
  const SphericalFrame frame = make_frame(field, k_cool);
  const CVec3 sigma_plus = (frame.x.cast<Complex>() + Complex(0.0, 1.0) * frame.y.cast<Complex>()) / std::sqrt(2.0);

  const std::string pol = cfg.text_value("beams.cooling.polarization");
  Vec3 eps;
  if (pol == "in-plane") eps = field.direction() - field.direction().dot(k_cool) * k_cool;
  else if (pol == "normal") eps = k_cool.cross(field.direction());
  else invalid(cfg, "beams.cooling.polarization", "must be in-plane or normal");
  eps.normalize();

  const Beam coupling(BeamRole::Coupling, 1.0, 0.0, k_coupling, wavelength, sigma_plus);
  const Beam cooling(BeamRole::Cooling, 1.0, 0.0, k_cool, wavelength, eps.cast<Complex>());

  Experiment ex{SystemConfig{scheme, field, BeamSet{coupling, cooling}}, {
                    TrapMode("x", hz_to_angular(positive(cfg, "trap.omega_x_hz")), Vec3::UnitX(), mass),
                    TrapMode("y", hz_to_angular(positive(cfg, "trap.omega_y_hz")), Vec3::UnitY(), mass),
                    TrapMode("z", hz_to_angular(positive(cfg, "trap.omega_z_hz")), Vec3::UnitZ(), mass)},
                0.0, 0.0, {}};
  check_orthogonal_axes(ex.modes);

  SystemConfig& sys = ex.system;
  sys.variant = variant_of(cfg, "model.variant", cfg.text_value("model.variant"));
  const std::string beat = cfg.text_value("model.beat_treatment");
  if (beat == "periodic") sys.beat_treatment = BeatTreatment::Periodic;
  else if (beat == "static") sys.beat_treatment = BeatTreatment::StaticApprox;
  else invalid(cfg, "model.beat_treatment", "must be periodic or static");
  const std::string method = cfg.text_value("solver.periodic_method");
  if (method == "fourier") sys.periodic_method = PeriodicMethod::Fourier;
  else if (method == "propagation") sys.periodic_method = PeriodicMethod::Propagation;
  else invalid(cfg, "solver.periodic_method", "must be fourier or propagation");
  sys.fourier_harmonics = static_cast<int>(count(cfg, "solver.fourier_harmonics", 1));
  sys.periodic.relaxation_gamma_times = positive(cfg, "solver.relaxation_lifetimes");
  sys.periodic.drift_tolerance = positive(cfg, "solver.drift_tolerance");
  sys.periodic.max_periods = count(cfg, "solver.max_beat_periods", 1);

  const double d_sigma = hz_to_angular(positive(cfg, "beams.coupling.detuning_hz"));
  const bool has_rabi = cfg.has("beams.coupling.rabi_hz");
  if (has_rabi == cfg.has("beams.coupling.stark_shift_hz"))
    invalid(cfg, "beams.coupling.rabi_hz", "set exactly one of beams.coupling.rabi_hz and beams.coupling.stark_shift_hz");
  if (has_rabi) {
    ex.coupling_rabi = hz_to_angular(positive(cfg, "beams.coupling.rabi_hz"));
  } else {
    ex.coupling_rabi = coupling_for_target_shift(hz_to_angular(positive(cfg, "beams.coupling.stark_shift_hz")), d_sigma);
    ex.derived.push_back({"beams.coupling.rabi_hz", hz_text(ex.coupling_rabi), ValueSource::Derived});
  }

  double d_pi = d_sigma;
  if (cfg.has("beams.cooling.detuning_hz"))
    d_pi = hz_to_angular(positive(cfg, "beams.cooling.detuning_hz"));
  else
    ex.derived.push_back({"beams.cooling.detuning_hz", hz_text(d_pi), ValueSource::Derived});

  const bool has_pi = cfg.has("beams.cooling.rabi_hz");
  if (has_pi == cfg.has("beams.cooling.intensity_ratio"))
    invalid(cfg, "beams.cooling.rabi_hz", "set exactly one of beams.cooling.rabi_hz and beams.cooling.intensity_ratio");
  if (has_pi) {
    ex.cooling_rabi = hz_to_angular(positive(cfg, "beams.cooling.rabi_hz"));
  } else {
    ex.cooling_rabi = ex.coupling_rabi / std::sqrt(positive(cfg, "beams.cooling.intensity_ratio"));
    ex.derived.push_back({"beams.cooling.rabi_hz", hz_text(ex.cooling_rabi), ValueSource::Derived});
  }

  sys = with_coupling_rabi(sys, ex.coupling_rabi);
  sys = with_cooling_rabi(sys, ex.cooling_rabi);
  sys = with_coupling_detuning(sys, d_sigma);
  sys = with_cooling_detuning(sys, d_pi);
  ex.derived.push_back({"derived.stark_shift_hz", hz_text(ac_stark_shift(ex.coupling_rabi, d_sigma)), ValueSource::Derived});
  for (const auto& m : ex.modes) {
    const ModeGeometry g = lamb_dicke(m, sys.beams);
    ex.derived.push_back({"derived.eta_total_" + m.label(), format_double(g.eta_total), ValueSource::Derived});
    ex.derived.push_back({"derived.cos_phi_" + m.label(), format_double(g.cos_phi), ValueSource::Derived});
  }
  return ex;
}

void validate(const ConfigFile& cfg) {
  const Task task = parse_task(cfg);
  if (task == Task::Thermometry) {
    thermometry_plan(cfg);
    return;
  }
  const Experiment ex = make_experiment(cfg);
  switch (task) {
    case Task::Spectrum:
      range(cfg, "spectrum.start_hz", "spectrum.stop_hz");
      count(cfg, "spectrum.points", 2);
      break;
    case Task::SweepOmega:
    case Task::SweepDelta:
      range(cfg, "sweep.start_hz", "sweep.stop_hz");
      positive(cfg, "sweep.points_per_decade");
      check_mode_label(cfg, "sweep.mode", cfg.text_value("sweep.mode"));
      if (cfg.has("sweep.variants"))
        for (const auto& v : cfg.text_list("sweep.variants")) variant_of(cfg, "sweep.variants", v);
      if (std::abs(cooling_detuning(ex.system) - coupling_detuning(ex.system)) > 1e-9 * coupling_detuning(ex.system))
        invalid(cfg, "beams.cooling.detuning_hz", "sweeps need Delta_pi = Delta_sigma");
      break;
    case Task::Dynamics:
      check_mode_label(cfg, "dynamics.mode", cfg.text_value("dynamics.mode"));
      if (!(cfg.number("dynamics.n0") >= 0.0)) invalid(cfg, "dynamics.n0", "must be >= 0");
      positive(cfg, "dynamics.t_stop_s");
      count(cfg, "dynamics.points", 2);
      break;
    case Task::Multimode:
      for (const auto& label : cfg.text_list("multimode.modes")) check_mode_label(cfg, "multimode.modes", label);
      break;
    case Task::Thermometry:
      break;
  }
}

ConfigFile load_config(const std::filesystem::path& path) {
  ConfigFile cfg = ConfigFile::load(path);
  validate(cfg);
  return cfg;
}

RunOutput run_task(const ConfigFile& cfg, unsigned threads, std::ostream* log) {
  validate(cfg);
  const Task task = parse_task(cfg);
  Context ctx{cfg, std::max(1u, threads), log, {}, {}};

  std::optional<Experiment> ex;
  if (task != Task::Thermometry) ex = make_experiment(cfg);

  const Table table = [&] {
    switch (task) {
      case Task::Spectrum: return run_spectrum(*ex, ctx);
      case Task::SweepOmega: return run_sweep_omega(*ex, ctx);
      case Task::SweepDelta: return run_sweep_delta(*ex, ctx);
      case Task::Dynamics: return run_dynamics(*ex, ctx);
      case Task::Multimode: return run_multimode(*ex, ctx);
      case Task::Thermometry: return run_thermometry(ctx);
    }
    throw Error("unreachable task");
  }();

  RunOutput out;
  out.stem = cfg.has("output.name") ? cfg.text_value("output.name")
                                    : std::filesystem::path(cfg.name()).stem().string();
  const std::string hash = hash_text(cfg);
  out.csv = table.render({"eitcool " + std::string(kVersion) + " task " + std::string(to_string(task)),
                          "config " + config_label(cfg) + " fnv1a64 " + hash,
                          "constants " + std::string(constants::kTableVersion)});

  std::ostringstream meta;
  meta << "# provenance for " << out.stem << ".csv\n"
       << "eitcool_version = " << kVersion << '\n'
       << "config = " << config_label(cfg) << '\n'
       << "config_fnv1a64 = " << hash << '\n'
       << "constants = " << constants::kTableVersion << '\n'
       << "task = " << to_string(task) << '\n'
       << "\n[resolved]  # key = value ; source\n";
  for (const auto& e : cfg.provenance()) meta << e.key << " = " << e.value << " ; " << to_string(e.source) << '\n';
  if (ex)
    for (const auto& e : ex->derived) meta << e.key << " = " << e.value << " ; " << to_string(e.source) << '\n';
  meta << "\n[summary]\n";
  for (const auto& s : ctx.summary) meta << s << '\n';
  meta << "\n[failures]\n";
  for (const auto& f : ctx.failures) meta << f << '\n';
  out.meta = meta.str();
  out.failures = std::move(ctx.failures);
  return out;
}

int write_run(const RunOutput& out, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [ext, body] : {std::pair{".csv", &out.csv}, std::pair{".meta", &out.meta}}) {
    const auto path = out_dir / (out.stem + ext);
    std::ofstream f(path, std::ios::binary);
    f << *body;
    if (!f) throw Error("cannot write " + path.string());
  }
  return out.failures.empty() ? 0 : 3;
}

}  // namespace eitcool
