// Runs the twelve acceptance checks and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eitcool/harness.hpp"
#include "eitcool/thermometry.hpp"
#include "fixtures.hpp"

using namespace eitcool;
using fixtures::mhz;

namespace {

constexpr double kGamma = constants::kTwoPi * 20e6;
const std::filesystem::path kConfigs = std::filesystem::path(EITCOOL_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Experiment bundled(const char* name) { return make_experiment(load_config(kConfigs / name)); }

Outcome stark_formula() {
  const double d = angular_to_hz(ac_stark_shift(mhz(21.4), mhz(70)));
  return {std::abs(d - 1.60e6) <= 0.02e6, fmt("delta = %.4f MHz", d / 1e6)};
}

Outcome dark_resonance() {
  const auto cfg = fixtures::lab_config(mhz(21.4), mhz(3), mhz(70), Variant::ThreeLevel);
  std::vector<double> grid;
  for (int i = 0; i <= 600; ++i) grid.push_back(mhz(64 + 12.0 * i / 600));
  double max_w = 0;
  for (const auto& s : scan_spectrum(cfg, grid)) max_w = std::max(max_w, s.W);
  const double dark = scattering_rate(cfg, mhz(70)).W;
  return {dark <= 1e-8 * max_w, fmt("W(dark)/max W = %.2e", dark / max_w)};
}

Outcome fano_spacing() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const double delta_sigma = mhz(40 + 60 * u(rng));
    const double omega_sigma = (0.15 + 0.5 * u(rng)) * delta_sigma;
    // weak probe, so its own power does not move the bright peak
    const auto cfg = fixtures::lab_config(omega_sigma, kGamma / 400, delta_sigma, Variant::ThreeLevel);
    const double delta = ac_stark_shift(omega_sigma, delta_sigma);
    const auto f = fano_features(cfg, delta_sigma - 3 * delta, delta_sigma + 4 * delta, 141);
    worst = std::max(worst, std::abs((f.bright_peak - f.dark_point) / delta - 1));
  }
  return {worst <= 0.02, fmt("worst relative deviation %.3f%%", 100 * worst)};
}

Outcome fig2() {
  const Experiment ex = bundled("fig2.cfg");
  const auto grid = log_grid(mhz(0.5), mhz(4), 200);
  std::ostringstream os;
  bool pass = true;
  double n_ideal = 0, n_geometry = 0;
  for (Variant v : {Variant::ThreeLevel, Variant::FourLevelIdeal, Variant::FourLevelGeometry}) {
    SystemConfig sys = ex.system;
    sys.variant = v;
    const auto pts = sweep_mode_frequency(sys, ex.mode("y"), grid);
    std::size_t best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!pts[i].report || !pts[i].report->cooling) continue;
      if (!pts[best].report || pts[i].report->n_ss < pts[best].report->n_ss) best = i;
    }
    const double at = angular_to_hz(pts[best].value);
    pass = pass && std::abs(at - 1.6e6) <= 0.16e6;
    if (v == Variant::FourLevelIdeal) n_ideal = pts[best].report->n_ss;
    if (v == Variant::FourLevelGeometry) n_geometry = pts[best].report->n_ss;
    os << to_string(v) << " min " << fmt("%.4f at %.3f MHz; ", pts[best].report->n_ss, at / 1e6);
  }
  os << "geometry/ideal " << fmt("%.2f", n_geometry / n_ideal);
  return {pass && n_geometry > n_ideal, os.str()};
}

Outcome fig3() {
  const Experiment ex = bundled("fig3.cfg");
  const auto grid = log_grid(mhz(0.5), mhz(5), 200);
  const auto pts = sweep_stark_shift(ex.system, ex.mode("y"), grid);
  std::size_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].report || !pts[i].report->cooling) continue;
    if (!pts[best].report || pts[i].report->n_ss < pts[best].report->n_ss) best = i;
  }
  const double at = pts[best].value / ex.mode("y").omega();
  const double n = pts[best].report->n_ss;
  return {std::abs(at - 1) <= 0.15 && n <= 0.18, fmt("min n_ss %.4f at delta/omega_y = %.3f", n, at)};
}

Outcome time_constant() {
  const Experiment ex = bundled("fig4.cfg");
  const auto& y = ex.mode("y");
  const auto g = lamb_dicke(y, ex.system.beams);
  const auto r = make_report(y, g, cooling_coefficients(ex.system, y, g));
  const double tau = 1.0 / (r.a_minus - r.a_plus);
  return {r.cooling && tau >= 50e-6 && tau <= 1e-3, fmt("tau = %.1f us, n_ss = %.4f", tau * 1e6, r.n_ss)};
}

Outcome multimode() {
  const Experiment ex = bundled("multimode.cfg");
  const std::vector<TrapMode> modes{ex.mode("y"), ex.mode("z")};
  const auto reports = multimode_report(ex.system, modes);
  bool pass = true;
  std::ostringstream os;
  for (const auto& r : reports) {
    pass = pass && r.a_minus > r.a_plus && r.lamb_dicke_check < 0.1;
    os << r.label << fmt(": n_ss %.4f eta sqrt(n) %.4f; ", r.n_ss, r.lamb_dicke_check);
  }
  return {pass, os.str()};
}

Outcome solver_oracle() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  double worst_entry = 0, worst_balance = 0;
  for (int k = 0; k < 20; ++k) {
    const auto L = fixtures::random_relaxing_liouvillian(rng, k % 2 ? Variant::ThreeLevel : Variant::FourLevelIdeal);
    const auto ss = steady_state(L);
    const auto prop = propagate(L, DensityMatrix(fixtures::random_density(L.dim, rng)), 200.0 / kGamma);
    worst_entry = std::max(worst_entry, (ss.matrix() - prop.matrix()).cwiseAbs().maxCoeff());

    auto any = fixtures::lab_config(mhz(5 + 35 * u(rng)), mhz(0.5 + 9.5 * u(rng)), mhz(20 + 100 * u(rng)),
                                    static_cast<Variant>(k % 3));
    const auto s = scattering_rate(any, coupling_detuning(any) + mhz(-5 + 10 * u(rng)));
    worst_balance = std::max(worst_balance, fixtures::relative(s.W + s.W_coupling, kGamma * s.rho_P_total));
  }
  return {worst_entry <= 1e-7 && worst_balance <= 1e-8,
          fmt("max entry deviation %.2e, max balance deviation %.2e", worst_entry, worst_balance)};
}

Outcome rate_equation() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const double a_minus = 1e2 + 1e4 * u(rng);
    const double a_plus = a_minus * u(rng);
    const double n0 = 30 * u(rng);
    const double t = 3.0 * u(rng) / (a_minus - a_plus);
    worst = std::max(worst, std::abs(evolve_n(a_plus, a_minus, n0, t) -
                                     fixtures::rk4_rate_equation(a_plus, a_minus, n0, t)));
  }
  return {worst <= 1e-10, fmt("max deviation %.2e", worst)};
}

Outcome thermometry() {
  const double eta = 0.03, omega0 = constants::kTwoPi * 100e3;
  std::vector<double> t(200);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 1e-3 * static_cast<double>(i) / 199.0;
  std::ostringstream os;
  bool pass = true;
  for (double n : {0.18, 16.0}) {
    const auto fit = fit_thermal(sideband_flops(ThermalState(n), eta, omega0, Sideband::Blue, t), eta, omega0);
    pass = pass && std::abs(fit.n_bar / n - 1) <= 0.05;
    os << fmt("fit(%.2f) = %.4f; ", n, fit.n_bar);
  }
  const ThermalState s(0.35);
  const double ratio =
      sideband_ratio_n(time_averaged_excitation(s, Sideband::Red), time_averaged_excitation(s, Sideband::Blue));
  pass = pass && std::abs(ratio / 0.35 - 1) <= 0.10;
  const double p18 = ground_state_probability(0.18), p10 = ground_state_probability(0.1);
  pass = pass && p18 == 1 / 1.18 && p10 == 1 / 1.1 && std::abs(p18 - 0.84) < 0.01 && std::abs(p10 - 0.90) < 0.01;
  os << fmt("ratio(0.35) = %.4f; p0 = %.4f, %.4f", ratio, p18, p10);
  return {pass, os.str()};
}

Outcome doppler() {
  const auto hi = doppler_limit_occupation(kGamma, constants::kTwoPi * 3.32e6);
  const double n_y = thermal_occupation(0.5e-3, constants::kTwoPi * 1.62e6);
  const double n_z = thermal_occupation(0.5e-3, constants::kTwoPi * 3.32e6);
  const bool pass = hi.temperature >= 0.45e-3 && hi.temperature <= 0.50e-3 && n_z >= 2.5 && n_z <= 3.1 &&
                    n_y >= 5.5 && n_y <= 6.3;
  return {pass, fmt("T_D = %.4f mK, n(3.32 MHz) = %.3f, n(1.62 MHz) = %.3f", hi.temperature * 1e3, n_z, n_y)};
}

std::string data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

Outcome determinism() {
  std::ostringstream os;
  bool pass = true;
  for (const char* name : {"fig2.cfg", "fig3.cfg", "fig4.cfg", "multimode.cfg", "spectrum.cfg", "thermometry.cfg"}) {
    const auto cfg = load_config(kConfigs / name);
    const auto a = run_task(cfg, 1), b = run_task(cfg, 1);
    const bool same = data_rows(a.csv) == data_rows(b.csv) && !data_rows(a.csv).empty();
    pass = pass && same;
    if (!same) os << name << " differs; ";
  }
  os << (pass ? "six bundled configs reproduce bitwise" : "");
  return {pass, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "AC-Stark formula", 1e-3, stark_formula},
      {2, "dark resonance", 1, dark_resonance},
      {3, "Fano feature spacing", 30, fano_spacing},
      {4, "omega sweep, three variants", 300, fig2},
      {5, "delta sweep", 300, fig3},
      {6, "cooling time constant", 60, time_constant},
      {7, "two modes at once", 60, multimode},
      {8, "solver oracle equivalence", 120, solver_oracle},
      {9, "rate equation closed form", 1, rate_equation},
      {10, "thermometry round trips", 60, thermometry},
      {11, "Doppler utilities", 1e-3, doppler},
      {12, "determinism", 300, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %-28s %s  %.3g s (limit %g s)  %s%s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                c.budget_s, o.detail.c_str(), in_time ? "" : "  [over time]");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
