#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

#include "eitcool/errors.hpp"

namespace eitcool {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0: chosen from the first derivative
  double max_step = 0.0;      // 0: unbounded
  std::size_t max_steps = 50'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

// Dormand-Prince 5(4) with FSAL and a standard I-controller. `rhs(t, y, dydt)`
// writes the derivative into `dydt`; `y` is advanced in place from t0 to t1
// and the final step is clipped to land exactly on t1.
template <class Vector, class Rhs>
void integrate_dopri5(Rhs&& rhs, double t0, double t1, Vector& y, const OdeOptions& opt = {},
                      OdeStats* stats = nullptr) {
  if (!(t1 >= t0)) throw InvalidArgument("integrate: t1 must be >= t0");
  if (t1 == t0) return;

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  // b - b_hat
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Eigen::Index n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  OdeStats local;
  OdeStats& st = stats ? *stats : local;

  auto error_norm = [&](const Vector& y0, const Vector& y1, const Vector& e) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale =
          opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double r = std::abs(e[i]) / scale;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  double t = t0;
  rhs(t, y, k1);
  ++st.evaluations;

  double h = opt.initial_step;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += std::norm(y[i]) / (scale * scale);
      d1 += std::norm(k1[i]) / (scale * scale);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * (t1 - t0) : 0.01 * d0 / d1;
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
  h = std::min(h, t1 - t0);

  double err_prev = 1e-4;
  while (t < t1) {
    if (st.accepted + st.rejected >= opt.max_steps) throw ConvergenceError("integrate: step budget exhausted");
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1e-300);
    if (h < h_min) throw StepSizeUnderflow(t, h);
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }

    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    st.evaluations += 6;
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = error_norm(y, ynew, err);
    if (en <= 1.0) {
      ++st.accepted;
      t = last ? t1 : t + h;
      y.swap(ynew);
      k1.swap(k7);
      // PI control (Gustafsson) keeps oscillatory problems from chattering.
      const double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5.0) *
                         std::pow(err_prev, 0.4 / 5.0);
      err_prev = std::max(en, 1e-4);
      h *= std::clamp(fac, 0.2, 10.0);
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    } else {
      ++st.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
  }
}

}  // namespace eitcool
