#include "eitcool/liouville.hpp"

#include "eitcool/constants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eitcool {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kAmplitudeFloor = 1e-12;

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// -i [H, .] in the column-major vectorization.
MatrixXcd commutator_superop(const MatrixXcd& h) {
  const auto d = h.rows();
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  const Complex minus_i(0.0, -1.0);
  return minus_i * (kron(id, h) - kron(h.transpose(), id));
}

// rate * (C rho C^dag - 1/2 {C^dag C, rho}) for C = |to><from|.
void add_jump(MatrixXcd& L, int dim, int from, int to, double rate) {
  MatrixXcd c = MatrixXcd::Zero(dim, dim);
  c(to, from) = 1.0;
  const MatrixXcd id = MatrixXcd::Identity(dim, dim);
  const MatrixXcd cdc = c.adjoint() * c;
  L += rate * (kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id));
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

DensityMatrix hermitized(const VectorXcd& v) {
  MatrixXcd m = DensityMatrix::from_vector(v).matrix();
  m = 0.5 * (m + m.adjoint());
  m /= m.trace().real();
  return DensityMatrix(std::move(m));
}

struct BorderedSolution {
  VectorXcd x;
  bool full_rank;
};

BorderedSolution solve_bordered(const MatrixXcd& A, int dim, Eigen::Index replaced_row) {
  MatrixXcd M = A;
  M.row(replaced_row).setZero();
  for (int k = 0; k < dim; ++k) M(replaced_row, k + dim * k) = 1.0;
  VectorXcd b = VectorXcd::Zero(M.rows());
  b(replaced_row) = 1.0;
  Eigen::FullPivLU<MatrixXcd> lu(M);
  lu.setThreshold(1e-12);
  return {lu.solve(b), lu.isInvertible()};
}

// Null vector of a trace-preserving generator, normalized to unit trace.
DensityMatrix bordered_steady_state(const MatrixXcd& generator, int dim) {
  const double scale = std::max(max_abs(generator), 1e-300);
  const MatrixXcd A = generator / scale;
  const Eigen::Index n = A.rows();
  const auto first = solve_bordered(A, dim, 0);
  const auto second = solve_bordered(A, dim, n - 1);
  DensityMatrix candidate = hermitized(first.x);
  if (!first.full_rank || !second.full_rank) {
    throw DegenerateDriveError("steady state is not unique (null space dimension > 1); "
                               "perturb the drive parameters",
                               candidate);
  }
  const double residual = (A * first.x).cwiseAbs().maxCoeff();
  const double mismatch = (first.x - second.x).cwiseAbs().maxCoeff();
  if (residual > 1e-9 || mismatch > 1e-8) {
    throw DegenerateDriveError("steady state is ill-determined (residual " +
                                   std::to_string(residual) + ", row-choice mismatch " +
                                   std::to_string(mismatch) + ")",
                               candidate);
  }
  return candidate;
}

void check_square_density(const Liouvillian& L, const DensityMatrix& rho) {
  if (rho.dim() != L.dim)
    throw InvalidArgument("density matrix dimension does not match the Liouvillian");
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::ThreeLevel: return "three_level";
    case Variant::FourLevelIdeal: return "four_level_ideal";
    case Variant::FourLevelGeometry: return "four_level_geometry";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : {Variant::ThreeLevel, Variant::FourLevelIdeal, Variant::FourLevelGeometry})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

int DrivenSystem::index_of(Level level) const {
  for (int i = 0; i < dim(); ++i)
    if (levels[static_cast<std::size_t>(i)] == level) return i;
  return -1;
}

std::vector<int> DrivenSystem::excited_indices() const {
  std::vector<int> out;
  for (int i = 0; i < dim(); ++i)
    if (is_excited(levels[static_cast<std::size_t>(i)])) out.push_back(i);
  return out;
}

DrivenSystem assemble_system(const std::vector<Level>& levels, const std::vector<double>& energies,
                             const std::vector<CouplingSpec>& couplings,
                             const std::vector<DecayTerm>& decays, double gamma,
                             BeatTreatment treatment) {
  if (levels.size() != energies.size())
    throw InvalidArgument("assemble_system: one energy per level required");
  DrivenSystem sys;
  sys.levels = levels;
  sys.energies = energies;
  sys.decays = decays;
  sys.gamma = gamma;
  const auto n = levels.size();

  double scale = gamma;
  for (const auto& c : couplings) {
    const int lo = sys.index_of(c.lower);
    const int up = sys.index_of(c.upper);
    if (lo < 0 || up < 0) throw InvalidArgument("assemble_system: coupling to an absent level");
    for (const auto& existing : sys.couplings) {
      if (existing.lower == lo && existing.upper == up) {
        throw InvalidArgument(std::string("transition ") + std::string(to_string(c.lower)) +
                              " -> " + std::string(to_string(c.upper)) +
                              " is driven by more than one laser frequency");
      }
    }
    sys.couplings.push_back({lo, up, c.rabi, c.beam, c.q, c.laser_frequency, 0.0});
    scale = std::max(scale, std::abs(c.laser_frequency));
  }

  // Spanning forest: the first level (S- when present) is the zero of the
  // frame; every coupling reached from an assigned level fixes its partner.
  std::vector<bool> assigned(n, false);
  sys.frame.assign(n, 0.0);
  std::size_t root = static_cast<std::size_t>(std::max(sys.index_of(Level::SMinus), 0));
  sys.frame[root] = 0.0;
  assigned[root] = true;
  for (;;) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& c : sys.couplings) {
        const auto lo = static_cast<std::size_t>(c.lower);
        const auto up = static_cast<std::size_t>(c.upper);
        if (assigned[lo] && !assigned[up]) {
          sys.frame[up] = sys.frame[lo] + c.laser_frequency;
          assigned[up] = changed = true;
        } else if (!assigned[lo] && assigned[up]) {
          sys.frame[lo] = sys.frame[up] - c.laser_frequency;
          assigned[lo] = changed = true;
        }
      }
    }
    const auto next = std::find(assigned.begin(), assigned.end(), false);
    if (next == assigned.end()) break;
    const auto k = static_cast<std::size_t>(next - assigned.begin());
    sys.frame[k] = energies[k];
    assigned[k] = true;
  }

  const double tol = 1e-9 * scale;
  double beat = 0.0;
  for (std::size_t i = 0; i < sys.couplings.size(); ++i) {
    auto& c = sys.couplings[i];
    const double r = sys.frame[static_cast<std::size_t>(c.upper)] -
                     sys.frame[static_cast<std::size_t>(c.lower)] - c.laser_frequency;
    if (std::abs(r) <= tol) continue;
    if (beat != 0.0 && std::abs(std::abs(r) - beat) > tol)
      throw InvalidArgument("coupling graph carries more than one residual beat frequency");
    beat = std::abs(r);
    c.residual = r;
  }

  if (beat > 0.0 && treatment == BeatTreatment::Periodic) {
    Beat b{beat, {}};
    for (std::size_t i = 0; i < sys.couplings.size(); ++i)
      if (sys.couplings[i].residual != 0.0) b.couplings.push_back(i);
    sys.beat = std::move(b);
  } else if (beat > 0.0) {
    std::vector<double> out_rate(n, 0.0);
    for (const auto& d : decays) out_rate[static_cast<std::size_t>(d.upper)] += d.rate;
    std::vector<LevelCoupling> kept;
    for (const auto& c : sys.couplings) {
      if (c.residual == 0.0) {
        kept.push_back(c);
        continue;
      }
      const auto lo = static_cast<std::size_t>(c.lower);
      const auto up = static_cast<std::size_t>(c.upper);
      const double detuning = c.laser_frequency - (energies[up] - energies[lo]);
      const double dephasing = 0.5 * (out_rate[up] + out_rate[lo]);
      const double rate = std::norm(c.rabi) * dephasing /
                          (2.0 * (dephasing * dephasing + detuning * detuning));
      sys.pumps.push_back({c.lower, c.upper, rate, c.beam});
      sys.pumps.push_back({c.upper, c.lower, rate, c.beam});
    }
    sys.couplings = std::move(kept);
  }
  return sys;
}

DrivenSystem build_system(const LevelScheme& scheme, const MagneticField& field,
                          const BeamSet& beams, Variant variant, BeatTreatment treatment) {
  if (beams.coupling.role() != BeamRole::Coupling || beams.cooling.role() != BeamRole::Cooling)
    throw InvalidArgument("build_system: beam roles do not match their slots");

  std::vector<Level> levels;
  if (variant == Variant::ThreeLevel)
    levels = {Level::SMinus, Level::SPlus, Level::PPlus};
  else
    levels = {kAllLevels.begin(), kAllLevels.end()};
  auto present = [&](Level l) { return std::find(levels.begin(), levels.end(), l) != levels.end(); };

  const ZeemanSplitting split = zeeman_splitting(scheme, field);
  std::vector<double> energies;
  for (Level l : levels) energies.push_back(level_shift(split, l));

  const SphericalFrame frame = make_frame(field, beams.cooling.k_hat());
  const PolarizationComponents coupling_pol = decompose_polarization(beams.coupling, frame);
  PolarizationComponents cooling_pol;
  if (variant == Variant::FourLevelGeometry)
    cooling_pol = decompose_polarization(beams.cooling, frame);
  else
    cooling_pol.amp = {Complex(0.0), Complex(1.0), Complex(0.0)};

  // Coupling beam first, then pi cooling, then sigma cooling: this ordering
  // makes the sigma- edge the one that closes the loop.
  std::vector<CouplingSpec> specs;
  auto add = [&](const Beam& beam, const PolarizationComponents& pol, bool pi_only, bool sigma_only) {
    for (const auto& ch : scheme.channels()) {
      if (!present(ch.lower) || !present(ch.upper)) continue;
      if (pi_only && ch.q != 0) continue;
      if (sigma_only && ch.q == 0) continue;
      const Complex amp = pol(ch.q);
      if (std::abs(amp) < kAmplitudeFloor || beam.rabi() == 0.0) continue;
      // The cooling beam's sigma+ part shares S- -> P+ with the coupling
      // beam; it is outside the single-frequency-per-transition model.
      if (beam.role() == BeamRole::Cooling && ch.q == +1) continue;
      specs.push_back({ch.lower, ch.upper, beam.rabi() * ch.cg_amplitude * amp, beam.role(), ch.q,
                       beam.detuning()});
    }
  };
  add(beams.coupling, coupling_pol, false, false);
  add(beams.cooling, cooling_pol, true, false);
  add(beams.cooling, cooling_pol, false, true);

  std::vector<DecayTerm> decays;
  for (const auto& ch : scheme.channels()) {
    if (!present(ch.lower) || !present(ch.upper)) continue;
    const auto idx = [&](Level l) {
      return static_cast<int>(std::find(levels.begin(), levels.end(), l) - levels.begin());
    };
    decays.push_back({idx(ch.lower), idx(ch.upper), scheme.gamma() * ch.cg_squared});
  }
  return assemble_system(levels, energies, specs, decays, scheme.gamma(), treatment);
}

DensityMatrix DensityMatrix::pure(int dim, int index) {
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::from_vector(const VectorXcd& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) throw InvalidArgument("vectorized density matrix has non-square length");
  return DensityMatrix(Eigen::Map<const MatrixXcd>(v.data(), d, d));
}

VectorXcd DensityMatrix::vectorize() const {
  return Eigen::Map<const VectorXcd>(m_.data(), m_.size());
}

double DensityMatrix::trace_error() const { return std::abs(m_.trace() - Complex(1.0)); }

double DensityMatrix::hermiticity_error() const { return max_abs(m_ - m_.adjoint()); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

MatrixXcd hamiltonian_static(const DrivenSystem& system) {
  const int d = system.dim();
  MatrixXcd h = MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k)
    h(k, k) = system.energies[static_cast<std::size_t>(k)] - system.frame[static_cast<std::size_t>(k)];
  for (const auto& c : system.couplings) {
    if (c.residual != 0.0) continue;
    h(c.upper, c.lower) += 0.5 * c.rabi;
    h(c.lower, c.upper) += 0.5 * std::conj(c.rabi);
  }
  return h;
}

Liouvillian build_liouvillian(const DrivenSystem& system) {
  const int d = system.dim();
  Liouvillian L;
  L.dim = d;
  L.static_part = commutator_superop(hamiltonian_static(system));
  for (const auto& decay : system.decays) add_jump(L.static_part, d, decay.upper, decay.lower, decay.rate);
  for (const auto& pump : system.pumps) add_jump(L.static_part, d, pump.from, pump.to, pump.rate);

  if (system.beat) {
    MatrixXcd h_plus = MatrixXcd::Zero(d, d);
    MatrixXcd h_minus = MatrixXcd::Zero(d, d);
    for (std::size_t idx : system.beat->couplings) {
      const auto& c = system.couplings[idx];
      // H_ul(t) = rabi/2 e^{i residual t}
      if (c.residual > 0.0) {
        h_plus(c.upper, c.lower) += 0.5 * c.rabi;
        h_minus(c.lower, c.upper) += 0.5 * std::conj(c.rabi);
      } else {
        h_minus(c.upper, c.lower) += 0.5 * c.rabi;
        h_plus(c.lower, c.upper) += 0.5 * std::conj(c.rabi);
      }
    }
    L.periodic = Liouvillian::Periodic{system.beat->frequency, commutator_superop(h_plus),
                                       commutator_superop(h_minus)};
  }
  return L;
}

DensityMatrix steady_state(const Liouvillian& L) {
  if (L.time_dependent())
    throw InvalidArgument("steady_state requires a time-independent Liouvillian; "
                          "use periodic_steady_state");
  return bordered_steady_state(L.static_part, L.dim);
}

DensityMatrix propagate(const Liouvillian& L, const DensityMatrix& rho0, double t,
                        const OdeOptions& options) {
  return propagate(L, rho0, 0.0, t, options);
}

DensityMatrix propagate(const Liouvillian& L, const DensityMatrix& rho0, double t_start,
                        double t_end, const OdeOptions& options) {
  check_square_density(L, rho0);
  if (!(t_end >= t_start)) throw InvalidArgument("propagate: duration must be >= 0");
  VectorXcd y = rho0.vectorize();
  if (t_end == t_start) return rho0;
  if (L.periodic) {
    const auto& p = *L.periodic;
    integrate_dopri5(
        [&](double t, const VectorXcd& x, VectorXcd& dx) {
          const Complex phase = std::polar(1.0, p.frequency * t);
          dx.noalias() = L.static_part * x;
          dx.noalias() += phase * (p.plus * x);
          dx.noalias() += std::conj(phase) * (p.minus * x);
        },
        t_start, t_end, y, options);
  } else {
    integrate_dopri5([&](double, const VectorXcd& x, VectorXcd& dx) { dx.noalias() = L.static_part * x; },
                     t_start, t_end, y, options);
  }
  return DensityMatrix::from_vector(y);
}

PeriodicState periodic_steady_state(const Liouvillian& L, double gamma,
                                    const PeriodicOptions& options) {
  const Liouvillian static_part = L.static_only();
  DensityMatrix start = [&] {
    try {
      return steady_state(static_part);
    } catch (const DegenerateDriveError& e) {
      return e.candidate();
    }
  }();
  if (!L.periodic) return {start, MatrixXcd::Zero(L.dim, L.dim), 0};

  const auto& p = *L.periodic;
  if (!(p.frequency > 0.0)) throw InvalidArgument("periodic_steady_state: beat frequency must be > 0");
  const double period = constants::kTwoPi / p.frequency;
  const double relax = options.relaxation_gamma_times / gamma;
  const double relax_periods = std::ceil(relax / period);
  const Eigen::Index n = static_cast<Eigen::Index>(L.dim) * L.dim;

  // y = [rho, int rho dt, int rho e^{-i nu t} dt]
  VectorXcd y = VectorXcd::Zero(3 * n);
  y.head(n) = start.vectorize();
  auto rhs = [&](double t, const VectorXcd& x, VectorXcd& dx) {
    const Complex phase = std::polar(1.0, p.frequency * t);
    const auto rho = x.head(n);
    dx.head(n).noalias() = L.static_part * rho;
    dx.head(n).noalias() += phase * (p.plus * rho);
    dx.head(n).noalias() += std::conj(phase) * (p.minus * rho);
    dx.segment(n, n) = rho;
    dx.tail(n) = std::conj(phase) * rho;
  };

  double t = 0.0;
  const double t_relax = relax_periods * period;
  integrate_dopri5(rhs, t, t_relax, y, options.ode);
  t = t_relax;

  VectorXcd previous;
  std::size_t window = 0;
  for (; window < options.max_periods; ++window) {
    y.tail(2 * n).setZero();
    const double t_next = (relax_periods + static_cast<double>(window) + 1.0) * period;
    integrate_dopri5(rhs, t, t_next, y, options.ode);
    t = t_next;
    VectorXcd avg = y.segment(n, n) / period;
    if (window > 0 && (avg - previous).cwiseAbs().maxCoeff() < options.drift_tolerance) {
      MatrixXcd mean = DensityMatrix::from_vector(avg).matrix();
      mean = 0.5 * (mean + mean.adjoint());
      MatrixXcd harmonic = DensityMatrix::from_vector(VectorXcd(y.tail(n) / period)).matrix();
      return {DensityMatrix(std::move(mean)), std::move(harmonic), window + 1};
    }
    previous = std::move(avg);
  }
  throw ConvergenceError("periodic_steady_state: window averages still drifting after " +
                         std::to_string(options.max_periods) + " beat periods");
}

PeriodicState periodic_steady_state_fourier(const Liouvillian& L, int harmonics, double tolerance) {
  if (!L.periodic) {
    DensityMatrix rho = steady_state(L);
    return {rho, MatrixXcd::Zero(L.dim, L.dim), 0};
  }
  const auto& p = *L.periodic;
  const Eigen::Index n = L.static_part.rows();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  const double scale = std::max(max_abs(L.static_part), p.frequency);

  auto solve = [&](int order) {
    // c_{k+1} = S_{k+1} c_k for k >= 0, c_{k-1} = T_{k-1} c_k for k <= 0.
    MatrixXcd S = MatrixXcd::Zero(n, n);
    MatrixXcd T = MatrixXcd::Zero(n, n);
    for (int k = order; k >= 1; --k) {
      const Complex w(0.0, k * p.frequency);
      S = (w * id - L.static_part - p.minus * S).partialPivLu().solve(p.plus);
      const MatrixXcd Tn = (-w * id - L.static_part - p.plus * T).partialPivLu().solve(p.minus);
      T = Tn;
    }
    const MatrixXcd effective = L.static_part + p.plus * T + p.minus * S;
    DensityMatrix c0 = bordered_steady_state(effective / scale, L.dim);
    const VectorXcd c1 = S * c0.vectorize();
    return std::pair{c0, DensityMatrix::from_vector(c1).matrix()};
  };

  auto current = solve(harmonics);
  for (int order = 2 * harmonics; order <= 256; order *= 2) {
    auto refined = solve(order);
    const double change = std::max(max_abs(refined.first.matrix() - current.first.matrix()),
                                   max_abs(refined.second - current.second));
    current = std::move(refined);
    if (change < tolerance) return {current.first, current.second, 0};
  }
  throw ConvergenceError("periodic_steady_state_fourier: harmonic expansion did not converge");
}

}  // namespace eitcool
