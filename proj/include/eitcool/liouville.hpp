#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eitcool/atom_model.hpp"
#include "eitcool/errors.hpp"
#include "eitcool/ode.hpp"

namespace eitcool {

// Which couplings enter the optical Bloch equations.
//   ThreeLevel:        S-, S+, P+; sigma+ coupling and pi cooling.
//   FourLevelIdeal:    adds P- and the pi coupling S- -> P-; cooling light is
//                      taken as pure pi (beam perpendicular to B).
//   FourLevelGeometry: cooling beam decomposed as it actually hits the ion;
//                      adds its sigma- coupling S+ -> P-, which closes a loop
//                      and leaves a residual beat.
enum class Variant { ThreeLevel, FourLevelIdeal, FourLevelGeometry };
std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

// How couplings that carry a residual beat are treated.
//   Periodic:     exact time-periodic Liouvillian.
//   StaticApprox: each beat coupling replaced by a pair of incoherent
//                 absorption / stimulated-emission rates evaluated at the
//                 coupling's own detuning (coherence on that edge dropped).
enum class BeatTreatment { Periodic, StaticApprox };

struct BeamSet {
  Beam coupling;
  Beam cooling;
};

struct LevelCoupling {
  int lower;  // row index in the density matrix
  int upper;
  Complex rabi;  // effective Rabi frequency on this channel, rad/s
  BeamRole beam;
  int q;
  double laser_frequency;  // rad/s, relative to zero-field resonance
  double residual = 0.0;   // rad/s; nonzero only on beat couplings
};

struct DecayTerm {
  int lower;
  int upper;
  double rate;
};

// Incoherent transfer from -> to at `rate`, attributed to `beam`.
struct IncoherentPump {
  int from;
  int to;
  double rate;
  BeamRole beam;
};

struct Beat {
  double frequency;                  // > 0, rad/s
  std::vector<std::size_t> couplings;  // indices into DrivenSystem::couplings
};

struct DrivenSystem {
  std::vector<Level> levels;
  std::vector<double> energies;  // rad/s
  std::vector<double> frame;     // rad/s; rotation frequency of each level
  std::vector<LevelCoupling> couplings;
  std::vector<DecayTerm> decays;
  std::vector<IncoherentPump> pumps;
  std::optional<Beat> beat;
  double gamma = 0.0;

  int dim() const { return static_cast<int>(levels.size()); }
  int index_of(Level level) const;  // -1 if absent
  std::vector<int> excited_indices() const;
};

// Raw coupling description before the rotating frame is fixed.
struct CouplingSpec {
  Level lower;
  Level upper;
  Complex rabi;
  BeamRole beam;
  int q;
  double laser_frequency;
};

// Generic assembly: picks the rotating frame along a spanning forest of the
// coupling graph (couplings earlier in `couplings` are preferred as tree
// edges) and records the residual on every edge that closes a loop.
// Throws if one transition is driven twice or if more than one distinct
// residual frequency appears.
DrivenSystem assemble_system(const std::vector<Level>& levels, const std::vector<double>& energies,
                             const std::vector<CouplingSpec>& couplings,
                             const std::vector<DecayTerm>& decays, double gamma,
                             BeatTreatment treatment = BeatTreatment::Periodic);

DrivenSystem build_system(const LevelScheme& scheme, const MagneticField& field,
                          const BeamSet& beams, Variant variant,
                          BeatTreatment treatment = BeatTreatment::Periodic);

// Column-major vectorization: vec(rho)[i + d*j] = rho(i, j).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {}

  static DensityMatrix pure(int dim, int index);
  static DensityMatrix from_vector(const Eigen::VectorXcd& v);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }
  double population(int i) const { return m_(i, i).real(); }
  Eigen::VectorXcd vectorize() const;

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

 private:
  Eigen::MatrixXcd m_;
};

// d rho / dt = (L0 + L_plus e^{+i nu t} + L_minus e^{-i nu t}) rho
struct Liouvillian {
  struct Periodic {
    double frequency;
    Eigen::MatrixXcd plus;
    Eigen::MatrixXcd minus;
  };

  int dim = 0;
  Eigen::MatrixXcd static_part;
  std::optional<Periodic> periodic;

  bool time_dependent() const { return periodic.has_value(); }
  Liouvillian static_only() const { return {dim, static_part, std::nullopt}; }
};

Liouvillian build_liouvillian(const DrivenSystem& system);
Eigen::MatrixXcd hamiltonian_static(const DrivenSystem& system);

// Thrown when the static steady state is not unique. `candidate` is the
// solution of the first bordered system (the projection the solver landed
// on), useful for inspecting e.g. the undriven limit.
class DegenerateDriveError : public Error {
 public:
  DegenerateDriveError(const std::string& what, DensityMatrix candidate)
      : Error(what), candidate_(std::move(candidate)) {}
  const DensityMatrix& candidate() const { return candidate_; }

 private:
  DensityMatrix candidate_;
};

DensityMatrix steady_state(const Liouvillian& L);

DensityMatrix propagate(const Liouvillian& L, const DensityMatrix& rho0, double t,
                        const OdeOptions& options = {});
DensityMatrix propagate(const Liouvillian& L, const DensityMatrix& rho0, double t_start,
                        double t_end, const OdeOptions& options = {});

struct PeriodicOptions {
  double relaxation_gamma_times = 20.0;  // relaxation window in units of 1/Gamma
  double drift_tolerance = 1e-8;
  std::size_t max_periods = 10'000;
  OdeOptions ode{};
};

// Period-averaged state plus the first Fourier component
// harmonic = < rho(t) e^{-i nu t} >, needed for time-averaged rates on the
// beat couplings. The average is Hermitian with unit trace but need not be
// positive semidefinite.
struct PeriodicState {
  DensityMatrix average;
  Eigen::MatrixXcd harmonic;
  std::size_t periods_averaged = 0;
};

// Relax-then-average propagation. `gamma` sets the relaxation window.
PeriodicState periodic_steady_state(const Liouvillian& L, double gamma,
                                    const PeriodicOptions& options = {});

// Steady state of the time-periodic problem from the Fourier expansion
// rho(t) = sum_n c_n e^{i n nu t} truncated at |n| <= harmonics, solved by
// matrix continued fractions. The truncation is doubled until c_0 and c_1
// change by less than `tolerance`.
PeriodicState periodic_steady_state_fourier(const Liouvillian& L, int harmonics = 4,
                                            double tolerance = 1e-12);

}  // namespace eitcool
