#include <doctest.h>

#include <algorithm>
#include <random>

#include "eitcool/errors.hpp"
#include "eitcool/ode.hpp"
#include "fixtures.hpp"

using namespace eitcool;
using fixtures::mhz;
using Eigen::MatrixXcd;

namespace {

constexpr double kGamma = constants::kTwoPi * 20e6;

// Random static configuration: three_level or four_level_ideal, driven near
// resonance so the slowest relaxation rate stays above ~0.09 Gamma and 200/Gamma
// of propagation settles to 1e-7.
SystemConfig random_static_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Variant v = u(rng) < 0.5 ? Variant::ThreeLevel : Variant::FourLevelIdeal;
  SystemConfig cfg = fixtures::lab_config(mhz(10 + 30 * u(rng)), mhz(10 + 30 * u(rng)), mhz(-20 + 40 * u(rng)), v);
  cfg.field = MagneticField(1.0 + 9.0 * u(rng), Vec3::UnitZ());
  cfg = with_cooling_detuning(cfg, coupling_detuning(cfg) + mhz(-10 + 20 * u(rng)));
  return cfg;
}

Liouvillian liouvillian_of(const SystemConfig& cfg) {
  return build_liouvillian(build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant, cfg.beat_treatment));
}

double max_entry(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// Signed laser-frequency sum around every cycle of the coupling graph; the
// graph has at most four nodes, so cycles are enumerated by brute force.
std::vector<double> loop_frequencies(const DrivenSystem& s) {
  std::vector<double> out;
  const auto& c = s.couplings;
  const std::size_t m = c.size();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> degree(static_cast<std::size_t>(s.dim()), 0);
    int edges = 0;
    for (std::size_t e = 0; e < m; ++e)
      if (mask & (1u << e)) {
        ++degree[static_cast<std::size_t>(c[e].lower)];
        ++degree[static_cast<std::size_t>(c[e].upper)];
        ++edges;
      }
    if (edges < 3 || std::any_of(degree.begin(), degree.end(), [](int d) { return d != 0 && d != 2; })) continue;
    // walk the cycle, adding +omega upward and -omega downward
    std::vector<bool> used(m, false);
    int node = -1;
    for (std::size_t e = 0; e < m; ++e)
      if (mask & (1u << e)) { node = c[e].lower; break; }
    const int start = node;
    double sum = 0.0;
    do {
      for (std::size_t e = 0; e < m; ++e) {
        if (!(mask & (1u << e)) || used[e]) continue;
        if (c[e].lower == node) { sum += c[e].laser_frequency; node = c[e].upper; }
        else if (c[e].upper == node) { sum -= c[e].laser_frequency; node = c[e].lower; }
        else continue;
        used[e] = true;
        break;
      }
    } while (node != start);
    out.push_back(sum);
  }
  return out;
}

}  // namespace

TEST_CASE("build_system coupling graphs per variant") {
  SUBCASE("three_level") {
    const auto cfg = fixtures::lab_config(mhz(21.4), mhz(3), mhz(70), Variant::ThreeLevel);
    const auto s = build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant);
    CHECK(s.dim() == 3);
    CHECK(s.couplings.size() == 2);
    CHECK_FALSE(s.beat.has_value());
    CHECK(loop_frequencies(s).empty());
    CHECK_FALSE(build_liouvillian(s).time_dependent());
  }
  SUBCASE("four_level_ideal") {
    const auto cfg = fixtures::lab_config(mhz(21.4), mhz(3), mhz(70), Variant::FourLevelIdeal);
    const auto s = build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant);
    CHECK(s.dim() == 4);
    REQUIRE(s.couplings.size() == 3);
    auto has = [&](Level lo, Level up, int q, BeamRole beam) {
      return std::any_of(s.couplings.begin(), s.couplings.end(), [&](const LevelCoupling& c) {
        return c.lower == s.index_of(lo) && c.upper == s.index_of(up) && c.q == q && c.beam == beam;
      });
    };
    CHECK(has(Level::SMinus, Level::PPlus, +1, BeamRole::Coupling));
    CHECK(has(Level::SMinus, Level::PMinus, 0, BeamRole::Cooling));
    CHECK(has(Level::SPlus, Level::PPlus, 0, BeamRole::Cooling));
    CHECK(loop_frequencies(s).empty());
    CHECK_FALSE(s.beat.has_value());
  }
  SUBCASE("four_level_geometry") {
    const double d_pi_offset = mhz(0.37);
    auto cfg = fixtures::lab_config(mhz(21.4), mhz(3), mhz(70), Variant::FourLevelGeometry);
    cfg = with_cooling_detuning(cfg, mhz(70) + d_pi_offset);
    const auto s = build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant);
    CHECK(s.couplings.size() == 4);
    REQUIRE(s.beat.has_value());
    const auto loops = loop_frequencies(s);
    REQUIRE(loops.size() == 1);
    const double delta_s = zeeman_splitting(cfg.scheme, cfg.field).ground;
    const double expected = coupling_detuning(cfg) - cooling_detuning(cfg) + delta_s;
    CHECK(s.beat->frequency == doctest::Approx(std::abs(loops[0])).epsilon(1e-12));
    CHECK(s.beat->frequency == doctest::Approx(expected).epsilon(1e-9));
    REQUIRE(s.beat->couplings.size() == 1);
    const auto& beat_edge = s.couplings[s.beat->couplings[0]];
    CHECK(beat_edge.q == -1);
    CHECK(beat_edge.lower == s.index_of(Level::SPlus));
    CHECK(beat_edge.upper == s.index_of(Level::PMinus));
    CHECK(build_liouvillian(s).time_dependent());
  }
}

TEST_CASE("effective Rabi amplitudes follow polarization and CG weights") {
  const auto cfg = fixtures::lab_config(mhz(21.4), mhz(3), mhz(70), Variant::FourLevelGeometry);
  const auto s = build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant);
  const auto frame = make_frame(cfg.field, cfg.beams.cooling.k_hat());
  for (const auto& c : s.couplings) {
    const Beam& b = c.beam == BeamRole::Coupling ? cfg.beams.coupling : cfg.beams.cooling;
    const auto ch = cfg.scheme.channel(s.levels[static_cast<std::size_t>(c.lower)], s.levels[static_cast<std::size_t>(c.upper)]);
    REQUIRE(ch.has_value());
    const Complex expected = b.rabi() * ch->cg_amplitude * decompose_polarization(b, frame)(c.q);
    CHECK(std::abs(c.rabi - expected) < 1e-9 * std::abs(expected));
  }
  CHECK(std::abs(coupling_transition_rabi(cfg) - mhz(21.4)) < 1e-6 * mhz(21.4));
}

TEST_CASE("a transition driven twice is rejected") {
  const std::vector<Level> levels = {Level::SPlus, Level::PPlus};
  const std::vector<CouplingSpec> specs = {{Level::SPlus, Level::PPlus, 1.0, BeamRole::Cooling, 0, 0.0},
                                           {Level::SPlus, Level::PPlus, 1.0, BeamRole::Coupling, 0, 5.0}};
  CHECK_THROWS_AS(assemble_system(levels, {0.0, 0.0}, specs, {{0, 1, kGamma}}, kGamma), InvalidArgument);
}

TEST_CASE("superoperator matches the master equation evaluated with matrices") {
  std::mt19937_64 rng(11);
  const auto cfg = fixtures::lab_config(mhz(17), mhz(4), mhz(50), Variant::FourLevelIdeal);
  const auto s = build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant);
  const auto L = build_liouvillian(s);
  std::vector<MatrixXcd> jumps;
  for (const auto& d : s.decays) {
    MatrixXcd c = MatrixXcd::Zero(s.dim(), s.dim());
    c(d.lower, d.upper) = std::sqrt(d.rate);
    jumps.push_back(c);
  }
  const MatrixXcd h = hamiltonian_static(s);
  for (int trial = 0; trial < 5; ++trial) {
    const DensityMatrix rho(fixtures::random_density(s.dim(), rng));
    const MatrixXcd via_L = DensityMatrix::from_vector(L.static_part * rho.vectorize()).matrix();
    const MatrixXcd direct = fixtures::lindblad_rhs(h, jumps, rho.matrix());
    CHECK(max_entry(via_L - direct) < 1e-6 * max_entry(direct));  // entries ~1e9
  }
  // column-major round trip
  const DensityMatrix rho(fixtures::random_density(4, rng));
  const auto v = rho.vectorize();
  CHECK(v(1) == rho(1, 0));
  CHECK(v(4) == rho(0, 1));
  CHECK(max_entry(DensityMatrix::from_vector(v).matrix() - rho.matrix()) == 0.0);
}

TEST_CASE("trace preservation and spectrum of L0") {
  std::mt19937_64 rng(3);
  for (int cfg_trial = 0; cfg_trial < 4; ++cfg_trial) {
    auto cfg = random_static_config(rng);
    if (cfg_trial == 3) cfg.variant = Variant::FourLevelGeometry;
    const auto L = liouvillian_of(cfg);
    const int d = L.dim;
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXcd v = DensityMatrix(fixtures::random_hermitian(d, rng)).vectorize();
      std::vector<const MatrixXcd*> parts = {&L.static_part};
      if (L.periodic) parts.insert(parts.end(), {&L.periodic->plus, &L.periodic->minus});
      for (const MatrixXcd* part : parts) {
        const MatrixXcd out = DensityMatrix::from_vector(*part * v).matrix();
        CHECK(std::abs(out.trace()) < 1e-12 * max_entry(*part) * v.norm());
      }
    }
    Eigen::ComplexEigenSolver<MatrixXcd> es(L.static_part);
    CHECK(es.eigenvalues().real().maxCoeff() <= 1e-10 * kGamma);
  }
}

TEST_CASE("pure decay spectrum") {
  const std::vector<Level> levels(kAllLevels.begin(), kAllLevels.end());
  const auto scheme = LevelScheme::calcium40();
  std::vector<DecayTerm> decays;
  for (const auto& ch : scheme.channels())
    decays.push_back({static_cast<int>(ch.lower), static_cast<int>(ch.upper), kGamma * ch.cg_squared});
  const auto s = assemble_system(levels, {0, 0, 0, 0}, {}, decays, kGamma);
  const auto L = build_liouvillian(s);
  Eigen::ComplexEigenSolver<MatrixXcd> es(L.static_part);
  std::vector<double> re;
  for (int i = 0; i < es.eigenvalues().size(); ++i) re.push_back(es.eigenvalues()(i).real() / kGamma);
  auto count_near = [&](double x) {
    return std::count_if(re.begin(), re.end(), [&](double r) { return std::abs(r - x) < 1e-9; });
  };
  CHECK(count_near(0.0) == 4);    // ground populations and S-S coherences
  CHECK(count_near(-0.5) == 8);   // P-S coherences
  CHECK(count_near(-1.0) == 4);   // P populations and the P-P coherence

  SUBCASE("steady state is degenerate but the candidate sits in the ground manifold") {
    try {
      steady_state(L);
      FAIL("expected DegenerateDriveError");
    } catch (const DegenerateDriveError& e) {
      const auto& c = e.candidate();
      CHECK(c.population(0) + c.population(1) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(c.population(2)) < 1e-12);
      CHECK(std::abs(c.population(3)) < 1e-12);
    }
  }
  SUBCASE("decay from P+ over one lifetime") {
    const auto rho = propagate(L, DensityMatrix::pure(4, 3), 1.0 / kGamma);
    CHECK(std::abs(rho.population(3) - std::exp(-1.0)) < 1e-8);
    CHECK(rho.population(0) == doctest::Approx((1 - std::exp(-1.0)) * 2.0 / 3.0).epsilon(1e-8));
  }
}

TEST_CASE("two-level reduction reproduces the saturation formula") {
  const std::vector<Level> levels = {Level::SPlus, Level::PPlus};
  for (double rabi_mhz : {1.0, 7.0, 30.0})
    for (double det_mhz : {-25.0, 0.0, 3.0, 40.0}) {
      const double rabi = mhz(rabi_mhz), det = mhz(det_mhz);
      const auto s = assemble_system(levels, {0.0, 0.0}, {{Level::SPlus, Level::PPlus, rabi, BeamRole::Cooling, 0, det}},
                                     {{0, 1, kGamma}}, kGamma);
      const auto rho = steady_state(build_liouvillian(s));
      CHECK(rho.population(1) == doctest::Approx(fixtures::two_level_population(rabi, det, kGamma)).epsilon(1e-12));
    }
}

TEST_CASE("three-level dark state") {
  const auto cfg = fixtures::lab_config(mhz(21.4), mhz(3), mhz(70), Variant::ThreeLevel);
  const auto rho = steady_state(liouvillian_of(cfg));
  CHECK(std::abs(rho.population(2)) < 1e-10);
  CHECK(rho.hermiticity_error() < 1e-10);
  CHECK(rho.trace_error() < 1e-10);
  // the dark state (Omega_pi |S-> - Omega_sigma |S+>) up to CG signs: the
  // ground population ratio is |Omega_pi / Omega_sigma|^2 in transition Rabi units
  CHECK(rho.population(0) / rho.population(1) == doctest::Approx(std::pow(3.0 / 21.4, 2)).epsilon(1e-6));
}

TEST_CASE("steady_state agrees with long propagation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto L = fixtures::random_relaxing_liouvillian(rng, trial % 2 ? Variant::ThreeLevel : Variant::FourLevelIdeal);
    const auto ss = steady_state(L);
    CHECK(ss.min_eigenvalue() > -1e-8);
    const auto a = propagate(L, DensityMatrix(fixtures::random_density(L.dim, rng)), 400.0 / kGamma);
    const auto b = propagate(L, DensityMatrix(fixtures::random_density(L.dim, rng)), 200.0 / kGamma);
    CHECK(max_entry(a.matrix() - ss.matrix()) < 1e-8);
    CHECK(max_entry(b.matrix() - ss.matrix()) < 1e-7);
    CHECK(max_entry(a.matrix() - b.matrix()) < 1e-7);
  }
}

TEST_CASE("propagation preserves trace and Hermiticity") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 4; ++trial) {
    auto cfg = random_static_config(rng);
    if (trial % 2) cfg.variant = Variant::FourLevelGeometry;
    const auto L = liouvillian_of(cfg);
    const DensityMatrix rho0(fixtures::random_density(L.dim, rng));
    CHECK(max_entry(propagate(L, rho0, 0.0).matrix() - rho0.matrix()) == 0.0);
    for (double t : {1.0, 10.0, 100.0}) {
      const auto rho = propagate(L, rho0, t / kGamma);
      CHECK(rho.trace_error() < 1e-9);
      CHECK(rho.hermiticity_error() < 1e-9);
    }
  }
}

TEST_CASE("frame invariance") {
  const auto cfg = fixtures::lab_config(mhz(19), mhz(2.5), mhz(60), Variant::FourLevelIdeal);
  const auto s = build_system(cfg.scheme, cfg.field, cfg.beams, cfg.variant);
  std::vector<CouplingSpec> specs;
  for (const auto& c : s.couplings)
    specs.push_back({s.levels[static_cast<std::size_t>(c.lower)], s.levels[static_cast<std::size_t>(c.upper)], c.rabi,
                     c.beam, c.q, c.laser_frequency});
  const auto reference = steady_state(build_liouvillian(s));

  SUBCASE("rigid shift of both lasers and the excited manifold") {
    const double shift = mhz(137.0);
    auto energies = s.energies;
    for (int k : s.excited_indices()) energies[static_cast<std::size_t>(k)] += shift;
    auto shifted_specs = specs;
    for (auto& sp : shifted_specs) sp.laser_frequency += shift;
    const auto shifted = assemble_system(s.levels, energies, shifted_specs, s.decays, s.gamma);
    const auto rho = steady_state(build_liouvillian(shifted));
    for (int k = 0; k < 4; ++k) CHECK(std::abs(rho.population(k) - reference.population(k)) < 1e-10);
  }
  SUBCASE("different spanning tree") {
    std::reverse(specs.begin(), specs.end());
    const auto other = assemble_system(s.levels, s.energies, specs, s.decays, s.gamma);
    const auto rho = steady_state(build_liouvillian(other));
    for (int k = 0; k < 4; ++k) CHECK(std::abs(rho.population(k) - reference.population(k)) < 1e-10);
  }
}

TEST_CASE("periodic steady state") {
  auto cfg = fixtures::lab_config(mhz(21.4), mhz(3), mhz(70), Variant::FourLevelGeometry);
  cfg = with_cooling_detuning(cfg, mhz(70) + mhz(1.3));
  const auto L = liouvillian_of(cfg);
  REQUIRE(L.time_dependent());

  SUBCASE("zero beat amplitude reduces to the static solution") {
    Liouvillian z = L;
    z.periodic->plus.setZero();
    z.periodic->minus.setZero();
    const auto ps = periodic_steady_state(z, kGamma);
    const auto ss = steady_state(L.static_only());
    CHECK(max_entry(ps.average.matrix() - ss.matrix()) < 1e-8);
    CHECK(max_entry(periodic_steady_state_fourier(z).average.matrix() - ss.matrix()) < 1e-10);
  }
  SUBCASE("propagation average, longer window and Fourier agree") {
    const auto ps = periodic_steady_state(L, kGamma);
    CHECK(ps.average.trace_error() < 1e-9);
    CHECK(ps.average.hermiticity_error() < 1e-12);
    PeriodicOptions longer;
    longer.relaxation_gamma_times = 200.0;
    longer.drift_tolerance = 1e-10;
    const auto pl = periodic_steady_state(L, kGamma, longer);
    CHECK(max_entry(ps.average.matrix() - pl.average.matrix()) < 1e-6);
    const auto pf = periodic_steady_state_fourier(L);
    CHECK(max_entry(pf.average.matrix() - pl.average.matrix()) < 1e-8);
    CHECK(max_entry(pf.harmonic - pl.harmonic) < 1e-8);
  }
  SUBCASE("static approximation replaces the beat edge by rates") {
    auto st = cfg;
    st.beat_treatment = BeatTreatment::StaticApprox;
    const auto s = build_system(st.scheme, st.field, st.beams, st.variant, st.beat_treatment);
    CHECK_FALSE(s.beat.has_value());
    CHECK(s.pumps.size() == 2);
    CHECK(s.couplings.size() == 3);
    const auto rho = steady_state(build_liouvillian(s));
    CHECK(rho.trace_error() < 1e-10);
    CHECK(rho.min_eigenvalue() > -1e-10);
  }
}

TEST_CASE("integrator reports step-size underflow with the time reached") {
  Eigen::VectorXd y(1);
  y(0) = 1.0;
  // y' = y^2 blows up at t = 1
  auto rhs = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx = x.cwiseProduct(x); };
  try {
    integrate_dopri5(rhs, 0.0, 2.0, y);
    FAIL("expected StepSizeUnderflow");
  } catch (const StepSizeUnderflow& e) {
    CHECK(e.time_reached() == doctest::Approx(1.0).epsilon(1e-3));
  }
}
