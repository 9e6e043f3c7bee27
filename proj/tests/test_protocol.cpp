#include "pulsecorr/protocol.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace pulsecorr;

namespace {

SystemParams table_point(double reheating) {
  SystemParams p;
  p.set_reheating(reheating);
  return p;
}

SystemParams noiseless(double g, double n0) {
  SystemParams p;
  p.g = g;
  p.gamma = 0.0;
  p.n_th = 0.0;
  p.n0 = n0;
  p.eta_B = p.eta_R = 1.0;
  return p;
}

double max_entrywise_relative(const Matrix& ours, const Matrix& ref) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ref.rows(); ++i)
    for (Eigen::Index j = 0; j < ref.cols(); ++j) {
      if (ref(i, j) == 0.0) continue;
      worst = std::max(worst, std::abs(ours(i, j) - ref(i, j)) / std::abs(ref(i, j)));
    }
  return worst;
}

double max_norm_relative(const Matrix& ours, const Matrix& ref) {
  return (ours - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

bool bit_identical(const EnsembleStats& a, const EnsembleStats& b) {
  auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
  if (a.values.size() != b.values.size() || a.failures.size() != b.failures.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (!same(a.values[i], b.values[i])) return false;
  return same(a.mean, b.mean) && same(a.std, b.std) && same(a.min, b.min) && same(a.max, b.max);
}

}  // namespace

TEST(AdiabaticBlue, UnitGainIsIdentityChannel) {
  const auto v = adiabatic_blue(1.0, 7.0);
  Matrix expected = Matrix::Zero(4, 4);
  expected.diagonal() << 1, 1, 15, 15;
  EXPECT_LE((v.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(v.labels(), (std::vector<std::string>{"pulseB", "mech"}));
}

TEST(AdiabaticBlue, PureTwoModeSqueezing) {
  const auto v = adiabatic_blue(2.0, 0.0);
  EXPECT_LE((v.matrix() - oracle::tms(2.0)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(smallest_eigenvalue(v.matrix()), 3.0 - 2.0 * std::sqrt(2.0), 1e-14);
}

// A hot mechanical input keeps the state entangled, but the partial-transpose
// eigenvalue tends to 1 / (2G - 1) rather than the vacuum-input value.
TEST(AdiabaticBlue, MixedEntanglementSurvivesHotInput) {
  for (double gain : {2.0, 10.0, 300.0}) {
    const double cold = log_negativity(adiabatic_blue(gain, 0.0).matrix()).e_n;
    const double hot = log_negativity(adiabatic_blue(gain, 1e4).matrix()).e_n;
    EXPECT_NEAR(cold, 2.0 * std::log(std::sqrt(gain) + std::sqrt(gain - 1.0)), 1e-9);
    EXPECT_NEAR(hot, std::log(2.0 * gain - 1.0), 1e-3);
    EXPECT_GT(hot, 0.0);
  }
}

TEST(AdiabaticBlue, RejectsBadInput) {
  EXPECT_THROW(adiabatic_blue(0.5, 0.0), InvalidArgument);
  EXPECT_THROW(adiabatic_blue(2.0, -1.0), InvalidArgument);
}

TEST(AdiabaticRed, UnitFactorLeavesReadoutInVacuum) {
  const auto v = adiabatic_red(1.0, adiabatic_blue(2.0, 3.0));
  EXPECT_EQ(v.labels(), (std::vector<std::string>{"pulseB", "pulseR"}));
  EXPECT_LE((v.matrix().bottomRightCorner(2, 2) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(v.matrix().topRightCorner(2, 2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AdiabaticRed, LargeFactorCopiesMechanics) {
  const auto in = adiabatic_blue(2.0, 3.0);
  const auto out = adiabatic_red(1e12, in);
  EXPECT_LE((out.matrix() - in.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  // Intermediate T mixes the mechanics with vacuum.
  const double t = 4.0;
  const auto mid = adiabatic_red(t, in);
  EXPECT_NEAR(mid.matrix()(2, 2), 1.0 / t + (1.0 - 1.0 / t) * in.matrix()(2, 2), 1e-14);
  EXPECT_NEAR(mid.matrix()(0, 2), std::sqrt(1.0 - 1.0 / t) * in.matrix()(0, 2), 1e-14);
}

TEST(AdiabaticRed, CompositionPreservesSqueezing) {
  const auto pm = adiabatic_blue(2.0, 0.0);
  const auto pp = adiabatic_red(1e4, pm);
  EXPECT_LT(std::abs(two_mode_squeezing_db(pp.matrix()) - two_mode_squeezing_db(pm.matrix())), 1.0);
  EXPECT_TRUE(is_physical(pp.matrix()));
  EXPECT_THROW(adiabatic_red(0.9, pm), InvalidArgument);
}

TEST(RunBlue, NoCouplingIsDegenerate) {
  auto p = noiseless(0.0, 1e4);
  EXPECT_THROW(run_blue(p, Frame::RWA), DegenerateProfile);
}

TEST(RunBlue, LabFrameIsRejected) {
  EXPECT_THROW(run_blue(SystemParams{}, Frame::Lab), InvalidArgument);
}

TEST(RunBlue, TablePointIsNonclassical) {
  const auto out = run_blue(table_point(1e-3), Frame::RWA);
  EXPECT_GT(out.measures.s_db, 0.0);
  EXPECT_GT(out.measures.e_n, 0.0);
  EXPECT_NEAR(out.profile.norm_squared(), 1.0, 1e-12);
  EXPECT_EQ(out.cm.labels(), (std::vector<std::string>{"pulseB", "mech"}));
  // Correlations in the adiabatic quadrature convention: diag(+, -).
  EXPECT_GT(out.cm.matrix()(0, 2), 0.0);
  EXPECT_LT(out.cm.matrix()(1, 3), 0.0);
}

// The adiabatic map neglects the cavity fill-up time 1/kappa; the deviation
// from it falls off as 1/(kappa tau) at fixed g^2 tau.
TEST(RunBlue, ApproachesAdiabaticLimit) {
  for (double n0 : {0.0, 10.0}) {
    double previous = 1.0;
    for (double tau : {8.0, 32.0, 128.0}) {
      auto p = noiseless(std::sqrt(0.02 / tau), n0);
      p.tau = p.tau_R = tau;
      SimOptions o;
      o.dt = 0.01;
      const auto ours = run_blue(p, Frame::RWA, o).cm.matrix();
      const auto ref = adiabatic_blue(adiabatic_gain(p, tau), n0).matrix();
      const double err = max_entrywise_relative(ours, ref);
      EXPECT_LT(err, previous) << "tau=" << tau << " n0=" << n0;
      previous = err;
    }
    EXPECT_LT(previous, 0.05);
  }
}

TEST(RunBlue, DecreasesWithReheating) {
  double s_prev = 1e9, e_prev = 1e9;
  for (double rate : {1e-4, 1e-3, 1e-2, 0.06, 0.3, 1.0}) {
    const auto m = run_blue(table_point(rate), Frame::RWA).measures;
    EXPECT_LE(m.s_db, s_prev);
    EXPECT_LE(m.e_n, e_prev);
    if (m.e_n > 0.0) {
      EXPECT_GT(m.s_db, 0.0);
    }
    s_prev = m.s_db;
    e_prev = m.e_n;
  }
  EXPECT_LT(s_prev, 0.0);
}

TEST(RunBlue, BeyondRwaDoesNotDegradeSqueezing) {
  SimOptions o;
  o.dt = 0.002;
  const auto p = table_point(1e-3);
  EXPECT_GE(run_blue(p, Frame::BeyondRWA, o).measures.s_db, run_blue(p, Frame::RWA, o).measures.s_db - 0.05);
}

TEST(RunFull, ReadoutWithoutCouplingIsVacuum) {
  SimOptions o;
  o.readout_coupling = 0.0;
  const auto r = run_full(table_point(0.06), Frame::RWA, o);
  const Matrix& v = r.cm_pulse_pulse.matrix();
  EXPECT_LE((v.bottomRightCorner(2, 2) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(v.topRightCorner(2, 2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.readout_transfer, 0.0);
  EXPECT_EQ(r.readout_t_factor, 1.0);
}

TEST(RunFull, ZeroReadoutDurationIsVacuum) {
  auto p = table_point(0.06);
  p.tau_R = 0.0;
  const auto r = run_full(p, Frame::RWA);
  EXPECT_LE((r.cm_pulse_pulse.matrix().bottomRightCorner(2, 2) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(r.tau_f, r.tau_i);
}

TEST(RunFull, WeakCouplingMatchesAdiabaticComposition) {
  const auto p = noiseless(0.05, 0.0);
  const auto r = run_full(p, Frame::RWA);
  const auto ref = adiabatic_red(r.readout_t_factor, adiabatic_blue(adiabatic_gain(p, p.tau), p.n0));
  EXPECT_LT(max_norm_relative(r.cm_pulse_pulse.matrix(), ref.matrix()), 0.05);
  EXPECT_GT(r.readout_t_factor, 1.0);
}

TEST(RunFull, PulseMechanicsAgreesWithRunBlue) {
  const auto p = table_point(0.06);
  const auto r = run_full(p, Frame::RWA);
  const auto b = run_blue(p, Frame::RWA);
  EXPECT_LE((r.cm_pulse_mech.matrix() - b.cm.matrix()).cwiseAbs().maxCoeff(), 1e-9 * b.cm.matrix().norm());
  EXPECT_DOUBLE_EQ(r.tau_i, p.tau);
  EXPECT_DOUBLE_EQ(r.tau_f, p.tau + p.tau_R);
}

TEST(RunFull, TablePointDetectable) {
  const auto r = run_full(table_point(0.06), Frame::RWA);
  EXPECT_GT(r.measures_pp.s_db, 0.0);
  EXPECT_LE(r.measures_pp.s_db, r.measures_pm.s_db);
  EXPECT_GT(r.readout_transfer, 0.99);
  // The readout carries the correlations with the same sign as the mechanics.
  EXPECT_GT(r.cm_pulse_pulse.matrix()(0, 2), 0.0);
  EXPECT_LT(r.cm_pulse_pulse.matrix()(1, 3), 0.0);
}

TEST(RunFull, ReadoutAddsNoise) {
  for (double rate : {1e-3, 0.06, 0.16, 0.3}) {
    const auto r = run_full(table_point(rate), Frame::RWA);
    EXPECT_LE(r.measures_pp.s_db, r.measures_pm.s_db) << rate;
    if (r.measures_pp.e_n > 0.0) {
      EXPECT_GT(r.measures_pp.s_db, 0.0);
    }
  }
}

TEST(RunFull, DelayCostsCorrelations) {
  auto p = table_point(0.06);
  const double s0 = run_full(p, Frame::RWA).measures_pp.s_db;
  p.tau_D = 2.0;
  const auto delayed = run_full(p, Frame::RWA);
  EXPECT_LT(delayed.measures_pp.s_db, s0);
  EXPECT_DOUBLE_EQ(delayed.tau_i, p.tau + 2.0);
}

TEST(RunFull, DelayIsFrameConsistent) {
  // With Omega large the beyond-RWA delay reproduces the closed-form one.
  auto p = table_point(0.06);
  p.omega = 40.0;
  p.tau_D = 1.5;
  SimOptions o;
  o.dt = 0.001;
  const double rwa = run_full(p, Frame::RWA, o).measures_pp.s_db;
  const double full = run_full(p, Frame::BeyondRWA, o).measures_pp.s_db;
  EXPECT_NEAR(full, rwa, 0.1);
}

TEST(Targets, NamesRoundTrip) {
  for (auto t : {Target::SqueezingPM, Target::NegativityPM, Target::SqueezingPP, Target::NegativityPP})
    EXPECT_EQ(parse_target(target_name(t)), t);
  EXPECT_FALSE(parse_target("nope").has_value());
}

TEST(Ensemble, PerturbationStaysInRange) {
  const SystemParams p;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto q = perturbed_params(p, 0.1, 42, i);
    EXPECT_GE(q.g, 0.9 * p.g);
    EXPECT_LE(q.g, 1.1 * p.g);
    EXPECT_GE(q.tau, 0.9 * p.tau);
    EXPECT_LE(q.tau, 1.1 * p.tau);
    EXPECT_EQ(q.tau_R, q.tau);
    EXPECT_GE(std::log10(q.n0), 0.9 * 4.0 - 1e-12);
    EXPECT_LE(std::log10(q.n0), 1.1 * 4.0 + 1e-12);
    EXPECT_EQ(q.reheating(), p.reheating());
  }
  EXPECT_NE(perturbed_params(p, 0.1, 42, 0).g, perturbed_params(p, 0.1, 43, 0).g);
}

TEST(Ensemble, ZeroWidthGivesPointValue) {
  const auto p = table_point(0.06);
  const auto st = monte_carlo_ensemble(p, Target::SqueezingPM, 3, 0.0, 1);
  EXPECT_EQ(st.std, 0.0);
  EXPECT_EQ(st.mean, run_blue(p, Frame::RWA).measures.s_db);
}

TEST(Ensemble, SingleSample) {
  const auto p = table_point(0.06);
  const auto st = monte_carlo_ensemble(p, Target::NegativityPP, 1, 0.1, 5);
  ASSERT_EQ(st.values.size(), 1u);
  EXPECT_EQ(st.mean, st.values[0]);
  EXPECT_EQ(st.min, st.values[0]);
  EXPECT_EQ(st.max, st.values[0]);
  EXPECT_EQ(st.std, 0.0);
  EXPECT_EQ(st.values[0], run_full(perturbed_params(p, 0.1, 5, 0), Frame::RWA).measures_pp.e_n);
}

TEST(Ensemble, ReproducibleAcrossSchedules) {
  const auto p = table_point(0.06);
  const auto a = monte_carlo_ensemble(p, Target::SqueezingPM, 12, 0.1, 2024, Frame::RWA, {}, 1);
  const auto b = monte_carlo_ensemble(p, Target::SqueezingPM, 12, 0.1, 2024, Frame::RWA, {}, 4);
  EXPECT_TRUE(bit_identical(a, b));
  EXPECT_GT(a.std, 0.0);
  EXPECT_LE(a.min, a.mean);
  EXPECT_GE(a.max, a.mean);
  EXPECT_EQ(a.succeeded, 12u);
}

TEST(Ensemble, FailuresAreReported) {
  auto p = table_point(0.06);
  p.g = 0.0;
  const auto st = monte_carlo_ensemble(p, Target::SqueezingPM, 4, 0.1, 1);
  EXPECT_EQ(st.count, 4u);
  EXPECT_EQ(st.succeeded, 0u);
  ASSERT_EQ(st.failures.size(), 4u);
  EXPECT_EQ(st.failures[2].index, 2u);
  EXPECT_FALSE(st.failures[2].message.empty());
}

TEST(Ensemble, RejectsBadArguments) {
  EXPECT_THROW(monte_carlo_ensemble(SystemParams{}, Target::SqueezingPM, 0, 0.1, 1), InvalidArgument);
  EXPECT_THROW(monte_carlo_ensemble(SystemParams{}, Target::SqueezingPM, 2, 1.5, 1), InvalidArgument);
}

TEST(CriticalReheating, BracketsTheSignChange) {
  const auto crit = critical_reheating(SystemParams{}, Target::SqueezingPM, Frame::RWA);
  ASSERT_TRUE(crit.bracketed);
  EXPECT_GT(crit.gamma_crit, 0.3);
  EXPECT_LT(crit.gamma_crit, 1.0);
  EXPECT_NEAR(run_blue(table_point(crit.gamma_crit), Frame::RWA).measures.s_db, 0.0, 1e-4);
  const auto pp = critical_reheating(SystemParams{}, Target::SqueezingPP, Frame::RWA);
  EXPECT_LT(pp.gamma_crit, crit.gamma_crit);
}

TEST(CriticalReheating, UnbracketedRange) {
  const auto crit = critical_reheating(SystemParams{}, Target::SqueezingPM, Frame::RWA, {}, 1e-4, 1e-2);
  EXPECT_FALSE(crit.bracketed);
  EXPECT_DOUBLE_EQ(crit.gamma_crit, 1e-2);
}

TEST(OptimizeHeating, PicksTheBestCell) {
  const auto best =
      optimize_heating_tolerance(SystemParams{}, {0.3, 0.6}, {4.0, 8.0}, Target::SqueezingPM, Frame::RWA, {}, 2);
  const auto direct = critical_reheating(SystemParams{}, Target::SqueezingPM, Frame::RWA);
  EXPECT_GE(best.gamma_crit, direct.gamma_crit - 1e-9);
  EXPECT_GT(best.g, 0.0);
}
