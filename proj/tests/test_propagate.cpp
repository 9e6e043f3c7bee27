#include "pulsecorr/propagate.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace pulsecorr;

namespace {

SystemParams cold(double g) {
  SystemParams p;
  p.g = g;
  p.gamma = 0.0;
  p.n_th = 0.0;
  return p;
}

LyapunovOptions step(double dt) {
  LyapunovOptions o;
  o.dt = dt;
  return o;
}

}  // namespace

TEST(ModeProfile, NormalizedBySimpson) {
  const ModeProfile f({0.0, 1.0, 2.0, 1.0, 0.0}, 0.25);
  EXPECT_NEAR(f.norm_squared(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(f.duration(), 1.0);
  EXPECT_DOUBLE_EQ(f(-0.1), 0.0);
  EXPECT_DOUBLE_EQ(f(1.1), 0.0);
  EXPECT_NEAR(f(0.375), 0.5 * (f.samples()[1] + f.samples()[2]), 1e-15);
  EXPECT_DOUBLE_EQ(f(0.5), f.samples()[2]);
}

TEST(ModeProfile, RejectsBadInput) {
  EXPECT_THROW(ModeProfile({1.0, 2.0}, 0.1), InvalidArgument);
  EXPECT_THROW(ModeProfile({1.0, 2.0, 3.0}, 0.0), InvalidArgument);
  EXPECT_THROW(ModeProfile({0.0, 0.0, 0.0}, 0.1), DegenerateProfile);
}

TEST(TemporalMode, ZeroCouplingIsDegenerate) {
  EXPECT_THROW(temporal_mode(build_drift_rwa(cold(0.0), PulseKind::Blue), 8.0, 0.01), DegenerateProfile);
}

TEST(TemporalMode, BlueProfileIsPositiveAndUnimodal) {
  const auto f = temporal_mode(build_drift_rwa(cold(0.6), PulseKind::Blue), 8.0, 0.01);
  const auto& s = f.samples();
  EXPECT_EQ(s.front(), 0.0);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    EXPECT_GT(s[k], 0.0);
    if (s[k] > s[peak]) peak = k;
  }
  for (std::size_t k = 1; k <= peak; ++k) EXPECT_GE(s[k], s[k - 1]);
  for (std::size_t k = peak + 1; k < s.size(); ++k) EXPECT_LE(s[k], s[k - 1]);
}

TEST(TemporalMode, ProportionalToTransferElement) {
  for (auto kind : {PulseKind::Blue, PulseKind::Red}) {
    const Matrix a = build_drift_rwa(cold(0.6), kind);
    const auto f = temporal_mode(a, 8.0, 0.05);
    const double h = f.grid_step();
    const double scale = f.samples()[40] / oracle::expm(a * (40 * h))(0, 3);
    for (std::size_t k : {10u, 100u, 200u, 320u})
      EXPECT_NEAR(f.samples()[k], scale * oracle::expm(a * (static_cast<double>(k) * h))(0, 3), 1e-12);
    EXPECT_GT(scale, 0.0);
    EXPECT_NEAR(f.norm_squared(), 1.0, 1e-12);
  }
}

TEST(TemporalMode, GridFollowsIntegratorStep) {
  const auto f = temporal_mode(build_drift_rwa(cold(0.6), PulseKind::Blue), 1.0, 0.3);
  EXPECT_EQ(f.samples().size(), 9u);  // 4 steps, 2 samples each
  EXPECT_DOUBLE_EQ(f.duration(), 1.0);
}

TEST(AugmentWithPulse, VacuumFixedPoint) {
  const auto f = temporal_mode(build_drift_rwa(cold(0.6), PulseKind::Blue), 8.0, 0.01);
  const auto p = cold(0.0);
  const auto sys = augment_with_pulse(
      LyapunovSystem::constant(build_drift_rwa(p, PulseKind::Blue), build_diffusion(p, Frame::RWA)), f, p.kappa);
  Matrix v0 = Matrix::Zero(6, 6);
  v0.topLeftCorner(4, 4).setIdentity();
  const Matrix v = solve_lyapunov(sys, v0, 0.0, 8.0, step(0.01)).final_state();
  EXPECT_LE((v.bottomRightCorner(2, 2) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((v.topLeftCorner(2, 2) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(v.bottomLeftCorner(2, 4).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(AugmentWithPulse, OutsideWindowThePulseIsFrozen) {
  const auto f = temporal_mode(build_drift_rwa(cold(0.6), PulseKind::Blue), 2.0, 0.01);
  const auto p = cold(0.6);
  const auto sys = augment_with_pulse(
      LyapunovSystem::constant(build_drift_rwa(p, PulseKind::Blue), build_diffusion(p, Frame::RWA)), f, p.kappa,
      5.0);
  Matrix v0 = Matrix::Zero(6, 6);
  v0.topLeftCorner(4, 4).setIdentity();
  const Matrix v = solve_lyapunov(sys, v0, 0.0, 4.0, step(0.01)).final_state();
  EXPECT_EQ(v.bottomRows(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AugmentIdle, PadsWithZeros) {
  const auto sys = augment_idle(LyapunovSystem::constant(Matrix::Identity(4, 4), Matrix::Identity(4, 4)));
  EXPECT_EQ(sys.dim, 6);
  const Matrix a = sys.drift(0.3);
  EXPECT_EQ(a.bottomRows(2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sys.diffusion(1.0).rightCols(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FreeSegment, ZeroDelayIsIdentity) {
  oracle::Rng rng(1);
  const CovarianceMatrix v(oracle::random_physical_cm(rng), {"cav", "mech"});
  EXPECT_EQ((free_segment(v, 0.0, SystemParams{}).matrix() - v.matrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FreeSegment, ShortDelayAddsReheating) {
  SystemParams p;
  p.set_reheating(0.16, 1e-6);
  auto v = CovarianceMatrix::vacuum({"cav", "mech", "pulseB"});
  v.matrix()(2, 2) = v.matrix()(3, 3) = 5.0;
  const double tau_d = 0.5;
  const auto out = free_segment(v, tau_d, p);
  EXPECT_NEAR(out.matrix()(2, 2) - 5.0, 2.0 * p.reheating() * tau_d, 1e-5);
  EXPECT_EQ(out.matrix()(4, 4), 1.0);
}

TEST(FreeSegment, LongDelayThermalizes) {
  SystemParams p;
  p.gamma = 0.5;
  p.n_th = 4.0;
  oracle::Rng rng(2);
  Matrix v6 = Matrix::Identity(6, 6);
  v6.topLeftCorner(4, 4) = oracle::random_physical_cm(rng);
  const auto out = free_segment(CovarianceMatrix(v6, {"cav", "mech", "pulseB"}), 200.0, p);
  EXPECT_NEAR(out.matrix()(2, 2), 2 * p.n_th + 1, 1e-9);
  EXPECT_NEAR(out.matrix()(3, 3), 2 * p.n_th + 1, 1e-9);
  EXPECT_NEAR(out.matrix()(0, 0), 1.0, 1e-9);
  EXPECT_LE(out.matrix().block(2, 4, 2, 2).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FreeSegment, MatchesIntegralForm) {
  SystemParams p;
  p.gamma = 0.05;
  p.n_th = 3.0;
  oracle::Rng rng(3);
  Matrix v = Matrix::Identity(8, 8);
  v.topLeftCorner(4, 4) = oracle::random_physical_cm(rng);
  v.bottomRightCorner(4, 4) = oracle::random_physical_cm(rng);
  v.block(2, 4, 2, 2).setConstant(0.3);
  v.block(4, 2, 2, 2).setConstant(0.3);
  Matrix a = Matrix::Zero(8, 8), d = Matrix::Zero(8, 8);
  a.topLeftCorner(4, 4) = build_drift_rwa(p, PulseKind::Off);
  d.topLeftCorner(4, 4) = build_diffusion(p, Frame::RWA);
  const auto out = free_segment(CovarianceMatrix(v, {"cav", "mech", "pulseB", "pulseR"}), 3.0, p);
  EXPECT_LE((out.matrix() - oracle::lyapunov_constant(a, d, v, 3.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FreeSegment, RejectsBadInput) {
  const auto v = CovarianceMatrix::vacuum({"cav", "mech"});
  EXPECT_THROW(free_segment(v, -1.0, SystemParams{}), InvalidArgument);
  EXPECT_THROW(free_segment(CovarianceMatrix::vacuum({"cav"}), 1.0, SystemParams{}), InvalidArgument);
}
