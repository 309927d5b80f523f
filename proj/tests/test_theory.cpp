#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "graphturing/sampler.hpp"
#include "graphturing/spectral.hpp"
#include "graphturing/theory.hpp"

using namespace graphturing;

namespace {

const GraphonModel kSmallWorld = GraphonModel::small_world(0.90, 0.01, 0.20);

}  // namespace

TEST(Theory, ShiftedSpectrumExamples) {
  Eigen::VectorXd lambdas(3);
  lambdas << 0.0, -0.0966, -0.3;
  const auto s = shifted_spectrum(lambdas, -0.0966);
  EXPECT_NEAR(s.ell(0), -0.0966 * 0.0966, 1e-15);
  EXPECT_NEAR(s.ell(0), -0.00933, 1e-5);
  EXPECT_EQ(s.ell(1), 0.0);
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_LE(s.ell(k), 0.0);
}

TEST(Theory, PitchforkWithoutQuadraticTerm) {
  const auto p = pitchfork(graphon_spectrum(kSmallWorld), 1, 0.0, 1.3);
  EXPECT_DOUBLE_EQ(p.gamma, 3.9);
  EXPECT_EQ(p.criticality, Criticality::Supercritical);
  EXPECT_NEAR(p.amplitude(0.02), 2.0 * std::sqrt(0.02 / 3.9), 1e-15);
  EXPECT_TRUE(std::isnan(p.amplitude(-0.02)));
  EXPECT_NEAR(p.profile(0.25, 0.02, 0.25), p.amplitude(0.02), 1e-15);
}

TEST(Theory, PitchforkSmallWorld) {
  const auto gs = graphon_spectrum(kSmallWorld);
  const auto p = pitchfork(gs, 1, 1.0, 1.0);
  const double l1 = gs.eigenvalue(1), l2 = gs.eigenvalue(2);
  const double oracle = 3.0 + 4.0 / (-l1 * l1) + 2.0 / (-(l2 - l1) * (l2 - l1));
  EXPECT_NEAR(p.gamma, oracle, 1e-12 * std::fabs(oracle));
  EXPECT_EQ(p.criticality, oracle > 0 ? Criticality::Supercritical : Criticality::Subcritical);
}

TEST(Theory, PitchforkDegenerateResonanceRejected) {
  EXPECT_THROW(pitchfork(graphon_spectrum(GraphonModel::resonance_example()), 1, 1.0, 1.0),
               std::invalid_argument);
}

TEST(TheoryProperty, CriticalityFlipsWithGamma) {
  const auto gs = graphon_spectrum(kSmallWorld);
  Criticality prev = pitchfork(gs, 1, 1.0, 1e-6).criticality;
  int flips = 0;
  for (int i = 1; i <= 2000; ++i) {
    const double b = 1e-6 + i * 0.25;
    const auto p = pitchfork(gs, 1, 1.0, b);
    EXPECT_EQ(p.criticality == Criticality::Supercritical, p.gamma > 0.0);
    if (p.criticality != prev) ++flips;
    prev = p.criticality;
  }
  // 3b + 4/l0 + 2/l2 is increasing in b: exactly one crossing for b up to 500.
  EXPECT_EQ(flips, 1);
}

TEST(Theory, ResonanceExamples) {
  const auto zero = resonance(1, 1.0, 0.0, 0.1, 1);
  EXPECT_EQ(zero.sample(32).cwiseAbs().maxCoeff(), 0.0);
  const auto plus = resonance(1, 2.0, 0.01, 0.0, 1);
  const auto minus = resonance(1, 2.0, 0.01, 0.0, -1);
  EXPECT_NEAR(std::fabs(plus.amp1 / plus.amp2), std::numbers::sqrt2, 1e-15);
  EXPECT_EQ(plus.amp1, -minus.amp1);
  EXPECT_EQ(plus.amp2, minus.amp2);
  EXPECT_EQ(plus.k2, 2);
  EXPECT_THROW(resonance(1, 0.0, 0.01, 0.0, 1), std::invalid_argument);
  // The (eta, Omega) form reproduces the profile.
  for (const auto& rp : {plus, minus, resonance(2, -1.0, -0.03, 0.17, 1)}) {
    for (double x : {0.0, 0.13, 0.5, 0.77}) {
      const double alt = rp.epsilon * (rp.eta1 * std::cos(2 * std::numbers::pi * rp.k1 * (x - rp.omega1)) +
                                       rp.eta2 * std::cos(2 * std::numbers::pi * rp.k2 * (x - rp.omega2)));
      EXPECT_NEAR(alt, rp.profile(x), 1e-14);
    }
  }
}

TEST(Theory, GammaRWithoutQuadraticTerm) {
  EXPECT_DOUBLE_EQ(gamma_r(2.0, 0.0, -3.0, -5.0), 3.0);
}

TEST(Theory, RootsAtZeroBeta) {
  const double g = 1.7;
  EXPECT_EQ(epsilon_sn(0.0, 1.0, g), 0.0);
  EXPECT_NEAR(z1_plus(0.0, 1.0, g, 0.02), std::sqrt(0.02 / g), 1e-15);
  EXPECT_NEAR(z1_minus(0.0, 1.0, g, 0.02), -std::sqrt(0.02 / g), 1e-15);
  EXPECT_TRUE(std::isnan(z1_plus(0.0, 1.0, g, -0.02)));
}

TEST(TheoryProperty, RootAndDiscriminantIdentities) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const double beta = u(rng), r = u(rng), g = 0.1 + 2.0 * std::fabs(u(rng));
    const double sn = epsilon_sn(beta, r, g);
    const double eps = sn + std::fabs(u(rng));
    for (double z : {z1_plus(beta, r, g, eps), z1_minus(beta, r, g, eps)}) {
      // z solves eps + r beta z - Gamma z^2 = 0, i.e. the nontrivial factor of the cubic.
      EXPECT_NEAR(eps + r * beta * z - g * z * z, 0.0, 1e-10);
      EXPECT_NEAR(eps * z + r * beta * z * z - g * z * z * z, 0.0, 1e-10);
    }
    EXPECT_NEAR(beta * beta * r * r + 4.0 * g * sn, 0.0, 1e-10);
    EXPECT_NEAR(z1_plus(beta, r, g, sn), z1_minus(beta, r, g, sn), 1e-10);
    ++checked;
  }
}

TEST(TheoryProperty, RescalingIsExactOnGraphonValues) {
  const auto gs = graphon_spectrum(kSmallWorld);
  for (int n : {50, 400, 2000}) {
    for (double rt : {0.0, 0.5, 1.0}) {
      const double graphon = pitchfork(gs, 1, rt, 1.0).gamma;
      EXPECT_NEAR(rescaled_graph_cubic(gs, 1, rt, 1.0, n), graphon, 1e-12 * std::fabs(graphon));
    }
  }
}

TEST(Theory, RandomPredictionOnRealization) {
  const int n = 400;
  const auto spec = eig_sym(random_graph(kSmallWorld, n, 1).laplacian);
  const auto gs = graphon_spectrum(kSmallWorld);
  const auto p = random_prediction(spec, 1, gs, 1, 1.0, 1.0);
  EXPECT_NEAR(p.kappa, spec.eigenvalues(1), 0.0);
  EXPECT_NEAR(p.kappa, -37.7, 3.0);
  EXPECT_DOUBLE_EQ(p.l_n, -p.kappa * p.kappa);
  EXPECT_NEAR(p.gamma_r, 1.5 + 2.0 / p.l_n + 1.0 / p.l_3, 1e-14);
  EXPECT_NEAR(p.gamma_r, 1.5, 0.01);
  EXPECT_NEAR(p.beta, std::sqrt(400.0) * quad_self_interaction(spec.eigenvectors.col(1)), 1e-14);
  EXPECT_NEAR(p.epsilon_sn, -p.beta * p.beta / (4.0 * p.gamma_r), 1e-18);
  // l_3 comes from the eigenvalue nearest N lambda_2 of the graphon.
  const double target = n * gs.eigenvalue(2);
  EXPECT_LE(std::fabs(spec.eigenvalues(p.l_3_index) - target), 0.05 * n);
  EXPECT_NEAR(std::abs(p.a1), 1.0 / std::numbers::sqrt2, 0.1);
  EXPECT_EQ(p.a2(n), p.beta / 20.0);
  EXPECT_EQ(p.a3(n), -p.gamma_r / n);
  EXPECT_THROW(random_prediction(spec, n, gs, 1, 1.0, 1.0), std::out_of_range);
}

TEST(Theory, RandomPredictionProfileFollowsSelectedRoot) {
  RandomPrediction p;
  p.k_star = 1;
  p.beta = 0.3;
  p.r = 1.0;
  p.gamma_r = 1.5;
  p.omega = 0.1;
  EXPECT_EQ(p.z_star(0.01), p.z_minus(0.01));
  p.beta = -0.3;
  EXPECT_EQ(p.z_star(0.01), p.z_plus(0.01));
  const auto u = p.profile(0.01, 50);
  const double x = 1.0 / 50;
  EXPECT_NEAR(u(0), std::numbers::sqrt2 * p.z_star(0.01) * std::cos(2 * std::numbers::pi * (x - 0.1)), 1e-15);
}

TEST(Theory, RandomPredictionWithZeroBetaIsPitchfork) {
  const auto spec = eig_sym(deterministic_graph(kSmallWorld, 200).laplacian);
  const auto gs = graphon_spectrum(kSmallWorld);
  const Eigen::VectorXd cosine = [&] {
    Eigen::VectorXd v(200);
    for (int j = 0; j < 200; ++j) v(j) = std::sqrt(2.0 / 200) * std::cos(2 * std::numbers::pi * (j + 1) / 200.0);
    return v;
  }();
  const auto p = random_prediction(spec, 1, cosine, gs, 1, 1.0, 1.0);
  EXPECT_NEAR(p.beta, 0.0, 1e-12);
  EXPECT_NEAR(p.epsilon_sn, 0.0, 1e-24);
  EXPECT_NEAR(p.z_plus(0.01), std::sqrt(0.01 / p.gamma_r), 1e-9);
  EXPECT_NEAR(p.omega, 0.0, 1e-12);
}
