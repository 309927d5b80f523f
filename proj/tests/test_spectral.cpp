#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "graphturing/sampler.hpp"
#include "graphturing/spectral.hpp"

using namespace graphturing;

namespace {

const GraphonModel kSmallWorld = GraphonModel::small_world(0.90, 0.01, 0.20);

Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

Eigen::VectorXd cosine_mode(int n, int k) {
  Eigen::VectorXd v(n);
  for (int j = 0; j < n; ++j) v(j) = std::sqrt(2.0 / n) * std::cos(2.0 * std::numbers::pi * k * (j + 1) / n);
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST(Spectral, DiagonalMatrix) {
  Eigen::MatrixXd d = Eigen::Vector3d(3.0, 1.0, -2.0).asDiagonal();
  const auto s = eig_sym(d);
  EXPECT_EQ(s.eigenvalues, Eigen::Vector3d(3.0, 1.0, -2.0));
  EXPECT_TRUE(s.eigenvectors.isApprox(Eigen::Matrix3d::Identity(), 1e-14));
}

TEST(Spectral, RejectsAsymmetric) {
  Eigen::Matrix2d m;
  m << 1, 2, 3, 4;
  EXPECT_THROW(eig_sym(m), std::invalid_argument);
  EXPECT_THROW(eig_sym(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(Spectral, DecompositionInvariants) {
  for (const auto& g : {deterministic_graph(kSmallWorld, 120), random_graph(kSmallWorld, 120, 3)}) {
    const auto s = eig_sym(g.laplacian);
    const auto& V = s.eigenvectors;
    const double resid = (g.laplacian * V - V * s.eigenvalues.asDiagonal()).norm();
    EXPECT_LE(resid, 1e-8 * std::max(1.0, g.laplacian.norm()));
    EXPECT_LE((V.transpose() * V - Eigen::MatrixXd::Identity(120, 120)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index k = 1; k < s.size(); ++k) EXPECT_GE(s.eigenvalues(k - 1), s.eigenvalues(k));
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      const auto col = V.col(k);
      for (Eigen::Index j = 0; j < col.size(); ++j) {
        if (std::fabs(col(j)) > 1e-6 * col.norm()) {
          EXPECT_GT(col(j), 0.0);
          break;
        }
      }
    }
  }
}

TEST(Spectral, DeterministicPairMatchesTwoIndices) {
  const auto ev = eigenvalues_sym(deterministic_graph(kSmallWorld, 400).laplacian);
  MatchBudget b;
  b.mu = graphon_spectrum(kSmallWorld).eigenvalue(1);
  b.delta0 = 0.05;
  b.delta = 0.03;
  EXPECT_EQ(match_eigenvalues(ev, b, 400).size(), 2u);

  MatchBudget zero;
  zero.mu = 0.0;
  zero.delta0 = 1e-5;
  zero.delta = 1e-6;
  const auto idx = match_eigenvalues(ev, zero, 400);
  ASSERT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx[0], 0);
}

TEST(Spectral, BudgetValidation) {
  MatchBudget b;
  b.delta0 = 0.1;
  b.delta = 0.2;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b.delta = 0.05;
  EXPECT_NO_THROW(b.validate());
  b.gamma = 0.5;
  EXPECT_THROW(b.validate(), std::invalid_argument);
}

TEST(Spectral, DeltaZeroForSmallWorldPair) {
  const auto s = graphon_spectrum(kSmallWorld);
  const auto b = budget_for_mode(s, 1, 0.5, 0.25);
  EXPECT_EQ(b.multiplicity, 2);
  double nearest = std::fabs(s.accumulation_point - b.mu);
  for (const auto& e : s.entries) {
    if (e.mode != 1) nearest = std::min(nearest, std::fabs(e.eigenvalue - b.mu));
  }
  EXPECT_DOUBLE_EQ(b.delta0, 0.5 * nearest);
  EXPECT_DOUBLE_EQ(b.delta, 0.25 * nearest);
}

TEST(Spectral, WeylGapExamples) {
  const auto ev = eigenvalues_sym(deterministic_graph(kSmallWorld, 50).laplacian);
  EXPECT_EQ(weyl_gap(ev, ev), 0.0);
  EXPECT_NEAR(weyl_gap(ev, (ev.array() + 0.7).matrix()), 0.7, 1e-12);
  EXPECT_THROW(weyl_gap(ev, ev.head(10)), std::invalid_argument);
}

TEST(Spectral, OpnormExamples) {
  EXPECT_NEAR(opnorm(Eigen::MatrixXd::Identity(5, 5)), 1.0, 1e-14);
  Eigen::MatrixXd d = Eigen::Vector2d(-5.0, 2.0).asDiagonal();
  EXPECT_NEAR(opnorm(d), 5.0, 1e-14);
  const Eigen::MatrixXd diff = random_graph(kSmallWorld, 100, 1).laplacian - deterministic_graph(kSmallWorld, 100).laplacian;
  const auto ev = eigenvalues_sym(diff);
  EXPECT_NEAR(opnorm(diff), std::max(std::fabs(ev(0)), std::fabs(ev(ev.size() - 1))), 1e-10);
  EXPECT_GT(opnorm(diff), 0.0);
}

TEST(Spectral, ConcentrationReportExamples) {
  const auto rep = concentration_report(kSmallWorld, 100, 0.25, 20, 5);
  EXPECT_DOUBLE_EQ(rep.failure_bound, 2.0 * 100 * std::exp(-std::pow(100.0, 0.5) / 40.0));
  for (double r : rep.ratios) EXPECT_LT(r, 1.0);
  const auto again = concentration_report(kSmallWorld, 100, 0.25, 20, 5, 3);
  EXPECT_EQ(rep.norms, again.norms);
  EXPECT_EQ(rep.trial_seeds, again.trial_seeds);

  const auto empty = concentration_report(GraphonModel::erdos_renyi(0.0), 30, 0.25, 3, 1);
  for (double r : empty.ratios) EXPECT_EQ(r, 0.0);
}

TEST(Spectral, FourierBasisIdentities) {
  const int n = 12;
  const auto w0 = fourier_basis(n, 0);
  for (int j = 0; j < n; ++j) EXPECT_NEAR(std::abs(w0(j) - 1.0 / std::sqrt(12.0)), 0.0, 1e-15);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const auto ip = fourier_basis(n, l).dot(fourier_basis(n, k));
      EXPECT_NEAR(std::abs(ip - (k == l ? 1.0 : 0.0)), 0.0, 1e-12);
    }
    EXPECT_LE((fourier_basis(n, k).conjugate() - fourier_basis(n, n - k)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Spectral, ProcrustesExamples) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd V = random_orthogonal(30, rng).leftCols(3);
  EXPECT_NEAR(procrustes_residual(V, V), 0.0, 1e-12);
  const Eigen::MatrixXd Q = random_orthogonal(3, rng);
  EXPECT_NEAR(procrustes_residual(V * Q, V), 0.0, 1e-12);
  EXPECT_THROW(procrustes_residual(V, V.leftCols(2)), std::invalid_argument);
}

TEST(SpectralProperty, ProcrustesOptimality) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd V = random_orthogonal(40, rng).leftCols(4);
    const Eigen::MatrixXd Q = random_orthogonal(4, rng);
    Eigen::MatrixXd E(40, 4);
    for (int i = 0; i < 40; ++i) {
      for (int j = 0; j < 4; ++j) E(i, j) = g(rng);
    }
    E *= 1e-3 / E.norm();
    EXPECT_LE(procrustes_residual(V * Q + E, V), 1e-3 + 1e-9);
  }
}

TEST(Spectral, QuadSelfInteraction) {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(400, 1.0 / 20.0);
  EXPECT_NEAR(quad_self_interaction(c), 0.05, 1e-15);
  EXPECT_THROW(quad_self_interaction(Eigen::VectorXd::Ones(4)), std::invalid_argument);
}

TEST(SpectralProperty, FourierCosinesHaveNoSelfInteraction) {
  for (int n : {7, 12, 400}) {
    for (int k = 1; k < n; ++k) {
      if ((3 * k) % n == 0 || (2 * k) % n == 0) continue;
      EXPECT_NEAR(quad_self_interaction(cosine_mode(n, k)), 0.0, 1e-12) << "N=" << n << " k=" << k;
    }
  }
}

TEST(Spectral, FourierCorrelationOfModes) {
  const int n = 64;
  const std::vector<int> one{1}, three{3}, both{1, 2};
  EXPECT_NEAR(fourier_correlation(cosine_mode(n, 1), one), 1.0, 1e-12);
  EXPECT_NEAR(fourier_correlation(cosine_mode(n, 1), three), 0.0, 1e-12);
  const Eigen::VectorXd mix = (cosine_mode(n, 1) + cosine_mode(n, 2)) / std::sqrt(2.0);
  EXPECT_NEAR(fourier_correlation(mix, both), 1.0, 1e-12);
  EXPECT_NEAR(fourier_correlation(mix, one), std::sqrt(0.5), 1e-12);
}

TEST(SpectralProperty, WeylConsistency) {
  for (int n : {100, 200}) {
    const auto det = deterministic_graph(kSmallWorld, n).laplacian;
    const auto ev_d = eigenvalues_sym(det);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto rnd = random_graph(kSmallWorld, n, derive_seed(17, s)).laplacian;
      EXPECT_LE(weyl_gap(eigenvalues_sym(rnd), ev_d), opnorm(rnd - det) * (1.0 + 1e-12));
    }
  }
}

TEST(SpectralProperty, DavisKahanResidualDecays) {
  const auto gs = graphon_spectrum(kSmallWorld);
  const auto budget = budget_for_mode(gs, 1, 0.5, 0.1);
  std::vector<double> medians;
  for (int n : {100, 200, 400}) {
    const auto ref = eig_sym(deterministic_graph(kSmallWorld, n).laplacian);
    const auto ref_idx = match_eigenvalues(ref.eigenvalues, budget, n);
    ASSERT_EQ(ref_idx.size(), 2u);
    std::vector<double> res;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto spec = eig_sym(random_graph(kSmallWorld, n, derive_seed(29, s)).laplacian);
      const auto idx = match_eigenvalues(spec.eigenvalues, budget, n);
      if (idx.size() != ref_idx.size()) continue;
      const auto rep = align_to_fourier(spec, idx, 1, budget, ref, ref_idx);
      EXPECT_GE(rep.procrustes_residual, 0.0);
      for (const auto& a : rep.coefficients) EXPECT_LE(std::abs(a), 1.0 + rep.fourier_residual);
      res.push_back(rep.procrustes_residual);
    }
    ASSERT_GE(res.size(), 15u);
    medians.push_back(median(res));
  }
  EXPECT_GE(medians[0], medians[1]);
  EXPECT_GE(medians[1], medians[2]);
}

TEST(Spectral, AlignmentOfDeterministicGraphIsExact) {
  const auto gs = graphon_spectrum(kSmallWorld);
  const auto budget = budget_for_mode(gs, 1, 0.5, 0.1);
  const auto ref = eig_sym(deterministic_graph(kSmallWorld, 200).laplacian);
  const auto idx = match_eigenvalues(ref.eigenvalues, budget, 200);
  const auto rep = align_to_fourier(ref, idx, 1, budget, ref, idx);
  EXPECT_NEAR(rep.procrustes_residual, 0.0, 1e-10);
  EXPECT_LE(rep.fourier_residual, 1e-8);
  EXPECT_NEAR(rep.davis_kahan_bound, std::sqrt(16.0) / ((budget.delta0 - budget.delta) * std::pow(200.0, 0.4)), 1e-12);
  const std::vector<int> none;
  EXPECT_THROW(align_to_fourier(ref, none, 1, budget, ref, none), std::invalid_argument);
}
