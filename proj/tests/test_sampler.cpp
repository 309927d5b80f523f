#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "graphturing/sampler.hpp"
#include "graphturing/spectral.hpp"

using namespace graphturing;

namespace {

const GraphonModel kSmallWorld = GraphonModel::small_world(0.90, 0.01, 0.20);

}  // namespace

TEST(Sampler, ErdosRenyiDeterministicIsConstant) {
  const auto g = deterministic_graph(GraphonModel::erdos_renyi(0.3), 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(g.adjacency(i, j), i == j ? 0.0 : 0.3);
  }
  EXPECT_EQ(g.provenance, Provenance::Deterministic);
  EXPECT_FALSE(g.seed.has_value());
}

TEST(Sampler, SmallWorldEntryOnGrid) {
  const auto g = deterministic_graph(kSmallWorld, 5);
  // Nodes 1 and 2 sit at x = 1/5 and 2/5: ring distance 0.2.
  EXPECT_EQ(g.adjacency(0, 1), 0.90);
  EXPECT_EQ(g.adjacency(0, 2), 0.01);
  EXPECT_EQ(g.grid_point(0), 0.2);
}

TEST(Sampler, RejectsTinyGraphs) {
  EXPECT_THROW(deterministic_graph(kSmallWorld, 1), std::invalid_argument);
  EXPECT_THROW(random_graph(kSmallWorld, 1, 3), std::invalid_argument);
}

TEST(Sampler, RandomExtremes) {
  const auto full = random_graph(GraphonModel::erdos_renyi(1.0), 5, 99);
  const auto empty = random_graph(GraphonModel::erdos_renyi(0.0), 5, 99);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      EXPECT_EQ(full.adjacency(i, j), i == j ? 0.0 : 1.0);
      EXPECT_EQ(empty.adjacency(i, j), 0.0);
    }
  }
  EXPECT_EQ(full.provenance, Provenance::Random);
  EXPECT_EQ(full.seed, 99u);
}

TEST(Sampler, RandomEntryMeanOverSeeds) {
  // Entry (1, 2) only depends on (seed, 0, 1); sample it directly from the stream.
  const double w = evaluate(kSmallWorld, 1.0 / 200, 2.0 / 200);
  int hits = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) hits += edge_uniform(s, 0, 1) < w;
  const double mean = hits / 2000.0;
  EXPECT_GE(mean, 0.88);
  EXPECT_LE(mean, 0.92);

  const auto g = random_graph(kSmallWorld, 200, 5);
  EXPECT_EQ(g.adjacency(0, 1), edge_uniform(5, 0, 1) < w ? 1.0 : 0.0);
}

TEST(Sampler, LaplacianExamples) {
  EXPECT_EQ(laplacian(Eigen::MatrixXd::Zero(4, 4)), Eigen::MatrixXd::Zero(4, 4));
  Eigen::MatrixXd k3 = Eigen::MatrixXd::Ones(3, 3);
  k3.diagonal().setZero();
  const auto ev = eigenvalues_sym(laplacian(k3));
  EXPECT_NEAR(ev(0), 0.0, 1e-14);
  EXPECT_NEAR(ev(1), -3.0, 1e-14);
  EXPECT_NEAR(ev(2), -3.0, 1e-14);

  Eigen::MatrixXd bad = k3;
  bad(0, 1) = 0.5;
  EXPECT_THROW(laplacian(bad), std::invalid_argument);
  Eigen::MatrixXd diag = k3;
  diag(1, 1) = 1.0;
  EXPECT_THROW(laplacian(diag), std::invalid_argument);
}

TEST(Sampler, StepGraphonBlocks) {
  const auto er = step_graphon(GraphonModel::erdos_renyi(0.4), 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(er.block_value(i, j), 0.4);
  }
  const auto sw = step_graphon(kSmallWorld, 5);
  EXPECT_EQ(sw.block_value(0, 1), 0.90);
  EXPECT_EQ(sw.table(), sw.table().transpose());
  EXPECT_EQ(sw.value(0.1, 0.3), sw.block_value(0, 1));
  EXPECT_THROW(step_graphon(GraphonModel::bipartite(0.5, 0.5), 4), std::invalid_argument);
}

TEST(SamplerProperty, RealizationInvariants) {
  for (const auto& g : {deterministic_graph(kSmallWorld, 60), random_graph(kSmallWorld, 60, 11),
                        random_graph(GraphonModel::bipartite(0.5, 0.75), 60, 4)}) {
    EXPECT_EQ(g.adjacency, g.adjacency.transpose());
    EXPECT_EQ(g.adjacency.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.laplacian, g.laplacian.transpose());
    EXPECT_LE(g.laplacian.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    if (g.provenance == Provenance::Random) {
      EXPECT_EQ(g.laplacian.rowwise().sum().cwiseAbs().maxCoeff(), 0.0);
    }
    const auto ev = eigenvalues_sym(g.laplacian);
    EXPECT_LE(ev(0), 1e-10);
    EXPECT_NEAR(ev(0), 0.0, 1e-10);
  }
}

TEST(SamplerProperty, RefinedStepGraphonMatchesGraphSpectrum) {
  for (const auto& m : {kSmallWorld, GraphonModel::resonance_example()}) {
    for (int n : {4, 8, 16}) {
      const Eigen::VectorXd graph = eigenvalues_sym(deterministic_graph(m, n).laplacian) / n;
      const Eigen::VectorXd fine = eigenvalues_sym(step_graphon(m, n).refined_laplacian(8));
      // Every graph eigenvalue appears in the refined spectrum.
      for (Eigen::Index k = 1; k < graph.size(); ++k) {
        const double best = (fine.array() - graph(k)).abs().minCoeff();
        EXPECT_LE(best, 1e-9 * std::fabs(graph(k))) << "N=" << n << " k=" << k;
      }
    }
  }
}

TEST(SamplerProperty, DeterministicLaplacianIsCirculant) {
  for (const auto& m : {kSmallWorld, GraphonModel::resonance_example(), GraphonModel::erdos_renyi(0.2)}) {
    const int n = 16;
    const auto L = deterministic_graph(m, n).laplacian;
    for (int i = 0; i + 1 < n; ++i) {
      for (int j = 0; j < n; ++j) EXPECT_NEAR(L(i + 1, (j + 1) % n), L(i, j), 1e-12);
    }
    std::vector<double> dft(n);
    for (int k = 0; k < n; ++k) {
      std::complex<double> s = 0.0;
      for (int j = 0; j < n; ++j) s += L(0, j) * std::polar(1.0, -2.0 * std::numbers::pi * k * j / n);
      dft[static_cast<std::size_t>(k)] = s.real();
    }
    std::sort(dft.begin(), dft.end(), std::greater<>());
    const auto ev = eig_sym(L).eigenvalues;
    for (int k = 0; k < n; ++k) EXPECT_NEAR(ev(k), dft[static_cast<std::size_t>(k)], 1e-8);
  }
}

TEST(SamplerProperty, RandomGraphIndependentOfWorkerCount) {
  const auto a = random_graph(kSmallWorld, 150, 42, 1);
  const auto b = random_graph(kSmallWorld, 150, 42, 4);
  const auto c = random_graph(kSmallWorld, 150, 42, 1);
  EXPECT_EQ(a.adjacency, b.adjacency);
  EXPECT_EQ(a.adjacency, c.adjacency);
  EXPECT_NE(a.adjacency, random_graph(kSmallWorld, 150, 43).adjacency);
}

TEST(SamplerProperty, MeanFieldAgreement) {
  const int n = 50;
  const int seeds = 500;
  const auto det = deterministic_graph(kSmallWorld, n);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < seeds; ++s) sum += random_graph(kSmallWorld, n, derive_seed(123, static_cast<std::uint64_t>(s))).adjacency;
  const Eigen::MatrixXd mean = sum / seeds;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = det.adjacency(i, j);
      const double se = std::sqrt(p * (1.0 - p) / seeds);
      EXPECT_LE(std::fabs(mean(i, j) - p), 4.0 * se + 1e-15) << i << "," << j;
    }
  }
}

TEST(Sampler, ExportImportRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "graphturing_sampler_test";
  std::filesystem::remove_all(dir);
  const auto g = random_graph(kSmallWorld, 30, 8);
  export_realization(g, dir / "graph");
  const auto back = import_realization(dir / "graph");
  EXPECT_EQ(back.n, 30);
  EXPECT_EQ(back.adjacency, g.adjacency);
  EXPECT_EQ(back.seed, 8u);
  EXPECT_EQ(back.provenance, Provenance::Random);
  std::filesystem::remove_all(dir);
}
