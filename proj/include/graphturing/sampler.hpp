#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <Eigen/Dense>

#include "graphturing/graphon.hpp"

namespace graphturing {

enum class Provenance { Deterministic, Random };

/// A finite graph sampled from a graphon on the grid x_j = j/N, j = 1..N.
/// Node j (1-based) is stored at row/column j-1.
struct GraphRealization {
  int n = 0;
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd laplacian;
  Provenance provenance = Provenance::Deterministic;
  std::optional<std::uint64_t> seed;

  double grid_point(int row) const { return static_cast<double>(row + 1) / n; }
};

/// Weighted graph with adjacency W(x_i, x_j) off the diagonal.
GraphRealization deterministic_graph(const GraphonModel& model, int n);

/// Bernoulli graph with P(edge i~j) = W(x_i, x_j). Each upper-triangle entry draws
/// from a counter-based stream keyed by (seed, i, j), so the result does not
/// depend on evaluation order or thread count.
GraphRealization random_graph(const GraphonModel& model, int n, std::uint64_t seed, int jobs = 1);

/// Combinatorial Laplacian A - diag(row sums). Rejects asymmetric input or a
/// nonzero diagonal.
Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency);

/// Uniform variate in [0, 1) for edge (i, j), i < j, of the stream `seed`.
double edge_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j);

/// Stateless 64-bit mixer (splitmix64 finaliser); also used to derive per-trial seeds.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed for trial `index` of a seeded experiment.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Piecewise-constant graphon taking R(|i - j|/N) on block I_i x I_j.
class StepGraphon {
 public:
  StepGraphon(const GraphonModel& model, int n);

  int blocks() const { return n_; }
  double block_value(int i, int j) const { return table_(i, j); }
  const Eigen::MatrixXd& table() const { return table_; }

  /// W_d^N(x, y) for x, y in [0, 1].
  double value(double x, double y) const;

  /// Matrix of the step-graphon Laplacian acting on functions that are constant
  /// on each of M = refine * N equal cells. Exact for this kernel, since it is
  /// itself constant on the cells; its spectrum equals the operator spectrum on
  /// that subspace.
  Eigen::MatrixXd refined_laplacian(int refine) const;

 private:
  int n_;
  Eigen::MatrixXd table_;
};

StepGraphon step_graphon(const GraphonModel& model, int n);

/// Writes `stem`.csv (i,j,weight over the upper triangle, 1-based nodes) and
/// `stem`.json (N, provenance, seed).
void export_realization(const GraphRealization& g, const std::filesystem::path& stem);

/// Reads back the pair written by export_realization.
GraphRealization import_realization(const std::filesystem::path& stem);

}  // namespace graphturing
