#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "graphturing/graphon.hpp"

namespace graphturing {

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending (so the
/// zero eigenvalue of a connected graph Laplacian comes first). Column k of
/// `eigenvectors` belongs to eigenvalues[k] and has its first component of
/// magnitude > 1e-6 * norm positive.
struct SpectralData {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  Eigen::Index size() const { return eigenvalues.size(); }
};

SpectralData eig_sym(const Eigen::MatrixXd& m);

/// Eigenvalues only, descending.
Eigen::VectorXd eigenvalues_sym(const Eigen::MatrixXd& m);

/// Matching window around a graphon eigenvalue.
struct MatchBudget {
  double mu = 0.0;
  double delta = 0.0;
  double delta0 = 0.0;
  double gamma = 0.25;
  int multiplicity = 2;
  double concentration_constant = 1.0 / 40.0;

  /// Throws std::invalid_argument unless 0 < delta < delta0, 0 < gamma < 1/2, m >= 1.
  void validate() const;
};

/// Half the distance from mu to the nearest other element of the graphon
/// spectrum, the accumulation point included.
double estimate_delta0(const GraphonSpectrum& spectrum, double mu);

/// Budget for mode k of a ring graphon with delta = fraction * delta0.
MatchBudget budget_for_mode(const GraphonSpectrum& spectrum, int k, double fraction, double gamma);

/// Indices (0-based, into the descending order) with |lambda_k / n - mu| < delta.
std::vector<int> match_eigenvalues(const Eigen::VectorXd& eigenvalues, const MatchBudget& budget,
                                   int n);

/// max_k |lambda_k(A) - lambda_k(B)| over the descending orders.
double weyl_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Spectral norm of a symmetric matrix.
double opnorm(const Eigen::MatrixXd& m);

struct ConcentrationReport {
  int n = 0;
  double gamma = 0.0;
  std::vector<std::uint64_t> trial_seeds;
  std::vector<double> norms;   // ||L_r - L_d||
  std::vector<double> ratios;  // norms / N^{1/2 + gamma}
  double failure_bound = 0.0;  // 2 N exp(-N^{2 gamma} / 40)
};

/// Bound 2 N exp(-C N^{2 gamma}) on P(||L_r - L_d|| >= N^{1/2 + gamma}).
double concentration_failure_bound(int n, double gamma, double c = 1.0 / 40.0);

ConcentrationReport concentration_report(const GraphonModel& model, int n, double gamma, int trials,
                                         std::uint64_t seed, int jobs = 1);

/// Normalised discrete Fourier vector with components exp(2 pi i k x_j)/sqrt(N), x_j = j/N.
Eigen::VectorXcd fourier_basis(int n, int k);

/// Fraction of ||v|| captured by the real span of the Fourier modes +-k for k in `modes`.
double fourier_correlation(const Eigen::VectorXd& v, std::span<const int> modes);

/// min over orthogonal O of ||v_hat O - v||_F.
double procrustes_residual(const Eigen::MatrixXd& v_hat, const Eigen::MatrixXd& v);

/// sqrt(8 m) / ((delta0 - delta) N^{1/2 - gamma}).
double davis_kahan_bound(const MatchBudget& budget, int n);

/// v^T (v o v).
double quad_self_interaction(const Eigen::VectorXd& v);

struct AlignmentReport {
  std::vector<int> matched;
  std::vector<std::complex<double>> coefficients;  // a_j = <omega_k*, v_j>
  double fourier_residual = 0.0;    // max_j ||v_j - a_j omega_k - conj(a_j) omega_-k||
  double procrustes_residual = 0.0;
  double davis_kahan_bound = 0.0;
  double beta = 0.0;  // sqrt(N) <v_1, v_1 o v_1> for the first matched vector
};

/// Compares the matched eigenvectors of `spec` with Fourier mode k_star and
/// with the matched block of `reference` (same block size required).
AlignmentReport align_to_fourier(const SpectralData& spec, std::span<const int> matched, int k_star,
                                 const MatchBudget& budget, const SpectralData& reference,
                                 std::span<const int> reference_matched);

}  // namespace graphturing
