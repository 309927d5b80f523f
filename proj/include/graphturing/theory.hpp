#pragma once

#include <complex>

#include <Eigen/Dense>

#include "graphturing/graphon.hpp"
#include "graphturing/spectral.hpp"

namespace graphturing {

/// l_k = -(lambda_k - kappa)^2, in the order of the input eigenvalues.
struct ShiftedSpectrum {
  double kappa = 0.0;
  Eigen::VectorXd ell;
};

ShiftedSpectrum shifted_spectrum(const Eigen::VectorXd& lambdas, double kappa);

enum class Criticality { Supercritical, Subcritical };

/// Pitchfork of the graphon equation at kappa = lambda_{k*}.
struct GraphonPrediction {
  int k_star = 1;
  double kappa = 0.0;
  double ell0 = 0.0;        // -kappa^2
  double ell_2k = 0.0;      // -(lambda_{2k*} - kappa)^2
  double gamma = 0.0;       // 3b + 4 r^2 / ell0 + 2 r^2 / ell_2k
  Criticality criticality = Criticality::Supercritical;

  /// 2 sqrt(eps / Gamma); NaN when eps / Gamma < 0.
  double amplitude(double epsilon) const;
  /// amplitude(eps) cos(2 pi k* (x - phi)).
  double profile(double x, double epsilon, double phi) const;
};

/// Throws std::invalid_argument if ell0 or ell_2k vanishes.
GraphonPrediction pitchfork(const GraphonSpectrum& spectrum, int k_star, double r, double b);

/// 2:1 resonant expansion +-(sqrt2 eps / r) cos(2 pi k1 (x - phi)) - (eps / r) cos(4 pi k1 (x - phi)).
struct ResonancePrediction {
  int k1 = 1;
  int k2 = 2;
  int sign = 1;
  double epsilon = 0.0;
  double phi = 0.0;
  double amp1 = 0.0;  // signed coefficient of the k1 harmonic
  double amp2 = 0.0;  // signed coefficient of the k2 harmonic
  // The same profile written as eps eta_i cos(2 pi k_i (x - Omega_i)) with eta_i >= 0.
  double eta1 = 0.0;
  double eta2 = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;

  double profile(double x) const;
  Eigen::VectorXd sample(int n) const;  // on x_j = j / N
};

/// Throws std::invalid_argument if r == 0.
ResonancePrediction resonance(int k1, double r, double epsilon, double phi, int sign);

/// Gamma_r = 3b/2 + 2 r^2 / l_N + r^2 / l_3.
double gamma_r(double b, double r, double l_n, double l_3);

/// -beta^2 r^2 / (4 Gamma_r).
double epsilon_sn(double beta, double r, double gamma);

/// beta r / (2 Gamma) +- sqrt(beta^2 r^2 + 4 Gamma eps) / (2 Gamma); NaN below the fold.
double z1_plus(double beta, double r, double gamma, double epsilon);
double z1_minus(double beta, double r, double gamma, double epsilon);

/// Leading-order random-graph prediction around kappa = lambda_crit(L_r).
struct RandomPrediction {
  int k_star = 1;
  int critical_index = 0;
  double kappa = 0.0;
  double beta = 0.0;
  double l_n = 0.0;
  double l_3 = 0.0;
  int l_3_index = 0;
  double gamma_r = 0.0;
  double epsilon_sn = 0.0;
  std::complex<double> a1;
  double omega = 0.0;  // phase with a1 = exp(-2 pi i k* Omega) / sqrt2
  double r = 1.0;
  double b = 1.0;

  double z_plus(double epsilon) const;
  double z_minus(double epsilon) const;
  /// z1- if beta r > 0, else z1+.
  double z_star(double epsilon) const;
  /// Normal-form coefficients in w = <v, u> = sqrt(N) z.
  double a2(int n) const;
  double a3(int n) const;
  /// sqrt2 z* cos(2 pi k* (x_j - Omega)) on x_j = j / N.
  Eigen::VectorXd profile(double epsilon, int n) const;
};

/// kappa is the eigenvalue at `critical_index`; beta = sqrt(N) v^T(v o v) for
/// its eigenvector; l_3 uses the eigenvalue of the 2k* cluster closest to
/// N lambda_{2k*}, where the cluster is matched with `budget_fraction` delta0.
/// Throws std::runtime_error when that cluster is empty.
RandomPrediction random_prediction(const SpectralData& spec, int critical_index,
                                   const GraphonSpectrum& graphon, int k_star, double r, double b,
                                   double budget_fraction = 0.5);

/// Same, with the critical vector supplied (used for tied pairs).
RandomPrediction random_prediction(const SpectralData& spec, int critical_index,
                                   const Eigen::VectorXd& v_crit, const GraphonSpectrum& graphon,
                                   int k_star, double r, double b, double budget_fraction = 0.5);

/// Graph cubic coefficient evaluated on N-scaled graphon eigenvalues with
/// r = r~ N^2, b = b~ N^2, then mapped back by z1 = sqrt2 z~: returns 2 Gamma_r / N^2,
/// which equals the graphon Gamma(r~, b~).
double rescaled_graph_cubic(const GraphonSpectrum& graphon, int k_star, double r_tilde,
                            double b_tilde, int n);

}  // namespace graphturing
