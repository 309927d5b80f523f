#include "graphturing/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace graphturing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double root(double beta, double r, double gamma, double epsilon, double sign) {
  const double br2 = beta * beta * r * r;
  double disc = br2 + 4.0 * gamma * epsilon;
  // Cancellation at the fold leaves rounding noise of either sign.
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * (br2 + std::fabs(4.0 * gamma * epsilon));
  if (std::fabs(disc) <= noise) disc = 0.0;
  if (disc < 0.0) return kNaN;
  return (beta * r + sign * std::sqrt(disc)) / (2.0 * gamma);
}

}  // namespace

ShiftedSpectrum shifted_spectrum(const Eigen::VectorXd& lambdas, double kappa) {
  ShiftedSpectrum s;
  s.kappa = kappa;
  s.ell = -(lambdas.array() - kappa).square().matrix();
  return s;
}

double GraphonPrediction::amplitude(double epsilon) const {
  const double ratio = epsilon / gamma;
  return ratio >= 0.0 ? 2.0 * std::sqrt(ratio) : kNaN;
}

double GraphonPrediction::profile(double x, double epsilon, double phi) const {
  return amplitude(epsilon) * std::cos(kTwoPi * k_star * (x - phi));
}

GraphonPrediction pitchfork(const GraphonSpectrum& spectrum, int k_star, double r, double b) {
  if (k_star < 1) {
    throw std::invalid_argument("pitchfork: k_star must be positive");
  }
  GraphonPrediction g;
  g.k_star = k_star;
  g.kappa = spectrum.eigenvalue(k_star);
  g.ell0 = -g.kappa * g.kappa;
  const double d = spectrum.eigenvalue(2 * k_star) - g.kappa;
  g.ell_2k = -d * d;
  if (g.ell0 == 0.0 || g.ell_2k == 0.0) {
    throw std::invalid_argument("pitchfork: ell_0 or ell_2k* vanishes (degenerate resonance)");
  }
  g.gamma = 3.0 * b + 4.0 * r * r / g.ell0 + 2.0 * r * r / g.ell_2k;
  g.criticality = g.gamma > 0.0 ? Criticality::Supercritical : Criticality::Subcritical;
  return g;
}

double ResonancePrediction::profile(double x) const {
  return amp1 * std::cos(kTwoPi * k1 * (x - phi)) + amp2 * std::cos(kTwoPi * k2 * (x - phi));
}

Eigen::VectorXd ResonancePrediction::sample(int n) const {
  Eigen::VectorXd u(n);
  for (int j = 0; j < n; ++j) u(j) = profile(static_cast<double>(j + 1) / n);
  return u;
}

ResonancePrediction resonance(int k1, double r, double epsilon, double phi, int sign) {
  if (r == 0.0) {
    throw std::invalid_argument("resonance: r must be nonzero");
  }
  if (k1 < 1) {
    throw std::invalid_argument("resonance: k1 must be positive");
  }
  ResonancePrediction p;
  p.k1 = k1;
  p.k2 = 2 * k1;
  p.sign = sign < 0 ? -1 : 1;
  p.epsilon = epsilon;
  p.phi = phi;
  p.amp1 = p.sign * std::numbers::sqrt2 * epsilon / r;
  p.amp2 = -epsilon / r;
  // A negative coefficient is a half-period shift of the corresponding cosine.
  if (epsilon != 0.0) {
    p.eta1 = std::fabs(p.amp1 / epsilon);
    p.eta2 = std::fabs(p.amp2 / epsilon);
    p.omega1 = phi + (p.amp1 / epsilon < 0.0 ? 0.5 / p.k1 : 0.0);
    p.omega2 = phi + (p.amp2 / epsilon < 0.0 ? 0.5 / p.k2 : 0.0);
  } else {
    p.omega1 = phi;
    p.omega2 = phi;
  }
  return p;
}

double gamma_r(double b, double r, double l_n, double l_3) {
  return 1.5 * b + 2.0 * r * r / l_n + r * r / l_3;
}

double epsilon_sn(double beta, double r, double gamma) {
  return -beta * beta * r * r / (4.0 * gamma);
}

double z1_plus(double beta, double r, double gamma, double epsilon) {
  return root(beta, r, gamma, epsilon, 1.0);
}

double z1_minus(double beta, double r, double gamma, double epsilon) {
  return root(beta, r, gamma, epsilon, -1.0);
}

double RandomPrediction::z_plus(double epsilon) const {
  return z1_plus(beta, r, gamma_r, epsilon);
}

double RandomPrediction::z_minus(double epsilon) const {
  return z1_minus(beta, r, gamma_r, epsilon);
}

double RandomPrediction::z_star(double epsilon) const {
  return beta * r > 0.0 ? z_minus(epsilon) : z_plus(epsilon);
}

double RandomPrediction::a2(int n) const { return r * beta / std::sqrt(static_cast<double>(n)); }

double RandomPrediction::a3(int n) const { return -gamma_r / static_cast<double>(n); }

Eigen::VectorXd RandomPrediction::profile(double epsilon, int n) const {
  const double z = z_star(epsilon);
  Eigen::VectorXd u(n);
  for (int j = 0; j < n; ++j) {
    const double x = static_cast<double>(j + 1) / n;
    u(j) = std::numbers::sqrt2 * z * std::cos(kTwoPi * k_star * (x - omega));
  }
  return u;
}

RandomPrediction random_prediction(const SpectralData& spec, int critical_index,
                                   const Eigen::VectorXd& v_crit, const GraphonSpectrum& graphon,
                                   int k_star, double r, double b, double budget_fraction) {
  if (critical_index < 0 || critical_index >= spec.size()) {
    throw std::out_of_range("random_prediction: critical index out of range");
  }
  const int n = static_cast<int>(spec.size());
  RandomPrediction p;
  p.k_star = k_star;
  p.critical_index = critical_index;
  p.r = r;
  p.b = b;
  p.kappa = spec.eigenvalues(critical_index);
  p.beta = std::sqrt(static_cast<double>(n)) * quad_self_interaction(v_crit);
  p.l_n = -p.kappa * p.kappa;

  const MatchBudget budget = budget_for_mode(graphon, 2 * k_star, budget_fraction, 0.25);
  const double target = n * budget.mu;
  int best = -1;
  for (int k : match_eigenvalues(spec.eigenvalues, budget, n)) {
    if (k == critical_index) continue;
    if (best < 0 || std::fabs(spec.eigenvalues(k) - target) < std::fabs(spec.eigenvalues(best) - target)) {
      best = k;
    }
  }
  if (best < 0) {
    throw std::runtime_error("random_prediction: no eigenvalue matched to mode 2k*");
  }
  p.l_3_index = best;
  const double d = spec.eigenvalues(best) - p.kappa;
  p.l_3 = -d * d;
  p.gamma_r = gamma_r(b, r, p.l_n, p.l_3);
  p.epsilon_sn = epsilon_sn(p.beta, r, p.gamma_r);

  const Eigen::VectorXcd omega = fourier_basis(n, k_star);
  p.a1 = omega.dot(v_crit.cast<std::complex<double>>());
  p.omega = -std::arg(p.a1) / (kTwoPi * k_star);
  return p;
}

RandomPrediction random_prediction(const SpectralData& spec, int critical_index,
                                   const GraphonSpectrum& graphon, int k_star, double r, double b,
                                   double budget_fraction) {
  if (critical_index < 0 || critical_index >= spec.size()) {
    throw std::out_of_range("random_prediction: critical index out of range");
  }
  return random_prediction(spec, critical_index, spec.eigenvectors.col(critical_index), graphon,
                           k_star, r, b, budget_fraction);
}

double rescaled_graph_cubic(const GraphonSpectrum& graphon, int k_star, double r_tilde,
                            double b_tilde, int n) {
  const double nn = static_cast<double>(n);
  const double kappa = nn * graphon.eigenvalue(k_star);
  const double l_n = -kappa * kappa;
  const double d = nn * graphon.eigenvalue(2 * k_star) - kappa;
  const double l_3 = -d * d;
  const double g = gamma_r(b_tilde * nn * nn, r_tilde * nn * nn, l_n, l_3);
  return 2.0 * g / (nn * nn);
}

}  // namespace graphturing
