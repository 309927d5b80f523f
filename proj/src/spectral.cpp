#include "graphturing/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "graphturing/sampler.hpp"

namespace graphturing {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kSignThreshold = 1e-6;

void require_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("matrix must be square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw std::invalid_argument("matrix must be symmetric");
  }
}

}  // namespace

SpectralData eig_sym(const Eigen::MatrixXd& m) {
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver did not converge");
  }
  const Eigen::Index n = m.rows();
  SpectralData out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < n; ++k) {
    auto col = out.eigenvectors.col(k);
    const double threshold = kSignThreshold * col.norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::fabs(col(i)) > threshold) {
        if (col(i) < 0.0) col *= -1.0;
        break;
      }
    }
  }
  return out;
}

Eigen::VectorXd eigenvalues_sym(const Eigen::MatrixXd& m) {
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

void MatchBudget::validate() const {
  if (!(delta > 0.0 && delta < delta0)) {
    throw std::invalid_argument("match budget needs 0 < delta < delta0");
  }
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw std::invalid_argument("match budget needs 0 < gamma < 1/2");
  }
  if (multiplicity < 1) {
    throw std::invalid_argument("match budget needs multiplicity >= 1");
  }
}

double estimate_delta0(const GraphonSpectrum& spectrum, double mu) {
  double nearest = std::fabs(spectrum.accumulation_point - mu);
  for (const auto& e : spectrum.entries) {
    const double d = std::fabs(e.eigenvalue - mu);
    if (d > 1e-12) nearest = std::min(nearest, d);
  }
  return 0.5 * nearest;
}

MatchBudget budget_for_mode(const GraphonSpectrum& spectrum, int k, double fraction, double gamma) {
  MatchBudget b;
  b.mu = spectrum.eigenvalue(k);
  b.delta0 = estimate_delta0(spectrum, b.mu);
  b.delta = fraction * b.delta0;
  b.gamma = gamma;
  int m = 0;
  for (const auto& e : spectrum.entries) {
    if (std::fabs(e.eigenvalue - b.mu) <= 1e-12) m += e.multiplicity;
  }
  b.multiplicity = std::max(m, 1);
  return b;
}

std::vector<int> match_eigenvalues(const Eigen::VectorXd& eigenvalues, const MatchBudget& budget,
                                   int n) {
  std::vector<int> idx;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    if (std::fabs(eigenvalues(k) / n - budget.mu) < budget.delta) {
      idx.push_back(static_cast<int>(k));
    }
  }
  return idx;
}

double weyl_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("weyl_gap: dimension mismatch");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

double opnorm(const Eigen::MatrixXd& m) {
  return eigenvalues_sym(m).cwiseAbs().maxCoeff();
}

double concentration_failure_bound(int n, double gamma, double c) {
  return 2.0 * n * std::exp(-c * std::pow(static_cast<double>(n), 2.0 * gamma));
}

ConcentrationReport concentration_report(const GraphonModel& model, int n, double gamma, int trials,
                                         std::uint64_t seed, int jobs) {
  if (trials < 1) {
    throw std::invalid_argument("concentration_report needs at least one trial");
  }
  ConcentrationReport rep;
  rep.n = n;
  rep.gamma = gamma;
  rep.failure_bound = concentration_failure_bound(n, gamma);
  rep.trial_seeds.resize(static_cast<std::size_t>(trials));
  rep.norms.resize(static_cast<std::size_t>(trials));
  rep.ratios.resize(static_cast<std::size_t>(trials));

  const Eigen::MatrixXd lap_d = deterministic_graph(model, n).laplacian;
  const double scale = std::pow(static_cast<double>(n), 0.5 + gamma);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      const auto ts = derive_seed(seed, static_cast<std::uint64_t>(t));
      const auto g = random_graph(model, n, ts);
      const double norm = opnorm(g.laplacian - lap_d);
      rep.trial_seeds[static_cast<std::size_t>(t)] = ts;
      rep.norms[static_cast<std::size_t>(t)] = norm;
      rep.ratios[static_cast<std::size_t>(t)] = norm / scale;
    }
  };
  const int workers = std::clamp(jobs, 1, trials);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rep;
}

Eigen::VectorXcd fourier_basis(int n, int k) {
  Eigen::VectorXcd w(n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    // Reduce k * (j + 1) mod n before scaling so large modes keep full accuracy.
    const long long phase_num = (static_cast<long long>(k) * (j + 1)) % n;
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(phase_num) / n;
    w(j) = std::polar(norm, phase);
  }
  return w;
}

double fourier_correlation(const Eigen::VectorXd& v, std::span<const int> modes) {
  const int n = static_cast<int>(v.size());
  std::vector<Eigen::VectorXd> cols;
  for (int k : modes) {
    const Eigen::VectorXcd w = fourier_basis(n, k);
    cols.push_back(w.real());
    const Eigen::VectorXd s = w.imag();
    if (s.norm() > 1e-8) cols.push_back(s);
  }
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = cols[c];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, basis.cols());
  const double vn = v.norm();
  return vn > 0.0 ? (q.transpose() * v).norm() / vn : 0.0;
}

double procrustes_residual(const Eigen::MatrixXd& v_hat, const Eigen::MatrixXd& v) {
  if (v_hat.rows() != v.rows() || v_hat.cols() != v.cols()) {
    throw std::invalid_argument("procrustes_residual: block shapes differ");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v_hat.transpose() * v,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
  return (v_hat * rotation - v).norm();
}

double davis_kahan_bound(const MatchBudget& budget, int n) {
  return std::sqrt(8.0 * budget.multiplicity) /
         ((budget.delta0 - budget.delta) * std::pow(static_cast<double>(n), 0.5 - budget.gamma));
}

double quad_self_interaction(const Eigen::VectorXd& v) {
  if (std::fabs(v.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("quad_self_interaction expects a unit vector");
  }
  return v.array().cube().sum();
}

AlignmentReport align_to_fourier(const SpectralData& spec, std::span<const int> matched, int k_star,
                                 const MatchBudget& budget, const SpectralData& reference,
                                 std::span<const int> reference_matched) {
  if (matched.empty()) {
    throw std::invalid_argument("align_to_fourier: empty match set");
  }
  if (matched.size() != reference_matched.size()) {
    throw std::invalid_argument("align_to_fourier: matched blocks differ in size");
  }
  const int n = static_cast<int>(spec.size());
  const Eigen::VectorXcd omega = fourier_basis(n, k_star);
  const bool self_conjugate = (2 * k_star) % n == 0;

  AlignmentReport rep;
  rep.matched.assign(matched.begin(), matched.end());
  const auto m = static_cast<Eigen::Index>(matched.size());
  Eigen::MatrixXd v_hat(n, m);
  Eigen::MatrixXd v_ref(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::VectorXd v = spec.eigenvectors.col(matched[static_cast<std::size_t>(c)]);
    v_hat.col(c) = v;
    v_ref.col(c) = reference.eigenvectors.col(reference_matched[static_cast<std::size_t>(c)]);
    const std::complex<double> a = omega.dot(v.cast<std::complex<double>>());
    rep.coefficients.push_back(a);
    const Eigen::VectorXd proj =
        self_conjugate ? Eigen::VectorXd((a * omega).real()) : Eigen::VectorXd(2.0 * (a * omega).real());
    rep.fourier_residual = std::max(rep.fourier_residual, (v - proj).norm());
  }
  rep.procrustes_residual = procrustes_residual(v_hat, v_ref);
  rep.davis_kahan_bound = davis_kahan_bound(budget, n);
  rep.beta = std::sqrt(static_cast<double>(n)) * quad_self_interaction(v_hat.col(0));
  return rep;
}

}  // namespace graphturing
