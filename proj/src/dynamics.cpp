#include "graphturing/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "graphturing/spectral.hpp"

namespace graphturing {

namespace {

constexpr double kEnergySlack = 1e-12;
constexpr double kSingularRcond = 1e-14;
constexpr double kStabilityFactor = 1e-8;

Eigen::VectorXd nonlinearity(const Eigen::VectorXd& u, const SHParams& p) {
  return (p.r * u.array().square() - p.b * u.array().cube()).matrix();
}

}  // namespace

void SHParams::validate() const {
  if (!(b > 0.0)) throw std::invalid_argument("SHParams: b must be positive");
  if (!(kappa < 0.0)) throw std::invalid_argument("SHParams: kappa must be negative");
  if (!std::isfinite(epsilon) || !std::isfinite(r)) {
    throw std::invalid_argument("SHParams: epsilon and r must be finite");
  }
}

SwiftHohenberg::SwiftHohenberg(Eigen::MatrixXd laplacian, double kappa)
    : laplacian_(std::move(laplacian)), kappa_(kappa) {
  if (laplacian_.rows() != laplacian_.cols() || laplacian_.rows() == 0) {
    throw std::invalid_argument("SwiftHohenberg: Laplacian must be square and nonempty");
  }
  Eigen::MatrixXd shifted = laplacian_;
  shifted.diagonal().array() -= kappa_;
  shifted_square_ = shifted * shifted;
  // Symmetrise away the rounding asymmetry of the product.
  shifted_square_ = 0.5 * (shifted_square_ + shifted_square_.transpose()).eval();

  lambdas_ = eigenvalues_sym(laplacian_);
  Eigen::VectorXd ell = -(lambdas_.array() - kappa_).square().matrix();
  std::sort(ell.data(), ell.data() + ell.size(), std::greater<>());
  if (ell.size() > 1) stability_scale_ = std::max(1.0, std::fabs(ell(1)));
}

void SwiftHohenberg::check(const Eigen::VectorXd& u, const SHParams& p) const {
  if (u.size() != laplacian_.rows()) {
    throw std::invalid_argument("SwiftHohenberg: state dimension mismatch");
  }
  if (std::fabs(p.kappa - kappa_) > 1e-12 * std::max(1.0, std::fabs(kappa_))) {
    throw std::invalid_argument("SwiftHohenberg: kappa differs from the cached operator");
  }
}

Eigen::VectorXd SwiftHohenberg::rhs(const Eigen::VectorXd& u, const SHParams& p) const {
  check(u, p);
  Eigen::VectorXd f = -(shifted_square_ * u);
  f += p.epsilon * u + nonlinearity(u, p);
  return f;
}

Eigen::MatrixXd SwiftHohenberg::jacobian(const Eigen::VectorXd& u, const SHParams& p) const {
  check(u, p);
  Eigen::MatrixXd jac = -shifted_square_;
  jac.diagonal().array() += p.epsilon + 2.0 * p.r * u.array() - 3.0 * p.b * u.array().square();
  return jac;
}

double SwiftHohenberg::energy(const Eigen::VectorXd& u, const SHParams& p) const {
  check(u, p);
  const auto a = u.array();
  return 0.5 * u.dot(shifted_square_ * u) - 0.5 * p.epsilon * u.squaredNorm() -
         p.r / 3.0 * a.cube().sum() + p.b / 4.0 * a.square().square().sum();
}

Eigen::VectorXd rhs(const Eigen::VectorXd& u, const SHParams& p, const Eigen::MatrixXd& laplacian) {
  return SwiftHohenberg(laplacian, p.kappa).rhs(u, p);
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& u, const SHParams& p,
                         const Eigen::MatrixXd& laplacian) {
  return SwiftHohenberg(laplacian, p.kappa).jacobian(u, p);
}

Trajectory integrate(const SwiftHohenberg& op, const Eigen::VectorXd& u0, const SHParams& p,
                     double t_end, const IntegrateOptions& opts) {
  if (!u0.allFinite()) {
    throw std::invalid_argument("integrate: initial state must be finite");
  }
  Trajectory traj;
  Eigen::VectorXd u = u0;
  double t = 0.0;
  double e = op.energy(u, p);
  traj.times.push_back(t);
  traj.states.push_back(u);
  traj.energies.push_back(e);

  double dt = std::min(opts.dt, opts.dt_max);
  Eigen::LDLT<Eigen::MatrixXd> solver;
  double factored_dt = -1.0;
  auto factor = [&](double step) {
    Eigen::MatrixXd m = step * op.shifted_square();
    m.diagonal().array() += 1.0 - step * p.epsilon;
    solver.compute(m);
    factored_dt = step;
  };

  int streak = 0;
  int since_sample = 0;
  for (int step = 0; step < opts.max_steps && t < t_end; ++step) {
    const double h = std::min(dt, t_end - t);
    if (h != factored_dt) factor(h);
    const Eigen::VectorXd next = solver.solve(u + h * nonlinearity(u, p));
    const double e_next = next.allFinite() ? op.energy(next, p) : HUGE_VAL;
    if (!(e_next <= e + kEnergySlack * std::max(1.0, std::fabs(e)))) {
      ++traj.rejected;
      streak = 0;
      dt = 0.5 * h;
      if (dt < opts.dt_min) {
        throw StiffnessError("integrate: step size underflow at t = " + std::to_string(t));
      }
      continue;
    }
    u = next;
    e = e_next;
    t += h;
    ++traj.accepted;
    ++since_sample;
    bool steady = false;
    if (opts.steady_tol > 0.0) steady = op.rhs(u, p).norm() <= opts.steady_tol;
    if (since_sample >= opts.sample_every || t >= t_end || steady) {
      traj.times.push_back(t);
      traj.states.push_back(u);
      traj.energies.push_back(e);
      since_sample = 0;
    }
    if (steady) {
      traj.reached_steady = true;
      break;
    }
    if (++streak >= opts.grow_after && dt < opts.dt_max) {
      dt = std::min(2.0 * dt, opts.dt_max);
      streak = 0;
    }
  }
  return traj;
}

double default_newton_tol(int n) { return 1e-10 * std::sqrt(static_cast<double>(n)); }

NewtonResult newton_steady(const SwiftHohenberg& op, const Eigen::VectorXd& guess,
                           const SHParams& p, std::optional<double> tol, int max_iter) {
  if (!guess.allFinite()) {
    throw std::invalid_argument("newton_steady: guess must be finite");
  }
  const double target = tol.value_or(default_newton_tol(op.size()));
  NewtonResult res;
  res.u = guess;
  Eigen::VectorXd f = op.rhs(res.u, p);
  res.residual = f.norm();
  for (int it = 0; it < max_iter; ++it) {
    if (res.residual <= target) {
      res.status = NewtonStatus::Converged;
      return res;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.jacobian(res.u, p));
    if (lu.rcond() < kSingularRcond) {
      res.status = NewtonStatus::Singular;
      return res;
    }
    const Eigen::VectorXd step = lu.solve(-f);
    double damping = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      const Eigen::VectorXd trial = res.u + damping * step;
      const Eigen::VectorXd f_trial = op.rhs(trial, p);
      const double r_trial = f_trial.norm();
      if (std::isfinite(r_trial) && r_trial < (1.0 - 1e-4 * damping) * res.residual) {
        res.u = trial;
        f = f_trial;
        res.residual = r_trial;
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    res.iterations = it + 1;
    if (!improved) {
      // A full step can still land within tolerance when the residual is at rounding level.
      const Eigen::VectorXd trial = res.u + step;
      const double r_trial = op.rhs(trial, p).norm();
      if (r_trial <= target) {
        res.u = trial;
        res.residual = r_trial;
        res.status = NewtonStatus::Converged;
        return res;
      }
      res.status = NewtonStatus::Diverged;
      return res;
    }
  }
  res.status = res.residual <= target ? NewtonStatus::Converged : NewtonStatus::MaxIterations;
  return res;
}

StabilityInfo stability(const SwiftHohenberg& op, const Eigen::VectorXd& u, const SHParams& p,
                        const std::optional<Eigen::VectorXd>& exclude, int leading) {
  const Eigen::MatrixXd jac = op.jacobian(u, p);
  Eigen::VectorXd ev;
  if (exclude) {
    const SpectralData spec = eig_sym(jac);
    Eigen::Index drop = 0;
    (spec.eigenvectors.transpose() * *exclude).cwiseAbs().maxCoeff(&drop);
    ev.resize(spec.size() - 1);
    for (Eigen::Index i = 0, k = 0; i < spec.size(); ++i) {
      if (i != drop) ev(k++) = spec.eigenvalues(i);
    }
  } else {
    ev = eigenvalues_sym(jac);
  }
  StabilityInfo info;
  const Eigen::Index count = std::min<Eigen::Index>(leading, ev.size());
  info.leading = ev.head(count);
  const double threshold = -kStabilityFactor * op.stability_scale();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > threshold) ++info.unstable_count;
  }
  info.stable = info.unstable_count == 0;
  return info;
}

}  // namespace graphturing
