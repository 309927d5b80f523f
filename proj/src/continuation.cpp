#include "graphturing/continuation.hpp"

#include <algorithm>
#include <cmath>

namespace graphturing {

namespace {

constexpr double kSingularRcond = 1e-14;
constexpr double kMaxStepRatio = 2.0;
constexpr int kMaxHalvings = 40;

// rhs(u, eps) + mu p = 0, optionally <p, u> = 0, and one linear constraint
// cu.u + ce eps = target. The multiplier mu removes the neutral direction of
// a tied pair; it vanishes at solutions because the flow is a gradient.
class Corrector {
 public:
  Corrector(const SwiftHohenberg& op, const SHParams& params, const CriticalMode& mode,
            const ContinuationControls& controls)
      : op_(op),
        params_(params),
        partner_(mode.partner ? &*mode.partner : nullptr),
        n_(op.size()),
        dim_(n_ + 1 + (partner_ ? 1 : 0)),
        tol_(controls.tol),
        max_newton_(controls.max_newton) {}

  struct Constraint {
    Eigen::VectorXd cu;
    double ce = 0.0;
    double target = 0.0;
  };

  bool solve(Eigen::VectorXd& u, double& eps, const Constraint& c) const {
    double mu = 0.0;
    for (int it = 0; it <= max_newton_; ++it) {
      const Eigen::VectorXd f = residual(u, eps, mu, c);
      if (!f.allFinite()) return false;
      const double fn = f.norm();
      if (fn <= tol_ && plain_residual(u, eps) <= tol_) {
        polish(u, eps, mu, c, fn);
        return true;
      }
      if (it == max_newton_) break;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix(u, eps, c.cu, c.ce));
      if (lu.rcond() < kSingularRcond) return false;
      const Eigen::VectorXd dx = lu.solve(-f);
      u += dx.head(n_);
      eps += dx(n_);
      if (partner_) mu += dx(n_ + 1);
    }
    return false;
  }

  // Unit tangent (t_u, t_eps) normalised by border . t = 1.
  void tangent(const Eigen::VectorXd& u, double eps, const Eigen::VectorXd& bu, double be,
               Eigen::VectorXd& tu, double& te) const {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix(u, eps, bu, be));
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
    e(n_) = 1.0;
    const Eigen::VectorXd t = lu.solve(e);
    const double norm = std::sqrt(t.head(n_).squaredNorm() + t(n_) * t(n_));
    tu = t.head(n_) / norm;
    te = t(n_) / norm;
  }

  double plain_residual(const Eigen::VectorXd& u, double eps) const {
    return op_.rhs(u, at(eps)).norm();
  }

 private:
  SHParams at(double eps) const {
    SHParams p = params_;
    p.epsilon = eps;
    return p;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& u, double eps, double mu,
                           const Constraint& c) const {
    Eigen::VectorXd f(dim_);
    f.head(n_) = op_.rhs(u, at(eps));
    if (partner_) {
      f.head(n_) += mu * *partner_;
      f(n_ + 1) = partner_->dot(u);
    }
    f(n_) = c.cu.dot(u) + c.ce * eps - c.target;
    return f;
  }

  // Rows: n equations, the constraint, then the phase row; columns: u, eps, mu.
  Eigen::MatrixXd matrix(const Eigen::VectorXd& u, double eps, const Eigen::VectorXd& cu,
                         double ce) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
    m.topLeftCorner(n_, n_) = op_.jacobian(u, at(eps));
    m.col(n_).head(n_) = u;
    m.row(n_).head(n_) = cu.transpose();
    m(n_, n_) = ce;
    if (partner_) {
      m.col(n_ + 1).head(n_) = *partner_;
      m.row(n_ + 1).head(n_) = partner_->transpose();
    }
    return m;
  }

  void polish(Eigen::VectorXd& u, double& eps, double mu, const Constraint& c, double fn) const {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix(u, eps, c.cu, c.ce));
    if (lu.rcond() < kSingularRcond) return;
    const Eigen::VectorXd dx = lu.solve(-residual(u, eps, mu, c));
    const Eigen::VectorXd u2 = u + dx.head(n_);
    const double eps2 = eps + dx(n_);
    const double mu2 = partner_ ? mu + dx(n_ + 1) : 0.0;
    const double fn2 = residual(u2, eps2, mu2, c).norm();
    if (std::isfinite(fn2) && fn2 < fn && plain_residual(u2, eps2) <= tol_) {
      u = u2;
      eps = eps2;
    }
  }

  const SwiftHohenberg& op_;
  SHParams params_;
  const Eigen::VectorXd* partner_;
  int n_;
  int dim_;
  double tol_;
  int max_newton_;
};

BranchSample make_sample(const SwiftHohenberg& op, const SHParams& params, const CriticalMode& mode,
                         const Eigen::VectorXd& u, double eps) {
  BranchSample s;
  s.epsilon = eps;
  s.u = u;
  s.amplitude = mode.v.dot(u);
  s.supnorm = u.cwiseAbs().maxCoeff();
  SHParams p = params;
  p.epsilon = eps;
  const StabilityInfo info = stability(op, u, p, mode.partner, 1);
  s.stable = info.stable;
  s.unstable_count = info.unstable_count;
  s.leading = info.leading.size() > 0 ? info.leading(0) : 0.0;
  return s;
}

// Vertex of the parabola eps(w) through three samples; falls back to the
// extreme sample when the parabola is degenerate or the vertex lies outside.
void locate_fold(const BranchSample& a, const BranchSample& b, const BranchSample& c,
                 double& eps, double& amp) {
  const double w0 = a.amplitude, w1 = b.amplitude, w2 = c.amplitude;
  const double e0 = a.epsilon, e1 = b.epsilon, e2 = c.epsilon;
  const double d01 = (e1 - e0) / (w1 - w0);
  const double d12 = (e2 - e1) / (w2 - w1);
  const double curv = (d12 - d01) / (w2 - w0);
  const double lo = std::min({w0, w1, w2});
  const double hi = std::max({w0, w1, w2});
  if (std::isfinite(curv) && curv != 0.0) {
    // eps = e1 + d01 (w - w1) + curv (w - w0)(w - w1)
    const double slope_at_w1 = d01 + curv * (w1 - w0);
    const double w = w1 - slope_at_w1 / (2.0 * curv);
    if (w >= lo && w <= hi) {
      amp = w;
      eps = e1 + d01 * (w - w1) + curv * (w - w0) * (w - w1);
      return;
    }
  }
  amp = b.amplitude;
  eps = b.epsilon;
}

}  // namespace

ContinuationControls ContinuationControls::resolved(int n) const {
  ContinuationControls c = *this;
  const double root_n = std::sqrt(static_cast<double>(n));
  if (c.ds <= 0.0) c.ds = 1e-3 * root_n;
  if (c.ds_max <= 0.0) c.ds_max = 10.0 * c.ds;
  if (c.ds_min <= 0.0) c.ds_min = 1e-6 * c.ds;
  if (c.h0 <= 0.0) c.h0 = 0.25 * c.ds;
  if (c.tol <= 0.0) c.tol = default_newton_tol(n);
  if (c.max_newton < 1 || c.max_steps < 1 || c.grow_after < 1 || !(c.grow_factor >= 1.0)) {
    throw std::invalid_argument("continuation controls out of range");
  }
  if (!(c.epsilon_min < c.epsilon_max) || !(c.amplitude_cap > 0.0)) {
    throw std::invalid_argument("continuation bounds out of range");
  }
  return c;
}

std::vector<BranchEvent> Branch::folds() const {
  std::vector<BranchEvent> out;
  for (const auto& e : events) {
    if (e.kind == EventKind::Fold) out.push_back(e);
  }
  return out;
}

CriticalMode critical_mode(const SpectralData& spec, int index, double tie_tol) {
  if (index < 0 || index >= spec.size()) {
    throw std::out_of_range("critical_mode: eigenvalue index out of range");
  }
  CriticalMode mode;
  mode.index = index;
  mode.lambda = spec.eigenvalues(index);
  const double tol = tie_tol * std::max(1.0, std::fabs(mode.lambda));
  std::vector<int> cluster;
  for (Eigen::Index k = 0; k < spec.size(); ++k) {
    if (std::fabs(spec.eigenvalues(k) - mode.lambda) <= tol) cluster.push_back(static_cast<int>(k));
  }
  mode.multiplicity = static_cast<int>(cluster.size());
  if (cluster.size() == 1) {
    mode.v = spec.eigenvectors.col(index);
    return mode;
  }
  const Eigen::Index n = spec.size();
  Eigen::MatrixXd q(n, static_cast<Eigen::Index>(cluster.size()));
  for (std::size_t c = 0; c < cluster.size(); ++c) {
    q.col(static_cast<Eigen::Index>(c)) = spec.eigenvectors.col(cluster[c]);
  }
  // Project the first node's indicator; rows are tried in order until the
  // projection is not negligible.
  for (Eigen::Index row = 0; row < n; ++row) {
    const Eigen::VectorXd proj = q * q.row(row).transpose();
    if (proj.norm() > 1e-6) {
      mode.v = proj / proj.norm();
      break;
    }
  }
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    Eigen::VectorXd w = q.col(c) - mode.v.dot(q.col(c)) * mode.v;
    if (w.norm() > 1e-6) {
      mode.partner = w / w.norm();
      break;
    }
  }
  return mode;
}

std::vector<BranchPointCandidate> trivial_branch_scan(const Eigen::VectorXd& lambdas, double kappa,
                                                      double eps_lo, double eps_hi,
                                                      double tie_tol) {
  std::vector<double> crossings;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double eps = (lambdas(k) - kappa) * (lambdas(k) - kappa);
    if (eps >= eps_lo && eps <= eps_hi) crossings.push_back(eps);
  }
  std::sort(crossings.begin(), crossings.end());
  std::vector<BranchPointCandidate> out;
  for (double eps : crossings) {
    const double tol = tie_tol * std::max(1.0, std::fabs(kappa));
    // Ties are judged on |lambda - kappa| = sqrt(eps), the quantity the tolerance refers to.
    if (!out.empty() && std::fabs(std::sqrt(eps) - std::sqrt(out.back().epsilon)) <= tol) {
      ++out.back().multiplicity;
    } else {
      out.push_back({eps, 1});
    }
  }
  return out;
}

std::optional<BranchSample> switch_branch_side(const SwiftHohenberg& op, const SHParams& params,
                                               double eps_bp, const CriticalMode& mode, double h,
                                               const ContinuationControls& controls) {
  const ContinuationControls c = controls.resolved(op.size());
  const Corrector corrector(op, params, mode, c);
  Eigen::VectorXd u = h * mode.v;
  double eps = eps_bp;
  if (!corrector.solve(u, eps, {mode.v, 0.0, h})) return std::nullopt;
  BranchSample s = make_sample(op, params, mode, u, eps);
  corrector.tangent(u, eps, mode.v, 0.0, s.tangent_u, s.tangent_epsilon);
  if (h < 0.0) {
    s.tangent_u = -s.tangent_u;
    s.tangent_epsilon = -s.tangent_epsilon;
  }
  return s;
}

std::vector<BranchSample> switch_branch(const SwiftHohenberg& op, const SHParams& params,
                                        double eps_bp, const CriticalMode& mode,
                                        const ContinuationControls& controls) {
  const ContinuationControls c = controls.resolved(op.size());
  std::vector<BranchSample> out;
  for (double sign : {1.0, -1.0}) {
    if (auto s = switch_branch_side(op, params, eps_bp, mode, sign * c.h0, c)) {
      out.push_back(std::move(*s));
    }
  }
  if (out.empty()) {
    throw ContinuationError("branch switching failed for both signs of h0");
  }
  return out;
}

BranchSample trivial_start(const SwiftHohenberg& op, const SHParams& params, double eps_start,
                           const CriticalMode& mode, double direction) {
  BranchSample s = make_sample(op, params, mode, Eigen::VectorXd::Zero(op.size()), eps_start);
  s.tangent_u = Eigen::VectorXd::Zero(op.size());
  s.tangent_epsilon = direction < 0.0 ? -1.0 : 1.0;
  return s;
}

Branch continue_branch(const SwiftHohenberg& op, const SHParams& params, const BranchSample& start,
                       double direction, const CriticalMode& mode,
                       const ContinuationControls& controls) {
  const ContinuationControls c = controls.resolved(op.size());
  const Corrector corrector(op, params, mode, c);
  if (corrector.plain_residual(start.u, start.epsilon) > c.tol) {
    throw ContinuationError("continue_branch: start point does not satisfy the tolerance");
  }

  Branch branch;
  branch.points.push_back(start);
  const double sign = direction < 0.0 ? -1.0 : 1.0;
  Eigen::VectorXd tu = sign * start.tangent_u;
  double te = sign * start.tangent_epsilon;
  branch.points.back().tangent_u = tu;
  branch.points.back().tangent_epsilon = te;

  double ds = c.ds;
  int successes = 0;
  for (int step = 0; step < c.max_steps; ++step) {
    const BranchSample& prev = branch.points.back();
    Eigen::VectorXd u;
    double eps = 0.0;
    int halvings = 0;
    for (;;) {
      u = prev.u + ds * tu;
      eps = prev.epsilon + ds * te;
      const double target = tu.dot(u) + te * eps;
      bool ok = corrector.solve(u, eps, {tu, te, target});
      if (ok) {
        const double du = std::sqrt((u - prev.u).squaredNorm() + (eps - prev.epsilon) * (eps - prev.epsilon));
        ok = du <= kMaxStepRatio * ds;
      }
      if (ok) break;
      successes = 0;
      ds *= 0.5;
      if (ds < c.ds_min || ++halvings > kMaxHalvings) {
        throw ContinuationError("corrector diverged after repeated step halving at eps = " +
                                std::to_string(prev.epsilon));
      }
    }

    BranchSample s = make_sample(op, params, mode, u, eps);
    s.ds = ds;
    corrector.tangent(u, eps, tu, te, s.tangent_u, s.tangent_epsilon);
    const int idx = static_cast<int>(branch.points.size());

    const double te_prev = prev.tangent_epsilon;
    bool fold = false;
    if (te_prev != 0.0 && s.tangent_epsilon != 0.0 && (te_prev > 0.0) != (s.tangent_epsilon > 0.0)) {
      fold = true;
      BranchEvent ev;
      ev.kind = EventKind::Fold;
      ev.index = idx;
      if (idx >= 2) {
        locate_fold(branch.points[static_cast<std::size_t>(idx - 2)], prev, s, ev.epsilon,
                    ev.amplitude);
      } else {
        ev.epsilon = prev.epsilon;
        ev.amplitude = prev.amplitude;
      }
      branch.events.push_back(ev);
    }
    if (!fold && s.unstable_count != prev.unstable_count) {
      BranchEvent ev;
      ev.kind = EventKind::BranchPoint;
      ev.index = idx;
      const double a = prev.leading, b = s.leading;
      const double t = (a != b && (a > 0.0) != (b > 0.0)) ? a / (a - b) : 0.5;
      ev.epsilon = prev.epsilon + t * (s.epsilon - prev.epsilon);
      ev.amplitude = prev.amplitude + t * (s.amplitude - prev.amplitude);
      branch.events.push_back(ev);
    }

    tu = s.tangent_u;
    te = s.tangent_epsilon;
    branch.points.push_back(std::move(s));
    const BranchSample& last = branch.points.back();
    if (std::fabs(last.amplitude) > c.amplitude_cap || last.epsilon < c.epsilon_min ||
        last.epsilon > c.epsilon_max) {
      break;
    }
    if (++successes >= c.grow_after) {
      ds = std::min(ds * c.grow_factor, c.ds_max);
      successes = 0;
    }
  }
  return branch;
}

Branch trace_bifurcating_branch(const SwiftHohenberg& op, const SHParams& params, double eps_bp,
                                const CriticalMode& mode, const ContinuationControls& controls) {
  const auto starts = switch_branch(op, params, eps_bp, mode, controls);
  Branch minus;
  Branch plus;
  bool have_minus = false;
  for (const auto& s : starts) {
    Branch leg = continue_branch(op, params, s, 1.0, mode, controls);
    if (s.amplitude < 0.0) {
      minus = std::move(leg);
      have_minus = true;
    } else {
      plus = std::move(leg);
    }
  }

  Branch out;
  const int m = static_cast<int>(minus.points.size());
  for (int i = m - 1; i >= 0; --i) {
    BranchSample s = minus.points[static_cast<std::size_t>(i)];
    s.tangent_u = -s.tangent_u;
    s.tangent_epsilon = -s.tangent_epsilon;
    out.points.push_back(std::move(s));
  }
  for (auto ev : minus.events) {
    ev.index = m - ev.index;
    out.events.push_back(ev);
  }
  std::reverse(out.events.begin(), out.events.end());
  if (have_minus && !plus.points.empty()) {
    const BranchSample& left = out.points.back();
    const BranchSample& right = plus.points.front();
    // A fold closer to the branch point than h0 shows up as opposite tangent
    // signs on either side of the junction. A symmetric pitchfork does too, but
    // its turning point is the branch point itself.
    if ((left.tangent_epsilon > 0.0) != (right.tangent_epsilon > 0.0)) {
      BranchSample origin;
      origin.epsilon = eps_bp;
      BranchEvent fold{EventKind::Fold, 0.0, 0.0, m};
      locate_fold(left, origin, right, fold.epsilon, fold.amplitude);
      const double span = std::min(std::fabs(left.amplitude), std::fabs(right.amplitude));
      if (std::fabs(fold.amplitude) > 1e-3 * span) out.events.push_back(fold);
    }
    out.events.push_back({EventKind::BranchPoint, eps_bp, 0.0, m});
  }
  for (auto& s : plus.points) out.points.push_back(std::move(s));
  for (auto ev : plus.events) {
    ev.index += m;
    out.events.push_back(ev);
  }
  return out;
}

NormalFormFit fit_normal_form(const Branch& branch, double eps_bp, double max_amplitude,
                              int exponent_points) {
  std::vector<const BranchSample*> window;
  for (const auto& s : branch.points) {
    const double w = std::fabs(s.amplitude);
    if (w > 0.0 && w <= max_amplitude) window.push_back(&s);
  }
  constexpr std::size_t kMinPoints = 8;
  if (window.size() < kMinPoints) {
    throw ContinuationError("fit_normal_form: fewer than 8 samples inside the amplitude window");
  }
  const auto rows = static_cast<Eigen::Index>(window.size());
  Eigen::MatrixXd a(rows, 2);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double w = window[static_cast<std::size_t>(i)]->amplitude;
    a(i, 0) = -w;
    a(i, 1) = -w * w;
    y(i) = window[static_cast<std::size_t>(i)]->epsilon - eps_bp;
  }
  // Column scaling keeps the normal equations well conditioned for tiny windows.
  const Eigen::Vector2d scale(a.col(0).norm(), a.col(1).norm());
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  const Eigen::Vector2d coef =
      as.colPivHouseholderQr().solve(y).cwiseQuotient(scale);

  NormalFormFit fit;
  fit.a2 = coef(0);
  fit.a3 = coef(1);
  fit.residual = std::sqrt((a * coef - y).squaredNorm() / static_cast<double>(rows));
  fit.fit_points = static_cast<int>(rows);

  std::vector<const BranchSample*> small;
  for (const auto* s : window) {
    if (std::fabs(s->epsilon - eps_bp) > 0.0) small.push_back(s);
  }
  std::sort(small.begin(), small.end(), [](const BranchSample* l, const BranchSample* r) {
    return std::fabs(l->amplitude) < std::fabs(r->amplitude);
  });
  if (exponent_points < 2 || static_cast<int>(small.size()) < exponent_points) {
    throw ContinuationError("fit_normal_form: not enough samples for the amplitude exponent");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < exponent_points; ++i) {
    const double x = std::log(std::fabs(small[static_cast<std::size_t>(i)]->epsilon - eps_bp));
    const double yv = std::log(std::fabs(small[static_cast<std::size_t>(i)]->amplitude));
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  const double k = exponent_points;
  fit.exponent = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  fit.exponent_points = exponent_points;
  return fit;
}

}  // namespace graphturing
