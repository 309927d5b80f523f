#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace graphturing {

/// Parameters of du/dt = -(L - kappa I)^2 u + eps u + r u o u - b u o u o u.
struct SHParams {
  double kappa = -1.0;
  double epsilon = 0.0;
  double r = 1.0;
  double b = 1.0;

  void validate() const;
};

/// Graph Swift-Hohenberg vector field on a fixed Laplacian. The linear part
/// (L - kappa I)^2 is formed once at construction; epsilon, r and b may vary
/// per call through the SHParams argument as long as kappa is unchanged.
class SwiftHohenberg {
 public:
  SwiftHohenberg(Eigen::MatrixXd laplacian, double kappa);

  int size() const { return static_cast<int>(laplacian_.rows()); }
  double kappa() const { return kappa_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  /// (L - kappa I)^2, symmetric positive semidefinite.
  const Eigen::MatrixXd& shifted_square() const { return shifted_square_; }
  /// Eigenvalues of L, descending.
  const Eigen::VectorXd& laplacian_eigenvalues() const { return lambdas_; }

  Eigen::VectorXd rhs(const Eigen::VectorXd& u, const SHParams& p) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u, const SHParams& p) const;

  /// Lyapunov functional with rhs = -grad E:
  /// E(u) = u^T (L - kappa I)^2 u / 2 - eps |u|^2 / 2 - r sum u^3 / 3 + b sum u^4 / 4.
  double energy(const Eigen::VectorXd& u, const SHParams& p) const;

  /// max(1, |l_2|) where l_2 is the second largest entry of -(lambda_k - kappa)^2.
  double stability_scale() const { return stability_scale_; }

 private:
  void check(const Eigen::VectorXd& u, const SHParams& p) const;

  Eigen::MatrixXd laplacian_;
  double kappa_;
  Eigen::MatrixXd shifted_square_;
  Eigen::VectorXd lambdas_;
  double stability_scale_ = 1.0;
};

Eigen::VectorXd rhs(const Eigen::VectorXd& u, const SHParams& p, const Eigen::MatrixXd& laplacian);
Eigen::MatrixXd jacobian(const Eigen::VectorXd& u, const SHParams& p,
                         const Eigen::MatrixXd& laplacian);

class StiffnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegrateOptions {
  double dt = 1.0;
  double dt_min = 1e-10;
  double dt_max = 100.0;
  int grow_after = 10;        // accepted steps before dt doubles
  int sample_every = 10;      // accepted steps between stored samples
  double steady_tol = 0.0;    // stop early once ||rhs|| <= steady_tol (0 disables)
  int max_steps = 1000000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> energies;
  int accepted = 0;
  int rejected = 0;
  bool reached_steady = false;
};

/// Linearly implicit Euler: the linear part -(L - kappa I)^2 + eps I is implicit
/// through a cached LDL^T factorisation, the polynomial nonlinearity explicit.
/// A step is accepted only if E does not increase; otherwise dt halves.
/// Throws StiffnessError once dt falls below dt_min.
Trajectory integrate(const SwiftHohenberg& op, const Eigen::VectorXd& u0, const SHParams& p,
                     double t_end, const IntegrateOptions& opts = {});

enum class NewtonStatus { Converged, Singular, MaxIterations, Diverged };

struct NewtonResult {
  Eigen::VectorXd u;
  NewtonStatus status = NewtonStatus::MaxIterations;
  double residual = 0.0;
  int iterations = 0;

  bool converged() const { return status == NewtonStatus::Converged; }
};

/// Default steady-state tolerance 1e-10 sqrt(N).
double default_newton_tol(int n);

/// Damped Newton with step halving on ||rhs||.
NewtonResult newton_steady(const SwiftHohenberg& op, const Eigen::VectorXd& guess,
                           const SHParams& p, std::optional<double> tol = std::nullopt,
                           int max_iter = 50);

struct StabilityInfo {
  Eigen::VectorXd leading;  // largest Jacobian eigenvalues, descending
  int unstable_count = 0;   // eigenvalues above the threshold
  bool stable = false;
};

/// Stable iff the largest Jacobian eigenvalue is <= -1e-8 * op.stability_scale().
/// With `exclude`, the eigenpair whose eigenvector overlaps most with that vector
/// is dropped first (used to factor out a neutral symmetry direction).
StabilityInfo stability(const SwiftHohenberg& op, const Eigen::VectorXd& u, const SHParams& p,
                        const std::optional<Eigen::VectorXd>& exclude = std::nullopt,
                        int leading = 4);

}  // namespace graphturing
