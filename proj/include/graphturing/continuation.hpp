#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "graphturing/dynamics.hpp"
#include "graphturing/spectral.hpp"

namespace graphturing {

class ContinuationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step and termination controls. Zero-valued step fields are filled in by
/// resolved() from the system size.
struct ContinuationControls {
  double ds = 0.0;       // initial arclength step, default 1e-3 sqrt(N)
  double ds_max = 0.0;   // default 10 ds
  double ds_min = 0.0;   // default 1e-6 ds
  double h0 = 0.0;       // branch-switch amplitude, default ds / 4
  double tol = 0.0;      // residual tolerance, default 1e-10 sqrt(N)
  int max_newton = 10;
  int max_steps = 2000;
  double amplitude_cap = 10.0;
  double epsilon_min = -1.0;
  double epsilon_max = 1.0;
  int grow_after = 3;
  double grow_factor = 1.3;

  ContinuationControls resolved(int n) const;
};

/// Critical direction for a branch point. When the eigenvalue is tied with
/// neighbours (circulant graphs), `v` is the projection of the first unit
/// vector onto the tied eigenspace and `partner` spans the rest of a pair.
struct CriticalMode {
  int index = 0;
  double lambda = 0.0;
  int multiplicity = 1;
  Eigen::VectorXd v;
  std::optional<Eigen::VectorXd> partner;
};

CriticalMode critical_mode(const SpectralData& spec, int index, double tie_tol = 1e-8);

struct BranchPointCandidate {
  double epsilon = 0.0;
  int multiplicity = 1;
};

/// Zero crossings eps = -l_k of the trivial-state spectrum l_k + eps inside
/// [eps_lo, eps_hi], ascending, with tied l_k merged.
std::vector<BranchPointCandidate> trivial_branch_scan(const Eigen::VectorXd& lambdas, double kappa,
                                                      double eps_lo, double eps_hi,
                                                      double tie_tol = 1e-8);

struct BranchSample {
  double epsilon = 0.0;
  Eigen::VectorXd u;
  double amplitude = 0.0;  // <v_crit, u>
  double supnorm = 0.0;
  bool stable = false;
  int unstable_count = 0;
  double leading = 0.0;    // largest retained Jacobian eigenvalue
  Eigen::VectorXd tangent_u;
  double tangent_epsilon = 0.0;
  double ds = 0.0;         // step used to reach this point
};

enum class EventKind { Fold, BranchPoint };

struct BranchEvent {
  EventKind kind = EventKind::Fold;
  double epsilon = 0.0;
  double amplitude = 0.0;
  int index = 0;  // first sample past the event
};

struct Branch {
  std::vector<BranchSample> points;
  std::vector<BranchEvent> events;

  std::vector<BranchEvent> folds() const;
};

/// Solves rhs(u, eps) = 0 with <v_crit, u> = h, starting from u = h v_crit at
/// eps = eps_bp. Returns the corrected point with its tangent oriented so that
/// the amplitude grows in magnitude.
std::optional<BranchSample> switch_branch_side(const SwiftHohenberg& op, const SHParams& params,
                                               double eps_bp, const CriticalMode& mode, double h,
                                               const ContinuationControls& controls);

/// Tries +h0 and -h0; throws ContinuationError if neither converges.
std::vector<BranchSample> switch_branch(const SwiftHohenberg& op, const SHParams& params,
                                        double eps_bp, const CriticalMode& mode,
                                        const ContinuationControls& controls);

/// Pseudo-arclength continuation from `start` along `direction` * start tangent.
Branch continue_branch(const SwiftHohenberg& op, const SHParams& params, const BranchSample& start,
                       double direction, const CriticalMode& mode,
                       const ContinuationControls& controls);

/// Trivial state at eps_start with tangent along +eps (or -eps if direction < 0).
BranchSample trivial_start(const SwiftHohenberg& op, const SHParams& params, double eps_start,
                           const CriticalMode& mode, double direction = 1.0);

/// Both halves of the bifurcating branch, ordered from the -h0 side through
/// the branch point to the +h0 side, with a BranchPoint event at the junction.
Branch trace_bifurcating_branch(const SwiftHohenberg& op, const SHParams& params, double eps_bp,
                                const CriticalMode& mode, const ContinuationControls& controls);

struct NormalFormFit {
  double a2 = 0.0;
  double a3 = 0.0;
  double residual = 0.0;  // rms of the epsilon fit
  double exponent = 0.0;  // slope of log|w| against log|eps - eps_bp|
  int fit_points = 0;
  int exponent_points = 0;
};

/// Least squares eps - eps_bp = -a2 w - a3 w^2 over samples with 0 < |w| <= max_amplitude;
/// exponent from the `exponent_points` smallest amplitudes.
NormalFormFit fit_normal_form(const Branch& branch, double eps_bp, double max_amplitude,
                              int exponent_points = 8);

}  // namespace graphturing
