#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <random>
#include <stdexcept>

#include "mdrl/geometry.hpp"

namespace mdrl {

/// Thrown when a learner's weights blow up (||w||_inf > 1e8) or go
/// non-finite; carries the step count in the message.
struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TraceMode {
  standard,  // e <- gamma*lambda*e + phi        (accumulating trace)
  literal,   // e <- e + lambda*gamma*phi        (verbatim listing; never decays)
};

enum class GAccumMode {
  features,   // G += diag(phi phi^T)            (per the algorithm listing)
  gradients,  // G += diag(xi xi^T)              (per the surrounding prose)
};

struct AlphaSchedule {
  enum class Kind { constant, robbins_monro };
  Kind kind = Kind::constant;
  double alpha0 = 0.1;
  double exponent = 0.6;  // robbins_monro: must lie in (0.5, 1]

  /// alpha_t; robbins_monro gives alpha0 / (1+t)^exponent.
  double operator()(long t) const;
};

struct PSchedule {
  enum class Kind { fixed, decay };
  Kind kind = Kind::fixed;
  double p0 = 2.0;        // fixed value, or decay start
  long horizon = 10000;   // decay reaches 2 at t >= horizon

  /// Nonincreasing; decay interpolates linearly from p0 down to 2.
  double operator()(long t) const;
};

/// Paper-scale starting exponent: max(2, ln d).
double initial_p(int d);

struct LearnerHyper {
  AlphaSchedule alpha;
  double lambda = 0.0;
  double gamma = 0.9;
  double beta = 0.0;  // l1 sparsity weight
  PSchedule p;
  double epsilon = 0.1;  // epsilon-greedy exploration
  TraceMode trace = TraceMode::standard;
  GAccumMode g_mode = GAccumMode::features;
  double eta = 1e-6;  // floor added to H = sqrt(diag G)
  double mass = 1.0;  // EG+- total weight mass (negentropy learners)
};

/// Weights of one learner.  Mirror learners keep w = grad_conjugate(theta)
/// after every step; negentropy learners store the doubled positive dual
/// (theta has 2d entries, w = u_plus - u_minus).  The trace e is reset at
/// every episode start.
struct LearnerState {
  Eigen::VectorXd w;
  Eigen::VectorXd theta;
  Eigen::VectorXd e;
  long t = 0;
  LearnerHyper hyper;

  static LearnerState init(int d, const LearnerHyper& hyper,
                           const MirrorMap& map = MirrorMap::euclidean());
  int dim() const { return static_cast<int>(w.size()); }
  void begin_episode() { e.setZero(); }

  /// Primal weights implied by theta under `map`; equals w after any mirror
  /// step (folds the EG+- doubling when the map is negentropy).
  Eigen::VectorXd consistent_weights(const MirrorMap& map) const;

  void save(std::ostream& os) const;
  static LearnerState load(std::istream& is);
};

/// Running diagonal of the Mahalanobis scaling: H_i = sqrt(G_i) + eta.
struct AdaptiveScaler {
  Eigen::VectorXd g;
  double eta = 1e-6;

  static AdaptiveScaler init(int d, double eta = 1e-6);
  Eigen::VectorXd h() const { return g.cwiseSqrt().array() + eta; }
};

/// standard: e' = gamma*lambda*e + phi; literal: e' = e + lambda*gamma*phi.
Eigen::VectorXd trace_update(const Eigen::VectorXd& e, const Eigen::VectorXd& phi, double gamma,
                             double lambda, TraceMode mode);

// --- state-value steps (policy evaluation) ---------------------------------
// All compute delta = r + gamma <phi_next, w> - <phi_s, w> and advance t.
// Callers pass a zero phi_next for terminal transitions.

/// w += alpha_t * delta * phi_s (no trace).
void td0_step(LearnerState& ls, const Eigen::VectorXd& phi_s, const Eigen::VectorXd& phi_next,
              double r);

/// Classic TD(lambda): trace update, then w += alpha_t * delta * e.
void td_lambda_step(LearnerState& ls, const Eigen::VectorXd& phi_s,
                    const Eigen::VectorXd& phi_next, double r);

/// Mirror-descent TD(lambda): theta = grad psi(w) + alpha_t * delta * e,
/// then w = grad psi*(theta).  Euclidean map reproduces td_lambda_step.
void mirror_td_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_s,
                    const Eigen::VectorXd& phi_next, double r);

/// Sparse variant: the dual vector passes through
/// soft_threshold(., alpha_t * beta) before the pullback.
void sparse_mirror_td_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_s,
                           const Eigen::VectorXd& phi_next, double r);

/// Composite mirror-descent step with the adaptive diagonal scaling:
/// w_i <- sign(w_i + alpha xi_i / H_i) * max(0, |w_i + alpha xi_i / H_i| - alpha beta / H_i).
void composite_md_step(LearnerState& ls, AdaptiveScaler& scaler, const Eigen::VectorXd& phi_s,
                       const Eigen::VectorXd& phi_next, double r);

// --- action-value steps (control) ------------------------------------------
// delta = r + gamma * max_a' <phi_next_actions.row(a'), w> - <phi_sa, w>.
// phi_next_actions holds one row per action; pass a 0-row matrix at terminal
// transitions (the max is then dropped from the target).

void q_learning_step(LearnerState& ls, const Eigen::VectorXd& phi_sa,
                     const Eigen::MatrixXd& phi_next_actions, double r);
void mirror_q_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_sa,
                   const Eigen::MatrixXd& phi_next_actions, double r);
void sparse_mirror_q_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_sa,
                          const Eigen::MatrixXd& phi_next_actions, double r);
void composite_q_step(LearnerState& ls, AdaptiveScaler& scaler, const Eigen::VectorXd& phi_sa,
                      const Eigen::MatrixXd& phi_next_actions, double r);

/// argmax_a <action_features.row(a), w>, ties broken by the lowest index.
int greedy_action(const Eigen::VectorXd& w, const Eigen::MatrixXd& action_features);

/// With probability epsilon a uniform action, otherwise greedy_action.
int eps_greedy_action(const Eigen::VectorXd& w, const Eigen::MatrixXd& action_features,
                      double epsilon, std::mt19937_64& rng);

}  // namespace mdrl
