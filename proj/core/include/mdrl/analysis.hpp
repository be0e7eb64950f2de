#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mdrl/envs.hpp"

namespace mdrl {

/// rho-weighted l2 geometry over states: ||x||_rho = sqrt(sum_s rho_s x_s^2).
/// rho must be a probability vector.
struct WeightedNorm {
  Eigen::VectorXd rho;

  explicit WeightedNorm(Eigen::VectorXd rho_in);
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  double norm(const Eigen::VectorXd& x) const;
};

/// Stationary distribution of P^pi (least-squares solve of rho^T P = rho^T,
/// sum rho = 1).  Requires an ergodic chain.
Eigen::VectorXd stationary_distribution(const MdpModel& m, const Policy& pi);

/// w = argmin ||y - Phi w||_rho^2.  Errors on rank deficiency, naming a null
/// direction.  The residual is orthogonal to the columns under the
/// rho-inner-product to 1e-10.
Eigen::VectorXd l2_projection(const Eigen::MatrixXd& phi, const Eigen::VectorXd& rho,
                              const Eigen::VectorXd& y);

/// w = argmin ||y - Phi w||_rho^2 + beta ||w||_1, solved by coordinate
/// descent with covariance updates (sweep cap 1e5, convergence when the
/// largest coordinate change is <= 1e-10).  At the solution the rho-weighted
/// correlations c_j = <Phi_j, y - Phi w>_rho satisfy |c_j| <= beta/2 for
/// w_j = 0 and c_j = sign(w_j) beta/2 for active coordinates.
Eigen::VectorXd l1_projection(const Eigen::MatrixXd& phi, const Eigen::VectorXd& rho,
                              const Eigen::VectorXd& y, double beta);

/// T^pi V = R^pi + gamma P^pi V.
Eigen::VectorXd bellman_apply(const MdpModel& m, const Policy& pi, const Eigen::VectorXd& v);

struct ContractionResult {
  double max_ratio = 0.0;
  int pairs_used = 0;
  double gamma = 0.0;
  bool pass = false;
};

/// Empirical gamma-contraction check of K = Pi_l1 . Pi . T^pi over n_pairs
/// random vector pairs: max ||K V1 - K V2||_rho / ||V1 - V2||_rho.
/// Pairs with ||V1 - V2||_rho < 1e-12 are skipped.
/// PASS iff the max ratio <= gamma + 1e-6.
ContractionResult contraction_check(const MdpModel& m, const Policy& pi,
                                    const Eigen::MatrixXd& phi, const Eigen::VectorXd& rho,
                                    double beta, int n_pairs, std::uint64_t seed);

/// Every term of the approximation-error bound for Algorithm 2, all norms
/// rho-weighted.  f(y, beta) is reported both unsquared (used in the PASS
/// check, matching the triangle-inequality derivation) and squared (the
/// definition's form); the ambiguity is flagged in the report text.
struct BoundReport {
  double lhs = 0.0;            // ||V - Phi w_N||_rho
  double projection_error = 0.0;  // ||V - Pi V||_rho
  double f_unsquared = 0.0;    // ||Pi V - Pi_l1 Pi V||_rho
  double f_squared = 0.0;      // the same, squared
  double solver_term = 0.0;    // (M - 1) P(0)
  double horizon_term = 0.0;   // ||w*||_1^2 M / (alpha_t N)
  double rhs = 0.0;            // (sum of terms) / (1 - gamma)
  double m_constant = 0.0;     // M = 2 / (2 - 4 alpha_t (p-1) e)
  double e_constant = 0.0;     // e = d^{p/2}
  double p0_constant = 0.0;    // P(0) = sum_s rho_s (Pi V)(s)^2
  double w_star_l1 = 0.0;
  bool pass = false;

  void write_csv(std::ostream& os) const;
  static const char* csv_header();
};

/// Evaluates the bound with V from policy_evaluation_exact and
/// V_hat = Phi w_n.  Requires alpha_t < 1 / (2 (p-1) e) so that M > 0;
/// violations raise an error naming the maximal admissible alpha_t.
BoundReport theorem1_bound(const MdpModel& m, const Policy& pi, const Eigen::MatrixXd& phi,
                           const Eigen::VectorXd& rho, double beta, double alpha_t, double p,
                           long n_steps, const Eigen::VectorXd& w_n);

struct EpisodeMetrics {
  int episode = 0;
  double bellman_error = 0.0;  // ||T^pi Phi w - Phi w||_rho
  double delta_l2 = 0.0;       // ||w_k - w_{k-1}||_2, 0 for the first episode
  double delta_linf = 0.0;
  double l1_norm = 0.0;
  int nnz = 0;                 // entries with |w_j| > 1e-12
};

/// One row per episode from the per-episode weight history.
std::vector<EpisodeMetrics> run_metrics(const std::vector<Eigen::VectorXd>& w_history,
                                        const MdpModel& m, const Policy& pi,
                                        const Eigen::MatrixXd& phi, const Eigen::VectorXd& rho);

constexpr double kSparsityCutoff = 1e-12;
int count_nonzero(const Eigen::VectorXd& w);

/// rho-weighted Pearson correlation between two state-value vectors.
double weighted_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& rho);

}  // namespace mdrl
