#pragma once

#include <Eigen/Core>

namespace mdrl {

enum class MapKind { euclidean, pnorm, negentropy };

/// A distance-generating function psi together with its link pair
/// (grad psi, grad psi*).  Three closed-form variants:
///
///   euclidean   psi(w) = 1/2 ||w||_2^2          identity link, sigma = 1 in ||.||_2
///   pnorm       psi(w) = 1/2 ||w||_q^2          q = p/(p-1), link of the p-norm family
///   negentropy  psi(w) = sum_i w_i log w_i      positive orthant, exponential link
///
/// Immutable after construction; all member functions are pure and
/// thread-safe.
class MirrorMap {
 public:
  static MirrorMap euclidean();
  /// Requires p > 1 strictly. pnorm(2) coincides with euclidean.
  static MirrorMap pnorm(double p);
  /// Dual-to-primal pullback clamps dual coordinates to +-500 before
  /// exponentiation and rescales the result to sum to `total_mass`.
  static MirrorMap negentropy(double total_mass = 1.0);

  MapKind kind() const { return kind_; }
  double p() const { return p_; }
  /// Conjugate exponent q = p/(p-1); computed, never stored.
  double q() const { return p_ / (p_ - 1.0); }
  double total_mass() const { return mass_; }

  /// psi(w).  negentropy requires strictly positive entries.
  double psi(const Eigen::VectorXd& w) const;

  /// grad psi: primal -> dual.  pnorm maps 0 to 0 (limit along rays).
  Eigen::VectorXd grad(const Eigen::VectorXd& w) const;

  /// grad psi* = (grad psi)^{-1}: dual -> primal.
  Eigen::VectorXd grad_conjugate(const Eigen::VectorXd& theta) const;

  /// D_psi(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>; >= 0, 0 iff x = y.
  double bregman(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

 private:
  MirrorMap(MapKind kind, double p, double mass) : kind_(kind), p_(p), mass_(mass) {}

  MapKind kind_;
  double p_;     // pnorm only
  double mass_;  // negentropy only
};

/// Entry-wise proximal operator of tau*||.||_1:
/// out_i = sign(w_i) * max(0, |w_i| - tau).  Requires tau >= 0.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& w, double tau);

}  // namespace mdrl
