#include "mdrl/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace mdrl {

namespace {

constexpr double kDualClamp = 500.0;  // negentropy overflow guard

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

void require_positive(const Eigen::VectorXd& v, const char* what) {
  if ((v.array() <= 0.0).any()) {
    throw std::domain_error(std::string(what) + ": negentropy requires strictly positive entries");
  }
}

// sign(v_j)|v_j|^{a-1} / ||v||_a^{a-2}, computed on v/max|v| so that the
// norm powers stay in range for any a > 1.  The map is 1-homogeneous.
Eigen::VectorXd power_link(const Eigen::VectorXd& v, double a) {
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd u = v / m;
  const double norm_a = std::pow(u.array().abs().pow(a).sum(), 1.0 / a);
  const double denom = std::pow(norm_a, a - 2.0);
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double aj = std::abs(u[j]);
    out[j] = aj == 0.0 ? 0.0 : std::copysign(std::pow(aj, a - 1.0) / denom, u[j]);
  }
  return m * out;
}

}  // namespace

MirrorMap MirrorMap::euclidean() { return MirrorMap(MapKind::euclidean, 2.0, 1.0); }

MirrorMap MirrorMap::pnorm(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("MirrorMap::pnorm: requires p > 1");
  return MirrorMap(MapKind::pnorm, p, 1.0);
}

MirrorMap MirrorMap::negentropy(double total_mass) {
  if (!(total_mass > 0.0)) throw std::invalid_argument("MirrorMap::negentropy: mass must be > 0");
  return MirrorMap(MapKind::negentropy, 2.0, total_mass);
}

double MirrorMap::psi(const Eigen::VectorXd& w) const {
  require_finite(w, "MirrorMap::psi");
  switch (kind_) {
    case MapKind::euclidean:
      return 0.5 * w.squaredNorm();
    case MapKind::pnorm: {
      const double m = w.cwiseAbs().maxCoeff();
      if (m == 0.0) return 0.0;
      const double nq = m * std::pow((w / m).array().abs().pow(q()).sum(), 1.0 / q());
      return 0.5 * nq * nq;
    }
    case MapKind::negentropy:
      require_positive(w, "MirrorMap::psi");
      return (w.array() * w.array().log()).sum();
  }
  return 0.0;
}

Eigen::VectorXd MirrorMap::grad(const Eigen::VectorXd& w) const {
  if (w.size() == 0) throw std::invalid_argument("MirrorMap::grad: empty vector");
  require_finite(w, "MirrorMap::grad");
  switch (kind_) {
    case MapKind::euclidean:
      return w;
    case MapKind::pnorm:
      // f_j(w) = sign(w_j)|w_j|^{q-1} / ||w||_q^{q-2}
      return power_link(w, q());
    case MapKind::negentropy:
      require_positive(w, "MirrorMap::grad");
      return (1.0 + w.array().log()).matrix();
  }
  return w;
}

Eigen::VectorXd MirrorMap::grad_conjugate(const Eigen::VectorXd& theta) const {
  if (theta.size() == 0) throw std::invalid_argument("MirrorMap::grad_conjugate: empty vector");
  require_finite(theta, "MirrorMap::grad_conjugate");
  switch (kind_) {
    case MapKind::euclidean:
      return theta;
    case MapKind::pnorm:
      // f_j^{-1}(theta) = sign(theta_j)|theta_j|^{p-1} / ||theta||_p^{p-2}
      return power_link(theta, p_);
    case MapKind::negentropy: {
      Eigen::VectorXd u =
          (theta.array().min(kDualClamp).max(-kDualClamp) - 1.0).exp();
      const double total = u.sum();
      return u * (mass_ / total);
    }
  }
  return theta;
}

double MirrorMap::bregman(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != y.size()) throw std::invalid_argument("MirrorMap::bregman: size mismatch");
  return psi(x) - psi(y) - grad(y).dot(x - y);
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& w, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  return w.array().sign() * (w.array().abs() - tau).max(0.0);
}

}  // namespace mdrl
