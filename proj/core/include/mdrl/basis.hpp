#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace mdrl {

/// Feature map over a finite state space.  Immutable after construction;
/// evaluation is pure and thread-safe.
class DiscreteBasis {
 public:
  virtual ~DiscreteBasis() = default;
  virtual int n_states() const = 0;
  virtual int dim() const = 0;
  /// Feature vector phi(s), exactly dim() finite entries.
  virtual Eigen::VectorXd evaluate(int s) const = 0;
  virtual void save(std::ostream& os) const = 0;

  /// Full |S| x d basis matrix, row s = phi(s).
  Eigen::MatrixXd matrix() const;

 protected:
  void check_state(int s) const;
};

/// Feature map over a continuous (vector-valued) state space.
class ContinuousBasis {
 public:
  virtual ~ContinuousBasis() = default;
  virtual int state_dim() const = 0;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const = 0;
  virtual void save(std::ostream& os) const = 0;
};

/// One-hot indicator features; Phi = I.
class TabularBasis final : public DiscreteBasis {
 public:
  explicit TabularBasis(int n_states);
  int n_states() const override { return n_; }
  int dim() const override { return n_; }
  Eigen::VectorXd evaluate(int s) const override;
  void save(std::ostream& os) const override;

 private:
  int n_;
};

/// Proto-value functions: the k eigenvectors of the graph Laplacian with the
/// smallest eigenvalues, unit-norm, sign-fixed so the largest-magnitude entry
/// of each column is positive.  Combinatorial L = D - A by default; the
/// normalized Laplacian I - D^{-1/2} A D^{-1/2} is available by flag.
class PvfBasis final : public DiscreteBasis {
 public:
  PvfBasis(const Eigen::MatrixXd& adjacency, int k, bool normalized_laplacian = false);
  int n_states() const override { return static_cast<int>(columns_.rows()); }
  int dim() const override { return static_cast<int>(columns_.cols()); }
  Eigen::VectorXd evaluate(int s) const override;
  void save(std::ostream& os) const override;

  const Eigen::MatrixXd& columns() const { return columns_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  bool normalized_laplacian() const { return normalized_; }

 private:
  PvfBasis() = default;
  friend std::shared_ptr<DiscreteBasis> load_discrete_basis(std::istream&);
  Eigen::MatrixXd columns_;
  Eigen::VectorXd eigenvalues_;
  bool normalized_ = false;
};

/// Base features plus n_noise standard-normal noise features, frozen at
/// construction from the given seed.  Same seed, same features, bit for bit.
class NoisyBasis final : public DiscreteBasis {
 public:
  NoisyBasis(std::shared_ptr<const DiscreteBasis> base, int n_noise, std::uint64_t seed);
  int n_states() const override { return base_->n_states(); }
  int dim() const override { return base_->dim() + static_cast<int>(noise_.cols()); }
  Eigen::VectorXd evaluate(int s) const override;
  void save(std::ostream& os) const override;

  int base_dim() const { return base_->dim(); }
  std::uint64_t seed() const { return seed_; }

 private:
  NoisyBasis() = default;
  friend std::shared_ptr<DiscreteBasis> load_discrete_basis(std::istream&);
  std::shared_ptr<const DiscreteBasis> base_;
  Eigen::MatrixXd noise_;  // n_states x n_noise
  std::uint64_t seed_ = 0;
};

/// Fourier features phi_c(x) = cos(pi * c . xbar) over the full multi-index
/// grid c in {0..order}^dim, with xbar the state rescaled to [0,1]^dim.
/// d = (order+1)^dim; every feature lies in [-1, 1].  States outside the
/// bounds are clamped; clamp events are counted for run diagnostics.
class FourierBasis final : public ContinuousBasis {
 public:
  FourierBasis(int order, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  int state_dim() const override { return static_cast<int>(lo_.size()); }
  int dim() const override { return static_cast<int>(coeffs_.rows()); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  void save(std::ostream& os) const override;

  int order() const { return order_; }
  long clamp_count() const { return clamp_count_.load(); }
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }

 private:
  int order_;
  Eigen::VectorXd lo_, hi_;
  Eigen::MatrixXd coeffs_;  // d x state_dim multi-indices
  mutable std::atomic<long> clamp_count_{0};
};

/// Gaussian bumps exp(-||x - c_i||^2 / width_i^2); value 1 at the center.
class RbfBasis final : public ContinuousBasis {
 public:
  RbfBasis(const Eigen::MatrixXd& centers, const Eigen::VectorXd& widths);
  int state_dim() const override { return static_cast<int>(centers_.cols()); }
  int dim() const override { return static_cast<int>(centers_.rows()); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  void save(std::ostream& os) const override;

 private:
  Eigen::MatrixXd centers_;  // k x state_dim
  Eigen::VectorXd widths_;   // k
};

/// Tensor-grid monomials prod_i xbar_i^{c_i}, c in {0..degree}^dim, over the
/// state rescaled to [0,1]^dim.  degree 0 is the constant feature.
class PolynomialBasis final : public ContinuousBasis {
 public:
  PolynomialBasis(int degree, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  int state_dim() const override { return static_cast<int>(lo_.size()); }
  int dim() const override { return static_cast<int>(coeffs_.rows()); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  void save(std::ostream& os) const override;

  int degree() const { return degree_; }

 private:
  int degree_;
  Eigen::VectorXd lo_, hi_;
  Eigen::MatrixXd coeffs_;
};

std::shared_ptr<DiscreteBasis> tabular_basis(int n_states);
std::shared_ptr<DiscreteBasis> pvf_basis(const Eigen::MatrixXd& adjacency, int k,
                                         bool normalized_laplacian = false);
std::shared_ptr<DiscreteBasis> noisy_augment(std::shared_ptr<const DiscreteBasis> base,
                                             int n_noise, std::uint64_t seed);
std::shared_ptr<ContinuousBasis> fourier_basis(int order, const Eigen::VectorXd& lo,
                                               const Eigen::VectorXd& hi);
std::shared_ptr<ContinuousBasis> rbf_basis(const Eigen::MatrixXd& centers,
                                           const Eigen::VectorXd& widths);
std::shared_ptr<ContinuousBasis> polynomial_basis(int degree, const Eigen::VectorXd& lo,
                                                  const Eigen::VectorXd& hi);

std::shared_ptr<DiscreteBasis> load_discrete_basis(std::istream& is);
std::shared_ptr<ContinuousBasis> load_continuous_basis(std::istream& is);

/// Block layout for state-action features: phi(s, a) places the d base
/// features in block a of an (d * n_actions)-vector; other blocks are zero.
class BlockActionEmbed {
 public:
  BlockActionEmbed(int base_dim, int n_actions);
  int base_dim() const { return base_dim_; }
  int n_actions() const { return n_actions_; }
  int dim() const { return base_dim_ * n_actions_; }

  Eigen::VectorXd embed(const Eigen::VectorXd& phi, int action) const;
  /// All actions at once: row a = embed(phi, a).
  Eigen::MatrixXd embed_all(const Eigen::VectorXd& phi) const;

 private:
  int base_dim_, n_actions_;
};

/// Full multi-index grid {0..order}^dim in row-major order (last index
/// fastest); shared by the Fourier and polynomial constructions.
Eigen::MatrixXd multi_index_grid(int order, int dim);

}  // namespace mdrl
