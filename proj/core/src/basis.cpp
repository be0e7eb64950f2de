#include "mdrl/basis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"

namespace mdrl {

namespace {

void check_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw std::invalid_argument("basis: bounds must be non-empty and of equal length");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw std::invalid_argument("basis: requires lo < hi per dimension");
  }
}

// Rescale to [0,1]^dim, clamping; reports whether any coordinate clamped.
Eigen::VectorXd rescale_unit(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, bool* clamped) {
  if (x.size() != lo.size()) throw std::invalid_argument("basis: state dimension mismatch");
  Eigen::VectorXd u(x.size());
  bool any = false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double v = (x[i] - lo[i]) / (hi[i] - lo[i]);
    if (v < 0.0 || v > 1.0) any = true;
    u[i] = std::min(1.0, std::max(0.0, v));
  }
  if (clamped) *clamped = any;
  return u;
}

std::vector<std::vector<int>> graph_components(const Eigen::MatrixXd& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> components;
  for (int start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    std::queue<int> bfs;
    bfs.push(start);
    comp[start] = id;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      components[id].push_back(u);
      for (int v = 0; v < n; ++v) {
        if (comp[v] < 0 && adjacency(u, v) > 0.0) {
          comp[v] = id;
          bfs.push(v);
        }
      }
    }
  }
  return components;
}

}  // namespace

Eigen::MatrixXd DiscreteBasis::matrix() const {
  Eigen::MatrixXd phi(n_states(), dim());
  for (int s = 0; s < n_states(); ++s) phi.row(s) = evaluate(s).transpose();
  return phi;
}

void DiscreteBasis::check_state(int s) const {
  if (s < 0 || s >= n_states()) {
    throw std::invalid_argument("basis: state " + std::to_string(s) + " out of range [0, " +
                                std::to_string(n_states()) + ")");
  }
}

// ---------------------------------------------------------------------------
// Tabular

TabularBasis::TabularBasis(int n_states) : n_(n_states) {
  if (n_states < 1) throw std::invalid_argument("tabular_basis: n_states must be >= 1");
}

Eigen::VectorXd TabularBasis::evaluate(int s) const {
  check_state(s);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n_);
  phi[s] = 1.0;
  return phi;
}

void TabularBasis::save(std::ostream& os) const {
  os << "mdrl-basis tabular\n";
  os << "n_states " << n_ << '\n';
}

// ---------------------------------------------------------------------------
// Proto-value functions

PvfBasis::PvfBasis(const Eigen::MatrixXd& adjacency, int k, bool normalized_laplacian)
    : normalized_(normalized_laplacian) {
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n || n < 1) throw std::invalid_argument("pvf_basis: adjacency must be square");
  if (k < 1 || k > n) throw std::invalid_argument("pvf_basis: requires 1 <= k <= n_states");
  if ((adjacency.array() < 0.0).any()) throw std::invalid_argument("pvf_basis: adjacency must be nonnegative");
  if ((adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("pvf_basis: adjacency must be symmetric");
  }
  if (adjacency.diagonal().cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("pvf_basis: adjacency must have zero diagonal");
  }

  auto components = graph_components(adjacency);
  if (components.size() > 1) {
    std::ostringstream msg;
    msg << "pvf_basis: graph is disconnected (" << components.size() << " components:";
    for (const auto& comp : components) {
      msg << " {" << comp.front();
      for (size_t i = 1; i < comp.size() && i < 4; ++i) msg << "," << comp[i];
      if (comp.size() > 4) msg << ",...";
      msg << "}(" << comp.size() << ")";
    }
    msg << ")";
    throw std::invalid_argument(msg.str());
  }

  const Eigen::VectorXd degree = adjacency.rowwise().sum();
  Eigen::MatrixXd laplacian;
  if (normalized_laplacian) {
    Eigen::VectorXd dinv_sqrt = degree.array().max(1e-300).rsqrt();
    laplacian = Eigen::MatrixXd::Identity(n, n) -
                dinv_sqrt.asDiagonal() * adjacency * dinv_sqrt.asDiagonal();
  } else {
    laplacian = Eigen::MatrixXd(degree.asDiagonal()) - adjacency;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pvf_basis: eigensolver failed");

  columns_ = solver.eigenvectors().leftCols(k);
  eigenvalues_ = solver.eigenvalues().head(k);

  // Sign convention: largest-magnitude entry of each column is positive.
  for (Eigen::Index j = 0; j < columns_.cols(); ++j) {
    Eigen::Index imax;
    columns_.col(j).cwiseAbs().maxCoeff(&imax);
    if (columns_(imax, j) < 0.0) columns_.col(j) = -columns_.col(j);
  }
}

Eigen::VectorXd PvfBasis::evaluate(int s) const {
  check_state(s);
  return columns_.row(s).transpose();
}

void PvfBasis::save(std::ostream& os) const {
  os << "mdrl-basis pvf\n";
  os << "normalized " << (normalized_ ? 1 : 0) << '\n';
  text_io::write_vector(os, "eigenvalues", eigenvalues_);
  text_io::write_matrix(os, "columns", columns_);
}

// ---------------------------------------------------------------------------
// Noise augmentation

NoisyBasis::NoisyBasis(std::shared_ptr<const DiscreteBasis> base, int n_noise, std::uint64_t seed)
    : base_(std::move(base)), seed_(seed) {
  if (!base_) throw std::invalid_argument("noisy_augment: null base");
  if (n_noise < 0) throw std::invalid_argument("noisy_augment: n_noise must be >= 0");
  noise_.resize(base_->n_states(), n_noise);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  for (Eigen::Index s = 0; s < noise_.rows(); ++s) {
    for (Eigen::Index j = 0; j < noise_.cols(); ++j) {
      noise_(s, j) = standard_normal(rng);
    }
  }
}

Eigen::VectorXd NoisyBasis::evaluate(int s) const {
  check_state(s);
  Eigen::VectorXd phi(dim());
  phi.head(base_->dim()) = base_->evaluate(s);
  phi.tail(noise_.cols()) = noise_.row(s).transpose();
  return phi;
}

void NoisyBasis::save(std::ostream& os) const {
  os << "mdrl-basis noisy\n";
  os << "seed " << seed_ << '\n';
  base_->save(os);
  text_io::write_matrix(os, "noise", noise_);
}

// ---------------------------------------------------------------------------
// Fourier

Eigen::MatrixXd multi_index_grid(int order, int dim) {
  if (order < 0) throw std::invalid_argument("multi_index_grid: order must be >= 0");
  if (dim < 1) throw std::invalid_argument("multi_index_grid: dim must be >= 1");
  double count_d = std::pow(static_cast<double>(order) + 1.0, dim);
  if (count_d > 1e7) throw std::invalid_argument("multi_index_grid: (order+1)^dim too large");
  const Eigen::Index count = static_cast<Eigen::Index>(std::llround(count_d));
  Eigen::MatrixXd grid(count, dim);
  for (Eigen::Index r = 0; r < count; ++r) {
    Eigen::Index rem = r;
    for (int i = dim - 1; i >= 0; --i) {
      grid(r, i) = static_cast<double>(rem % (order + 1));
      rem /= (order + 1);
    }
  }
  return grid;
}

FourierBasis::FourierBasis(int order, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
    : order_(order), lo_(lo), hi_(hi) {
  check_bounds(lo, hi);
  coeffs_ = multi_index_grid(order, static_cast<int>(lo.size()));
}

Eigen::VectorXd FourierBasis::evaluate(const Eigen::VectorXd& x) const {
  bool clamped = false;
  Eigen::VectorXd u = rescale_unit(x, lo_, hi_, &clamped);
  if (clamped) clamp_count_.fetch_add(1, std::memory_order_relaxed);
  return (std::numbers::pi * (coeffs_ * u)).array().cos();
}

void FourierBasis::save(std::ostream& os) const {
  os << "mdrl-basis fourier\n";
  os << "order " << order_ << '\n';
  text_io::write_vector(os, "lo", lo_);
  text_io::write_vector(os, "hi", hi_);
}

// ---------------------------------------------------------------------------
// RBF

RbfBasis::RbfBasis(const Eigen::MatrixXd& centers, const Eigen::VectorXd& widths)
    : centers_(centers), widths_(widths) {
  if (centers.rows() == 0) throw std::invalid_argument("rbf_basis: empty centers");
  if (widths.size() != centers.rows()) {
    throw std::invalid_argument("rbf_basis: need one width per center");
  }
  if ((widths.array() <= 0.0).any()) throw std::invalid_argument("rbf_basis: widths must be > 0");
}

Eigen::VectorXd RbfBasis::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != centers_.cols()) throw std::invalid_argument("rbf_basis: state dimension mismatch");
  Eigen::VectorXd phi(dim());
  for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
    const double d2 = (x.transpose() - centers_.row(i)).squaredNorm();
    phi[i] = std::exp(-d2 / (widths_[i] * widths_[i]));
  }
  return phi;
}

void RbfBasis::save(std::ostream& os) const {
  os << "mdrl-basis rbf\n";
  text_io::write_vector(os, "widths", widths_);
  text_io::write_matrix(os, "centers", centers_);
}

// ---------------------------------------------------------------------------
// Polynomial

PolynomialBasis::PolynomialBasis(int degree, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
    : degree_(degree), lo_(lo), hi_(hi) {
  if (degree < 0) throw std::invalid_argument("polynomial_basis: degree must be >= 0");
  check_bounds(lo, hi);
  coeffs_ = multi_index_grid(degree, static_cast<int>(lo.size()));
}

Eigen::VectorXd PolynomialBasis::evaluate(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u = rescale_unit(x, lo_, hi_, nullptr);
  Eigen::VectorXd phi = Eigen::VectorXd::Ones(dim());
  for (Eigen::Index r = 0; r < coeffs_.rows(); ++r) {
    for (Eigen::Index i = 0; i < coeffs_.cols(); ++i) {
      const int c = static_cast<int>(coeffs_(r, i));
      for (int rep = 0; rep < c; ++rep) phi[r] *= u[i];
    }
  }
  return phi;
}

void PolynomialBasis::save(std::ostream& os) const {
  os << "mdrl-basis polynomial\n";
  os << "degree " << degree_ << '\n';
  text_io::write_vector(os, "lo", lo_);
  text_io::write_vector(os, "hi", hi_);
}

// ---------------------------------------------------------------------------
// Factories and loaders

std::shared_ptr<DiscreteBasis> tabular_basis(int n_states) {
  return std::make_shared<TabularBasis>(n_states);
}

std::shared_ptr<DiscreteBasis> pvf_basis(const Eigen::MatrixXd& adjacency, int k,
                                         bool normalized_laplacian) {
  return std::make_shared<PvfBasis>(adjacency, k, normalized_laplacian);
}

std::shared_ptr<DiscreteBasis> noisy_augment(std::shared_ptr<const DiscreteBasis> base,
                                             int n_noise, std::uint64_t seed) {
  return std::make_shared<NoisyBasis>(std::move(base), n_noise, seed);
}

std::shared_ptr<ContinuousBasis> fourier_basis(int order, const Eigen::VectorXd& lo,
                                               const Eigen::VectorXd& hi) {
  return std::make_shared<FourierBasis>(order, lo, hi);
}

std::shared_ptr<ContinuousBasis> rbf_basis(const Eigen::MatrixXd& centers,
                                           const Eigen::VectorXd& widths) {
  return std::make_shared<RbfBasis>(centers, widths);
}

std::shared_ptr<ContinuousBasis> polynomial_basis(int degree, const Eigen::VectorXd& lo,
                                                  const Eigen::VectorXd& hi) {
  return std::make_shared<PolynomialBasis>(degree, lo, hi);
}

std::shared_ptr<DiscreteBasis> load_discrete_basis(std::istream& is) {
  text_io::expect(is, "mdrl-basis");
  std::string kind;
  is >> kind;
  if (kind == "tabular") {
    return tabular_basis(text_io::read_value<int>(is, "n_states"));
  }
  if (kind == "pvf") {
    auto basis = std::shared_ptr<PvfBasis>(new PvfBasis());
    basis->normalized_ = text_io::read_value<int>(is, "normalized") != 0;
    basis->eigenvalues_ = text_io::read_vector(is, "eigenvalues");
    basis->columns_ = text_io::read_matrix(is, "columns");
    return basis;
  }
  if (kind == "noisy") {
    // The stored matrix wins over regeneration so saved features stay pinned.
    auto out = std::shared_ptr<NoisyBasis>(new NoisyBasis());
    out->seed_ = text_io::read_value<std::uint64_t>(is, "seed");
    out->base_ = load_discrete_basis(is);
    out->noise_ = text_io::read_matrix(is, "noise");
    return out;
  }
  throw std::runtime_error("load_discrete_basis: unknown kind '" + kind + "'");
}

std::shared_ptr<ContinuousBasis> load_continuous_basis(std::istream& is) {
  text_io::expect(is, "mdrl-basis");
  std::string kind;
  is >> kind;
  if (kind == "fourier") {
    const int order = text_io::read_value<int>(is, "order");
    Eigen::VectorXd lo = text_io::read_vector(is, "lo");
    Eigen::VectorXd hi = text_io::read_vector(is, "hi");
    return fourier_basis(order, lo, hi);
  }
  if (kind == "rbf") {
    Eigen::VectorXd widths = text_io::read_vector(is, "widths");
    Eigen::MatrixXd centers = text_io::read_matrix(is, "centers");
    return rbf_basis(centers, widths);
  }
  if (kind == "polynomial") {
    const int degree = text_io::read_value<int>(is, "degree");
    Eigen::VectorXd lo = text_io::read_vector(is, "lo");
    Eigen::VectorXd hi = text_io::read_vector(is, "hi");
    return polynomial_basis(degree, lo, hi);
  }
  throw std::runtime_error("load_continuous_basis: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// State-action block layout

BlockActionEmbed::BlockActionEmbed(int base_dim, int n_actions)
    : base_dim_(base_dim), n_actions_(n_actions) {
  if (base_dim < 1 || n_actions < 1) {
    throw std::invalid_argument("BlockActionEmbed: dimensions must be >= 1");
  }
}

Eigen::VectorXd BlockActionEmbed::embed(const Eigen::VectorXd& phi, int action) const {
  if (phi.size() != base_dim_) throw std::invalid_argument("BlockActionEmbed: feature size mismatch");
  if (action < 0 || action >= n_actions_) throw std::invalid_argument("BlockActionEmbed: action out of range");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  out.segment(static_cast<Eigen::Index>(action) * base_dim_, base_dim_) = phi;
  return out;
}

Eigen::MatrixXd BlockActionEmbed::embed_all(const Eigen::VectorXd& phi) const {
  if (phi.size() != base_dim_) throw std::invalid_argument("BlockActionEmbed: feature size mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_actions_, dim());
  for (int a = 0; a < n_actions_; ++a) {
    out.row(a).segment(static_cast<Eigen::Index>(a) * base_dim_, base_dim_) = phi.transpose();
  }
  return out;
}

}  // namespace mdrl
