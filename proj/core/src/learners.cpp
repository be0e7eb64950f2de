#include "mdrl/learners.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "text_io.hpp"

namespace mdrl {

namespace {

constexpr double kDivergenceLimit = 1e8;

void check_dim(const LearnerState& ls, const Eigen::VectorXd& phi, const char* who) {
  if (phi.size() != ls.w.size()) {
    throw std::invalid_argument(std::string(who) + ": feature dimension " +
                                std::to_string(phi.size()) + " != weight dimension " +
                                std::to_string(ls.w.size()));
  }
}

void check_weights(const LearnerState& ls, const char* who) {
  if (!ls.w.allFinite() || ls.w.cwiseAbs().maxCoeff() > kDivergenceLimit) {
    throw divergence_error(std::string(who) + ": weights diverged at step " +
                           std::to_string(ls.t) + " (||w||_inf = " +
                           std::to_string(ls.w.cwiseAbs().maxCoeff()) + ")");
  }
}

double td_error(const LearnerState& ls, const Eigen::VectorXd& phi_s,
                const Eigen::VectorXd& phi_next, double r) {
  return r + ls.hyper.gamma * phi_next.dot(ls.w) - phi_s.dot(ls.w);
}

// Target value max_a' <phi(s',a'), w>; zero when there is no next action
// (terminal transition encoded as a 0-row matrix).
double q_target(const LearnerState& ls, const Eigen::MatrixXd& phi_next_actions) {
  if (phi_next_actions.rows() == 0) return 0.0;
  if (phi_next_actions.cols() != ls.w.size()) {
    throw std::invalid_argument("q step: action-feature dimension mismatch");
  }
  return (phi_next_actions * ls.w).maxCoeff();
}

// Shared body of Algorithms 1 and 2; sparse toggles the dual truncation.
void mirror_core(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi,
                 double delta, bool sparse, const char* who) {
  const double alpha = ls.hyper.alpha(ls.t);
  ls.e = trace_update(ls.e, phi, ls.hyper.gamma, ls.hyper.lambda, ls.hyper.trace);
  if (map.kind() == MapKind::negentropy) {
    // EG+-: signed weights via the doubled positive vector u = [w+; w-],
    // w = w+ - w-.  Features enter as [e; -e].
    const Eigen::Index d = ls.w.size();
    if (ls.theta.size() != 2 * d) {
      throw std::invalid_argument(std::string(who) + ": negentropy learner needs a 2d dual");
    }
    Eigen::VectorXd u = map.grad_conjugate(ls.theta);
    Eigen::VectorXd dual = map.grad(u);
    dual.head(d) += alpha * delta * ls.e;
    dual.tail(d) -= alpha * delta * ls.e;
    if (sparse) dual = soft_threshold(dual, alpha * ls.hyper.beta);
    ls.theta = dual;
    u = map.grad_conjugate(ls.theta);
    ls.w = u.head(d) - u.tail(d);
  } else {
    Eigen::VectorXd dual = map.grad(ls.w) + alpha * delta * ls.e;
    if (sparse) dual = soft_threshold(dual, alpha * ls.hyper.beta);
    ls.theta = dual;
    ls.w = map.grad_conjugate(ls.theta);
  }
  ++ls.t;
  check_weights(ls, who);
}

void composite_core(LearnerState& ls, AdaptiveScaler& scaler, const Eigen::VectorXd& phi,
                    double delta, const char* who) {
  if (scaler.g.size() != ls.w.size()) {
    throw std::invalid_argument(std::string(who) + ": scaler dimension mismatch");
  }
  const double alpha = ls.hyper.alpha(ls.t);
  ls.e = trace_update(ls.e, phi, ls.hyper.gamma, ls.hyper.lambda, ls.hyper.trace);
  const Eigen::VectorXd xi = delta * ls.e;
  if (ls.hyper.g_mode == GAccumMode::features) {
    scaler.g += phi.cwiseProduct(phi);
  } else {
    scaler.g += xi.cwiseProduct(xi);
  }
  const Eigen::VectorXd h = scaler.h();
  const Eigen::VectorXd moved = ls.w + alpha * xi.cwiseQuotient(h);
  // per-coordinate shrinkage by alpha*beta/H_i
  ls.w = moved.array().sign() *
         (moved.array().abs() - alpha * ls.hyper.beta / h.array()).max(0.0);
  ++ls.t;
  check_weights(ls, who);
}

}  // namespace

double AlphaSchedule::operator()(long t) const {
  switch (kind) {
    case Kind::constant:
      return alpha0;
    case Kind::robbins_monro:
      if (!(exponent > 0.5 && exponent <= 1.0)) {
        throw std::invalid_argument("AlphaSchedule: robbins_monro exponent must be in (0.5, 1]");
      }
      return alpha0 / std::pow(1.0 + static_cast<double>(t), exponent);
  }
  return alpha0;
}

double PSchedule::operator()(long t) const {
  if (!(p0 >= 2.0)) throw std::invalid_argument("PSchedule: p0 must be >= 2");
  if (kind == Kind::fixed) return p0;
  if (horizon < 1) throw std::invalid_argument("PSchedule: horizon must be >= 1");
  if (t >= horizon) return 2.0;
  return p0 - (p0 - 2.0) * static_cast<double>(t) / static_cast<double>(horizon);
}

double initial_p(int d) {
  if (d < 1) throw std::invalid_argument("initial_p: d must be >= 1");
  return std::max(2.0, std::log(static_cast<double>(d)));
}

LearnerState LearnerState::init(int d, const LearnerHyper& hyper, const MirrorMap& map) {
  if (d < 1) throw std::invalid_argument("LearnerState: d must be >= 1");
  LearnerState ls;
  ls.hyper = hyper;
  ls.w = Eigen::VectorXd::Zero(d);
  ls.e = Eigen::VectorXd::Zero(d);
  ls.t = 0;
  if (map.kind() == MapKind::negentropy) {
    // Doubled uniform start: u = mass/(2d) everywhere, so w = 0.
    Eigen::VectorXd u = Eigen::VectorXd::Constant(2 * d, map.total_mass() / (2.0 * d));
    ls.theta = map.grad(u);
  } else {
    ls.theta = map.grad(ls.w);
  }
  return ls;
}

Eigen::VectorXd LearnerState::consistent_weights(const MirrorMap& map) const {
  if (map.kind() == MapKind::negentropy) {
    const Eigen::Index d = w.size();
    Eigen::VectorXd u = map.grad_conjugate(theta);
    return u.head(d) - u.tail(d);
  }
  return map.grad_conjugate(theta);
}

AdaptiveScaler AdaptiveScaler::init(int d, double eta) {
  if (d < 1) throw std::invalid_argument("AdaptiveScaler: d must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("AdaptiveScaler: eta must be > 0");
  AdaptiveScaler s;
  s.g = Eigen::VectorXd::Zero(d);
  s.eta = eta;
  return s;
}

Eigen::VectorXd trace_update(const Eigen::VectorXd& e, const Eigen::VectorXd& phi, double gamma,
                             double lambda, TraceMode mode) {
  if (e.size() != phi.size()) throw std::invalid_argument("trace_update: size mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("trace_update: lambda must be in [0, 1]");
  }
  if (mode == TraceMode::standard) return gamma * lambda * e + phi;
  return e + lambda * gamma * phi;
}

void td0_step(LearnerState& ls, const Eigen::VectorXd& phi_s, const Eigen::VectorXd& phi_next,
              double r) {
  check_dim(ls, phi_s, "td0_step");
  check_dim(ls, phi_next, "td0_step");
  const double delta = td_error(ls, phi_s, phi_next, r);
  ls.w += ls.hyper.alpha(ls.t) * delta * phi_s;
  ++ls.t;
  check_weights(ls, "td0_step");
}

void td_lambda_step(LearnerState& ls, const Eigen::VectorXd& phi_s,
                    const Eigen::VectorXd& phi_next, double r) {
  check_dim(ls, phi_s, "td_lambda_step");
  check_dim(ls, phi_next, "td_lambda_step");
  const double delta = td_error(ls, phi_s, phi_next, r);
  ls.e = trace_update(ls.e, phi_s, ls.hyper.gamma, ls.hyper.lambda, ls.hyper.trace);
  ls.w += ls.hyper.alpha(ls.t) * delta * ls.e;
  ++ls.t;
  check_weights(ls, "td_lambda_step");
}

void mirror_td_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_s,
                    const Eigen::VectorXd& phi_next, double r) {
  check_dim(ls, phi_s, "mirror_td_step");
  check_dim(ls, phi_next, "mirror_td_step");
  mirror_core(ls, map, phi_s, td_error(ls, phi_s, phi_next, r), /*sparse=*/false,
              "mirror_td_step");
}

void sparse_mirror_td_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_s,
                           const Eigen::VectorXd& phi_next, double r) {
  check_dim(ls, phi_s, "sparse_mirror_td_step");
  check_dim(ls, phi_next, "sparse_mirror_td_step");
  if (!(ls.hyper.beta >= 0.0)) throw std::invalid_argument("sparse_mirror_td_step: beta must be >= 0");
  mirror_core(ls, map, phi_s, td_error(ls, phi_s, phi_next, r), /*sparse=*/true,
              "sparse_mirror_td_step");
}

void composite_md_step(LearnerState& ls, AdaptiveScaler& scaler, const Eigen::VectorXd& phi_s,
                       const Eigen::VectorXd& phi_next, double r) {
  check_dim(ls, phi_s, "composite_md_step");
  check_dim(ls, phi_next, "composite_md_step");
  composite_core(ls, scaler, phi_s, td_error(ls, phi_s, phi_next, r), "composite_md_step");
}

void q_learning_step(LearnerState& ls, const Eigen::VectorXd& phi_sa,
                     const Eigen::MatrixXd& phi_next_actions, double r) {
  check_dim(ls, phi_sa, "q_learning_step");
  const double delta = r + ls.hyper.gamma * q_target(ls, phi_next_actions) - phi_sa.dot(ls.w);
  ls.e = trace_update(ls.e, phi_sa, ls.hyper.gamma, ls.hyper.lambda, ls.hyper.trace);
  ls.w += ls.hyper.alpha(ls.t) * delta * ls.e;
  ++ls.t;
  check_weights(ls, "q_learning_step");
}

void mirror_q_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_sa,
                   const Eigen::MatrixXd& phi_next_actions, double r) {
  check_dim(ls, phi_sa, "mirror_q_step");
  const double delta = r + ls.hyper.gamma * q_target(ls, phi_next_actions) - phi_sa.dot(ls.w);
  mirror_core(ls, map, phi_sa, delta, /*sparse=*/false, "mirror_q_step");
}

void sparse_mirror_q_step(LearnerState& ls, const MirrorMap& map, const Eigen::VectorXd& phi_sa,
                          const Eigen::MatrixXd& phi_next_actions, double r) {
  check_dim(ls, phi_sa, "sparse_mirror_q_step");
  const double delta = r + ls.hyper.gamma * q_target(ls, phi_next_actions) - phi_sa.dot(ls.w);
  mirror_core(ls, map, phi_sa, delta, /*sparse=*/true, "sparse_mirror_q_step");
}

void composite_q_step(LearnerState& ls, AdaptiveScaler& scaler, const Eigen::VectorXd& phi_sa,
                      const Eigen::MatrixXd& phi_next_actions, double r) {
  check_dim(ls, phi_sa, "composite_q_step");
  const double delta = r + ls.hyper.gamma * q_target(ls, phi_next_actions) - phi_sa.dot(ls.w);
  composite_core(ls, scaler, phi_sa, delta, "composite_q_step");
}

int greedy_action(const Eigen::VectorXd& w, const Eigen::MatrixXd& action_features) {
  if (action_features.rows() == 0) throw std::invalid_argument("greedy_action: no actions");
  const Eigen::VectorXd values = action_features * w;
  int best = 0;
  for (int a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;  // strict: ties keep the lowest index
  }
  return best;
}

int eps_greedy_action(const Eigen::VectorXd& w, const Eigen::MatrixXd& action_features,
                      double epsilon, std::mt19937_64& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("eps_greedy_action: epsilon must be in [0, 1]");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(action_features.rows()) - 1);
    return pick(rng);
  }
  return greedy_action(w, action_features);
}

// ---------------------------------------------------------------------------
// Snapshots

void LearnerState::save(std::ostream& os) const {
  os << "mdrl-learner v1\n";
  os << "t " << t << '\n';
  text_io::write_vector(os, "w", w);
  text_io::write_vector(os, "theta", theta);
  text_io::write_vector(os, "e", e);
  os << "alpha_kind " << (hyper.alpha.kind == AlphaSchedule::Kind::constant ? "constant" : "robbins_monro") << '\n';
  os << "alpha0 " << text_io::fmt_double(hyper.alpha.alpha0) << '\n';
  os << "alpha_exponent " << text_io::fmt_double(hyper.alpha.exponent) << '\n';
  os << "lambda " << text_io::fmt_double(hyper.lambda) << '\n';
  os << "gamma " << text_io::fmt_double(hyper.gamma) << '\n';
  os << "beta " << text_io::fmt_double(hyper.beta) << '\n';
  os << "p_kind " << (hyper.p.kind == PSchedule::Kind::fixed ? "fixed" : "decay") << '\n';
  os << "p0 " << text_io::fmt_double(hyper.p.p0) << '\n';
  os << "p_horizon " << hyper.p.horizon << '\n';
  os << "epsilon " << text_io::fmt_double(hyper.epsilon) << '\n';
  os << "trace " << (hyper.trace == TraceMode::standard ? "standard" : "literal") << '\n';
  os << "g_mode " << (hyper.g_mode == GAccumMode::features ? "features" : "gradients") << '\n';
  os << "eta " << text_io::fmt_double(hyper.eta) << '\n';
  os << "mass " << text_io::fmt_double(hyper.mass) << '\n';
}

LearnerState LearnerState::load(std::istream& is) {
  text_io::expect(is, "mdrl-learner");
  text_io::expect(is, "v1");
  LearnerState ls;
  ls.t = text_io::read_value<long>(is, "t");
  ls.w = text_io::read_vector(is, "w");
  ls.theta = text_io::read_vector(is, "theta");
  ls.e = text_io::read_vector(is, "e");
  const auto alpha_kind = text_io::read_value<std::string>(is, "alpha_kind");
  ls.hyper.alpha.kind = alpha_kind == "constant" ? AlphaSchedule::Kind::constant
                                                 : AlphaSchedule::Kind::robbins_monro;
  ls.hyper.alpha.alpha0 = text_io::read_value<double>(is, "alpha0");
  ls.hyper.alpha.exponent = text_io::read_value<double>(is, "alpha_exponent");
  ls.hyper.lambda = text_io::read_value<double>(is, "lambda");
  ls.hyper.gamma = text_io::read_value<double>(is, "gamma");
  ls.hyper.beta = text_io::read_value<double>(is, "beta");
  const auto p_kind = text_io::read_value<std::string>(is, "p_kind");
  ls.hyper.p.kind = p_kind == "fixed" ? PSchedule::Kind::fixed : PSchedule::Kind::decay;
  ls.hyper.p.p0 = text_io::read_value<double>(is, "p0");
  ls.hyper.p.horizon = text_io::read_value<long>(is, "p_horizon");
  ls.hyper.epsilon = text_io::read_value<double>(is, "epsilon");
  ls.hyper.trace =
      text_io::read_value<std::string>(is, "trace") == "standard" ? TraceMode::standard : TraceMode::literal;
  ls.hyper.g_mode = text_io::read_value<std::string>(is, "g_mode") == "features"
                        ? GAccumMode::features
                        : GAccumMode::gradients;
  ls.hyper.eta = text_io::read_value<double>(is, "eta");
  ls.hyper.mass = text_io::read_value<double>(is, "mass");
  return ls;
}

}  // namespace mdrl
