#include "mdrl/envs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"

namespace mdrl {

// ---------------------------------------------------------------------------
// Policy

Policy Policy::deterministic(const Eigen::VectorXi& actions, int n_actions) {
  if (n_actions < 1) throw std::invalid_argument("Policy: n_actions must be >= 1");
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(actions.size(), n_actions);
  for (Eigen::Index s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= n_actions) {
      throw std::invalid_argument("Policy: action out of range at state " + std::to_string(s));
    }
    probs(s, actions[s]) = 1.0;
  }
  return Policy(std::move(probs), true);
}

Policy Policy::stochastic(const Eigen::MatrixXd& probs) {
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    if ((probs.row(s).array() < 0.0).any() || std::abs(probs.row(s).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("Policy: row " + std::to_string(s) +
                                  " is not a probability distribution");
    }
  }
  return Policy(probs, false);
}

Policy Policy::uniform(int n_states, int n_actions) {
  return Policy(Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions), false);
}

int Policy::action(int s) const {
  Eigen::Index amax;
  probs_.row(s).maxCoeff(&amax);
  return static_cast<int>(amax);
}

int Policy::sample(int s, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  for (int a = 0; a < n_actions(); ++a) {
    acc += probs_(s, a);
    if (u <= acc) return a;
  }
  return n_actions() - 1;  // guard against rounding in the row sum
}

// ---------------------------------------------------------------------------
// MdpModel

void MdpModel::validate() const {
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("MdpModel: empty state or action set");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("MdpModel: gamma must be in [0, 1)");
  if (static_cast<int>(P.size()) != n_actions || static_cast<int>(R.size()) != n_actions) {
    throw std::invalid_argument("MdpModel: need one P and R matrix per action");
  }
  for (int a = 0; a < n_actions; ++a) {
    if (P[a].rows() != n_states || P[a].cols() != n_states || R[a].rows() != n_states ||
        R[a].cols() != n_states) {
      throw std::invalid_argument("MdpModel: tensor shape mismatch");
    }
    if ((P[a].array() < 0.0).any()) throw std::invalid_argument("MdpModel: negative transition probability");
    for (int s = 0; s < n_states; ++s) {
      if (std::abs(P[a].row(s).sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("MdpModel: P[" + std::to_string(a) + "] row " +
                                    std::to_string(s) + " does not sum to 1");
      }
    }
    if (!R[a].allFinite()) throw std::invalid_argument("MdpModel: non-finite reward");
  }
}

bool MdpModel::is_terminal(int s) const {
  return std::find(terminal_states.begin(), terminal_states.end(), s) != terminal_states.end();
}

Eigen::MatrixXd MdpModel::policy_transition(const Policy& pi) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_states, n_states);
  for (int a = 0; a < n_actions; ++a) {
    out += pi.probs().col(a).asDiagonal() * P[a];
  }
  return out;
}

Eigen::VectorXd MdpModel::policy_reward(const Policy& pi) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      if (pi.prob(s, a) > 0.0) out[s] += pi.prob(s, a) * expected_reward(s, a);
    }
  }
  return out;
}

double MdpModel::expected_reward(int s, int a) const {
  return P[a].row(s).dot(R[a].row(s));
}

Eigen::MatrixXd MdpModel::adjacency() const {
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n_states, n_states);
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) {
      for (int t = 0; t < n_states; ++t) {
        if (s != t && P[a](s, t) > 1e-12) {
          adj(s, t) = 1.0;
          adj(t, s) = 1.0;
        }
      }
    }
  }
  return adj;
}

void MdpModel::save(std::ostream& os) const {
  os << "mdrl-mdp v1\n";
  os << "n_states " << n_states << '\n';
  os << "n_actions " << n_actions << '\n';
  os << "gamma " << text_io::fmt_double(gamma) << '\n';
  os << "terminal " << terminal_states.size();
  for (int s : terminal_states) os << ' ' << s;
  os << '\n';
  for (int a = 0; a < n_actions; ++a) text_io::write_matrix(os, "P" + std::to_string(a), P[a]);
  for (int a = 0; a < n_actions; ++a) text_io::write_matrix(os, "R" + std::to_string(a), R[a]);
}

MdpModel MdpModel::load(std::istream& is) {
  text_io::expect(is, "mdrl-mdp");
  text_io::expect(is, "v1");
  MdpModel m;
  m.n_states = text_io::read_value<int>(is, "n_states");
  m.n_actions = text_io::read_value<int>(is, "n_actions");
  m.gamma = text_io::read_value<double>(is, "gamma");
  const int n_terminal = text_io::read_value<int>(is, "terminal");
  m.terminal_states.resize(n_terminal);
  for (int& s : m.terminal_states) {
    if (!(is >> s)) throw std::runtime_error("MdpModel::load: short terminal list");
  }
  for (int a = 0; a < m.n_actions; ++a) {
    m.P.push_back(text_io::read_matrix(is, "P" + std::to_string(a)));
  }
  for (int a = 0; a < m.n_actions; ++a) {
    m.R.push_back(text_io::read_matrix(is, "R" + std::to_string(a)));
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Chain

MdpModel chain_mdp(int n, double gamma) {
  if (n < 1) throw std::invalid_argument("chain_mdp: n must be >= 1");
  MdpModel m;
  m.n_states = n;
  m.n_actions = 2;  // 0 = left, 1 = right
  m.gamma = gamma;
  m.P.assign(2, Eigen::MatrixXd::Zero(n, n));
  m.R.assign(2, Eigen::MatrixXd::Zero(n, n));
  for (int s = 0; s < n; ++s) {
    const int left = std::max(0, s - 1);
    const int right = std::min(n - 1, s + 1);
    m.P[0](s, left) = 1.0;
    m.P[1](s, right) = 1.0;
  }
  for (int a = 0; a < 2; ++a) {
    for (int s = 0; s < n; ++s) m.R[a](s, n - 1) = 1.0;  // paid on arrival at the right end
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Grids

namespace {

constexpr int kGridActions = 4;  // N, S, E, W
constexpr int kRowDelta[kGridActions] = {-1, 1, 0, 0};
constexpr int kColDelta[kGridActions] = {0, 0, 1, -1};

GridWorld build_grid(int width, int height, const std::vector<bool>& wall, int goal_cell,
                     double gamma) {
  const int n_cells = width * height;
  if (goal_cell < 0 || goal_cell >= n_cells) throw std::invalid_argument("grid_world: goal outside grid");
  if (wall[goal_cell]) throw std::invalid_argument("grid_world: goal must not be inside a wall");

  GridWorld g;
  g.width = width;
  g.height = height;
  std::vector<int> state_of_cell(n_cells, -1);
  for (int cell = 0; cell < n_cells; ++cell) {
    if (!wall[cell]) {
      state_of_cell[cell] = static_cast<int>(g.cell_of_state.size());
      g.cell_of_state.push_back(cell);
    }
  }
  const int n = static_cast<int>(g.cell_of_state.size());
  g.goal_state = state_of_cell[goal_cell];

  // Free space must be one connected component.
  std::vector<bool> seen(n, false);
  std::queue<int> bfs;
  bfs.push(g.goal_state);
  seen[g.goal_state] = true;
  int reached = 1;
  while (!bfs.empty()) {
    const int s = bfs.front();
    bfs.pop();
    const int row = g.cell_of_state[s] / width;
    const int col = g.cell_of_state[s] % width;
    for (int a = 0; a < kGridActions; ++a) {
      const int r2 = row + kRowDelta[a];
      const int c2 = col + kColDelta[a];
      if (r2 < 0 || r2 >= height || c2 < 0 || c2 >= width) continue;
      const int t = state_of_cell[r2 * width + c2];
      if (t >= 0 && !seen[t]) {
        seen[t] = true;
        ++reached;
        bfs.push(t);
      }
    }
  }
  if (reached != n) {
    std::ostringstream msg;
    msg << "grid_world: free space is disconnected; unreachable cells:";
    int listed = 0;
    for (int s = 0; s < n && listed < 8; ++s) {
      if (!seen[s]) {
        msg << " (" << g.cell_of_state[s] / width << "," << g.cell_of_state[s] % width << ")";
        ++listed;
      }
    }
    throw std::invalid_argument(msg.str());
  }

  MdpModel& m = g.mdp;
  m.n_states = n;
  m.n_actions = kGridActions;
  m.gamma = gamma;
  m.P.assign(kGridActions, Eigen::MatrixXd::Zero(n, n));
  m.R.assign(kGridActions, Eigen::MatrixXd::Zero(n, n));
  for (int s = 0; s < n; ++s) {
    const int row = g.cell_of_state[s] / width;
    const int col = g.cell_of_state[s] % width;
    for (int a = 0; a < kGridActions; ++a) {
      int next = s;
      if (s != g.goal_state) {  // goal is absorbing
        const int r2 = row + kRowDelta[a];
        const int c2 = col + kColDelta[a];
        if (r2 >= 0 && r2 < height && c2 >= 0 && c2 < width) {
          const int t = state_of_cell[r2 * width + c2];
          if (t >= 0) next = t;
        }
      }
      m.P[a](s, next) = 1.0;
      if (s != g.goal_state && next == g.goal_state) m.R[a](s, next) = 1.0;
    }
  }
  m.terminal_states = {g.goal_state};
  m.validate();
  return g;
}

}  // namespace

GridWorld grid_world(int width, int height, const std::vector<int>& walls, int goal_cell,
                     double gamma) {
  if (width < 1 || height < 1) throw std::invalid_argument("grid_world: empty grid");
  std::vector<bool> wall(static_cast<size_t>(width) * height, false);
  for (int cell : walls) {
    if (cell < 0 || cell >= width * height) throw std::invalid_argument("grid_world: wall outside grid");
    wall[cell] = true;
  }
  return build_grid(width, height, wall, goal_cell, gamma);
}

GridWorld grid_from_map(const std::string& ascii_map, double gamma) {
  std::vector<std::string> rows;
  std::istringstream lines(ascii_map);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw std::invalid_argument("grid_from_map: empty map");
  const int height = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows[0].size());
  std::vector<bool> wall(static_cast<size_t>(width) * height, false);
  int goal_cell = -1;
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(rows[r].size()) != width) {
      throw std::invalid_argument("grid_from_map: ragged rows");
    }
    for (int c = 0; c < width; ++c) {
      const char ch = rows[r][c];
      const int cell = r * width + c;
      if (ch == '#') {
        wall[cell] = true;
      } else if (ch == 'G') {
        if (goal_cell >= 0) throw std::invalid_argument("grid_from_map: multiple goals");
        goal_cell = cell;
      } else if (ch != '.') {
        throw std::invalid_argument(std::string("grid_from_map: unknown symbol '") + ch + "'");
      }
    }
  }
  if (goal_cell < 0) throw std::invalid_argument("grid_from_map: no goal cell 'G'");
  return build_grid(width, height, wall, goal_cell, gamma);
}

const std::string& two_room_map() {
  static const std::string map =
      "..........#.........G\n"
      "..........#..........\n"
      ".....................\n"
      "..........#..........\n"
      "..........#..........\n";
  return map;
}

GridWorld two_room_world(double gamma) { return grid_from_map(two_room_map(), gamma); }

int GridWorld::state_at(int row, int col) const {
  const int cell = row * width + col;
  for (size_t s = 0; s < cell_of_state.size(); ++s) {
    if (cell_of_state[s] == cell) return static_cast<int>(s);
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Mountain car

MountainCar::StepResult MountainCar::step(const Eigen::Vector2d& state, int action) const {
  if (action < 0 || action >= 3) throw std::invalid_argument("MountainCar: action out of range");
  const double force = static_cast<double>(action - 1);  // {-1, 0, +1}
  double velocity = state[1] + 0.001 * force - 0.0025 * std::cos(3.0 * state[0]);
  velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
  double position = state[0] + velocity;
  if (position < kMinPosition) {
    position = kMinPosition;
    velocity = 0.0;  // inelastic left wall
  }
  position = std::min(position, kMaxPosition);
  const bool terminal = position >= kGoalPosition;
  return {{position, velocity}, -1.0, terminal};
}

// ---------------------------------------------------------------------------
// Exact solvers

Eigen::VectorXd policy_evaluation_exact(const MdpModel& m, const Policy& pi) {
  const Eigen::MatrixXd p_pi = m.policy_transition(pi);
  const Eigen::VectorXd r_pi = m.policy_reward(pi);
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(m.n_states, m.n_states) - m.gamma * p_pi;
  Eigen::VectorXd v = system.partialPivLu().solve(r_pi);
  const double residual = (v - (r_pi + m.gamma * p_pi * v)).cwiseAbs().maxCoeff();
  if (residual > 1e-10) {
    throw std::runtime_error("policy_evaluation_exact: residual " + std::to_string(residual));
  }
  return v;
}

std::pair<Eigen::VectorXd, Policy> value_iteration_exact(const MdpModel& m, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration_exact: tol must be > 0");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m.n_states);
  const long max_sweeps = 1000000;
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    Eigen::VectorXd next(m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < m.n_actions; ++a) {
        best = std::max(best, m.P[a].row(s).dot((m.R[a].row(s).transpose() + m.gamma * v.transpose()).transpose()));
      }
      next[s] = best;
    }
    const double residual = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (residual * m.gamma / std::max(1e-300, 1.0 - m.gamma) <= tol || residual == 0.0) break;
  }
  // Greedy policy, ties to the lowest action index.
  Eigen::VectorXi greedy(m.n_states);
  for (int s = 0; s < m.n_states; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < m.n_actions; ++a) {
      const double q = m.P[a].row(s).dot((m.R[a].row(s).transpose() + m.gamma * v.transpose()).transpose());
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    greedy[s] = best_a;
  }
  return {v, Policy::deterministic(greedy, m.n_actions)};
}

Eigen::MatrixXd q_values_exact(const MdpModel& m, const Eigen::VectorXd& v) {
  if (v.size() != m.n_states) throw std::invalid_argument("q_values_exact: V size mismatch");
  Eigen::MatrixXd q(m.n_states, m.n_actions);
  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      q(s, a) = m.P[a].row(s).dot((m.R[a].row(s).transpose() + m.gamma * v.transpose()).transpose());
    }
  }
  return q;
}

// ---------------------------------------------------------------------------
// Sampling

int sample_next_state(const MdpModel& m, int s, int a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (int t = 0; t < m.n_states; ++t) {
    acc += m.P[a](s, t);
    if (u <= acc) return t;
  }
  return m.n_states - 1;
}

std::vector<Transition> rollout(const MdpModel& m, const Policy& pi, int start, int max_steps,
                                std::uint64_t seed) {
  if (max_steps < 1) throw std::invalid_argument("rollout: max_steps must be >= 1");
  if (start < 0 || start >= m.n_states) throw std::invalid_argument("rollout: start out of range");
  std::mt19937_64 rng(seed);
  std::vector<Transition> trace;
  int s = start;
  for (int step = 0; step < max_steps && !m.is_terminal(s); ++step) {
    const int a = pi.sample(s, rng);
    const int next = sample_next_state(m, s, a, rng);
    Transition tr;
    tr.s = s;
    tr.a = a;
    tr.next = next;
    tr.r = m.R[a](s, next);
    tr.terminal = m.is_terminal(next);
    trace.push_back(tr);
    s = next;
  }
  return trace;
}

MdpModel random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed) {
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("random_mdp: empty state or action set");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  MdpModel m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.P.assign(n_actions, Eigen::MatrixXd::Zero(n_states, n_states));
  m.R.assign(n_actions, Eigen::MatrixXd::Zero(n_states, n_states));
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) {
      Eigen::VectorXd row(n_states);
      for (int t = 0; t < n_states; ++t) row[t] = unif(rng);
      row /= row.sum();
      // Renormalize exactly so validate()'s 1e-12 row-sum check holds.
      row[n_states - 1] += 1.0 - row.sum();
      m.P[a].row(s) = row.transpose();
      for (int t = 0; t < n_states; ++t) m.R[a](s, t) = unif(rng);
    }
  }
  m.validate();
  return m;
}

}  // namespace mdrl
