#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace mdrl {

/// Fixed behavior over a finite MDP: either a deterministic state -> action
/// map or a stochastic state -> action distribution.  Rows sum to 1.
class Policy {
 public:
  static Policy deterministic(const Eigen::VectorXi& actions, int n_actions);
  static Policy stochastic(const Eigen::MatrixXd& probs);
  static Policy uniform(int n_states, int n_actions);

  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  bool is_deterministic() const { return deterministic_; }
  double prob(int s, int a) const { return probs_(s, a); }
  const Eigen::MatrixXd& probs() const { return probs_; }
  /// Deterministic policies: the chosen action.
  int action(int s) const;
  int sample(int s, std::mt19937_64& rng) const;

 private:
  Policy(Eigen::MatrixXd probs, bool det) : probs_(std::move(probs)), deterministic_(det) {}
  Eigen::MatrixXd probs_;
  bool deterministic_;
};

/// Finite MDP: transition tensor P[a](s, s'), reward tensor R[a](s, s'),
/// discount gamma in [0, 1).  Rows of every P[a] sum to 1 within 1e-12.
/// Terminal states are absorbing with zero reward; rollouts stop there.
struct MdpModel {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  std::vector<Eigen::MatrixXd> P;
  std::vector<Eigen::MatrixXd> R;
  std::vector<int> terminal_states;

  void validate() const;
  bool is_terminal(int s) const;

  /// P^pi(s, s') = sum_a pi(a|s) P[a](s, s').
  Eigen::MatrixXd policy_transition(const Policy& pi) const;
  /// R^pi(s) = sum_a pi(a|s) sum_s' P[a](s,s') R[a](s,s').
  Eigen::VectorXd policy_reward(const Policy& pi) const;
  /// Expected reward r(s, a) = sum_s' P[a](s,s') R[a](s,s').
  double expected_reward(int s, int a) const;

  /// Connectivity graph of the state space: A(s,s') = 1 iff some action moves
  /// s -> s' or s' -> s with positive probability (self-loops excluded).
  Eigen::MatrixXd adjacency() const;

  void save(std::ostream& os) const;
  static MdpModel load(std::istream& is);
};

/// One step of experience.
struct Transition {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int next = 0;
  bool terminal = false;
};

/// n-state chain with actions {left, right}; moving off either end stays put.
/// Reward 1 on every transition that arrives at the rightmost state.
MdpModel chain_mdp(int n, double gamma);

struct GridWorld {
  MdpModel mdp;
  int width = 0;
  int height = 0;
  std::vector<int> cell_of_state;  // row * width + col per state index
  int goal_state = 0;

  int state_at(int row, int col) const;  // -1 for walls
};

/// Grid with actions N/S/E/W; bumping a wall or the boundary stays put.
/// Entering the goal pays reward 1; the goal is absorbing with reward 0.
/// Walls and goal are given as row * width + col cell indices.
GridWorld grid_world(int width, int height, const std::vector<int>& walls, int goal_cell,
                     double gamma);

/// ASCII map format: '#' wall, '.' free, 'G' goal; one row per line.
GridWorld grid_from_map(const std::string& ascii_map, double gamma);

/// Two 10x5 rooms joined by a one-cell doorway in the dividing wall, goal in
/// the far corner of the second room; 101 free cells.
GridWorld two_room_world(double gamma);
/// The layout two_room_world() is built from, in the ASCII map format.
const std::string& two_room_map();

/// Classic mountain car: position in [-1.2, 0.6], velocity in [-0.07, 0.07],
/// actions {-1, 0, +1} by index, reward -1 per step, terminal at
/// position >= 0.5.  Hitting the left wall zeroes the velocity.
/// step is deterministic given (state, action); the class is stateless.
class MountainCar {
 public:
  struct StepResult {
    Eigen::Vector2d next;
    double reward;
    bool terminal;
  };

  int state_dim() const { return 2; }
  int n_actions() const { return 3; }
  Eigen::Vector2d reset() const { return {-0.5, 0.0}; }
  StepResult step(const Eigen::Vector2d& state, int action) const;
  bool at_goal(const Eigen::Vector2d& state) const { return state[0] >= kGoalPosition; }

  Eigen::Vector2d lo() const { return {kMinPosition, -kMaxSpeed}; }
  Eigen::Vector2d hi() const { return {kMaxPosition, kMaxSpeed}; }

  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPosition = 0.5;
};

/// V^pi = (I - gamma P^pi)^{-1} R^pi, with residual checked to 1e-10.
Eigen::VectorXd policy_evaluation_exact(const MdpModel& m, const Policy& pi);

/// Value iteration to Bellman residual <= tol; greedy policy ties broken by
/// the lowest action index.
std::pair<Eigen::VectorXd, Policy> value_iteration_exact(const MdpModel& m, double tol);

/// Q(s,a) = sum_s' P[a](s,s') (R[a](s,s') + gamma V(s')).
Eigen::MatrixXd q_values_exact(const MdpModel& m, const Eigen::VectorXd& v);

/// Sample a trajectory from `start` under pi; stops at a terminal state or
/// after max_steps.  Deterministic given the seed.
std::vector<Transition> rollout(const MdpModel& m, const Policy& pi, int start, int max_steps,
                                std::uint64_t seed);

/// Sample s' from P[a](s, .) using the given RNG.
int sample_next_state(const MdpModel& m, int s, int a, std::mt19937_64& rng);

/// Ergodic random MDP with full-support transition rows; used by the
/// verification suites.
MdpModel random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed);

}  // namespace mdrl
