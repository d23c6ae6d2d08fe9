#pragma once

// Hand-built enumerable MDPs with deterministic transitions and costs. They
// give the optimizers an oracle: brute-force enumeration of every policy
// finds the exact optimum to compare against.

#include <stdexcept>
#include <utility>
#include <vector>

#include "launchline/mdp.hpp"
#include "launchline/optim.hpp"

namespace launchline::testing {

struct ToyMdp {
  int states = 0;
  int actions = 0;
  int periods = 0;
  int start_state = 0;
  // Indexed [t][s][a], flattened.
  std::vector<int> next_state;
  std::vector<double> step_cost;

  std::size_t idx(int s, int a, int t) const {
    return (static_cast<std::size_t>(t) * states + s) * actions + a;
  }

  double rollout(const PolicyMatrix& pi) const {
    if (pi.states() != states || pi.horizon() != periods)
      throw std::invalid_argument("toy rollout: policy dimensions differ");
    int s = start_state;
    double total = 0.0;
    for (int t = 0; t < periods; ++t) {
      int a = pi.at(s, t) - 1;
      total += step_cost[idx(s, a, t)];
      s = next_state[idx(s, a, t)];
    }
    return total;
  }

  // Brute force over all actions^(states*periods) deterministic policies.
  std::pair<double, PolicyMatrix> enumerate_optimum() const {
    PolicyMatrix pi(states, periods, 1);
    PolicyMatrix best_pi = pi;
    double best = rollout(pi);
    const int cells = states * periods;
    for (;;) {
      // Odometer step over policy cells.
      int c = 0;
      while (c < cells) {
        int s = c % states, t = c / states;
        if (pi.at(s, t) < actions) {
          ++pi.at(s, t);
          break;
        }
        pi.at(s, t) = 1;
        ++c;
      }
      if (c == cells) break;
      double cost = rollout(pi);
      if (cost < best) {
        best = cost;
        best_pi = pi;
      }
    }
    return {best, best_pi};
  }
};

class ToyEvaluator : public PolicyEvaluator {
 public:
  explicit ToyEvaluator(const ToyMdp& mdp) : mdp_(&mdp) {}
  double evaluate(const PolicyMatrix& pi, long long, std::uint64_t,
                  std::uint64_t) override {
    return mdp_->rollout(pi);
  }

 private:
  const ToyMdp* mdp_;
};

// 2 states, 2 actions, 2 periods: the cheap first action leads to the state
// with the cheap closing action.
inline ToyMdp toy_two_by_two() {
  ToyMdp m;
  m.states = 2;
  m.actions = 2;
  m.periods = 2;
  m.next_state.assign(8, 0);
  m.step_cost.assign(8, 0.0);
  auto set = [&](int s, int a, int t, double cost, int next) {
    m.step_cost[m.idx(s, a, t)] = cost;
    m.next_state[m.idx(s, a, t)] = next;
  };
  set(0, 0, 0, 5.0, 0);
  set(0, 1, 0, 1.0, 1);
  set(1, 0, 0, 4.0, 1);
  set(1, 1, 0, 4.0, 0);
  set(0, 0, 1, 3.0, 0);
  set(0, 1, 1, 4.0, 0);
  set(1, 0, 1, 2.0, 0);
  set(1, 1, 1, 0.5, 0);
  return m;  // optimum: a2 then a2, cost 1.5
}

// 3 states, 3 actions, 2 periods: the greedy first step leads into a trap
// state, so the optimizers must look ahead.
inline ToyMdp toy_greedy_trap() {
  ToyMdp m;
  m.states = 3;
  m.actions = 3;
  m.periods = 2;
  m.next_state.assign(18, 0);
  m.step_cost.assign(18, 0.0);
  auto set = [&](int s, int a, int t, double cost, int next) {
    m.step_cost[m.idx(s, a, t)] = cost;
    m.next_state[m.idx(s, a, t)] = next;
  };
  // t = 0
  set(0, 0, 0, 0.2, 1);  // greedy, but state 1 is expensive to close
  set(0, 1, 0, 1.0, 2);
  set(0, 2, 0, 3.0, 0);
  set(1, 0, 0, 2.0, 1);
  set(1, 1, 0, 2.0, 2);
  set(1, 2, 0, 2.0, 0);
  set(2, 0, 0, 2.0, 2);
  set(2, 1, 0, 2.0, 1);
  set(2, 2, 0, 2.0, 0);
  // t = 1
  set(0, 0, 1, 1.0, 0);
  set(0, 1, 1, 1.5, 0);
  set(0, 2, 1, 2.0, 0);
  set(1, 0, 1, 5.0, 0);
  set(1, 1, 1, 6.0, 0);
  set(1, 2, 1, 7.0, 0);
  set(2, 0, 1, 0.3, 0);
  set(2, 1, 1, 2.0, 0);
  set(2, 2, 1, 2.5, 0);
  return m;  // optimum: a2 to state 2 then a1, cost 1.3
}

// 4 states, 2 actions, 3 periods: a chain where staying cheap early costs
// dearly in the final period.
inline ToyMdp toy_delayed_price() {
  ToyMdp m;
  m.states = 4;
  m.actions = 2;
  m.periods = 3;
  m.next_state.assign(24, 0);
  m.step_cost.assign(24, 0.0);
  auto set = [&](int s, int a, int t, double cost, int next) {
    m.step_cost[m.idx(s, a, t)] = cost;
    m.next_state[m.idx(s, a, t)] = next;
  };
  for (int t = 0; t < 3; ++t) {
    for (int s = 0; s < 4; ++s) {
      // action 1: stay, looks cheap; action 2: advance one state, costs 1.
      set(s, 0, t, 0.4, s);
      set(s, 1, t, 1.0, std::min(s + 1, 3));
    }
  }
  // Closing costs at t = 2 depend on how far the chain advanced.
  set(0, 0, 2, 9.0, 0);
  set(0, 1, 2, 8.0, 1);
  set(1, 0, 2, 6.0, 1);
  set(1, 1, 2, 5.0, 2);
  set(2, 0, 2, 0.2, 2);
  set(2, 1, 2, 1.0, 3);
  set(3, 0, 2, 0.1, 3);
  set(3, 1, 2, 1.0, 3);
  return m;  // optimum: advance, advance, then stay: 1 + 1 + 0.2 = 2.2
}

}  // namespace launchline::testing
