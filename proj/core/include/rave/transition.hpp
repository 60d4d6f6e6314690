#pragma once

#include <vector>

#include "rave/linalg.hpp"

namespace rave {

// One environment step as stored in replay. Truncation by the step cap is
// stored with done = 0.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  double done = 0.0;
};

// Column-stacked view of B transitions.
struct TransitionBatch {
  Matrix states;       // B x state_dim
  Matrix actions;      // B x action_dim
  Matrix rewards;      // B x 1
  Matrix next_states;  // B x state_dim
  Matrix dones;        // B x 1

  Eigen::Index size() const { return states.rows(); }
};

TransitionBatch make_batch(const std::vector<Transition>& transitions);

}  // namespace rave
