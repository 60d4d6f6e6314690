#pragma once

#include <cstddef>
#include <iosfwd>
#include <mutex>
#include <vector>

#include "rave/rng.hpp"
#include "rave/transition.hpp"

namespace rave::agent {

// Fixed-capacity FIFO ring of transitions with uniform sampling (with
// replacement) over the filled region. push and sample are mutually atomic,
// so actor threads may append while the learner samples.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim);

  void push(const Transition& transition);

  // Throws UsageError when fewer than batch_size transitions are stored.
  TransitionBatch sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

  // i-th oldest stored transition.
  Transition at(std::size_t i) const;

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  std::size_t capacity_;
  int state_dim_;
  int action_dim_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
  // Row-major storage: [state | action | reward | next_state | done].
  std::vector<double> data_;
  mutable std::mutex mutex_;

  std::size_t stride() const { return static_cast<std::size_t>(2 * state_dim_ + action_dim_ + 2); }
};

}  // namespace rave::agent
