#include "rave/agent/replay_buffer.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "rave/errors.hpp"

namespace rave::agent {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw ConfigError("replay: capacity must be positive");
  if (state_dim < 1 || action_dim < 1) throw ConfigError("replay: dimensions must be positive");
  data_.resize(capacity_ * stride());
}

void ReplayBuffer::push(const Transition& t) {
  if (static_cast<int>(t.state.size()) != state_dim_ ||
      static_cast<int>(t.next_state.size()) != state_dim_ ||
      static_cast<int>(t.action.size()) != action_dim_) {
    throw ConfigError("replay: transition dimensions do not match the buffer");
  }
  if (t.done != 0.0 && t.done != 1.0) throw ConfigError("replay: done must be 0 or 1");
  std::lock_guard lock(mutex_);
  double* row = data_.data() + head_ * stride();
  row = std::copy(t.state.begin(), t.state.end(), row);
  row = std::copy(t.action.begin(), t.action.end(), row);
  *row++ = t.reward;
  row = std::copy(t.next_state.begin(), t.next_state.end(), row);
  *row = t.done;
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

TransitionBatch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  std::lock_guard lock(mutex_);
  if (batch_size == 0) throw UsageError("replay: batch size must be positive");
  if (size_ < batch_size) {
    throw UsageError("replay: cannot sample " + std::to_string(batch_size) + " from " +
                     std::to_string(size_) + " stored transitions");
  }
  const auto b = static_cast<Eigen::Index>(batch_size);
  TransitionBatch batch{Matrix(b, state_dim_), Matrix(b, action_dim_), Matrix(b, 1),
                        Matrix(b, state_dim_), Matrix(b, 1)};
  // The filled region is [0, size_) in slot order whether or not it wrapped.
  for (Eigen::Index r = 0; r < b; ++r) {
    const double* row = data_.data() + rng.index(size_) * stride();
    for (int d = 0; d < state_dim_; ++d) batch.states(r, d) = *row++;
    for (int d = 0; d < action_dim_; ++d) batch.actions(r, d) = *row++;
    batch.rewards(r, 0) = *row++;
    for (int d = 0; d < state_dim_; ++d) batch.next_states(r, d) = *row++;
    batch.dones(r, 0) = *row;
  }
  return batch;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return size_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  std::lock_guard lock(mutex_);
  if (i >= size_) throw UsageError("replay: index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  const double* row = data_.data() + ((oldest + i) % capacity_) * stride();
  Transition t;
  t.state.assign(row, row + state_dim_);
  row += state_dim_;
  t.action.assign(row, row + action_dim_);
  row += action_dim_;
  t.reward = *row++;
  t.next_state.assign(row, row + state_dim_);
  row += state_dim_;
  t.done = *row;
  return t;
}

void ReplayBuffer::save(std::ostream& out) const {
  std::lock_guard lock(mutex_);
  const auto old_precision = out.precision(17);
  out << "rave-replay 1\n"
      << capacity_ << ' ' << state_dim_ << ' ' << action_dim_ << ' ' << head_ << ' ' << size_
      << '\n';
  const std::size_t n = size_ * stride();
  for (std::size_t i = 0; i < n; ++i) out << data_[i] << (i % stride() + 1 == stride() ? '\n' : ' ');
  out.precision(old_precision);
}

void ReplayBuffer::load(std::istream& in) {
  std::lock_guard lock(mutex_);
  std::string tag;
  int version = 0;
  std::size_t capacity = 0;
  int sd = 0;
  int ad = 0;
  in >> tag >> version >> capacity >> sd >> ad >> head_ >> size_;
  if (tag != "rave-replay" || version != 1 || !in) throw UsageError("replay: malformed record");
  if (capacity != capacity_ || sd != state_dim_ || ad != action_dim_) {
    throw ConfigError("replay: checkpoint shape does not match this buffer");
  }
  const std::size_t n = size_ * stride();
  for (std::size_t i = 0; i < n; ++i) in >> data_[i];
  if (!in) throw UsageError("replay: truncated record");
}

}  // namespace rave::agent
