#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rave::env {

struct StepOutcome {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminal = false;   // true environment termination; masks bootstrapping
  bool truncated = false;  // hit the step cap; stored as non-terminal
};

// Vector-valued environment interface consumed by the training loop.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual std::vector<double> reset() = 0;
  virtual StepOutcome step(std::span<const double> action) = 0;

  virtual void save(std::ostream& out) const = 0;
  virtual void load(std::istream& in) = 0;
};

}  // namespace rave::env
