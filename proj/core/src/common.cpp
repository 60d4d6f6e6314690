#include <istream>
#include <ostream>

#include "rave/errors.hpp"
#include "rave/rng.hpp"
#include "rave/transition.hpp"

namespace rave {

void Rng::save(std::ostream& out) const {
  out << engine_ << '\n' << normal_ << '\n' << uniform_ << '\n';
}

void Rng::load(std::istream& in) {
  in >> engine_ >> normal_ >> uniform_;
  if (!in) throw UsageError("rng: malformed state");
}

TransitionBatch make_batch(const std::vector<Transition>& transitions) {
  if (transitions.empty()) throw UsageError("make_batch: no transitions");
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const auto sd = static_cast<Eigen::Index>(transitions.front().state.size());
  const auto ad = static_cast<Eigen::Index>(transitions.front().action.size());
  TransitionBatch batch{Matrix(n, sd), Matrix(n, ad), Matrix(n, 1), Matrix(n, sd), Matrix(n, 1)};
  for (Eigen::Index b = 0; b < n; ++b) {
    const Transition& t = transitions[static_cast<std::size_t>(b)];
    if (static_cast<Eigen::Index>(t.state.size()) != sd ||
        static_cast<Eigen::Index>(t.next_state.size()) != sd ||
        static_cast<Eigen::Index>(t.action.size()) != ad) {
      throw ConfigError("make_batch: inconsistent transition dimensions");
    }
    for (Eigen::Index d = 0; d < sd; ++d) {
      batch.states(b, d) = t.state[static_cast<std::size_t>(d)];
      batch.next_states(b, d) = t.next_state[static_cast<std::size_t>(d)];
    }
    for (Eigen::Index d = 0; d < ad; ++d) batch.actions(b, d) = t.action[static_cast<std::size_t>(d)];
    batch.rewards(b, 0) = t.reward;
    batch.dones(b, 0) = t.done;
  }
  return batch;
}

}  // namespace rave
