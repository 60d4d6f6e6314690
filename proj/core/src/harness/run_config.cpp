#include "rave/harness/run_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rave/errors.hpp"

namespace rave::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("config: cannot parse '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw ConfigError("config: cannot parse '" + text + "' as a boolean for " + key);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::uint64_t> parse_seeds(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) seeds.push_back(parse_number<std::uint64_t>(key, item));
  }
  return seeds;
}

template <typename T>
ConfigField number_field(std::string name, std::string help, T RunConfig::*member) {
  return {name, std::move(help),
          [member, name](RunConfig& c, const std::string& v) { c.*member = parse_number<T>(name, v); },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

ConfigField bool_field(std::string name, std::string help, bool RunConfig::*member) {
  return {name, std::move(help),
          [member, name](RunConfig& c, const std::string& v) { c.*member = parse_bool(name, v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

ConfigField string_field(std::string name, std::string help, std::string RunConfig::*member) {
  return {name, std::move(help),
          [member](RunConfig& c, const std::string& v) { c.*member = trim(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

std::vector<ConfigField> build_fields() {
  std::vector<ConfigField> f;
  f.push_back(string_field("env", "environment name (toy)", &RunConfig::env));
  f.push_back(number_field("noise_scale", "toy transition noise k", &RunConfig::noise_scale));
  f.push_back(number_field("step_cap", "episode step cap", &RunConfig::step_cap));
  f.push_back({"estimator", "target estimator: td0 | mve | steve | rave",
               [](RunConfig& c, const std::string& v) {
                 c.estimator = expansion::estimator_from_string(trim(v));
               },
               [](const RunConfig& c) { return std::string(expansion::to_string(c.estimator)); }});
  f.push_back(string_field("dynamics_mode", "auto | deterministic | probabilistic",
                           &RunConfig::dynamics_mode));
  f.push_back(number_field("gamma", "discount factor", &RunConfig::gamma));
  f.push_back(number_field("max_horizon", "H_max", &RunConfig::max_horizon));
  f.push_back(number_field("ensemble_size", "N: dynamics and critic ensemble size",
                           &RunConfig::ensemble_size));
  f.push_back(number_field("alpha", "confidence lower bound factor", &RunConfig::alpha));
  f.push_back(number_field("error_scale", "Z: prediction-error scale for adaptive alpha",
                           &RunConfig::error_scale));
  f.push_back(bool_field("adaptive_alpha", "scale alpha by transition-model accuracy",
                         &RunConfig::adaptive_alpha));
  f.push_back(number_field("weight_epsilon", "variance floor in horizon weights",
                           &RunConfig::weight_epsilon));
  f.push_back(string_field("termination_sampling", "clip | threshold",
                           &RunConfig::termination_sampling));
  f.push_back(number_field("batch_size", "B", &RunConfig::batch_size));
  f.push_back(number_field("replay_capacity", "N_rpm", &RunConfig::replay_capacity));
  f.push_back(number_field("lr_policy", "policy learning rate", &RunConfig::lr_policy));
  f.push_back(number_field("lr_critic", "critic learning rate", &RunConfig::lr_critic));
  f.push_back(number_field("lr_dynamics", "dynamics learning rate", &RunConfig::lr_dynamics));
  f.push_back(number_field("explore_probability", "probability of action noise",
                           &RunConfig::explore_probability));
  f.push_back(number_field("explore_std", "action noise std", &RunConfig::explore_std));
  f.push_back(number_field("tau", "target soft-update rate", &RunConfig::tau));
  f.push_back(number_field("reward_scale", "multiplier applied to rewards entering replay",
                           &RunConfig::reward_scale));
  f.push_back(string_field("actor_signal", "critic reduction for the policy loss: mean | first",
                           &RunConfig::actor_signal));
  f.push_back(number_field("warmup_frames", "F: random-action frames before learning",
                           &RunConfig::warmup_frames));
  f.push_back(number_field("pretrain_updates", "dynamics updates at the end of warmup",
                           &RunConfig::pretrain_updates));
  f.push_back(number_field("learner_period", "env steps per learner update",
                           &RunConfig::learner_period));
  f.push_back(number_field("dynamics_period", "env steps per dynamics update",
                           &RunConfig::dynamics_period));
  f.push_back(number_field("hidden_width", "hidden layer width", &RunConfig::hidden_width));
  f.push_back(number_field("policy_layers", "policy FC layers", &RunConfig::policy_layers));
  f.push_back(number_field("critic_layers", "critic FC layers", &RunConfig::critic_layers));
  f.push_back(number_field("transition_layers", "transition model FC layers",
                           &RunConfig::transition_layers));
  f.push_back(number_field("reward_layers", "reward model FC layers", &RunConfig::reward_layers));
  f.push_back(number_field("termination_layers", "termination model FC layers",
                           &RunConfig::termination_layers));
  f.push_back(number_field("total_steps", "environment steps", &RunConfig::total_steps));
  f.push_back(number_field("eval_period", "environment steps between metrics rows",
                           &RunConfig::eval_period));
  f.push_back(number_field("workers", "actor workers", &RunConfig::workers));
  f.push_back(number_field("snapshot_period", "learner updates between policy publications",
                           &RunConfig::snapshot_period));
  f.push_back({"seeds", "comma-separated seeds, one run each",
               [](RunConfig& c, const std::string& v) { c.seeds = parse_seeds("seeds", v); },
               [](const RunConfig& c) {
                 std::string out;
                 for (std::size_t i = 0; i < c.seeds.size(); ++i) {
                   if (i) out += ',';
                   out += std::to_string(c.seeds[i]);
                 }
                 return out;
               }});
  f.push_back(string_field("eval_member", "critic read out at evaluation: first | mean",
                           &RunConfig::eval_member));
  f.push_back(number_field("oracle_episodes", "Monte-Carlo episodes for the ground truth",
                           &RunConfig::oracle_episodes));
  f.push_back(number_field("oracle_seed", "seed of the ground-truth rollouts", &RunConfig::oracle_seed));
  f.push_back(string_field("output_dir", "output root", &RunConfig::output_dir));
  f.push_back(string_field("run_name", "run directory name (default: derived)", &RunConfig::run_name));
  return f;
}

}  // namespace

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = build_fields();
  return fields;
}

void set_field(RunConfig& config, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  for (const ConfigField& f : config_fields()) {
    if (f.name == k) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + k + "'");
}

void apply_config_text(RunConfig& config, std::istream& in) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(number) + " is not key = value");
    }
    set_field(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  apply_config_text(config, in);
}

void write_resolved_config(std::ostream& out, const RunConfig& config) {
  for (const ConfigField& f : config_fields()) out << f.name << " = " << f.get(config) << '\n';
}

void RunConfig::validate() const {
  if (env != "toy") throw ConfigError("config: unknown env '" + env + "'");
  toy_config().validate();
  expansion_config().validate();
  agent_config().validate();
  if (needs_dynamics()) dynamics_config().validate();
  if (dynamics_mode != "auto" && dynamics_mode != "deterministic" && dynamics_mode != "probabilistic") {
    throw ConfigError("config: dynamics_mode must be auto, deterministic or probabilistic");
  }
  dynamics::termination_sampling_from_string(termination_sampling);
  agent::critic_reduction_from_string(actor_signal);
  agent::critic_reduction_from_string(eval_member);
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (replay_capacity < batch_size) throw ConfigError("config: replay_capacity must be >= batch_size");
  if (warmup_frames < batch_size) throw ConfigError("config: warmup_frames must be >= batch_size");
  if (pretrain_updates < 0) throw ConfigError("config: pretrain_updates must be >= 0");
  if (learner_period < 1 || dynamics_period < 1) throw ConfigError("config: periods must be >= 1");
  if (!(reward_scale > 0.0)) throw ConfigError("config: reward_scale must be > 0");
  if (total_steps < 0) throw ConfigError("config: total_steps must be >= 0");
  if (eval_period < 1) throw ConfigError("config: eval_period must be >= 1");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (snapshot_period < 1) throw ConfigError("config: snapshot_period must be >= 1");
  if (seeds.empty()) throw ConfigError("config: at least one seed is required");
  if (oracle_episodes < 1) throw ConfigError("config: oracle_episodes must be >= 1");
  if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
}

std::string RunConfig::resolved_run_name() const {
  if (!run_name.empty()) return run_name;
  std::ostringstream name;
  name << env << "-k" << format_double(noise_scale) << '-' << expansion::to_string(estimator);
  return name.str();
}

dynamics::ModelMode RunConfig::resolved_dynamics_mode() const {
  if (dynamics_mode == "deterministic") return dynamics::ModelMode::Deterministic;
  if (dynamics_mode == "probabilistic") return dynamics::ModelMode::Probabilistic;
  return estimator == expansion::EstimatorKind::RAVE ? dynamics::ModelMode::Probabilistic
                                                     : dynamics::ModelMode::Deterministic;
}

env::ToyEnvConfig RunConfig::toy_config() const {
  env::ToyEnvConfig c;
  c.noise_scale = noise_scale;
  c.step_cap = step_cap;
  return c;
}

expansion::ExpansionConfig RunConfig::expansion_config() const {
  expansion::ExpansionConfig c;
  c.max_horizon = max_horizon;
  c.ensemble_size = ensemble_size;
  c.alpha = alpha;
  c.error_scale = error_scale;
  c.gamma = gamma;
  c.kind = estimator;
  c.adaptive_alpha = adaptive_alpha;
  c.weight_epsilon = weight_epsilon;
  return c;
}

agent::AgentConfig RunConfig::agent_config() const {
  agent::AgentConfig c;
  c.hidden_width = hidden_width;
  c.policy_layers = policy_layers;
  c.critic_layers = critic_layers;
  c.critic_ensemble = ensemble_size;
  c.policy_adam.learning_rate = lr_policy;
  c.critic_adam.learning_rate = lr_critic;
  c.tau = tau;
  c.explore_probability = explore_probability;
  c.explore_std = explore_std;
  c.actor_signal = agent::critic_reduction_from_string(actor_signal);
  return c;
}

dynamics::DynamicsConfig RunConfig::dynamics_config() const {
  dynamics::DynamicsConfig c;
  c.ensemble_size = ensemble_size;
  c.mode = resolved_dynamics_mode();
  c.hidden_width = hidden_width;
  c.transition_layers = transition_layers;
  c.reward_layers = reward_layers;
  c.termination_layers = termination_layers;
  c.adam.learning_rate = lr_dynamics;
  c.termination_sampling = dynamics::termination_sampling_from_string(termination_sampling);
  return c;
}

}  // namespace rave::harness
