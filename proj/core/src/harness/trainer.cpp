#include "rave/harness/trainer.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "rave/env/oracle.hpp"
#include "rave/errors.hpp"

namespace rave::harness {

namespace {

enum Stream : std::uint64_t { kLearner = 1, kEval = 2, kWorkerEnv = 100, kWorkerRng = 200 };

// Guards the training-return bookkeeping shared by actor workers.
std::mutex& episode_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::filesystem::path run_directory(const RunConfig& config, std::uint64_t seed) {
  return std::filesystem::path(config.output_dir) / config.resolved_run_name() /
         ("seed_" + std::to_string(seed));
}

OracleValues resolve_oracle(const RunConfig& config) {
  env::OracleCache cache(std::filesystem::path(config.output_dir) / "oracle_cache.csv");
  const env::ToyEnvConfig toy = config.toy_config();
  const env::OracleRecord right =
      cache.get(toy, "always_right", 1.0, config.gamma, config.oracle_episodes, config.oracle_seed);
  const env::OracleRecord left =
      cache.get(toy, "always_right", -1.0, config.gamma, config.oracle_episodes, config.oracle_seed);
  return {right.mean, right.std_error, left.mean, left.std_error};
}

Trainer::Trainer(RunConfig config, std::filesystem::path run_dir)
    : config_(std::move(config)), run_dir_(std::move(run_dir)) {
  config_.validate();
  if (config_.seeds.size() != 1) throw ConfigError("trainer: exactly one seed per trainer");
  seed_ = config_.seeds.front();
  oracle_ = resolve_oracle(config_);

  replay_ = std::make_unique<agent::ReplayBuffer>(
      static_cast<std::size_t>(config_.replay_capacity), 1, 1);
  agent_ = agent::ActorCritic(config_.agent_config(), seed_);
  if (config_.needs_dynamics()) dynamics_.emplace(config_.dynamics_config(), seed_);

  const env::ToyEnvConfig toy = config_.toy_config();
  for (int w = 0; w < config_.workers; ++w) {
    Worker worker;
    worker.env = env::make_environment(config_.env, toy);
    worker.observation = worker.env->reset(derive_seed(seed_, kWorkerEnv + static_cast<std::uint64_t>(w)));
    worker.rng.seed(derive_seed(seed_, kWorkerRng + static_cast<std::uint64_t>(w)));
    workers_.push_back(std::move(worker));
  }
  eval_env_ = env::make_environment(config_.env, toy);
  learner_rng_.seed(derive_seed(seed_, kLearner));
  eval_rng_.seed(derive_seed(seed_, kEval));
  reset_accumulator();
  initialise_outputs(false);
}

void Trainer::initialise_outputs(bool append) {
  std::filesystem::create_directories(run_dir_);
  {
    std::ofstream cfg(run_dir_ / "config.resolved");
    if (!cfg) throw std::runtime_error("trainer: cannot write " + (run_dir_ / "config.resolved").string());
    write_resolved_config(cfg, config_);
  }
  metrics_ = std::make_unique<MetricsWriter>(run_dir_ / "metrics.csv", config_.max_horizon,
                                             config_.ensemble_size, append);
  if (!append) {
    std::ofstream timing(run_dir_ / "timing.csv", std::ios::trunc);
    timing << "env_steps,wall_seconds\n";
  }
  started_ = std::chrono::steady_clock::now();
}

void Trainer::reset_accumulator() {
  acc_ = Accumulator{};
  acc_.weights.assign(static_cast<std::size_t>(config_.max_horizon + 1), 0.0);
  acc_.dynamics_losses.assign(static_cast<std::size_t>(config_.ensemble_size), 0.0);
}

void Trainer::act(Worker& worker, const nn::Mlp& policy, bool random_action) {
  std::vector<double> action;
  if (random_action) {
    action.assign(1, worker.rng.uniform(-1.0, 1.0));
  } else {
    action = agent::select_action(policy, worker.observation, true, config_.explore_probability,
                                  config_.explore_std, worker.rng);
  }
  const env::StepOutcome out = worker.env->step(action);
  replay_->push({worker.observation, action, out.reward * config_.reward_scale, out.observation,
                 out.terminal ? 1.0 : 0.0});
  worker.episode_return += out.reward;
  if (out.terminal || out.truncated) {
    {
      std::lock_guard lock(episode_mutex());
      last_train_return_ = worker.episode_return;
    }
    worker.episode_return = 0.0;
    worker.observation = worker.env->reset();
  } else {
    worker.observation = out.observation;
  }
}

void Trainer::dynamics_step() {
  const TransitionBatch batch =
      replay_->sample(static_cast<std::size_t>(config_.batch_size), learner_rng_);
  const std::vector<dynamics::MemberLoss> losses = dynamics_->train(batch, learner_rng_);
  for (std::size_t m = 0; m < losses.size(); ++m) acc_.dynamics_losses[m] += losses[m].total();
  ++acc_.dynamics_updates;
  ++dynamics_updates_;
}

void Trainer::pretrain_dynamics() {
  if (dynamics_) {
    for (std::int64_t u = 0; u < config_.pretrain_updates; ++u) dynamics_step();
  }
  pretrained_ = true;
}

void Trainer::learner_step() {
  const TransitionBatch batch =
      replay_->sample(static_cast<std::size_t>(config_.batch_size), learner_rng_);
  const agent::LearnerStep step = agent::learner_update(
      agent_, dynamics_ ? &*dynamics_ : nullptr, batch, config_.expansion_config(), learner_rng_);
  acc_.critic_loss += step.critic_loss;
  acc_.actor_loss += step.actor_loss;
  acc_.alpha += step.diagnostics.mean_alpha;
  acc_.clb += step.diagnostics.mean_clb_subtraction;
  for (std::size_t h = 0; h < acc_.weights.size(); ++h) acc_.weights[h] += step.diagnostics.mean_weights[h];
  ++acc_.updates;
  ++updates_;
}

QReadout Trainer::q_readout() const {
  const std::vector<double> s0{0.0};
  const std::vector<double> right{1.0};
  const std::vector<double> left{-1.0};
  const bool mean = agent::critic_reduction_from_string(config_.eval_member) ==
                    agent::CriticReduction::Mean;
  const double q_r = mean ? agent_.q_mean(s0, right) : agent_.q_value(0, s0, right);
  const double q_l = mean ? agent_.q_mean(s0, left) : agent_.q_value(0, s0, left);
  return {q_r / config_.reward_scale, q_l / config_.reward_scale};
}

double Trainer::evaluate_episode() {
  std::vector<double> obs = eval_env_->reset(eval_rng_.next_u64());
  double total = 0.0;
  for (;;) {
    const std::vector<double> action = agent_.select_action(obs, false, eval_rng_);
    const env::StepOutcome out = eval_env_->step(action);
    total += out.reward;
    if (out.terminal || out.truncated) break;
    obs = out.observation;
  }
  return total;
}

void Trainer::emit_row() {
  MetricsRow row;
  row.env_steps = env_steps_;
  {
    std::lock_guard lock(episode_mutex());
    row.train_return = last_train_return_;
  }
  row.eval_return = evaluate_episode();
  const QReadout q = q_readout();
  row.q_right = q.right;
  row.q_left = q.left;
  row.oracle_right = oracle_.right;
  row.oracle_left = oracle_.left;
  row.bias_right = evaluate_bias(q.right, oracle_.right);
  row.bias_left = evaluate_bias(q.left, oracle_.left);
  const double n = acc_.updates > 0 ? static_cast<double>(acc_.updates) : 1.0;
  row.mean_alpha = acc_.alpha / n;
  row.mean_clb_subtraction = acc_.clb / n;
  for (double w : acc_.weights) row.mean_weights.push_back(w / n);
  row.critic_loss = acc_.critic_loss / n;
  row.actor_loss = acc_.actor_loss / n;
  const double nd = acc_.dynamics_updates > 0 ? static_cast<double>(acc_.dynamics_updates) : 1.0;
  for (double l : acc_.dynamics_losses) row.dynamics_losses.push_back(l / nd);
  metrics_->write(row);

  const double wall =
      elapsed_offset_ +
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  std::ofstream timing(run_dir_ / "timing.csv", std::ios::app);
  timing << env_steps_ << ',' << wall << '\n';
  reset_accumulator();
}

void Trainer::advance(std::int64_t until) {
  until = std::min(until, config_.total_steps);
  if (config_.workers == 1) {
    advance_serial(until);
  } else {
    advance_parallel(until);
  }
}

void Trainer::advance_serial(std::int64_t until) {
  Worker& worker = workers_.front();
  while (env_steps_ < until) {
    act(worker, agent_.policy(), in_warmup(env_steps_));
    ++env_steps_;
    if (env_steps_ == config_.warmup_frames && !pretrained_) pretrain_dynamics();
    if (env_steps_ > config_.warmup_frames) {
      const std::int64_t post = env_steps_ - config_.warmup_frames;
      if (dynamics_ && post % config_.dynamics_period == 0) dynamics_step();
      if (post % config_.learner_period == 0) learner_step();
    }
    if (env_steps_ % config_.eval_period == 0) emit_row();
  }
}

// Segments end at the warmup boundary, every evaluation boundary and
// `until`; inside a segment workers step their environments against a
// published policy snapshot while this thread runs the learner.
void Trainer::advance_parallel(std::int64_t until) {
  const std::int64_t warmup = config_.warmup_frames;
  while (env_steps_ < until) {
    std::int64_t limit = std::min(until, (env_steps_ / config_.eval_period + 1) * config_.eval_period);
    if (env_steps_ < warmup) limit = std::min(limit, warmup);

    std::atomic<std::int64_t> claimed{env_steps_};
    std::atomic<std::int64_t> completed{env_steps_};
    std::shared_ptr<const nn::Mlp> snapshot = std::make_shared<const nn::Mlp>(agent_.policy());

    std::vector<std::thread> threads;
    threads.reserve(workers_.size());
    for (Worker& worker : workers_) {
      threads.emplace_back([&, w = &worker] {
        for (;;) {
          const std::int64_t t = claimed.fetch_add(1);
          if (t >= limit) break;
          const std::shared_ptr<const nn::Mlp> policy = std::atomic_load(&snapshot);
          act(*w, *policy, in_warmup(t));
          completed.fetch_add(1);
        }
      });
    }

    if (env_steps_ >= warmup) {
      std::int64_t since_publish = 0;
      for (;;) {
        const std::int64_t done = completed.load();
        const std::int64_t post = done - warmup;
        bool worked = false;
        while (dynamics_ && dynamics_updates_since_warmup() < post / config_.dynamics_period) {
          dynamics_step();
          worked = true;
        }
        while (updates_ < post / config_.learner_period) {
          learner_step();
          worked = true;
          if (++since_publish >= config_.snapshot_period) {
            std::atomic_store(&snapshot, std::make_shared<const nn::Mlp>(agent_.policy()));
            since_publish = 0;
          }
        }
        if (done >= limit) break;
        if (!worked) std::this_thread::yield();
      }
    }
    for (std::thread& t : threads) t.join();
    env_steps_ = limit;

    if (env_steps_ == warmup && !pretrained_) pretrain_dynamics();
    if (env_steps_ % config_.eval_period == 0) emit_row();
  }
}

std::int64_t Trainer::dynamics_updates_since_warmup() const {
  return dynamics_updates_ - (pretrained_ && dynamics_ ? config_.pretrain_updates : 0);
}

void Trainer::save_checkpoint() const {
  const std::filesystem::path path = run_dir_ / "checkpoint.txt";
  const std::filesystem::path tmp = run_dir_ / "checkpoint.txt.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("trainer: cannot write " + tmp.string());
    out << std::setprecision(17);
    out << "rave-trainer 1\n";
    write_resolved_config(out, config_);
    out << "end-config\n";
    const double wall =
        elapsed_offset_ +
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    out << env_steps_ << ' ' << updates_ << ' ' << dynamics_updates_ << ' ' << pretrained_ << ' '
        << last_train_return_ << ' ' << wall << '\n';
    out << acc_.updates << ' ' << acc_.critic_loss << ' ' << acc_.actor_loss << ' ' << acc_.alpha
        << ' ' << acc_.clb << ' ' << acc_.dynamics_updates << '\n';
    for (double w : acc_.weights) out << w << ' ';
    out << '\n';
    for (double l : acc_.dynamics_losses) out << l << ' ';
    out << '\n';
    agent_.save(out);
    out << (dynamics_ ? 1 : 0) << '\n';
    if (dynamics_) dynamics_->save(out);
    replay_->save(out);
    out << workers_.size() << '\n';
    for (const Worker& w : workers_) {
      w.env->save(out);
      out << w.observation.size();
      for (double o : w.observation) out << ' ' << o;
      out << ' ' << w.episode_return << '\n';
      w.rng.save(out);
    }
    eval_env_->save(out);
    eval_rng_.save(out);
    learner_rng_.save(out);
    if (!out) throw std::runtime_error("trainer: checkpoint write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<Trainer> Trainer::resume(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / "checkpoint.txt");
  if (!in) throw UsageError("trainer: no checkpoint in " + run_dir.string());
  std::string line;
  std::getline(in, line);
  if (line != "rave-trainer 1") throw UsageError("trainer: not a rave-trainer v1 checkpoint");
  std::stringstream cfg_text;
  while (std::getline(in, line) && line != "end-config") cfg_text << line << '\n';
  RunConfig config;
  apply_config_text(config, cfg_text);
  config.validate();

  // Construct the skeleton without touching outputs, then overwrite state.
  std::unique_ptr<Trainer> t(new Trainer());
  t->config_ = config;
  t->seed_ = config.seeds.front();
  t->run_dir_ = run_dir;
  t->oracle_ = resolve_oracle(config);
  t->reset_accumulator();

  in >> t->env_steps_ >> t->updates_ >> t->dynamics_updates_ >> t->pretrained_ >>
      t->last_train_return_ >> t->elapsed_offset_;
  in >> t->acc_.updates >> t->acc_.critic_loss >> t->acc_.actor_loss >> t->acc_.alpha >>
      t->acc_.clb >> t->acc_.dynamics_updates;
  for (double& w : t->acc_.weights) in >> w;
  for (double& l : t->acc_.dynamics_losses) in >> l;
  t->agent_ = agent::ActorCritic::load(in);
  int has_dynamics = 0;
  in >> has_dynamics;
  if (has_dynamics) t->dynamics_.emplace(dynamics::DynamicsEnsemble::load(in));
  t->replay_ = std::make_unique<agent::ReplayBuffer>(
      static_cast<std::size_t>(config.replay_capacity), 1, 1);
  t->replay_->load(in);
  std::size_t worker_count = 0;
  in >> worker_count;
  if (worker_count != static_cast<std::size_t>(config.workers)) {
    throw UsageError("trainer: checkpoint worker count does not match its config");
  }
  const env::ToyEnvConfig toy = config.toy_config();
  for (std::size_t w = 0; w < worker_count; ++w) {
    Worker worker;
    worker.env = env::make_environment(config.env, toy);
    worker.env->load(in);
    std::size_t dims = 0;
    in >> dims;
    worker.observation.resize(dims);
    for (double& o : worker.observation) in >> o;
    in >> worker.episode_return;
    worker.rng.load(in);
    t->workers_.push_back(std::move(worker));
  }
  t->eval_env_ = env::make_environment(config.env, toy);
  t->eval_env_->load(in);
  t->eval_rng_.load(in);
  t->learner_rng_.load(in);
  if (!in) throw UsageError("trainer: truncated checkpoint");
  t->initialise_outputs(true);
  return t;
}

std::vector<RunSummary> run_experiment(const RunConfig& config) {
  config.validate();
  const std::filesystem::path root = std::filesystem::path(config.output_dir) / config.resolved_run_name();
  std::filesystem::create_directories(root);
  {
    std::ofstream cfg(root / "config.resolved");
    if (!cfg) throw std::runtime_error("run: cannot write " + (root / "config.resolved").string());
    write_resolved_config(cfg, config);
  }
  std::vector<RunSummary> summaries;
  for (std::uint64_t seed : config.seeds) {
    RunConfig one = config;
    one.seeds = {seed};
    Trainer trainer(one, run_directory(config, seed));
    trainer.run();
    trainer.save_checkpoint();
    RunSummary s{seed, trainer.run_dir(), {}, false};
    const std::vector<MetricsRow> rows = read_metrics_csv(trainer.run_dir() / "metrics.csv");
    if (!rows.empty()) {
      s.final_row = rows.back();
      s.has_rows = true;
    }
    summaries.push_back(std::move(s));
  }
  return summaries;
}

}  // namespace rave::harness
