#pragma once

#include <limits>
#include <map>

#include "replab/agents/losses.hpp"
#include "replab/aux/objectives.hpp"

namespace replab::agents {

struct TrainConfig {
    double gamma = 0.999;
    double gae_lambda = 0.95;
    int rollout_len = 128;
    int num_envs = 16;
    int minibatches_per_epoch = 8;
    int ppo_epochs = 3;    // coupled PPO
    int actor_epochs = 1;  // decoupled PPO
    int critic_epochs = 9;
    int policy_phase_epochs = 1;  // PPG / DCPG
    double clip_eps = 0.2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double lr = 5e-4;
    double adam_eps = 1e-5;
    double max_grad_norm = 0.5;
    bool return_normalization = true;

    // PPG / DCPG
    int n_pi = 32;  // policy phases per auxiliary phase
    int aux_epochs = 6;
    int aux_minibatch_size = 1024;
    double beta_clone = 1.0;
    double aux_distill_coef = 1.0;
    double delayed_value_coef = 1.0;  // DCPG policy-phase loss against the frozen critic

    int hidden = 64;
    int latent = 32;
    double width_multiplier = 1.0;

    int eval_episodes = 32;
    int eval_interval = 10;  // iterations between held-out evaluations
};

struct LogRecord {
    long long env_steps = 0;
    double train_return = std::numeric_limits<double>::quiet_NaN();
    double test_return = std::numeric_limits<double>::quiet_NaN();
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double aux_phase_loss = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, double> attachment_losses;
};

struct TrainLog {
    std::vector<LogRecord> records;
};

struct TrainResult {
    ActorCriticModel model;
    TrainLog log;
    long long env_steps = 0;
    std::size_t aux_buffer_rows = 0;  // |B_aux| at the last auxiliary phase
};

// Runs the selected algorithm for `budget_steps` environment steps on the
// training levels; periodically evaluates on the held-out levels. Fully
// determined by (configuration, seed).
TrainResult train(Algorithm algorithm, Coupling coupling, const TrainConfig& config,
                  env::EnvKind kind, const env::AssemblyParams& assembly_params,
                  const env::GridworldParams& grid_params,
                  const std::vector<env::LevelContext>& train_levels,
                  const std::vector<env::LevelContext>& test_levels, long long budget_steps,
                  std::uint64_t seed,
                  const std::vector<aux::AttachmentConfig>& attachments = {});

}  // namespace replab::agents
