#pragma once

#include <memory>
#include <vector>

#include "replab/agents/model.hpp"
#include "replab/env/level_set.hpp"
#include "replab/mi/analysis.hpp"

namespace replab::agents {

// t-major flattened batch: row(t, e) = t * num_envs + e
struct RolloutBuffer {
    int num_envs = 0;
    int len = 0;

    Eigen::MatrixXd obs;       // (num_envs*len) x obs_dim
    Eigen::MatrixXd next_obs;  // successor observations (zeros at termination for assembly)
    std::vector<int> actions;
    Eigen::VectorXd rewards;      // training rewards (possibly normalised)
    Eigen::VectorXd raw_rewards;  // environment rewards
    std::vector<std::uint8_t> dones;
    Eigen::VectorXd behaviour_log_probs;
    Eigen::MatrixXd behaviour_logits;
    Eigen::VectorXd behaviour_values;
    std::vector<int> context_ids;
    std::vector<int> timesteps;

    Eigen::VectorXd bootstrap_values;  // per env, value of the truncation obs

    // filled by compute_gae
    Eigen::VectorXd advantages;
    Eigen::VectorXd value_targets;

    int rows() const { return num_envs * len; }
    int row(int t, int e) const { return t * num_envs + e; }
};

// delta_t = r_t + gamma (1-done_t) V(o_{t+1}) - V(o_t)
// A_t = delta_t + gamma lambda (1-done_t) A_{t+1};  Vhat_t = A_t + V(o_t)
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

// Scales rewards by the running standard deviation of the discounted return
// process. Raw returns stay untouched for logging.
class ReturnNormalizer {
public:
    ReturnNormalizer(double gamma, bool enabled, int num_envs);

    double normalize(int env_index, double reward, bool done);
    bool enabled() const { return enabled_; }
    double current_scale() const;

private:
    double gamma_;
    bool enabled_;
    std::vector<double> running_return_;
    // Welford accumulator over observed discounted returns
    long long count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct EpisodeStats {
    int context_id = 0;
    int length = 0;
    double raw_return = 0.0;
};

// Owns num_envs environment instances; episodes auto-reset with a fresh
// level drawn uniformly from the training set via per-env streams.
class RolloutCollector {
public:
    RolloutCollector(env::EnvKind kind, const env::AssemblyParams& assembly_params,
                     const env::GridworldParams& grid_params,
                     std::vector<env::LevelContext> levels, int num_envs, std::uint64_t seed);

    RolloutBuffer collect(const ActorCriticModel& model, int len, ReturnNormalizer& rnorm);

    // fully recorded episodes for the measurement pipeline; runs the policy
    // for at least `steps` total timesteps and returns completed episodes
    // plus (optionally) the unterminated tails
    std::vector<mi::EpisodeTrace> collect_episodes(const ActorCriticModel& model, int steps,
                                                   bool keep_unterminated = false);

    std::vector<EpisodeStats> drain_episode_stats();
    const env::CmdpSpec& spec() const { return envs_.front()->spec(); }
    int num_envs() const { return static_cast<int>(envs_.size()); }

private:
    void reset_env(int e);

    std::vector<std::unique_ptr<env::Env>> envs_;
    std::vector<env::LevelContext> levels_;
    std::vector<Rng> env_rngs_;
    std::vector<Eigen::VectorXd> current_obs_;
    std::vector<int> episode_t_;
    std::vector<double> episode_return_;
    std::vector<EpisodeStats> finished_;
};

// Mean return of `episodes` sampled episodes played on `levels` (uniform
// level draws, stochastic policy).
double evaluate_return(const ActorCriticModel& model, env::EnvKind kind,
                       const env::AssemblyParams& assembly_params,
                       const env::GridworldParams& grid_params,
                       const std::vector<env::LevelContext>& levels, int episodes,
                       std::uint64_t seed);

}  // namespace replab::agents
