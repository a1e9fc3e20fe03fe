#include "replab/agents/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace replab::agents {

void compute_gae(RolloutBuffer& b, double gamma, double lambda) {
    const int n = b.num_envs, len = b.len;
    b.advantages.resize(b.rows());
    b.value_targets.resize(b.rows());
    for (int e = 0; e < n; ++e) {
        double next_adv = 0.0;
        double next_value = b.bootstrap_values(e);
        for (int t = len - 1; t >= 0; --t) {
            const int i = b.row(t, e);
            const double not_done = b.dones[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
            const double delta =
                b.rewards(i) + gamma * not_done * next_value - b.behaviour_values(i);
            next_adv = delta + gamma * lambda * not_done * next_adv;
            b.advantages(i) = next_adv;
            b.value_targets(i) = next_adv + b.behaviour_values(i);
            next_value = b.behaviour_values(i);
        }
    }
}

ReturnNormalizer::ReturnNormalizer(double gamma, bool enabled, int num_envs)
    : gamma_(gamma), enabled_(enabled), running_return_(static_cast<std::size_t>(num_envs), 0.0) {}

double ReturnNormalizer::current_scale() const {
    if (count_ < 2) return 1.0;
    double var = m2_ / count_;
    return std::max(std::sqrt(var), 1e-8);
}

double ReturnNormalizer::normalize(int env_index, double reward, bool done) {
    if (!enabled_) return reward;
    auto& ret = running_return_[static_cast<std::size_t>(env_index)];
    ret = gamma_ * ret + reward;
    ++count_;
    double delta = ret - mean_;
    mean_ += delta / count_;
    m2_ += delta * (ret - mean_);
    double scaled = reward / current_scale();
    if (done) ret = 0.0;
    return scaled;
}

RolloutCollector::RolloutCollector(env::EnvKind kind, const env::AssemblyParams& assembly_params,
                                   const env::GridworldParams& grid_params,
                                   std::vector<env::LevelContext> levels, int num_envs,
                                   std::uint64_t seed)
    : levels_(std::move(levels)) {
    if (levels_.empty()) throw std::invalid_argument("RolloutCollector: empty level set");
    if (num_envs < 1) throw std::invalid_argument("RolloutCollector: need at least one env");
    for (int e = 0; e < num_envs; ++e) {
        envs_.push_back(env::make_env(kind, assembly_params, grid_params));
        env_rngs_.emplace_back(derive_stream(seed, "rollout.env", static_cast<std::uint64_t>(e)));
    }
    current_obs_.resize(static_cast<std::size_t>(num_envs));
    episode_t_.assign(static_cast<std::size_t>(num_envs), 0);
    episode_return_.assign(static_cast<std::size_t>(num_envs), 0.0);
    for (int e = 0; e < num_envs; ++e) reset_env(e);
}

void RolloutCollector::reset_env(int e) {
    auto& rng = env_rngs_[static_cast<std::size_t>(e)];
    const auto& level = levels_[static_cast<std::size_t>(rng.randint(static_cast<int>(levels_.size())))];
    current_obs_[static_cast<std::size_t>(e)] = envs_[static_cast<std::size_t>(e)]->reset(level);
    episode_t_[static_cast<std::size_t>(e)] = 0;
    episode_return_[static_cast<std::size_t>(e)] = 0.0;
}

RolloutBuffer RolloutCollector::collect(const ActorCriticModel& model, int len,
                                        ReturnNormalizer& rnorm) {
    const int n = num_envs();
    const int obs_dim = spec().obs_dim;
    const int n_actions = spec().n_actions;

    RolloutBuffer b;
    b.num_envs = n;
    b.len = len;
    b.obs.resize(b.rows(), obs_dim);
    b.next_obs.resize(b.rows(), obs_dim);
    b.actions.resize(static_cast<std::size_t>(b.rows()));
    b.rewards.resize(b.rows());
    b.raw_rewards.resize(b.rows());
    b.dones.resize(static_cast<std::size_t>(b.rows()));
    b.behaviour_log_probs.resize(b.rows());
    b.behaviour_logits.resize(b.rows(), n_actions);
    b.behaviour_values.resize(b.rows());
    b.context_ids.resize(static_cast<std::size_t>(b.rows()));
    b.timesteps.resize(static_cast<std::size_t>(b.rows()));

    Eigen::MatrixXd obs_batch(n, obs_dim);
    for (int t = 0; t < len; ++t) {
        for (int e = 0; e < n; ++e) obs_batch.row(e) = current_obs_[static_cast<std::size_t>(e)];
        auto actor = model.actor_forward(obs_batch);
        auto critic = model.critic_forward(obs_batch);
        Eigen::MatrixXd log_probs = nn::log_softmax_rows(actor.logits);

        for (int e = 0; e < n; ++e) {
            const int i = b.row(t, e);
            auto& rng = env_rngs_[static_cast<std::size_t>(e)];
            nn::Categorical dist{actor.logits.row(e).transpose()};
            const int action = dist.sample(rng);

            b.obs.row(i) = obs_batch.row(e);
            b.actions[static_cast<std::size_t>(i)] = action;
            b.behaviour_log_probs(i) = log_probs(e, action);
            b.behaviour_logits.row(i) = actor.logits.row(e);
            b.behaviour_values(i) = critic.values(e);
            b.context_ids[static_cast<std::size_t>(i)] = envs_[static_cast<std::size_t>(e)]->context_id();
            b.timesteps[static_cast<std::size_t>(i)] = episode_t_[static_cast<std::size_t>(e)];

            auto out = envs_[static_cast<std::size_t>(e)]->step(action);
            b.next_obs.row(i) = out.obs;
            b.raw_rewards(i) = out.reward;
            b.rewards(i) = rnorm.normalize(e, out.reward, out.done);
            b.dones[static_cast<std::size_t>(i)] = out.done ? 1 : 0;
            episode_return_[static_cast<std::size_t>(e)] += out.reward;
            ++episode_t_[static_cast<std::size_t>(e)];

            if (out.done) {
                finished_.push_back({envs_[static_cast<std::size_t>(e)]->context_id(),
                                     episode_t_[static_cast<std::size_t>(e)],
                                     episode_return_[static_cast<std::size_t>(e)]});
                reset_env(e);
            } else {
                current_obs_[static_cast<std::size_t>(e)] = out.obs;
            }
        }
    }

    for (int e = 0; e < n; ++e) obs_batch.row(e) = current_obs_[static_cast<std::size_t>(e)];
    b.bootstrap_values = model.critic_forward(obs_batch).values;
    return b;
}

std::vector<mi::EpisodeTrace> RolloutCollector::collect_episodes(const ActorCriticModel& model,
                                                                 int steps,
                                                                 bool keep_unterminated) {
    const int n = num_envs();
    for (int e = 0; e < n; ++e) reset_env(e);

    std::vector<mi::EpisodeTrace> done_episodes;
    std::vector<mi::EpisodeTrace> open_episodes(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e)
        open_episodes[static_cast<std::size_t>(e)].context_id =
            envs_[static_cast<std::size_t>(e)]->context_id();

    int total = 0;
    while (total < steps) {
        for (int e = 0; e < n && total < steps; ++e, ++total) {
            auto& trace = open_episodes[static_cast<std::size_t>(e)];
            const auto& obs = current_obs_[static_cast<std::size_t>(e)];
            nn::Categorical dist = model.policy(obs);
            const int action = dist.sample(env_rngs_[static_cast<std::size_t>(e)]);
            auto out = envs_[static_cast<std::size_t>(e)]->step(action);

            trace.obs.push_back(obs);
            trace.actions.push_back(action);
            trace.rewards.push_back(out.reward);

            if (out.done) {
                trace.terminated = true;
                done_episodes.push_back(std::move(trace));
                reset_env(e);
                trace = mi::EpisodeTrace{};
                trace.context_id = envs_[static_cast<std::size_t>(e)]->context_id();
            } else {
                current_obs_[static_cast<std::size_t>(e)] = out.obs;
            }
        }
    }
    if (keep_unterminated)
        for (auto& trace : open_episodes)
            if (!trace.obs.empty()) done_episodes.push_back(std::move(trace));
    return done_episodes;
}

std::vector<EpisodeStats> RolloutCollector::drain_episode_stats() {
    auto out = std::move(finished_);
    finished_.clear();
    return out;
}

double evaluate_return(const ActorCriticModel& model, env::EnvKind kind,
                       const env::AssemblyParams& assembly_params,
                       const env::GridworldParams& grid_params,
                       const std::vector<env::LevelContext>& levels, int episodes,
                       std::uint64_t seed) {
    auto env = env::make_env(kind, assembly_params, grid_params);
    Rng rng(derive_stream(seed, "eval"));
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        const auto& level = levels[static_cast<std::size_t>(rng.randint(static_cast<int>(levels.size())))];
        Eigen::VectorXd obs = env->reset(level);
        double ret = 0.0;
        while (!env->done()) {
            int action = model.policy(obs).sample(rng);
            auto out = env->step(action);
            ret += out.reward;
            obs = out.obs;
        }
        total += ret;
    }
    return total / episodes;
}

}  // namespace replab::agents
