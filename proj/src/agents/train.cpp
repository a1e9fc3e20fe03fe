#include "replab/agents/train.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace replab::agents {

namespace {

// fresh-critic copy used for DCPG's delayed targets
struct FrozenCritic {
    nn::Mlp trunk;
    nn::Mlp head;

    void snapshot(const ActorCriticModel& model) {
        trunk = model.critic_trunk();
        head = model.value_head();
    }
    Eigen::VectorXd values(const Eigen::MatrixXd& obs) const {
        return head.forward(trunk.forward(obs)).col(0);
    }
};

std::vector<std::vector<int>> minibatch_partition(int rows, int count, Rng& rng) {
    std::vector<int> indices(static_cast<std::size_t>(rows));
    std::iota(indices.begin(), indices.end(), 0);
    for (int i = rows - 1; i > 0; --i) {
        int j = rng.randint(i + 1);
        std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
    }
    std::vector<std::vector<int>> out;
    const int base = rows / count;
    int extra = rows % count;
    int cursor = 0;
    for (int c = 0; c < count && cursor < rows; ++c) {
        int size = base + (c < extra ? 1 : 0);
        out.emplace_back(indices.begin() + cursor, indices.begin() + cursor + size);
        cursor += size;
    }
    return out;
}

std::vector<std::vector<int>> minibatches_of_size(int rows, int size, Rng& rng) {
    const int count = std::max(1, (rows + size - 1) / size);
    return minibatch_partition(rows, count, rng);
}

class RollingReturn {
public:
    explicit RollingReturn(std::size_t window) : window_(window) {}
    void add(double value) {
        values_.push_back(value);
        if (values_.size() > window_) values_.pop_front();
    }
    double mean() const {
        if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }
    bool empty() const { return values_.empty(); }

private:
    std::size_t window_;
    std::deque<double> values_;
};

}  // namespace

TrainResult train(Algorithm algorithm, Coupling coupling, const TrainConfig& config,
                  env::EnvKind kind, const env::AssemblyParams& assembly_params,
                  const env::GridworldParams& grid_params,
                  const std::vector<env::LevelContext>& train_levels,
                  const std::vector<env::LevelContext>& test_levels, long long budget_steps,
                  std::uint64_t seed, const std::vector<aux::AttachmentConfig>& attachments) {
    const bool phasic = algorithm != Algorithm::PPO;

    Rng init_rng(derive_stream(seed, "train.init"));
    Rng shuffle_rng(derive_stream(seed, "train.shuffle"));
    Rng aux_rng(derive_stream(seed, "train.auxdraw"));

    RolloutCollector collector(kind, assembly_params, grid_params, train_levels, config.num_envs,
                               derive_stream(seed, "train.rollout"));
    const auto& spec = collector.spec();

    ModelConfig mc;
    mc.obs_dim = spec.obs_dim;
    mc.n_actions = spec.n_actions;
    mc.hidden = config.hidden;
    mc.latent = config.latent;
    mc.width_multiplier = config.width_multiplier;
    mc.coupling = coupling;
    mc.aux_value_head = phasic && coupling == Coupling::Decoupled;
    ActorCriticModel model(mc, init_rng);
    auto grads = model.make_grads();

    // one optimiser for a coupled model; separate actor and critic
    // optimisers when decoupled
    nn::GroupAdam joint_opt, actor_opt, critic_opt;
    if (coupling == Coupling::Coupled) {
        std::vector<nn::GroupAdam::Member> members{
            {&model.actor_trunk().params(), &grads.trunk},
            {&model.policy_head().params(), &grads.policy_head},
            {&model.value_head().params(), &grads.value_head}};
        joint_opt = nn::GroupAdam(members, config.lr, config.adam_eps, config.max_grad_norm);
    } else {
        std::vector<nn::GroupAdam::Member> actor_members{
            {&model.actor_trunk().params(), &grads.trunk_actor},
            {&model.policy_head().params(), &grads.policy_head}};
        if (model.has_aux_value_head())
            actor_members.push_back({&model.aux_value_head().params(), &grads.aux_value_head});
        actor_opt = nn::GroupAdam(actor_members, config.lr, config.adam_eps, config.max_grad_norm);
        std::vector<nn::GroupAdam::Member> critic_members{
            {&model.critic_trunk().params(), &grads.trunk_critic},
            {&model.value_head().params(), &grads.value_head}};
        critic_opt = nn::GroupAdam(critic_members, config.lr, config.adam_eps, config.max_grad_norm);
    }

    // coefficient-zero attachments are skipped entirely so the base
    // trajectory stays bit-identical
    std::vector<aux::Attachment> live_attachments;
    for (const auto& ac : attachments) {
        if (ac.coefficient == 0.0) continue;
        live_attachments.emplace_back(ac, model, config.gamma, config.lr, config.adam_eps,
                                      config.max_grad_norm,
                                      derive_stream(seed, "train.aux", live_attachments.size()));
    }

    FrozenCritic frozen;
    if (algorithm == Algorithm::DCPG) frozen.snapshot(model);

    ReturnNormalizer rnorm(config.gamma, config.return_normalization, config.num_envs);
    RollingReturn train_returns(100);

    TrainResult result;
    std::deque<RolloutBuffer> aux_buffers;

    auto step_optimizers = [&](bool actor_side, bool critic_side) {
        if (coupling == Coupling::Coupled) {
            joint_opt.step();
        } else {
            if (actor_side) actor_opt.step();
            if (critic_side) critic_opt.step();
        }
        for (auto& att : live_attachments) {
            att.step_own_heads();
            att.after_optimizer_step(model);
        }
    };

    auto run_attachments = [&](const Minibatch& mb, bool actor_side, bool critic_side,
                               LogRecord& record) {
        for (auto& att : live_attachments) {
            const bool is_actor = att.config().target == aux::Target::Actor;
            if ((is_actor && !actor_side) || (!is_actor && !critic_side)) continue;
            auto draw = att.draw(mb, aux_rng);
            double loss = att.evaluate(model, mb, draw, &grads);
            auto tag = to_string(att.config().objective) + "(" + to_string(att.config().target) + ")";
            record.attachment_losses[tag] += loss;
        }
    };

    long long steps = 0;
    int iteration = 0;
    const int batch_rows = config.num_envs * config.rollout_len;

    while (steps < budget_steps) {
        RolloutBuffer buffer = collector.collect(model, config.rollout_len, rnorm);
        steps += batch_rows;
        ++iteration;
        compute_gae(buffer, config.gamma, config.gae_lambda);

        LogRecord record;
        record.env_steps = steps;
        int policy_updates = 0, value_updates = 0;

        if (phasic) aux_buffers.push_back(buffer);

        // ----- policy phase -----
        if (coupling == Coupling::Coupled) {
            const int epochs = algorithm == Algorithm::PPO ? config.ppo_epochs
                                                           : config.policy_phase_epochs;
            for (int epoch = 0; epoch < epochs; ++epoch) {
                for (const auto& idx :
                     minibatch_partition(batch_rows, config.minibatches_per_epoch, shuffle_rng)) {
                    Minibatch mb = gather_minibatch(buffer, idx);
                    auto stats = ppo_policy_loss(model, mb, config.clip_eps, config.entropy_coef,
                                                 &grads);
                    double vloss = 0.0;
                    if (algorithm == Algorithm::DCPG) {
                        // delayed targets: regress toward the critic frozen at
                        // the last auxiliary phase; fresh-target coefficient is 0
                        Eigen::VectorXd delayed = frozen.values(mb.obs);
                        vloss = value_mse_loss(model, mb.obs, delayed, config.delayed_value_coef,
                                               &grads, /*into_trunk=*/false);
                    } else {
                        // coupled PPG stops the value gradient at the trunk
                        // during policy phases; plain PPO does not
                        const bool into_trunk = algorithm == Algorithm::PPO;
                        vloss = value_mse_loss(model, mb.obs, mb.value_targets, config.value_coef,
                                               &grads, into_trunk);
                    }
                    run_attachments(mb, true, true, record);
                    step_optimizers(true, true);
                    record.policy_loss += stats.loss;
                    record.entropy += stats.entropy;
                    record.clip_fraction += stats.clip_fraction;
                    record.value_loss += vloss;
                    ++policy_updates;
                    ++value_updates;
                }
            }
        } else {
            const int a_epochs = algorithm == Algorithm::PPO ? config.actor_epochs
                                                             : config.policy_phase_epochs;
            const int c_epochs = algorithm == Algorithm::PPO ? config.critic_epochs
                                                             : config.policy_phase_epochs;
            for (int epoch = 0; epoch < a_epochs; ++epoch) {
                for (const auto& idx :
                     minibatch_partition(batch_rows, config.minibatches_per_epoch, shuffle_rng)) {
                    Minibatch mb = gather_minibatch(buffer, idx);
                    auto stats = ppo_policy_loss(model, mb, config.clip_eps, config.entropy_coef,
                                                 &grads);
                    run_attachments(mb, true, false, record);
                    step_optimizers(true, false);
                    record.policy_loss += stats.loss;
                    record.entropy += stats.entropy;
                    record.clip_fraction += stats.clip_fraction;
                    ++policy_updates;
                }
            }
            for (int epoch = 0; epoch < c_epochs; ++epoch) {
                for (const auto& idx :
                     minibatch_partition(batch_rows, config.minibatches_per_epoch, shuffle_rng)) {
                    Minibatch mb = gather_minibatch(buffer, idx);
                    double vloss;
                    if (algorithm == Algorithm::DCPG) {
                        Eigen::VectorXd delayed = frozen.values(mb.obs);
                        vloss = value_mse_loss(model, mb.obs, delayed, config.delayed_value_coef,
                                               &grads, true);
                    } else {
                        vloss = value_mse_loss(model, mb.obs, mb.value_targets, config.value_coef,
                                               &grads, true);
                    }
                    run_attachments(mb, false, true, record);
                    step_optimizers(false, true);
                    record.value_loss += vloss;
                    ++value_updates;
                }
            }
        }

        // ----- auxiliary phase -----
        if (phasic && iteration % config.n_pi == 0 && !aux_buffers.empty()) {
            // B_aux is the union of the last N_pi rollout batches
            while (aux_buffers.size() > static_cast<std::size_t>(config.n_pi)) aux_buffers.pop_front();
            const int per_buffer = batch_rows;
            const int total = per_buffer * static_cast<int>(aux_buffers.size());
            result.aux_buffer_rows = static_cast<std::size_t>(total);

            double aux_loss_sum = 0.0;
            int aux_updates = 0;
            for (int epoch = 0; epoch < config.aux_epochs; ++epoch) {
                for (const auto& idx :
                     minibatches_of_size(total, config.aux_minibatch_size, shuffle_rng)) {
                    // assemble the minibatch across buffers
                    Minibatch mb;
                    const int rows = static_cast<int>(idx.size());
                    const auto& first = aux_buffers.front();
                    mb.obs.resize(rows, first.obs.cols());
                    mb.next_obs.resize(rows, first.obs.cols());
                    mb.actions.resize(static_cast<std::size_t>(rows));
                    mb.rewards.resize(rows);
                    mb.advantages.resize(rows);
                    mb.value_targets.resize(rows);
                    mb.old_log_probs.resize(rows);
                    mb.old_logits.resize(rows, first.behaviour_logits.cols());
                    for (int i = 0; i < rows; ++i) {
                        const int flat = idx[static_cast<std::size_t>(i)];
                        const auto& src = aux_buffers[static_cast<std::size_t>(flat / per_buffer)];
                        const int r = flat % per_buffer;
                        mb.obs.row(i) = src.obs.row(r);
                        mb.next_obs.row(i) = src.next_obs.row(r);
                        mb.actions[static_cast<std::size_t>(i)] =
                            src.actions[static_cast<std::size_t>(r)];
                        mb.rewards(i) = src.rewards(r);
                        mb.advantages(i) = src.advantages(r);
                        mb.value_targets(i) = src.value_targets(r);
                        mb.old_log_probs(i) = src.behaviour_log_probs(r);
                        mb.old_logits.row(i) = src.behaviour_logits.row(r);
                    }
                    auto stats = ppg_aux_loss(model, mb, config.beta_clone, config.aux_distill_coef,
                                              &grads);
                    step_optimizers(true, true);
                    aux_loss_sum += stats.loss;
                    ++aux_updates;
                }
            }
            record.aux_phase_loss = aux_loss_sum / std::max(1, aux_updates);
            aux_buffers.clear();
            if (algorithm == Algorithm::DCPG) frozen.snapshot(model);
        }

        for (const auto& ep : collector.drain_episode_stats()) train_returns.add(ep.raw_return);
        record.train_return = train_returns.mean();
        if (policy_updates > 0) {
            record.policy_loss /= policy_updates;
            record.entropy /= policy_updates;
            record.clip_fraction /= policy_updates;
        }
        if (value_updates > 0) record.value_loss /= value_updates;
        for (auto& [tag, v] : record.attachment_losses) v /= std::max(1, policy_updates);

        if (!test_levels.empty() &&
            (iteration % config.eval_interval == 0 || steps >= budget_steps)) {
            record.test_return = evaluate_return(
                model, kind, assembly_params, grid_params, test_levels, config.eval_episodes,
                derive_stream(seed, "train.eval", static_cast<std::uint64_t>(iteration)));
        }
        result.log.records.push_back(std::move(record));
    }

    result.model = std::move(model);
    result.env_steps = steps;
    return result;
}

}  // namespace replab::agents
