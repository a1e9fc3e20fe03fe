#include "replab/agents/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replab::agents {

Minibatch gather_minibatch(const RolloutBuffer& b, const std::vector<int>& indices) {
    if (b.advantages.size() != b.rows())
        throw std::logic_error("gather_minibatch: compute_gae has not run on this buffer");
    Minibatch mb;
    const int n = static_cast<int>(indices.size());
    mb.obs.resize(n, b.obs.cols());
    mb.next_obs.resize(n, b.obs.cols());
    mb.actions.resize(static_cast<std::size_t>(n));
    mb.rewards.resize(n);
    mb.advantages.resize(n);
    mb.value_targets.resize(n);
    mb.old_log_probs.resize(n);
    mb.old_logits.resize(n, b.behaviour_logits.cols());
    for (int i = 0; i < n; ++i) {
        const int src = indices[static_cast<std::size_t>(i)];
        mb.obs.row(i) = b.obs.row(src);
        mb.next_obs.row(i) = b.next_obs.row(src);
        mb.actions[static_cast<std::size_t>(i)] = b.actions[static_cast<std::size_t>(src)];
        mb.rewards(i) = b.rewards(src);
        mb.advantages(i) = b.advantages(src);
        mb.value_targets(i) = b.value_targets(src);
        mb.old_log_probs(i) = b.behaviour_log_probs(src);
        mb.old_logits.row(i) = b.behaviour_logits.row(src);
    }
    return mb;
}

PolicyLossStats ppo_policy_loss(const ActorCriticModel& model, const Minibatch& mb,
                                double clip_eps, double entropy_coef,
                                ActorCriticModel::Grads* grads, bool normalize_advantages) {
    const int n = mb.rows();
    if (n < 1) throw std::invalid_argument("ppo_policy_loss: empty minibatch");

    Eigen::VectorXd adv = mb.advantages;
    if (normalize_advantages && n > 1) {
        const double mean = adv.mean();
        const double sd = std::sqrt((adv.array() - mean).square().sum() / n);
        adv = (adv.array() - mean) / (sd + 1e-8);
    }

    auto fwd = model.actor_forward(mb.obs);
    Eigen::MatrixXd log_probs = nn::log_softmax_rows(fwd.logits);
    Eigen::MatrixXd probs = log_probs.array().exp();

    PolicyLossStats stats;
    double surrogate = 0.0;
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(n, fwd.logits.cols());
    for (int i = 0; i < n; ++i) {
        const int a = mb.actions[static_cast<std::size_t>(i)];
        const double logp = log_probs(i, a);
        const double ratio = std::exp(logp - mb.old_log_probs(i));
        const double unclipped = ratio * adv(i);
        const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv(i);
        surrogate += std::min(unclipped, clipped);
        if (std::abs(ratio - 1.0) > clip_eps) stats.clip_fraction += 1.0;
        stats.approx_kl += mb.old_log_probs(i) - logp;

        // d/dlogits of the ratio term: active only when the min picks the
        // unclipped branch (ties have equal derivatives)
        const double coeff = unclipped <= clipped ? ratio * adv(i) : 0.0;

        double entropy_i = 0.0;
        for (int j = 0; j < log_probs.cols(); ++j)
            if (probs(i, j) > 0.0) entropy_i -= probs(i, j) * log_probs(i, j);
        stats.entropy += entropy_i;

        for (int j = 0; j < dlogits.cols(); ++j) {
            const double indicator = j == a ? 1.0 : 0.0;
            double dj = coeff * (indicator - probs(i, j));
            dj += entropy_coef * (-probs(i, j) * (log_probs(i, j) + entropy_i));
            dlogits(i, j) = -dj / n;  // objective is maximised, loss minimised
        }
    }
    stats.entropy /= n;
    stats.clip_fraction /= n;
    stats.approx_kl /= n;
    stats.loss = -(surrogate / n + entropy_coef * stats.entropy);

    if (grads) model.actor_backward(fwd, dlogits, *grads);
    return stats;
}

double value_mse_loss(const ActorCriticModel& model, const Eigen::MatrixXd& obs,
                      const Eigen::VectorXd& targets, double coef, ActorCriticModel::Grads* grads,
                      bool into_trunk) {
    const int n = static_cast<int>(obs.rows());
    if (n < 1) throw std::invalid_argument("value_mse_loss: empty batch");
    auto fwd = model.critic_forward(obs);
    Eigen::VectorXd residual = fwd.values - targets;
    double loss = coef * residual.squaredNorm() / n;
    if (grads) {
        Eigen::VectorXd dv = (2.0 * coef / n) * residual;
        model.critic_backward(fwd, dv, *grads, into_trunk);
    }
    return loss;
}

AuxLossStats ppg_aux_loss(const ActorCriticModel& model, const Minibatch& mb, double beta_clone,
                          double distill_coef, ActorCriticModel::Grads* grads) {
    const int n = mb.rows();
    if (n < 1) throw std::invalid_argument("ppg_aux_loss: empty minibatch");
    if (mb.old_logits.rows() != n || mb.old_logits.cols() < 2)
        throw std::logic_error("ppg_aux_loss: behaviour logits missing from the aux buffer");

    AuxLossStats stats;

    // critic fine-tuning over the big batch; distills into a shared trunk
    stats.value_mse = value_mse_loss(model, mb.obs, mb.value_targets, 1.0, grads, true);

    // value distillation into the actor trunk via the auxiliary head
    if (model.has_aux_value_head()) {
        auto fwd = model.aux_value_forward(mb.obs);
        Eigen::VectorXd residual = fwd.values - mb.value_targets;
        stats.distill_mse = distill_coef * residual.squaredNorm() / n;
        if (grads) {
            Eigen::VectorXd dv = (2.0 * distill_coef / n) * residual;
            model.aux_value_backward(fwd, dv, *grads);
        }
    }

    // behaviour cloning term KL(pi_old || pi_current)
    auto actor = model.actor_forward(mb.obs);
    Eigen::MatrixXd log_new = nn::log_softmax_rows(actor.logits);
    Eigen::MatrixXd log_old = nn::log_softmax_rows(mb.old_logits);
    Eigen::MatrixXd p_new = log_new.array().exp();
    Eigen::MatrixXd p_old = log_old.array().exp();
    double kl = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < log_new.cols(); ++j)
            if (p_old(i, j) > 0.0) kl += p_old(i, j) * (log_old(i, j) - log_new(i, j));
    stats.kl = kl / n;
    if (grads && beta_clone != 0.0) {
        Eigen::MatrixXd dlogits = (beta_clone / n) * (p_new - p_old);
        model.actor_backward(actor, dlogits, *grads);
    }

    stats.loss = stats.value_mse + stats.distill_mse + beta_clone * stats.kl;
    return stats;
}

}  // namespace replab::agents
