#pragma once

#include "replab/agents/model.hpp"
#include "replab/agents/rollout.hpp"

namespace replab::agents {

struct Minibatch {
    Eigen::MatrixXd obs;
    Eigen::MatrixXd next_obs;
    std::vector<int> actions;
    Eigen::VectorXd rewards;        // training rewards; the MICo target uses these
    Eigen::VectorXd advantages;     // raw; the policy loss normalises its own copy
    Eigen::VectorXd value_targets;
    Eigen::VectorXd old_log_probs;
    Eigen::MatrixXd old_logits;     // behaviour logits; required by the aux losses

    int rows() const { return static_cast<int>(obs.rows()); }
};

Minibatch gather_minibatch(const RolloutBuffer& buffer, const std::vector<int>& indices);

struct PolicyLossStats {
    double loss = 0.0;      // negated clipped-surrogate objective
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double approx_kl = 0.0;
};

// Clipped PPO surrogate plus entropy bonus, negated for minimisation.
// Advantages are normalised per minibatch (zero mean, unit variance).
// Gradients go to the policy pathway only; pass grads=nullptr to evaluate
// the loss without touching them.
PolicyLossStats ppo_policy_loss(const ActorCriticModel& model, const Minibatch& mb,
                                double clip_eps, double entropy_coef,
                                ActorCriticModel::Grads* grads,
                                bool normalize_advantages = true);

// Mean squared error against the supplied targets, no value clipping.
// into_trunk=false applies the coupled PPG/DCPG policy-phase stop-gradient.
double value_mse_loss(const ActorCriticModel& model, const Eigen::MatrixXd& obs,
                      const Eigen::VectorXd& targets, double coef, ActorCriticModel::Grads* grads,
                      bool into_trunk = true);

inline double ppo_value_loss(const ActorCriticModel& model, const Minibatch& mb,
                             ActorCriticModel::Grads* grads, bool into_trunk = true) {
    return value_mse_loss(model, mb.obs, mb.value_targets, 1.0, grads, into_trunk);
}

struct AuxLossStats {
    double loss = 0.0;  // l_joint
    double value_mse = 0.0;
    double distill_mse = 0.0;
    double kl = 0.0;
};

// l_joint = l_V + l_aux. Decoupled models distill through the separate
// auxiliary head on the actor trunk; coupled models reuse the value head, so
// the critic term itself flows through the shared trunk here (the policy
// phase is where it is stopped).
AuxLossStats ppg_aux_loss(const ActorCriticModel& model, const Minibatch& mb, double beta_clone,
                          double distill_coef, ActorCriticModel::Grads* grads);

}  // namespace replab::agents
