#pragma once

#include <optional>

#include "replab/agents/losses.hpp"

namespace replab::aux {

enum class Objective { MICo, Dynamics, AdvantageDistill, Augmentation };
enum class Target { Actor, Critic };

std::string to_string(Objective o);
std::string to_string(Target t);
Objective objective_from_string(const std::string& s);
Target target_from_string(const std::string& s);

struct AttachmentConfig {
    Objective objective = Objective::MICo;
    Target target = Target::Actor;
    double coefficient = 0.0;

    double target_net_tau = 0.005;   // MICo target network update rate
    double mico_beta_theta = 0.1;    // weight of the angular term
    double in_dist_weight = 1.0;     // dynamics discriminator class weights
    double ood_state_weight = 1.0;
    double ood_action_weight = 0.5;
    double aug_noise_sigma = 0.1;    // augmentation: feature noise scale
    double aug_dropout_prob = 0.25;  //              feature dropout rate
};

// MICo distance d(x,y) = (|zx|^2 + |zy|^2)/2 + beta_theta * theta(zx, zy)
double mico_distance(const Eigen::VectorXd& zx, const Eigen::VectorXd& zy, double beta_theta);

// Lagged copy of the attached trunk and the value head, tracked by
// exponential moving average after every optimiser step.
struct TargetNetwork {
    nn::ParamSet trunk;
    nn::ParamSet value_head;
    double tau = 0.005;

    void update(const nn::ParamSet& online_trunk, const nn::ParamSet& online_value_head);
};

// The random draws an aux loss needs, frozen so the loss is a deterministic
// function of parameters (finite-difference checks re-evaluate it).
struct AuxDraw {
    std::vector<int> partner;            // MICo pairing
    std::vector<int> derangement;        // dynamics OOD states
    std::vector<int> resampled_actions;  // dynamics OOD actions
    Eigen::MatrixXd noise;               // augmentation
    Eigen::MatrixXd keep_mask;           // augmentation dropout (1 keep, 0 drop)
};

// One auxiliary objective attached to a representation for the duration of a
// training run. Owns its heads and their optimiser.
class Attachment {
public:
    Attachment(const AttachmentConfig& config, const agents::ActorCriticModel& model, double gamma,
               double lr, double adam_eps, double max_grad_norm, std::uint64_t seed);

    const AttachmentConfig& config() const { return config_; }

    AuxDraw draw(const agents::Minibatch& mb, Rng& rng) const;

    // coefficient-scaled loss; accumulates trunk gradients into `grads` and
    // head gradients internally. Pass grads=nullptr for loss-only evaluation.
    double evaluate(const agents::ActorCriticModel& model, const agents::Minibatch& mb,
                    const AuxDraw& draw, agents::ActorCriticModel::Grads* grads);

    // Adam step over the attachment's own heads (no-op for headless objectives)
    void step_own_heads();
    // EMA target update; call after each optimiser step on the online model
    void after_optimizer_step(const agents::ActorCriticModel& model);

    nn::Mlp* own_head() { return head_ ? &*head_ : nullptr; }
    nn::ParamSet* own_head_grads() { return head_ ? &head_grads_ : nullptr; }
    const TargetNetwork* target_network() const { return target_ ? &*target_ : nullptr; }

private:
    const nn::Mlp& attached_trunk(const agents::ActorCriticModel& model) const;
    void backprop_trunk(const agents::ActorCriticModel& model, const nn::Mlp::Tape& tape,
                        const Eigen::MatrixXd& dz, agents::ActorCriticModel::Grads& grads) const;

    double eval_mico(const agents::ActorCriticModel& model, const agents::Minibatch& mb,
                     const AuxDraw& draw, agents::ActorCriticModel::Grads* grads);
    double eval_dynamics(const agents::ActorCriticModel& model, const agents::Minibatch& mb,
                         const AuxDraw& draw, agents::ActorCriticModel::Grads* grads);
    double eval_advantage(const agents::ActorCriticModel& model, const agents::Minibatch& mb,
                          agents::ActorCriticModel::Grads* grads);
    double eval_augmentation(const agents::ActorCriticModel& model, const agents::Minibatch& mb,
                             const AuxDraw& draw, agents::ActorCriticModel::Grads* grads);

    AttachmentConfig config_;
    double gamma_;
    std::optional<nn::Mlp> head_;  // dynamics discriminator / advantage head
    nn::ParamSet head_grads_;
    std::optional<nn::AdamState> head_adam_;
    std::optional<TargetNetwork> target_;
};

}  // namespace replab::aux
