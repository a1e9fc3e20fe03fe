#pragma once

#include "replab/nn/adam.hpp"
#include "replab/nn/categorical.hpp"
#include "replab/nn/mlp.hpp"

namespace replab::agents {

enum class Coupling { Coupled, Decoupled };
enum class Algorithm { PPO, PPG, DCPG };

std::string to_string(Coupling c);
std::string to_string(Algorithm a);
Coupling coupling_from_string(const std::string& s);
Algorithm algorithm_from_string(const std::string& s);

struct ModelConfig {
    int obs_dim = 0;
    int n_actions = 0;
    int hidden = 64;
    int latent = 32;
    double width_multiplier = 1.0;
    Coupling coupling = Coupling::Coupled;
    bool aux_value_head = false;  // decoupled PPG/DCPG distillation head on the actor trunk

    int scaled_hidden() const;
};

// Coupled models share one trunk between the policy and value heads;
// decoupled models hold disjoint actor/critic trunks. Heads are single
// linear layers on the 32-dim latent.
class ActorCriticModel {
public:
    ActorCriticModel() = default;
    ActorCriticModel(const ModelConfig& config, Rng& init_rng);

    const ModelConfig& config() const { return config_; }

    nn::Mlp& actor_trunk() { return config_.coupling == Coupling::Coupled ? phi_ : phi_actor_; }
    const nn::Mlp& actor_trunk() const {
        return config_.coupling == Coupling::Coupled ? phi_ : phi_actor_;
    }
    nn::Mlp& critic_trunk() { return config_.coupling == Coupling::Coupled ? phi_ : phi_critic_; }
    const nn::Mlp& critic_trunk() const {
        return config_.coupling == Coupling::Coupled ? phi_ : phi_critic_;
    }
    nn::Mlp& policy_head() { return policy_head_; }
    const nn::Mlp& policy_head() const { return policy_head_; }
    nn::Mlp& value_head() { return value_head_; }
    const nn::Mlp& value_head() const { return value_head_; }
    nn::Mlp& aux_value_head() { return aux_value_head_; }
    const nn::Mlp& aux_value_head() const { return aux_value_head_; }
    bool has_aux_value_head() const { return config_.aux_value_head; }

    struct ActorForward {
        Eigen::MatrixXd z;       // batch x latent
        Eigen::MatrixXd logits;  // batch x n_actions
        nn::Mlp::Tape trunk_tape;
        nn::Mlp::Tape head_tape;
    };
    struct CriticForward {
        Eigen::MatrixXd z;
        Eigen::VectorXd values;
        nn::Mlp::Tape trunk_tape;
        nn::Mlp::Tape head_tape;
    };

    ActorForward actor_forward(const Eigen::MatrixXd& obs) const;
    CriticForward critic_forward(const Eigen::MatrixXd& obs) const;
    // v_aux through the actor trunk (decoupled PPG/DCPG only)
    CriticForward aux_value_forward(const Eigen::MatrixXd& obs) const;

    // Gradient accumulators, one slot per component; coupled models route
    // both trunk pathways into `trunk`.
    struct Grads {
        nn::ParamSet trunk;
        nn::ParamSet trunk_actor;
        nn::ParamSet trunk_critic;
        nn::ParamSet policy_head;
        nn::ParamSet value_head;
        nn::ParamSet aux_value_head;
        void zero();
    };
    Grads make_grads() const;

    nn::ParamSet& actor_trunk_grads(Grads& g) const {
        return config_.coupling == Coupling::Coupled ? g.trunk : g.trunk_actor;
    }
    nn::ParamSet& critic_trunk_grads(Grads& g) const {
        return config_.coupling == Coupling::Coupled ? g.trunk : g.trunk_critic;
    }

    void actor_backward(const ActorForward& fwd, const Eigen::MatrixXd& dlogits, Grads& grads) const;
    // extra gradient arriving directly at the actor latent (aux objectives)
    void actor_latent_backward(const ActorForward& fwd, const Eigen::MatrixXd& dz,
                               Grads& grads) const;
    // into_trunk=false realises the stop-gradient used by coupled PPG/DCPG
    // during policy phases
    void critic_backward(const CriticForward& fwd, const Eigen::VectorXd& dvalues, Grads& grads,
                         bool into_trunk = true) const;
    void critic_latent_backward(const CriticForward& fwd, const Eigen::MatrixXd& dz,
                                Grads& grads) const;
    void aux_value_backward(const CriticForward& fwd, const Eigen::VectorXd& dvalues,
                            Grads& grads) const;

    // single-observation latents for the measurement pipeline
    Eigen::VectorXd actor_latent(const Eigen::VectorXd& obs) const;
    Eigen::VectorXd critic_latent(const Eigen::VectorXd& obs) const;

    nn::Categorical policy(const Eigen::VectorXd& obs) const;
    double value(const Eigen::VectorXd& obs) const;

    // flattened parameter list (checkpoint payload)
    nn::ParamSet gather_params() const;
    void load_params(const nn::ParamSet& flat);

private:
    ModelConfig config_;
    nn::Mlp phi_;          // coupled trunk
    nn::Mlp phi_actor_;    // decoupled trunks
    nn::Mlp phi_critic_;
    nn::Mlp policy_head_;
    nn::Mlp value_head_;
    nn::Mlp aux_value_head_;
};

}  // namespace replab::agents
