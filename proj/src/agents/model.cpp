#include "replab/agents/model.hpp"

#include <cmath>
#include <stdexcept>

namespace replab::agents {

std::string to_string(Coupling c) { return c == Coupling::Coupled ? "coupled" : "decoupled"; }

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::PPO: return "ppo";
        case Algorithm::PPG: return "ppg";
        case Algorithm::DCPG: return "dcpg";
    }
    return "ppo";
}

Coupling coupling_from_string(const std::string& s) {
    if (s == "coupled" || s == "shared") return Coupling::Coupled;
    if (s == "decoupled") return Coupling::Decoupled;
    throw std::invalid_argument("unknown coupling: " + s);
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "ppo") return Algorithm::PPO;
    if (s == "ppg") return Algorithm::PPG;
    if (s == "dcpg") return Algorithm::DCPG;
    throw std::invalid_argument("unknown algorithm: " + s);
}

int ModelConfig::scaled_hidden() const {
    int h = static_cast<int>(std::lround(hidden * width_multiplier));
    return std::max(4, h);
}

ActorCriticModel::ActorCriticModel(const ModelConfig& config, Rng& init_rng) : config_(config) {
    if (config.obs_dim < 1 || config.n_actions < 2)
        throw std::invalid_argument("ActorCriticModel: bad dimensions");
    const int h = config.scaled_hidden();
    const std::vector<int> trunk_dims{config.obs_dim, h, h, config.latent};
    const double root2 = std::sqrt(2.0);

    // every component inits from its own stream of one master draw, so the
    // presence of one component never shifts another's initial weights
    const std::uint64_t master = init_rng.next_u64();
    if (config.coupling == Coupling::Coupled) {
        phi_ = nn::Mlp(trunk_dims, /*activate_output=*/true, "phi");
        Rng rng(derive_stream(master, "init.phi"));
        phi_.init(rng, root2, root2);
    } else {
        phi_actor_ = nn::Mlp(trunk_dims, true, "phi_a");
        phi_critic_ = nn::Mlp(trunk_dims, true, "phi_c");
        Rng rng_a(derive_stream(master, "init.phi_a"));
        Rng rng_c(derive_stream(master, "init.phi_c"));
        phi_actor_.init(rng_a, root2, root2);
        phi_critic_.init(rng_c, root2, root2);
    }
    policy_head_ = nn::Mlp({config.latent, config.n_actions}, false, "pi");
    value_head_ = nn::Mlp({config.latent, 1}, false, "v");
    Rng rng_pi(derive_stream(master, "init.pi"));
    Rng rng_v(derive_stream(master, "init.v"));
    policy_head_.init(rng_pi, 1.0, 0.01);
    value_head_.init(rng_v, 1.0, 1.0);
    if (config.aux_value_head) {
        aux_value_head_ = nn::Mlp({config.latent, 1}, false, "vaux");
        Rng rng_vaux(derive_stream(master, "init.vaux"));
        aux_value_head_.init(rng_vaux, 1.0, 1.0);
    }
}

ActorCriticModel::ActorForward ActorCriticModel::actor_forward(const Eigen::MatrixXd& obs) const {
    ActorForward fwd;
    fwd.z = actor_trunk().forward(obs, &fwd.trunk_tape);
    fwd.logits = policy_head_.forward(fwd.z, &fwd.head_tape);
    return fwd;
}

ActorCriticModel::CriticForward ActorCriticModel::critic_forward(const Eigen::MatrixXd& obs) const {
    CriticForward fwd;
    fwd.z = critic_trunk().forward(obs, &fwd.trunk_tape);
    fwd.values = value_head_.forward(fwd.z, &fwd.head_tape).col(0);
    return fwd;
}

ActorCriticModel::CriticForward ActorCriticModel::aux_value_forward(
    const Eigen::MatrixXd& obs) const {
    if (!config_.aux_value_head)
        throw std::logic_error("aux_value_forward: model has no auxiliary value head");
    CriticForward fwd;
    fwd.z = actor_trunk().forward(obs, &fwd.trunk_tape);
    fwd.values = aux_value_head_.forward(fwd.z, &fwd.head_tape).col(0);
    return fwd;
}

void ActorCriticModel::Grads::zero() {
    trunk.set_zero();
    trunk_actor.set_zero();
    trunk_critic.set_zero();
    policy_head.set_zero();
    value_head.set_zero();
    aux_value_head.set_zero();
}

ActorCriticModel::Grads ActorCriticModel::make_grads() const {
    Grads g;
    if (config_.coupling == Coupling::Coupled) {
        g.trunk = nn::zeros_like(phi_.params());
    } else {
        g.trunk_actor = nn::zeros_like(phi_actor_.params());
        g.trunk_critic = nn::zeros_like(phi_critic_.params());
    }
    g.policy_head = nn::zeros_like(policy_head_.params());
    g.value_head = nn::zeros_like(value_head_.params());
    if (config_.aux_value_head) g.aux_value_head = nn::zeros_like(aux_value_head_.params());
    return g;
}

void ActorCriticModel::actor_backward(const ActorForward& fwd, const Eigen::MatrixXd& dlogits,
                                      Grads& grads) const {
    Eigen::MatrixXd dz = policy_head_.backward(fwd.head_tape, dlogits, grads.policy_head);
    actor_trunk().backward(fwd.trunk_tape, dz, actor_trunk_grads(grads));
}

void ActorCriticModel::actor_latent_backward(const ActorForward& fwd, const Eigen::MatrixXd& dz,
                                             Grads& grads) const {
    actor_trunk().backward(fwd.trunk_tape, dz, actor_trunk_grads(grads));
}

void ActorCriticModel::critic_backward(const CriticForward& fwd, const Eigen::VectorXd& dvalues,
                                       Grads& grads, bool into_trunk) const {
    Eigen::MatrixXd dz = value_head_.backward(fwd.head_tape, dvalues, grads.value_head);
    if (into_trunk) critic_trunk().backward(fwd.trunk_tape, dz, critic_trunk_grads(grads));
}

void ActorCriticModel::critic_latent_backward(const CriticForward& fwd, const Eigen::MatrixXd& dz,
                                              Grads& grads) const {
    critic_trunk().backward(fwd.trunk_tape, dz, critic_trunk_grads(grads));
}

void ActorCriticModel::aux_value_backward(const CriticForward& fwd, const Eigen::VectorXd& dvalues,
                                          Grads& grads) const {
    Eigen::MatrixXd dz = aux_value_head_.backward(fwd.head_tape, dvalues, grads.aux_value_head);
    actor_trunk().backward(fwd.trunk_tape, dz, actor_trunk_grads(grads));
}

Eigen::VectorXd ActorCriticModel::actor_latent(const Eigen::VectorXd& obs) const {
    return actor_trunk().forward1(obs);
}

Eigen::VectorXd ActorCriticModel::critic_latent(const Eigen::VectorXd& obs) const {
    return critic_trunk().forward1(obs);
}

nn::Categorical ActorCriticModel::policy(const Eigen::VectorXd& obs) const {
    return nn::Categorical{policy_head_.forward1(actor_latent(obs))};
}

double ActorCriticModel::value(const Eigen::VectorXd& obs) const {
    return value_head_.forward1(critic_latent(obs))(0);
}

namespace {

void append_params(nn::ParamSet& flat, const nn::ParamSet& src) {
    for (const auto& p : src.params) flat.params.push_back(p);
}

}  // namespace

nn::ParamSet ActorCriticModel::gather_params() const {
    nn::ParamSet flat;
    if (config_.coupling == Coupling::Coupled) {
        append_params(flat, phi_.params());
    } else {
        append_params(flat, phi_actor_.params());
        append_params(flat, phi_critic_.params());
    }
    append_params(flat, policy_head_.params());
    append_params(flat, value_head_.params());
    if (config_.aux_value_head) append_params(flat, aux_value_head_.params());
    return flat;
}

void ActorCriticModel::load_params(const nn::ParamSet& flat) {
    auto load_into = [&flat](nn::ParamSet& dst) {
        for (auto& p : dst.params) {
            const auto& src = flat.at(p.name);
            if (src.value.rows() != p.value.rows() || src.value.cols() != p.value.cols())
                throw std::invalid_argument("load_params: shape mismatch for " + p.name);
            p.value = src.value;
        }
    };
    if (config_.coupling == Coupling::Coupled) {
        load_into(phi_.params());
    } else {
        load_into(phi_actor_.params());
        load_into(phi_critic_.params());
    }
    load_into(policy_head_.params());
    load_into(value_head_.params());
    if (config_.aux_value_head) load_into(aux_value_head_.params());
}

}  // namespace replab::agents
