#include "replab/aux/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace replab::aux {

namespace {

constexpr double kThetaEps = 1e-8;
constexpr double kDenomEps = 1e-8;
constexpr double kNormFloor = 1e-12;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::MatrixXd one_hot(const std::vector<int>& actions, int n_actions) {
    Eigen::MatrixXd oh = Eigen::MatrixXd::Zero(static_cast<int>(actions.size()), n_actions);
    for (int i = 0; i < static_cast<int>(actions.size()); ++i)
        oh(i, actions[static_cast<std::size_t>(i)]) = 1.0;
    return oh;
}

Eigen::VectorXd normalized_advantages(const Eigen::VectorXd& adv) {
    const int n = static_cast<int>(adv.size());
    if (n < 2) return Eigen::VectorXd::Zero(n);
    const double mean = adv.mean();
    const double sd = std::sqrt((adv.array() - mean).square().sum() / n);
    return (adv.array() - mean) / (sd + 1e-8);
}

struct MicoGrad {
    double distance;
    Eigen::VectorXd dzi;
    Eigen::VectorXd dzj;
};

MicoGrad mico_distance_with_grad(const Eigen::VectorXd& zi, const Eigen::VectorXd& zj,
                                 double beta_theta) {
    MicoGrad out;
    const double ni = std::max(zi.norm(), kNormFloor);
    const double nj = std::max(zj.norm(), kNormFloor);
    const double dot = zi.dot(zj);
    const double denom = ni * nj + kDenomEps;
    const double c = dot / denom;
    const double s = std::sqrt(std::max(1.0 - c * c, 0.0) + kThetaEps);
    const double theta = std::atan2(s, c);
    out.distance = 0.5 * (zi.squaredNorm() + zj.squaredNorm()) + beta_theta * theta;

    // dtheta/dc = -1/s; dc/dzi = (zj * denom - dot * nj * zi / ni) / denom^2
    const double dtheta_dc = -1.0 / s;
    Eigen::VectorXd dc_dzi = (zj * denom - dot * nj * zi / ni) / (denom * denom);
    Eigen::VectorXd dc_dzj = (zi * denom - dot * ni * zj / nj) / (denom * denom);
    out.dzi = zi + beta_theta * dtheta_dc * dc_dzi;
    out.dzj = zj + beta_theta * dtheta_dc * dc_dzj;
    return out;
}

}  // namespace

std::string to_string(Objective o) {
    switch (o) {
        case Objective::MICo: return "mico";
        case Objective::Dynamics: return "dynamics";
        case Objective::AdvantageDistill: return "advantage";
        case Objective::Augmentation: return "augmentation";
    }
    return "mico";
}

std::string to_string(Target t) { return t == Target::Actor ? "actor" : "critic"; }

Objective objective_from_string(const std::string& s) {
    if (s == "mico") return Objective::MICo;
    if (s == "dynamics" || s == "dyn") return Objective::Dynamics;
    if (s == "advantage" || s == "adv") return Objective::AdvantageDistill;
    if (s == "augmentation" || s == "aug") return Objective::Augmentation;
    throw std::invalid_argument("unknown auxiliary objective: " + s);
}

Target target_from_string(const std::string& s) {
    if (s == "actor") return Target::Actor;
    if (s == "critic") return Target::Critic;
    throw std::invalid_argument("unknown attachment target: " + s);
}

double mico_distance(const Eigen::VectorXd& zx, const Eigen::VectorXd& zy, double beta_theta) {
    return mico_distance_with_grad(zx, zy, beta_theta).distance;
}

void TargetNetwork::update(const nn::ParamSet& online_trunk, const nn::ParamSet& online_value_head) {
    for (std::size_t i = 0; i < trunk.params.size(); ++i)
        trunk.params[i].value =
            (1.0 - tau) * trunk.params[i].value + tau * online_trunk.params[i].value;
    for (std::size_t i = 0; i < value_head.params.size(); ++i)
        value_head.params[i].value =
            (1.0 - tau) * value_head.params[i].value + tau * online_value_head.params[i].value;
}

Attachment::Attachment(const AttachmentConfig& config, const agents::ActorCriticModel& model,
                       double gamma, double lr, double adam_eps, double max_grad_norm,
                       std::uint64_t seed)
    : config_(config), gamma_(gamma) {
    const int latent = model.config().latent;
    const int n_actions = model.config().n_actions;
    if (config.objective == Objective::Dynamics) {
        head_ = nn::Mlp({2 * latent + n_actions, 64, 1}, false, "auxdyn");
        Rng rng(derive_stream(seed, "aux.head.dynamics"));
        head_->init(rng, std::sqrt(2.0), 1.0);
    } else if (config.objective == Objective::AdvantageDistill) {
        head_ = nn::Mlp({latent + n_actions, 1}, false, "auxadv");
        Rng rng(derive_stream(seed, "aux.head.advantage"));
        head_->init(rng, 1.0, 1.0);
    }
    if (head_) {
        head_grads_ = nn::zeros_like(head_->params());
        head_adam_ = nn::make_adam_state(head_->params(), lr, adam_eps, max_grad_norm);
    }
    if (config.objective == Objective::MICo) {
        target_ = TargetNetwork{};
        target_->tau = config.target_net_tau;
        target_->trunk = attached_trunk(model).params();
        target_->value_head = model.value_head().params();
    }
}

const nn::Mlp& Attachment::attached_trunk(const agents::ActorCriticModel& model) const {
    return config_.target == Target::Actor ? model.actor_trunk() : model.critic_trunk();
}

void Attachment::backprop_trunk(const agents::ActorCriticModel& model, const nn::Mlp::Tape& tape,
                                const Eigen::MatrixXd& dz,
                                agents::ActorCriticModel::Grads& grads) const {
    auto& sink = config_.target == Target::Actor ? model.actor_trunk_grads(grads)
                                                 : model.critic_trunk_grads(grads);
    attached_trunk(model).backward(tape, dz, sink);
}

AuxDraw Attachment::draw(const agents::Minibatch& mb, Rng& rng) const {
    const int n = mb.rows();
    AuxDraw d;
    switch (config_.objective) {
        case Objective::MICo: {
            d.partner.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) d.partner[static_cast<std::size_t>(i)] = rng.randint(n);
            break;
        }
        case Objective::Dynamics: {
            if (n < 2)
                throw std::invalid_argument("dynamics objective: minibatch of size 1 has no shuffle partner");
            // Sattolo's algorithm: a uniformly random cyclic permutation, so
            // no element maps to itself
            d.derangement.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) d.derangement[static_cast<std::size_t>(i)] = i;
            for (int i = n - 1; i > 0; --i) {
                int j = rng.randint(i);
                std::swap(d.derangement[static_cast<std::size_t>(i)],
                          d.derangement[static_cast<std::size_t>(j)]);
            }
            d.resampled_actions.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                d.resampled_actions[static_cast<std::size_t>(i)] =
                    rng.randint(static_cast<int>(mb.old_logits.cols()));
            break;
        }
        case Objective::Augmentation: {
            d.noise.resize(n, mb.obs.cols());
            d.keep_mask.resize(n, mb.obs.cols());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < mb.obs.cols(); ++j) {
                    d.noise(i, j) = rng.normal();
                    d.keep_mask(i, j) = rng.uniform() < config_.aug_dropout_prob ? 0.0 : 1.0;
                }
            break;
        }
        case Objective::AdvantageDistill:
            break;
    }
    return d;
}

double Attachment::evaluate(const agents::ActorCriticModel& model, const agents::Minibatch& mb,
                            const AuxDraw& draw, agents::ActorCriticModel::Grads* grads) {
    switch (config_.objective) {
        case Objective::MICo: return eval_mico(model, mb, draw, grads);
        case Objective::Dynamics: return eval_dynamics(model, mb, draw, grads);
        case Objective::AdvantageDistill: return eval_advantage(model, mb, grads);
        case Objective::Augmentation: return eval_augmentation(model, mb, draw, grads);
    }
    return 0.0;
}

double Attachment::eval_mico(const agents::ActorCriticModel& model, const agents::Minibatch& mb,
                             const AuxDraw& draw, agents::ActorCriticModel::Grads* grads) {
    const int n = mb.rows();
    const auto& trunk = attached_trunk(model);
    nn::Mlp::Tape tape;
    Eigen::MatrixXd z = trunk.forward(mb.obs, &tape);

    // target side: lagged network on the successor observations
    nn::Mlp target_trunk = trunk;
    target_trunk.params() = target_->trunk;
    Eigen::MatrixXd z_next = target_trunk.forward(mb.next_obs);

    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(n, z.cols());
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const int j = draw.partner[static_cast<std::size_t>(i)];
        auto online = mico_distance_with_grad(z.row(i).transpose(), z.row(j).transpose(),
                                              config_.mico_beta_theta);
        const double target_dist = mico_distance(z_next.row(i).transpose(),
                                                 z_next.row(j).transpose(), config_.mico_beta_theta);
        const double target = std::abs(mb.rewards(i) - mb.rewards(j)) + gamma_ * target_dist;
        const double residual = online.distance - target;
        loss += residual * residual;
        if (grads) {
            const double w = config_.coefficient * 2.0 * residual / n;
            dz.row(i) += w * online.dzi.transpose();
            dz.row(j) += w * online.dzj.transpose();
        }
    }
    if (grads) backprop_trunk(model, tape, dz, *grads);
    return config_.coefficient * loss / n;
}

double Attachment::eval_dynamics(const agents::ActorCriticModel& model,
                                 const agents::Minibatch& mb, const AuxDraw& draw,
                                 agents::ActorCriticModel::Grads* grads) {
    const int n = mb.rows();
    const int latent = model.config().latent;
    const int n_actions = model.config().n_actions;
    const auto& trunk = attached_trunk(model);
    nn::Mlp::Tape tape_o, tape_n;
    Eigen::MatrixXd z = trunk.forward(mb.obs, &tape_o);
    Eigen::MatrixXd z_next = trunk.forward(mb.next_obs, &tape_n);

    const double w_pos = config_.in_dist_weight;
    const double w_oods = config_.ood_state_weight;
    const double w_ooda = config_.ood_action_weight;
    const double w_total = n * (w_pos + w_oods + w_ooda);
    if (w_total <= 0.0) return 0.0;

    // rows: [0,n) positives, [n,2n) shuffled next states, [2n,3n) resampled actions
    Eigen::MatrixXd input(3 * n, 2 * latent + n_actions);
    Eigen::MatrixXd oh_real = one_hot(mb.actions, n_actions);
    Eigen::MatrixXd oh_fake = one_hot(draw.resampled_actions, n_actions);
    for (int i = 0; i < n; ++i) {
        const int ds = draw.derangement[static_cast<std::size_t>(i)];
        input.row(i) << z.row(i), oh_real.row(i), z_next.row(i);
        input.row(n + i) << z.row(i), oh_real.row(i), z_next.row(ds);
        input.row(2 * n + i) << z.row(i), oh_fake.row(i), z_next.row(i);
    }

    nn::Mlp::Tape head_tape;
    Eigen::VectorXd logits = head_->forward(input, &head_tape).col(0);
    double loss = 0.0;
    Eigen::VectorXd dlogit(3 * n);
    for (int r = 0; r < 3 * n; ++r) {
        const double y = r < n ? 1.0 : 0.0;
        const double w = r < n ? w_pos : (r < 2 * n ? w_oods : w_ooda);
        // -[y log s + (1-y) log(1-s)] = softplus(g) - y g
        loss += w * (softplus(logits(r)) - y * logits(r));
        dlogit(r) = config_.coefficient * w * (sigmoid(logits(r)) - y) / w_total;
    }
    loss = config_.coefficient * loss / w_total;

    if (grads) {
        Eigen::MatrixXd dinput = head_->backward(head_tape, dlogit, head_grads_);
        Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(n, latent);
        Eigen::MatrixXd dz_next = Eigen::MatrixXd::Zero(n, latent);
        for (int i = 0; i < n; ++i) {
            const int ds = draw.derangement[static_cast<std::size_t>(i)];
            dz.row(i) += dinput.row(i).segment(0, latent);
            dz_next.row(i) += dinput.row(i).segment(latent + n_actions, latent);
            dz.row(i) += dinput.row(n + i).segment(0, latent);
            dz_next.row(ds) += dinput.row(n + i).segment(latent + n_actions, latent);
            dz.row(i) += dinput.row(2 * n + i).segment(0, latent);
            dz_next.row(i) += dinput.row(2 * n + i).segment(latent + n_actions, latent);
        }
        backprop_trunk(model, tape_o, dz, *grads);
        backprop_trunk(model, tape_n, dz_next, *grads);
    }
    return loss;
}

double Attachment::eval_advantage(const agents::ActorCriticModel& model,
                                  const agents::Minibatch& mb,
                                  agents::ActorCriticModel::Grads* grads) {
    const int n = mb.rows();
    const int latent = model.config().latent;
    const int n_actions = model.config().n_actions;
    const auto& trunk = attached_trunk(model);
    nn::Mlp::Tape tape;
    Eigen::MatrixXd z = trunk.forward(mb.obs, &tape);

    Eigen::MatrixXd input(n, latent + n_actions);
    input << z, one_hot(mb.actions, n_actions);
    nn::Mlp::Tape head_tape;
    Eigen::VectorXd pred = head_->forward(input, &head_tape).col(0);
    Eigen::VectorXd targets = normalized_advantages(mb.advantages);
    Eigen::VectorXd residual = pred - targets;
    const double loss = config_.coefficient * residual.squaredNorm() / n;
    if (grads) {
        Eigen::VectorXd dpred = (config_.coefficient * 2.0 / n) * residual;
        Eigen::MatrixXd dinput = head_->backward(head_tape, dpred, head_grads_);
        backprop_trunk(model, tape, dinput.leftCols(latent), *grads);
    }
    return loss;
}

double Attachment::eval_augmentation(const agents::ActorCriticModel& model,
                                     const agents::Minibatch& mb, const AuxDraw& draw,
                                     agents::ActorCriticModel::Grads* grads) {
    const int n = mb.rows();
    Eigen::MatrixXd aug =
        (mb.obs + config_.aug_noise_sigma * draw.noise).cwiseProduct(draw.keep_mask);

    if (config_.target == Target::Actor) {
        // KL(pi(.|o) || pi(.|aug(o))), differentiable through both views
        auto clean = model.actor_forward(mb.obs);
        auto fwd = model.actor_forward(aug);
        Eigen::MatrixXd lp_clean = nn::log_softmax_rows(clean.logits);
        Eigen::MatrixXd lp_aug = nn::log_softmax_rows(fwd.logits);
        Eigen::MatrixXd p_clean = lp_clean.array().exp();
        Eigen::MatrixXd p_aug = lp_aug.array().exp();
        double kl = 0.0;
        if (grads) {
            Eigen::MatrixXd dlogits_clean(n, lp_clean.cols());
            for (int i = 0; i < n; ++i) {
                double kl_i = 0.0;
                for (int j = 0; j < lp_clean.cols(); ++j)
                    if (p_clean(i, j) > 0.0)
                        kl_i += p_clean(i, j) * (lp_clean(i, j) - lp_aug(i, j));
                kl += kl_i;
                for (int j = 0; j < lp_clean.cols(); ++j)
                    dlogits_clean(i, j) = (config_.coefficient / n) * p_clean(i, j) *
                                          (lp_clean(i, j) - lp_aug(i, j) - kl_i);
            }
            Eigen::MatrixXd dlogits_aug = (config_.coefficient / n) * (p_aug - p_clean);
            model.actor_backward(clean, dlogits_clean, *grads);
            model.actor_backward(fwd, dlogits_aug, *grads);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < lp_clean.cols(); ++j)
                    if (p_clean(i, j) > 0.0) kl += p_clean(i, j) * (lp_clean(i, j) - lp_aug(i, j));
        }
        return config_.coefficient * kl / n;
    }

    // critic target: MSE(V(o), V(aug(o)))
    auto clean = model.critic_forward(mb.obs);
    auto fwd = model.critic_forward(aug);
    Eigen::VectorXd residual = fwd.values - clean.values;
    const double loss = config_.coefficient * residual.squaredNorm() / n;
    if (grads) {
        Eigen::VectorXd dv = (config_.coefficient * 2.0 / n) * residual;
        model.critic_backward(fwd, dv, *grads, true);
        model.critic_backward(clean, (-dv).eval(), *grads, true);
    }
    return loss;
}

void Attachment::step_own_heads() {
    if (!head_) return;
    nn::adam_step(head_->params(), head_grads_, *head_adam_);
    head_grads_.set_zero();
}

void Attachment::after_optimizer_step(const agents::ActorCriticModel& model) {
    if (target_) target_->update(attached_trunk(model).params(), model.value_head().params());
}

}  // namespace replab::aux
