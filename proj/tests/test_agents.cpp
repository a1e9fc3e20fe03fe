#include <doctest.h>

#include <cmath>

#include "replab/agents/train.hpp"

using namespace replab;
using namespace replab::agents;

namespace {

env::AssemblyParams assembly_params() { return env::AssemblyParams{}; }

ModelConfig small_model_config(int obs_dim, int n_actions, Coupling coupling,
                               bool aux_head = false) {
    ModelConfig mc;
    mc.obs_dim = obs_dim;
    mc.n_actions = n_actions;
    mc.hidden = 8;
    mc.latent = 5;
    mc.coupling = coupling;
    mc.aux_value_head = aux_head;
    return mc;
}

Minibatch random_minibatch(int rows, int obs_dim, int n_actions, Rng& rng) {
    Minibatch mb;
    mb.obs.resize(rows, obs_dim);
    mb.next_obs.resize(rows, obs_dim);
    mb.actions.resize(static_cast<std::size_t>(rows));
    mb.rewards.resize(rows);
    mb.advantages.resize(rows);
    mb.value_targets.resize(rows);
    mb.old_log_probs.resize(rows);
    mb.old_logits.resize(rows, n_actions);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < obs_dim; ++j) {
            mb.obs(i, j) = rng.normal();
            mb.next_obs(i, j) = rng.normal();
        }
        mb.actions[static_cast<std::size_t>(i)] = rng.randint(n_actions);
        mb.rewards(i) = rng.normal();
        mb.advantages(i) = rng.normal();
        mb.value_targets(i) = rng.normal();
        for (int j = 0; j < n_actions; ++j) mb.old_logits(i, j) = 0.5 * rng.normal();
        nn::Categorical old_dist{mb.old_logits.row(i).transpose()};
        mb.old_log_probs(i) = old_dist.log_prob(mb.actions[static_cast<std::size_t>(i)]);
    }
    return mb;
}

std::vector<nn::ParamSet*> trainable_sets(ActorCriticModel& model) {
    std::vector<nn::ParamSet*> out;
    if (model.config().coupling == Coupling::Coupled) {
        out.push_back(&model.actor_trunk().params());
    } else {
        out.push_back(&model.actor_trunk().params());
        out.push_back(&model.critic_trunk().params());
    }
    out.push_back(&model.policy_head().params());
    out.push_back(&model.value_head().params());
    if (model.has_aux_value_head()) out.push_back(&model.aux_value_head().params());
    return out;
}

nn::ParamSet* grads_for(ActorCriticModel& model, ActorCriticModel::Grads& g, nn::ParamSet* set) {
    if (set == &model.policy_head().params()) return &g.policy_head;
    if (set == &model.value_head().params()) return &g.value_head;
    if (model.has_aux_value_head() && set == &model.aux_value_head().params())
        return &g.aux_value_head;
    if (model.config().coupling == Coupling::Coupled) return &g.trunk;
    if (set == &model.actor_trunk().params()) return &g.trunk_actor;
    return &g.trunk_critic;
}

// central-difference oracle over every trainable scalar
double max_fd_rel_error(ActorCriticModel& model, ActorCriticModel::Grads& grads,
                        const std::function<double()>& loss) {
    const double h = 1e-4;
    double worst = 0.0;
    for (auto* set : trainable_sets(model)) {
        nn::ParamSet* g = grads_for(model, grads, set);
        for (std::size_t p = 0; p < set->params.size(); ++p) {
            auto& value = set->params[p].value;
            for (Eigen::Index k = 0; k < value.size(); ++k) {
                const double saved = value(k);
                value(k) = saved + h;
                const double up = loss();
                value(k) = saved - h;
                const double down = loss();
                value(k) = saved;
                const double fd = (up - down) / (2.0 * h);
                const double an = g->params[p].value(k);
                worst = std::max(worst,
                                 std::abs(fd - an) / std::max({1e-3, std::abs(fd), std::abs(an)}));
            }
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("compute_gae: single terminal step") {
    RolloutBuffer b;
    b.num_envs = 1;
    b.len = 1;
    b.rewards.resize(1);
    b.rewards << 1.0;
    b.behaviour_values.resize(1);
    b.behaviour_values << 0.0;
    b.dones = {1};
    b.bootstrap_values = Eigen::VectorXd::Constant(1, 123.0);  // masked by done
    compute_gae(b, 0.99, 0.95);
    CHECK(b.advantages(0) == doctest::Approx(1.0));
    CHECK(b.value_targets(0) == doctest::Approx(1.0));
}

TEST_CASE("compute_gae: lambda 0 collapses to the TD residual") {
    RolloutBuffer b;
    b.num_envs = 1;
    b.len = 3;
    b.rewards.resize(3);
    b.rewards << 0.5, -0.25, 2.0;
    b.behaviour_values.resize(3);
    b.behaviour_values << 0.1, 0.2, 0.3;
    b.dones = {0, 0, 0};
    b.bootstrap_values = Eigen::VectorXd::Constant(1, 0.4);
    const double gamma = 0.9;
    compute_gae(b, gamma, 0.0);
    CHECK(b.advantages(0) == doctest::Approx(0.5 + gamma * 0.2 - 0.1));
    CHECK(b.advantages(1) == doctest::Approx(-0.25 + gamma * 0.3 - 0.2));
    CHECK(b.advantages(2) == doctest::Approx(2.0 + gamma * 0.4 - 0.3));
}

TEST_CASE("compute_gae: hand-unrolled three-step episode") {
    // gamma=0.99, lambda=0.95, rewards [1,0,1], V=0.5 everywhere, terminal at step 3
    RolloutBuffer b;
    b.num_envs = 1;
    b.len = 3;
    b.rewards.resize(3);
    b.rewards << 1.0, 0.0, 1.0;
    b.behaviour_values = Eigen::VectorXd::Constant(3, 0.5);
    b.dones = {0, 0, 1};
    b.bootstrap_values = Eigen::VectorXd::Constant(1, 0.0);
    compute_gae(b, 0.99, 0.95);

    // independent backward unroll
    const double d2 = 1.0 - 0.5;
    const double d1 = 0.0 + 0.99 * 0.5 - 0.5;
    const double d0 = 1.0 + 0.99 * 0.5 - 0.5;
    const double a2 = d2;
    const double a1 = d1 + 0.99 * 0.95 * a2;
    const double a0 = d0 + 0.99 * 0.95 * a1;
    CHECK(b.advantages(2) == doctest::Approx(a2).epsilon(1e-12));
    CHECK(b.advantages(1) == doctest::Approx(a1).epsilon(1e-12));
    CHECK(b.advantages(0) == doctest::Approx(a0).epsilon(1e-12));
    CHECK(b.advantages(0) == doctest::Approx(1.43257).epsilon(1e-5));
    CHECK(b.advantages(1) == doctest::Approx(0.46525).epsilon(1e-5));
    CHECK(b.advantages(2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("GAE telescoping: optimal policy with exact values gives zero advantages") {
    auto params = assembly_params();
    const double gamma = params.gamma;
    auto levels = env::sample_assembly_levels(5, 77, params);
    env::AssemblyEnv env(params);
    Rng rng(3);

    const int len = 64;
    RolloutBuffer b;
    b.num_envs = 1;
    b.len = len;
    b.rewards.resize(len);
    b.behaviour_values.resize(len);
    b.dones.resize(len);
    b.bootstrap_values.resize(1);

    auto draw_level = [&]() -> const env::LevelContext& {
        return levels[static_cast<std::size_t>(rng.randint(static_cast<int>(levels.size())))];
    };
    env.reset(draw_level());
    const env::AssemblyLevel* level = &levels[0].assembly();
    // track which level is active for the optimal value/action lookups
    int active = env.context_id();
    auto level_of = [&](int id) -> const env::AssemblyLevel* {
        for (const auto& l : levels)
            if (l.context_id == id) return &l.assembly();
        return nullptr;
    };
    level = level_of(active);

    for (int t = 0; t < len; ++t) {
        b.behaviour_values(t) = env::assembly::optimal_value(*level, env.part_index(), gamma, params);
        auto out = env.step(env::assembly::optimal_action(*level, env.part_index()));
        b.rewards(t) = out.reward;
        b.dones[static_cast<std::size_t>(t)] = out.done ? 1 : 0;
        if (out.done) {
            env.reset(draw_level());
            level = level_of(env.context_id());
        }
    }
    b.bootstrap_values(0) = env::assembly::optimal_value(*level, env.part_index(), gamma, params);
    compute_gae(b, gamma, 1.0);
    CHECK(b.advantages.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("collect_rollout: bookkeeping and behaviour statistics") {
    auto params = assembly_params();
    auto levels = env::sample_assembly_levels(4, 11, params);
    RolloutCollector collector(env::EnvKind::Assembly, params, env::GridworldParams{}, levels, 3,
                               99);
    Rng init(1);
    ActorCriticModel model(small_model_config(collector.spec().obs_dim, 2, Coupling::Coupled),
                           init);
    ReturnNormalizer rnorm(params.gamma, false, 3);
    auto buffer = collector.collect(model, 16, rnorm);

    CHECK(buffer.rows() == 3 * 16);
    CHECK(buffer.obs.rows() == 48);

    // recorded behaviour stats match a re-evaluation of the unchanged model
    for (int i = 0; i < buffer.rows(); ++i) {
        nn::Categorical dist = model.policy(buffer.obs.row(i).transpose());
        CHECK(dist.log_prob(buffer.actions[static_cast<std::size_t>(i)]) ==
              doctest::Approx(buffer.behaviour_log_probs(i)).epsilon(1e-12));
        CHECK(model.value(buffer.obs.row(i).transpose()) ==
              doctest::Approx(buffer.behaviour_values(i)).epsilon(1e-12));
    }
}

TEST_CASE("collect_rollout: a deterministic policy records one action") {
    auto params = assembly_params();
    auto levels = env::sample_assembly_levels(2, 5, params);
    RolloutCollector collector(env::EnvKind::Assembly, params, env::GridworldParams{}, levels, 2,
                               7);
    Rng init(1);
    ActorCriticModel model(small_model_config(collector.spec().obs_dim, 2, Coupling::Coupled),
                           init);
    model.policy_head().params().at("pi.W0").value.setZero();
    model.policy_head().params().at("pi.b0").value << 1e6, 0.0;
    ReturnNormalizer rnorm(params.gamma, false, 2);
    auto buffer = collector.collect(model, 12, rnorm);
    for (int a : buffer.actions) CHECK(a == env::kAccept);
}

TEST_CASE("ppo_policy_loss: ratio 1 equals the vanilla policy gradient") {
    Rng rng(21);
    ActorCriticModel model(small_model_config(6, 3, Coupling::Coupled), rng);
    Minibatch mb = random_minibatch(8, 6, 3, rng);
    // behaviour log-probs from the model itself => rho == 1
    for (int i = 0; i < mb.rows(); ++i)
        mb.old_log_probs(i) =
            model.policy(mb.obs.row(i).transpose()).log_prob(mb.actions[static_cast<std::size_t>(i)]);

    auto grads = model.make_grads();
    ppo_policy_loss(model, mb, 0.2, 0.01, &grads);

    // vanilla surrogate with the same minibatch-normalised advantages
    Eigen::VectorXd adv = mb.advantages;
    const double mean = adv.mean();
    const double sd = std::sqrt((adv.array() - mean).square().sum() / adv.size());
    adv = (adv.array() - mean) / (sd + 1e-8);
    auto vanilla = [&]() {
        double j = 0.0;
        for (int i = 0; i < mb.rows(); ++i) {
            nn::Categorical dist = model.policy(mb.obs.row(i).transpose());
            j += dist.log_prob(mb.actions[static_cast<std::size_t>(i)]) * adv(i) +
                 0.01 * dist.entropy();
        }
        return -j / mb.rows();
    };
    auto fd_grads = model.make_grads();  // unused accumulator for the helper
    double worst = max_fd_rel_error(model, grads, vanilla);
    (void)fd_grads;
    CHECK(worst < 1e-4);
}

TEST_CASE("ppo_policy_loss: saturated clip kills the ratio gradient") {
    Rng rng(31);
    ActorCriticModel model(small_model_config(6, 3, Coupling::Coupled), rng);
    Minibatch mb = random_minibatch(1, 6, 3, rng);
    mb.advantages(0) = 2.0;
    // rho = 1.3 exactly
    mb.old_log_probs(0) = model.policy(mb.obs.row(0).transpose())
                              .log_prob(mb.actions[0]) - std::log(1.3);
    auto grads = model.make_grads();
    auto stats = ppo_policy_loss(model, mb, 0.2, 0.0, &grads, /*normalize_advantages=*/false);
    CHECK(stats.loss == doctest::Approx(-1.2 * 2.0).epsilon(1e-9));
    CHECK(grads.trunk.global_norm() == 0.0);
    CHECK(grads.policy_head.global_norm() == 0.0);
    CHECK(stats.clip_fraction == doctest::Approx(1.0));
}

TEST_CASE("ppo_policy_loss: gradients match finite differences") {
    Rng rng(41);
    ActorCriticModel model(small_model_config(6, 3, Coupling::Coupled), rng);
    Minibatch mb = random_minibatch(8, 6, 3, rng);  // 2 envs x 4 steps
    auto grads = model.make_grads();
    ppo_policy_loss(model, mb, 0.2, 0.01, &grads);
    auto loss = [&]() { return ppo_policy_loss(model, mb, 0.2, 0.01, nullptr).loss; };
    CHECK(max_fd_rel_error(model, grads, loss) < 1e-4);
}

TEST_CASE("ppo_value_loss: examples and gradient") {
    Rng rng(51);
    ActorCriticModel model(small_model_config(6, 3, Coupling::Coupled), rng);
    Minibatch mb = random_minibatch(6, 6, 3, rng);

    SUBCASE("perfect predictions give zero loss") {
        for (int i = 0; i < mb.rows(); ++i)
            mb.value_targets(i) = model.value(mb.obs.row(i).transpose());
        CHECK(ppo_value_loss(model, mb, nullptr) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("constant predictor against targets {0,2}") {
        model.value_head().params().at("v.W0").value.setZero();
        Minibatch two = random_minibatch(2, 6, 3, rng);
        two.value_targets << 0.0, 2.0;
        for (double c : {0.0, 0.5, 1.0, 1.7}) {
            model.value_head().params().at("v.b0").value << c;
            // trunk still feeds zero weights, so prediction == c
            double loss = ppo_value_loss(model, two, nullptr);
            CHECK(loss == doctest::Approx((c * c + (c - 2.0) * (c - 2.0)) / 2.0).epsilon(1e-12));
        }
        // minimised at c = 1
        model.value_head().params().at("v.b0").value << 1.0;
        double at_min = ppo_value_loss(model, two, nullptr);
        model.value_head().params().at("v.b0").value << 1.1;
        CHECK(at_min < ppo_value_loss(model, two, nullptr));
    }
    SUBCASE("gradient matches finite differences") {
        auto grads = model.make_grads();
        ppo_value_loss(model, mb, &grads);
        auto loss = [&]() { return ppo_value_loss(model, mb, nullptr); };
        CHECK(max_fd_rel_error(model, grads, loss) < 1e-4);
    }
}

TEST_CASE("ppg_aux_loss: KL term, contract, and gradient") {
    Rng rng(61);
    ActorCriticModel model(small_model_config(6, 3, Coupling::Decoupled, /*aux_head=*/true), rng);
    Minibatch mb = random_minibatch(8, 6, 3, rng);

    SUBCASE("policy unchanged since collection => zero KL") {
        for (int i = 0; i < mb.rows(); ++i) {
            nn::Categorical dist = model.policy(mb.obs.row(i).transpose());
            mb.old_logits.row(i) = dist.logits.transpose();
        }
        auto stats = ppg_aux_loss(model, mb, 1.0, 1.0, nullptr);
        CHECK(stats.kl == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("beta_c = 0 reduces to the two value regressions") {
        auto stats = ppg_aux_loss(model, mb, 0.0, 1.0, nullptr);
        CHECK(stats.loss == doctest::Approx(stats.value_mse + stats.distill_mse).epsilon(1e-12));
        CHECK(stats.distill_mse > 0.0);
    }
    SUBCASE("missing behaviour logits is a contract violation") {
        Minibatch bad = mb;
        bad.old_logits.resize(0, 0);
        CHECK_THROWS_AS(ppg_aux_loss(model, bad, 1.0, 1.0, nullptr), std::logic_error);
    }
    SUBCASE("gradient matches finite differences") {
        auto grads = model.make_grads();
        ppg_aux_loss(model, mb, 1.0, 1.0, &grads);
        auto loss = [&]() { return ppg_aux_loss(model, mb, 1.0, 1.0, nullptr).loss; };
        CHECK(max_fd_rel_error(model, grads, loss) < 1e-4);
    }
}

TEST_CASE("decoupling isolation: losses never cross representations") {
    Rng rng(71);
    ActorCriticModel model(small_model_config(6, 3, Coupling::Decoupled), rng);
    Minibatch mb = random_minibatch(8, 6, 3, rng);

    auto grads = model.make_grads();
    ppo_value_loss(model, mb, &grads);
    CHECK(grads.trunk_actor.global_norm() == 0.0);
    CHECK(grads.policy_head.global_norm() == 0.0);
    CHECK(grads.trunk_critic.global_norm() > 0.0);

    grads.zero();
    ppo_policy_loss(model, mb, 0.2, 0.01, &grads);
    CHECK(grads.trunk_critic.global_norm() == 0.0);
    CHECK(grads.value_head.global_norm() == 0.0);
    CHECK(grads.trunk_actor.global_norm() > 0.0);
}

TEST_CASE("coupled stop-gradient keeps the trunk out of the value update") {
    Rng rng(81);
    ActorCriticModel model(small_model_config(6, 3, Coupling::Coupled), rng);
    Minibatch mb = random_minibatch(8, 6, 3, rng);
    auto grads = model.make_grads();
    value_mse_loss(model, mb.obs, mb.value_targets, 1.0, &grads, /*into_trunk=*/false);
    CHECK(grads.trunk.global_norm() == 0.0);
    CHECK(grads.value_head.global_norm() > 0.0);
}

TEST_CASE("return normaliser: guards, identity, scale invariance") {
    SUBCASE("constant zero rewards never divide by zero") {
        ReturnNormalizer rn(0.99, true, 1);
        for (int i = 0; i < 16; ++i) {
            double r = rn.normalize(0, 0.0, false);
            CHECK(std::isfinite(r));
            CHECK(r == 0.0);
        }
    }
    SUBCASE("disabled mode is the identity") {
        ReturnNormalizer rn(0.99, false, 1);
        CHECK(rn.normalize(0, 3.25, false) == 3.25);
        CHECK(rn.normalize(0, -1.5, true) == -1.5);
    }
    SUBCASE("scaling all rewards by 10 yields identical normalised rewards") {
        ReturnNormalizer a(0.99, true, 1), b(0.99, true, 1);
        Rng rng(5);
        for (int i = 0; i < 64; ++i) {
            double r = rng.normal();
            bool done = rng.uniform() < 0.1;
            double na = a.normalize(0, r, done);
            double nb = b.normalize(0, 10.0 * r, done);
            if (i >= 2) CHECK(na == doctest::Approx(nb).epsilon(1e-9));
        }
    }
}

TEST_CASE("train: budget zero returns the initial model") {
    auto params = assembly_params();
    auto set = env::sample_level_set(env::EnvKind::Assembly, 4, 4, 3, params, env::GridworldParams{});
    TrainConfig cfg;
    cfg.num_envs = 2;
    cfg.rollout_len = 8;
    auto result = train(Algorithm::PPO, Coupling::Coupled, cfg, env::EnvKind::Assembly, params,
                        env::GridworldParams{}, set.train, set.test, 0, 12345);

    Rng init_rng(derive_stream(12345, "train.init"));
    ModelConfig mc;
    mc.obs_dim = params.obs_dim();
    mc.n_actions = 2;
    mc.hidden = cfg.hidden;
    mc.latent = cfg.latent;
    mc.coupling = Coupling::Coupled;
    ActorCriticModel fresh(mc, init_rng);

    auto a = result.model.gather_params();
    auto b = fresh.gather_params();
    REQUIRE(a.same_shape(b));
    for (std::size_t i = 0; i < a.params.size(); ++i)
        CHECK(a.params[i].value == b.params[i].value);
    CHECK(result.env_steps == 0);
}

TEST_CASE("train: PPG auxiliary buffer size is exactly n_pi batches") {
    auto params = assembly_params();
    auto set = env::sample_level_set(env::EnvKind::Assembly, 4, 4, 9, params, env::GridworldParams{});
    TrainConfig cfg;
    cfg.num_envs = 2;
    cfg.rollout_len = 8;
    cfg.n_pi = 3;
    cfg.aux_epochs = 1;
    cfg.aux_minibatch_size = 16;
    cfg.minibatches_per_epoch = 2;
    const long long budget = 3 * 2 * 8;  // exactly n_pi rollouts
    auto result = train(Algorithm::PPG, Coupling::Coupled, cfg, env::EnvKind::Assembly, params,
                        env::GridworldParams{}, set.train, set.test, budget, 4242);
    CHECK(result.aux_buffer_rows == static_cast<std::size_t>(3 * 2 * 8));
}

TEST_CASE("train: identical seeds reproduce parameters bit-exactly") {
    auto params = assembly_params();
    auto set = env::sample_level_set(env::EnvKind::Assembly, 4, 4, 21, params, env::GridworldParams{});
    TrainConfig cfg;
    cfg.num_envs = 2;
    cfg.rollout_len = 16;
    cfg.minibatches_per_epoch = 2;
    cfg.eval_interval = 2;
    cfg.eval_episodes = 4;
    auto run = [&](Algorithm alg, Coupling coupling) {
        return train(alg, coupling, cfg, env::EnvKind::Assembly, params, env::GridworldParams{},
                     set.train, set.test, 4 * 32, 777);
    };
    for (auto alg : {Algorithm::PPO, Algorithm::PPG, Algorithm::DCPG}) {
        for (auto coupling : {Coupling::Coupled, Coupling::Decoupled}) {
            auto a = run(alg, coupling).model.gather_params();
            auto b = run(alg, coupling).model.gather_params();
            REQUIRE(a.same_shape(b));
            for (std::size_t i = 0; i < a.params.size(); ++i)
                CHECK(a.params[i].value == b.params[i].value);
        }
    }
}

TEST_CASE("train: smoke run beats the random policy on assembly" * doctest::timeout(600)) {
    auto params = assembly_params();
    auto set = env::sample_level_set(env::EnvKind::Assembly, 8, 16, 99, params, env::GridworldParams{});
    TrainConfig cfg;
    cfg.num_envs = 8;
    cfg.rollout_len = 64;

    // random-policy baseline: the untrained model
    Rng init_rng(derive_stream(1, "x"));
    ModelConfig mc;
    mc.obs_dim = params.obs_dim();
    mc.n_actions = 2;
    ActorCriticModel random_model(mc, init_rng);
    double random_return =
        evaluate_return(random_model, env::EnvKind::Assembly, params, env::GridworldParams{},
                        set.train, 64, 5);

    std::vector<double> finals;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto result = train(Algorithm::PPO, Coupling::Coupled, cfg, env::EnvKind::Assembly, params,
                            env::GridworldParams{}, set.train, set.test, 30'000, seed);
        finals.push_back(result.log.records.back().train_return);
    }
    std::sort(finals.begin(), finals.end());
    CHECK(finals[1] > random_return);  // median of three
}
