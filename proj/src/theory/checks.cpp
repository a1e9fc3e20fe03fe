#include "replab/theory/checks.hpp"

#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "replab/env/level_set.hpp"
#include "replab/mi/analysis.hpp"

namespace replab::theory {

namespace {

constexpr double kCertifyTol = 1e-9;

struct PairKey {
    int a;
    int b;
    bool operator<(const PairKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};

}  // namespace

MarkovReport markov_check(const EnumeratedAssembly& e, const ReprFn& repr) {
    MarkovReport r;
    r.i_xx_action = e.mi_xx_action();
    r.i_zz_action = e.mi_zz_action(repr);
    r.i_xx = e.mi_xx();
    r.i_zz = e.mi_zz(repr);
    r.delta_inverse = r.i_xx_action - r.i_zz_action;
    r.delta_density = r.i_xx - r.i_zz;
    r.certified = r.delta_inverse <= kCertifyTol && r.delta_density <= kCertifyTol;

    // inverse-model residual: P(a|z,z') vs P(a|x,x') on supported pairs
    std::map<PairKey, std::array<double, 2>> by_state_pair;
    std::map<PairKey, std::array<double, 2>> by_latent_pair;
    for (const auto& tr : e.transitions()) {
        by_state_pair[{tr.from, tr.to}][static_cast<std::size_t>(tr.action)] += tr.mass;
        by_latent_pair[{e.z_of(repr, tr.from), e.z_of(repr, tr.to)}]
                      [static_cast<std::size_t>(tr.action)] += tr.mass;
    }
    for (const auto& [key, mass] : by_state_pair) {
        const double s_total = mass[0] + mass[1];
        const auto& lm = by_latent_pair.at({e.z_of(repr, key.a), e.z_of(repr, key.b)});
        const double l_total = lm[0] + lm[1];
        for (int a = 0; a < 2; ++a)
            r.inverse_residual = std::max(
                r.inverse_residual,
                std::abs(mass[static_cast<std::size_t>(a)] / s_total -
                         lm[static_cast<std::size_t>(a)] / l_total));
    }

    // density-ratio residual: P(x'|z)/P(x') vs P(z'|z)/P(z')
    std::map<int, double> p_z;                       // first-marginal latent mass
    std::map<int, double> p_x2, p_z2;                // second marginals
    std::map<PairKey, double> j_zx, j_zz;
    std::vector<int> z_of_state(e.states().size());
    for (std::size_t s = 0; s < e.states().size(); ++s)
        z_of_state[s] = e.z_of(repr, static_cast<int>(s));
    for (const auto& tr : e.transitions()) {
        const int zf = z_of_state[static_cast<std::size_t>(tr.from)];
        const int zt = z_of_state[static_cast<std::size_t>(tr.to)];
        p_z[zf] += tr.mass;
        p_x2[tr.to] += tr.mass;
        p_z2[zt] += tr.mass;
        j_zx[{zf, tr.to}] += tr.mass;
        j_zz[{zf, zt}] += tr.mass;
    }
    for (const auto& [z, pz] : p_z) {
        for (const auto& [x2, px2] : p_x2) {
            const int zx2 = z_of_state[static_cast<std::size_t>(x2)];
            auto it_zx = j_zx.find({z, x2});
            auto it_zz = j_zz.find({z, zx2});
            const double lhs = (it_zx == j_zx.end() ? 0.0 : it_zx->second) / (pz * px2);
            const double rhs =
                (it_zz == j_zz.end() ? 0.0 : it_zz->second) / (pz * p_z2.at(zx2));
            r.density_residual = std::max(r.density_residual, std::abs(lhs - rhs));
        }
    }
    return r;
}

std::vector<std::vector<bool>> all_defect_patterns(int n_parts) {
    std::vector<std::vector<bool>> out;
    const int total = 1 << n_parts;
    out.reserve(static_cast<std::size_t>(total));
    for (int mask = 0; mask < total; ++mask) {
        std::vector<bool> pattern(static_cast<std::size_t>(n_parts));
        for (int i = 0; i < n_parts; ++i) pattern[static_cast<std::size_t>(i)] = (mask >> i) & 1;
        out.push_back(std::move(pattern));
    }
    return out;
}

std::vector<std::vector<bool>> balanced_defect_patterns(const std::vector<int>& lengths) {
    std::vector<std::vector<bool>> out;
    for (int n : lengths) {
        for (const auto& pattern : all_defect_patterns(n)) {
            int defects = 0;
            for (bool d : pattern) defects += d ? 1 : 0;
            if (2 * defects == n) out.push_back(pattern);
        }
    }
    return out;
}

std::vector<double> bernoulli_weights(const std::vector<std::vector<bool>>& patterns,
                                      double defect_prob) {
    std::vector<double> weights;
    weights.reserve(patterns.size());
    for (const auto& pattern : patterns) {
        double w = 1.0;
        for (bool defective : pattern) w *= defective ? defect_prob : 1.0 - defect_prob;
        weights.push_back(w);
    }
    return weights;
}

BoundReport generalisation_bound_check(const agents::ActorCriticModel& model,
                                       const env::AssemblyParams& params,
                                       const std::vector<env::LevelContext>& train_levels,
                                       const std::vector<env::LevelContext>& test_levels,
                                       int collection_steps, int analysis_n, int k,
                                       int eval_episodes, std::uint64_t seed, double slack_nats) {
    BoundReport r;
    r.train_level_count = static_cast<int>(train_levels.size());
    r.d_constant = env::reward_bound_D(params.max_abs_reward(), params.max_parts);

    r.train_return =
        agents::evaluate_return(model, env::EnvKind::Assembly, params, env::GridworldParams{},
                                train_levels, eval_episodes, derive_stream(seed, "bound.train"));
    r.test_return =
        agents::evaluate_return(model, env::EnvKind::Assembly, params, env::GridworldParams{},
                                test_levels, eval_episodes, derive_stream(seed, "bound.test"));
    r.gap = r.train_return - r.test_return;

    agents::RolloutCollector collector(env::EnvKind::Assembly, params, env::GridworldParams{},
                                       train_levels, 8, derive_stream(seed, "bound.collect"));
    auto episodes = collector.collect_episodes(model, collection_steps);
    auto sample = mi::build_analysis_sample(
        episodes, [&model](const Eigen::VectorXd& o) { return model.actor_latent(o); },
        params.gamma, analysis_n, derive_stream(seed, "bound.sample"));
    auto est = mi::mi_cd(sample.z, sample.context, k, derive_stream(seed, "bound.mi"));
    r.mi_za_level = est.clamped();

    const double scale = 2.0 * r.d_constant * r.d_constant / r.train_level_count;
    r.bound = std::sqrt(scale * r.mi_za_level);
    r.bound_with_slack = std::sqrt(scale * (r.mi_za_level + slack_nats));
    r.holds = r.gap <= r.bound_with_slack;
    return r;
}

namespace {

// exact quantities over a weighted discrete triple (z, v, l)
struct TripleJoint {
    std::map<std::tuple<int, int, int>, double> mass;
    double total = 0.0;

    void add(int z, int v, int l, double w) {
        mass[{z, v, l}] += w;
        total += w;
    }

    double mi_zl() const {
        mi::JointBuilder b;
        for (const auto& [key, w] : mass) b.add(std::get<0>(key), std::get<2>(key), w);
        return mi::exact_mi_discrete(b.table());
    }
    double mi_zv() const {
        mi::JointBuilder b;
        for (const auto& [key, w] : mass) b.add(std::get<0>(key), std::get<1>(key), w);
        return mi::exact_mi_discrete(b.table());
    }
    double mi_zv_given_l() const { return conditional(2); }
    double mi_zl_given_v() const { return conditional(1); }

private:
    // I(Z;other | cond_axis), cond_axis: 1 -> condition on v, 2 -> condition on l
    double conditional(int cond_axis) const {
        std::map<int, mi::JointBuilder> per;
        std::map<int, double> cond_mass;
        for (const auto& [key, w] : mass) {
            const int c = cond_axis == 1 ? std::get<1>(key) : std::get<2>(key);
            const int other = cond_axis == 1 ? std::get<2>(key) : std::get<1>(key);
            per[c].add(std::get<0>(key), other, w);
            cond_mass[c] += w;
        }
        double out = 0.0;
        for (auto& [c, builder] : per)
            out += (cond_mass.at(c) / total) * mi::exact_mi_discrete(builder.table());
        return out;
    }
};

}  // namespace

LemmaReport lemma_checks(std::uint64_t seed) {
    LemmaReport report;

    // Lemma 1, heterogeneous realised defect rates 0.1 vs 0.9
    {
        env::AssemblyParams params;
        params.min_parts = 10;
        params.max_parts = 10;
        std::vector<bool> sparse(10, false), dense(10, true);
        sparse[3] = true;
        dense[6] = false;
        auto levels = env::make_patterned_assembly_levels({sparse, dense}, seed, params);
        EnumeratedAssembly e(levels, params, optimal_policy());
        report.heterogeneous_mi = e.mi_z_level(optimal_actor_representation(levels));
    }

    // Lemma 1, engineered homogeneous levels: mu(z|c) = mu(z) for every c
    {
        env::AssemblyParams params;
        std::vector<std::vector<bool>> patterns(4, std::vector<bool>{false, true, false, false, true});
        auto levels = env::make_patterned_assembly_levels(patterns, seed, params,
                                                          /*share_specs=*/true);
        EnumeratedAssembly e(levels, params, optimal_policy());
        report.homogeneous_mi = e.mi_z_level(optimal_actor_representation(levels));
    }

    // Lemma 2: nested value quantisations on a mixed-length family
    {
        env::AssemblyParams params;
        params.min_parts = 3;
        params.max_parts = 4;
        std::vector<std::vector<bool>> patterns;
        std::vector<double> weights;
        for (int n : {3, 4}) {
            auto pats = all_defect_patterns(n);
            auto ws = bernoulli_weights(pats, params.defect_prob);
            for (std::size_t i = 0; i < pats.size(); ++i) {
                patterns.push_back(pats[i]);
                weights.push_back(0.5 * ws[i]);
            }
        }
        auto levels = env::make_patterned_assembly_levels(patterns, seed, params);
        EnumeratedAssembly e(levels, params, optimal_policy(), weights);

        // value classes ranked by value so quantisations nest
        auto v_ids = value_class_ids(e, params.gamma);
        std::map<int, double> class_value;
        for (std::size_t s = 0; s < e.states().size(); ++s) {
            const auto& st = e.states()[s];
            const auto& level = levels[static_cast<std::size_t>(st.level_index)].assembly();
            class_value[v_ids[s]] =
                env::assembly::optimal_value(level, st.part_index, params.gamma, params);
        }
        std::vector<std::pair<double, int>> ordered;
        for (const auto& [id, v] : class_value) ordered.emplace_back(v, id);
        std::sort(ordered.begin(), ordered.end());
        std::map<int, int> rank;
        for (std::size_t i = 0; i < ordered.size(); ++i) rank[ordered[i].second] = static_cast<int>(i);
        const int n_classes = static_cast<int>(ordered.size());

        {
            std::map<int, double> level_mass;
            for (std::size_t s = 0; s < e.states().size(); ++s)
                level_mass[e.states()[s].context_id] +=
                    e.state_dist()(static_cast<Eigen::Index>(s));
            Eigen::VectorXd pl(static_cast<Eigen::Index>(level_mass.size()));
            int i = 0;
            for (const auto& [c, m] : level_mass) pl(i++) = m;
            report.level_entropy = mi::exact_entropy(pl);
        }

        auto family_point = [&](int j, bool with_context) {
            TripleJoint joint;
            for (std::size_t s = 0; s < e.states().size(); ++s) {
                const auto& st = e.states()[s];
                int z = std::min(rank.at(v_ids[s]), j - 1);
                if (with_context) z += n_classes * st.level_index;
                joint.add(z, v_ids[s], st.context_id, e.state_dist()(static_cast<Eigen::Index>(s)));
            }
            LemmaReport::FamilyPoint point;
            point.classes = j;
            const double zl = joint.mi_zl();
            const double zv = joint.mi_zv();
            const double zv_l = joint.mi_zv_given_l();
            const double zl_v = joint.mi_zl_given_v();
            point.level_specific = zv - zv_l;
            point.mi_zl = zl;
            point.chain_residual = std::abs(zl - (zv - zv_l + zl_v));
            return point;
        };

        for (int j = 1; j <= n_classes; ++j) report.family.push_back(family_point(j, false));
        report.full_context_mi = family_point(n_classes, true).mi_zl;

        report.monotone = true;
        for (std::size_t i = 0; i + 1 < report.family.size(); ++i) {
            if (report.family[i + 1].level_specific > report.family[i].level_specific + 1e-12 &&
                report.family[i + 1].mi_zl < report.family[i].mi_zl - 1e-12)
                report.monotone = false;
        }
        for (const auto& point : report.family)
            report.max_chain_residual = std::max(report.max_chain_residual, point.chain_residual);
    }
    return report;
}

IncompatibilityReport critic_incompatibility_check(const std::vector<env::LevelContext>& levels,
                                                   const std::vector<double>& level_weights,
                                                   double gamma,
                                                   const env::AssemblyParams& params) {
    IncompatibilityReport r;
    auto critic_rep = optimal_critic_representation(levels, gamma, params);
    const int n_classes = static_cast<int>(critic_rep.class_values.size());
    if (n_classes > 20) throw std::invalid_argument("incompatibility check: latent space too large");

    Eigen::VectorXd probs(static_cast<Eigen::Index>(levels.size()));
    if (level_weights.empty())
        probs.setConstant(1.0 / static_cast<double>(levels.size()));
    else {
        double total = 0.0;
        for (double w : level_weights) total += w;
        for (std::size_t i = 0; i < level_weights.size(); ++i)
            probs(static_cast<Eigen::Index>(i)) = level_weights[i] / total;
    }

    for (std::size_t li = 0; li < levels.size(); ++li)
        r.optimal_return += probs(static_cast<Eigen::Index>(li)) *
                            env::assembly::optimal_return(levels[li].assembly(), gamma, params);

    auto play = [&](std::size_t li, int mask) {
        const auto& level = levels[li].assembly();
        double ret = 0.0, discount = 1.0;
        for (int t = 0; t < level.n_parts(); ++t) {
            const int z = critic_rep.repr(static_cast<int>(li), t, Eigen::VectorXd());
            const int action = (mask >> z) & 1 ? env::kReject : env::kAccept;
            const bool defective = level.parts[static_cast<std::size_t>(t)].defective;
            const bool correct = (action == env::kReject) == defective;
            ret += discount * (correct ? params.reward_correct : params.reward_mistake);
            if (defective && action == env::kAccept) break;
            discount *= gamma;
        }
        return ret;
    };

    r.policies_searched = 1 << n_classes;
    double best = -std::numeric_limits<double>::infinity();
    int best_mask = 0;
    for (int mask = 0; mask < (1 << n_classes); ++mask) {
        double expected = 0.0;
        for (std::size_t li = 0; li < levels.size(); ++li)
            expected += probs(static_cast<Eigen::Index>(li)) * play(li, mask);
        if (expected > best) {
            best = expected;
            best_mask = mask;
        }
    }
    r.best_measurable_return = best;
    r.strictly_suboptimal = best < r.optimal_return - 1e-9;

    for (std::size_t li = 0; li < levels.size(); ++li) {
        const auto& level = levels[li].assembly();
        const int defects = level.defect_count();
        const bool mixed = defects > 0 && defects < level.n_parts();
        if (!mixed) continue;
        if (play(li, best_mask) <
            env::assembly::optimal_return(level, gamma, params) - 1e-9)
            r.dominated_on_mixed_level = true;
    }
    return r;
}

std::vector<CheckResult> run_verification_suite(std::uint64_t seed) {
    std::vector<CheckResult> results;
    auto add = [&results](const std::string& name, bool passed, double measured, double tolerance,
                          const std::string& note) {
        results.push_back({name, passed, measured, tolerance, note});
    };

    env::AssemblyParams params;
    params.min_parts = 4;
    params.max_parts = 4;
    auto patterns = all_defect_patterns(4);
    auto weights = bernoulli_weights(patterns, params.defect_prob);
    auto levels = env::make_patterned_assembly_levels(patterns, seed, params);
    auto phi_a = optimal_actor_representation(levels);

    const std::vector<std::pair<std::string, PolicyFn>> probes = {
        {"optimal", optimal_policy()},
        {"uniform", uniform_policy()},
        {"mixture(0.25)", mixture_policy(0.25)},
        {"mixture(0.65)", mixture_policy(0.65)},
    };

    for (const auto& [pname, policy] : probes) {
        EnumeratedAssembly e(levels, params, policy, weights);

        auto inj = markov_check(e, injective_representation());
        add("markov/injective certified (" + pname + ")", inj.certified,
            std::max(inj.delta_inverse, inj.delta_density), 1e-9, "relabelling preserves both MIs");
        add("markov/injective residuals (" + pname + ")",
            inj.inverse_residual <= 1e-9 && inj.density_residual <= 1e-9,
            std::max(inj.inverse_residual, inj.density_residual), 1e-9, "");

        auto con = markov_check(e, constant_representation());
        add("markov/constant rejected (" + pname + ")",
            !con.certified && con.delta_inverse > 1e-6, con.delta_inverse, 1e-6,
            "actions informative, constant z discards them");

        auto act = markov_check(e, phi_a);
        add("data-processing direction (" + pname + ")",
            act.delta_inverse >= -1e-10 && act.delta_density >= -1e-10 &&
                con.delta_inverse >= -1e-10 && con.delta_density >= -1e-10 &&
                inj.delta_inverse >= -1e-10 && inj.delta_density >= -1e-10,
            std::min({act.delta_inverse, act.delta_density, con.delta_inverse, con.delta_density}),
            -1e-10, "I((Z,Z');A) <= I((X,X');A), I(Z;Z') <= I(X;X')");
    }

    // phi*_A under the optimal policy: inverse gap exactly zero, density gap
    // positive, hence not Markov
    {
        EnumeratedAssembly e(levels, params, optimal_policy(), weights);
        auto act = markov_check(e, phi_a);
        add("markov/phi*_A inverse gap zero", std::abs(act.delta_inverse) <= 1e-9,
            act.delta_inverse, 1e-9, "optimal action readable from z*_A");
        add("markov/phi*_A density gap positive", act.delta_density > 1e-3, act.delta_density,
            1e-3, "I(X;X') > 0 while I(Z*;Z*') = 0: phi*_A is not Markov");
        add("markov/phi*_A I(Z;Z') = 0", std::abs(e.mi_zz(phi_a)) <= 1e-10, e.mi_zz(phi_a), 1e-10,
            "independent defect draws give a memoryless reduced chain");
        add("level identifiability I(O;L) > 0", e.mi_obs_level() > 0.0, e.mi_obs_level(), 0.0, "");

        // Eq.-7 stationary distributions
        auto mu = e.stationary_z(phi_a);
        const double mu_reject = mu.count(env::kReject) ? mu.at(env::kReject) : 0.0;
        add("stationary mu(z*_1) = P^F", std::abs(mu_reject - params.defect_prob) <= 1e-12,
            mu_reject, 1e-12, "product family, optimal policy");
        auto mu_c = e.stationary_z_given_level(phi_a);
        double worst = 0.0;
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const auto& level = levels[li].assembly();
            double expected = level.defect_rate();
            double got = 0.0;
            auto it = mu_c.at(levels[li].context_id).find(env::kReject);
            if (it != mu_c.at(levels[li].context_id).end()) got = it->second;
            worst = std::max(worst, std::abs(got - expected));
        }
        add("stationary mu(z*_1|c) = P^F_c", worst <= 1e-12, worst, 1e-12, "");

        // optimality conservation: greedy policy on {z*_0, z*_1}
        bool conserved = true;
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const auto& level = levels[li].assembly();
            double ret = 0.0, discount = 1.0;
            for (int t = 0; t < level.n_parts(); ++t) {
                const int z = phi_a(static_cast<int>(li), t, Eigen::VectorXd());
                const int action = z == env::kReject ? env::kReject : env::kAccept;
                const bool defective = level.parts[static_cast<std::size_t>(t)].defective;
                ret += discount * (((action == env::kReject) == defective)
                                       ? params.reward_correct
                                       : params.reward_mistake);
                if (defective && action == env::kAccept) break;
                discount *= params.gamma;
            }
            if (std::abs(ret - env::assembly::optimal_return(level, params.gamma, params)) > 1e-12)
                conserved = false;
        }
        add("phi*_A optimality conservation", conserved, conserved ? 0.0 : 1.0, 0.0,
            "greedy policy over z*_A attains the optimal return on every level");
    }

    // phi*_C facts on a mixed-length family. Every level keeps defect rate
    // 1/2, which pins mu(z*_A|c) to the same value everywhere; the value
    // classes still track the remaining part count, so length variation makes
    // them level-specific.
    {
        env::AssemblyParams mixed = params;
        mixed.min_parts = 2;
        mixed.max_parts = 8;
        auto mixed_patterns = balanced_defect_patterns({2, 4, 8});
        // equal probability per length class, uniform within a class
        std::vector<double> mixed_weights;
        for (const auto& pattern : mixed_patterns) {
            const int n = static_cast<int>(pattern.size());
            int count = 0;
            for (const auto& other : mixed_patterns)
                if (static_cast<int>(other.size()) == n) ++count;
            mixed_weights.push_back(1.0 / (3.0 * count));
        }
        auto mixed_levels = env::make_patterned_assembly_levels(mixed_patterns, seed + 3, mixed);
        EnumeratedAssembly e(mixed_levels, mixed, optimal_policy(), mixed_weights);
        auto mixed_phi_a = optimal_actor_representation(mixed_levels);
        auto critic = optimal_critic_representation(mixed_levels, mixed.gamma, mixed);

        auto v_ids = value_class_ids(e, mixed.gamma);
        mi::JointBuilder zv;
        std::map<int, double> v_mass;
        for (std::size_t s = 0; s < e.states().size(); ++s) {
            zv.add(e.z_of(critic.repr, static_cast<int>(s)), v_ids[s],
                   e.state_dist()(static_cast<Eigen::Index>(s)));
            v_mass[v_ids[s]] += e.state_dist()(static_cast<Eigen::Index>(s));
        }
        Eigen::VectorXd pv(static_cast<Eigen::Index>(v_mass.size()));
        int vi = 0;
        for (const auto& [id, m] : v_mass) pv(vi++) = m;
        const double h_v = mi::exact_entropy(pv);
        const double i_zc_v = mi::exact_mi_discrete(zv.table());
        add("phi*_C: I(Z*_C;V) = H(V)", std::abs(i_zc_v - h_v) <= 1e-12, i_zc_v - h_v, 1e-12,
            "value fully determined by the latent");
        const double i_zc_l = e.mi_z_level(critic.repr);
        const double i_za_l = e.mi_z_level(mixed_phi_a);
        add("phi*_C: I(Z*_C;L) > I(Z*_A;L)", i_zc_l > i_za_l, i_zc_l - i_za_l, 0.0,
            "values are more level-specific than optimal actions");
    }

    // phi*_C incompatibility on a defect-heavy family
    {
        env::AssemblyParams heavy = params;
        heavy.defect_prob = 0.7;
        auto heavy_weights = bernoulli_weights(patterns, heavy.defect_prob);
        auto heavy_levels = env::make_patterned_assembly_levels(patterns, seed + 1, heavy);
        auto inc = critic_incompatibility_check(heavy_levels, heavy_weights, heavy.gamma, heavy);
        add("phi*_C incompatibility: strictly suboptimal", inc.strictly_suboptimal,
            inc.optimal_return - inc.best_measurable_return, 0.0,
            "exhaustive search over latent-measurable policies");
        add("phi*_C incompatibility: dominated on mixed levels", inc.dominated_on_mixed_level,
            inc.dominated_on_mixed_level ? 1.0 : 0.0, 0.0, "");
    }

    // lemma checks
    {
        auto lemma = lemma_checks(seed + 2);
        add("lemma1: heterogeneous defect rates give I(Z*_A;L) > 0", lemma.heterogeneous_mi > 0.0,
            lemma.heterogeneous_mi, 0.0, "rates 0.1 vs 0.9");
        add("lemma1: homogeneous levels give I(Z*_A;L) = 0", lemma.homogeneous_mi <= 1e-10,
            lemma.homogeneous_mi, 1e-10, "identical defect patterns");
        add("lemma2: I(Z;L) non-decreasing in level-specific value information", lemma.monotone,
            lemma.monotone ? 1.0 : 0.0, 0.0, "nested value quantisations");
        add("lemma2: chain-rule identity", lemma.max_chain_residual <= 1e-10,
            lemma.max_chain_residual, 1e-10, "I(Z;L) = I(Z;V) - I(Z;V|L) + I(Z;L|V)");
        add("lemma2: context-augmented latent attains H(L)",
            std::abs(lemma.full_context_mi - lemma.level_entropy) <= 1e-10,
            lemma.full_context_mi - lemma.level_entropy, 1e-10, "");
    }

    return results;
}

void write_verification_report(std::ostream& os, const std::vector<CheckResult>& results) {
    os.precision(12);
    int passed = 0;
    for (const auto& r : results) {
        os << (r.passed ? "PASS" : "FAIL") << " " << r.name << " measured=" << r.measured
           << " tolerance=" << r.tolerance;
        if (!r.note.empty()) os << " (" << r.note << ")";
        os << "\n";
        passed += r.passed ? 1 : 0;
    }
    os << passed << "/" << results.size() << " checks passed\n";
}

}  // namespace replab::theory
