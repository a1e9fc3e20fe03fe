#include "replab/theory/enumeration.hpp"

#include <cmath>
#include <stdexcept>

namespace replab::theory {

using env::AssemblyLevel;
using env::AssemblyParams;

PolicyFn optimal_policy() {
    return [](const AssemblyLevel& level, int part_index) {
        Eigen::Vector2d p = Eigen::Vector2d::Zero();
        p(env::assembly::optimal_action(level, part_index)) = 1.0;
        return p;
    };
}

PolicyFn uniform_policy() {
    return [](const AssemblyLevel&, int) { return Eigen::Vector2d(0.5, 0.5); };
}

PolicyFn mixture_policy(double eps) {
    return [eps](const AssemblyLevel& level, int part_index) {
        Eigen::Vector2d p = Eigen::Vector2d::Constant(eps * 0.5);
        p(env::assembly::optimal_action(level, part_index)) += 1.0 - eps;
        return p;
    };
}

ReprFn injective_representation() {
    // relabels states by (level, part) pairs; collisions impossible for
    // part counts below 2^16
    return [](int level_index, int part_index, const Eigen::VectorXd&) {
        return level_index * 65536 + part_index;
    };
}

ReprFn constant_representation() {
    return [](int, int, const Eigen::VectorXd&) { return 0; };
}

EnumeratedAssembly::EnumeratedAssembly(const std::vector<env::LevelContext>& levels,
                                       const AssemblyParams& params, const PolicyFn& policy,
                                       const std::vector<double>& level_weights)
    : levels_(&levels), params_(params) {
    if (levels.empty()) throw std::invalid_argument("EnumeratedAssembly: empty level set");
    const int n_levels = static_cast<int>(levels.size());
    level_probs_.resize(n_levels);
    if (level_weights.empty()) {
        level_probs_.setConstant(1.0 / n_levels);
    } else {
        if (static_cast<int>(level_weights.size()) != n_levels)
            throw std::invalid_argument("EnumeratedAssembly: weight count mismatch");
        double total = 0.0;
        for (double w : level_weights) total += w;
        for (int i = 0; i < n_levels; ++i) level_probs_(i) = level_weights[static_cast<std::size_t>(i)] / total;
    }

    // states and reach probabilities
    std::vector<std::vector<double>> reach(static_cast<std::size_t>(n_levels));
    std::vector<std::vector<int>> state_index(static_cast<std::size_t>(n_levels));
    for (int li = 0; li < n_levels; ++li) {
        const auto& level = levels[static_cast<std::size_t>(li)].assembly();
        auto& r = reach[static_cast<std::size_t>(li)];
        r.resize(static_cast<std::size_t>(level.n_parts()));
        r[0] = 1.0;
        for (int t = 0; t + 1 < level.n_parts(); ++t) {
            Eigen::Vector2d p = policy(level, t);
            const bool defective = level.parts[static_cast<std::size_t>(t)].defective;
            const double continue_prob = defective ? 1.0 - p(env::kAccept) : 1.0;
            r[static_cast<std::size_t>(t) + 1] = r[static_cast<std::size_t>(t)] * continue_prob;
        }
        for (int t = 0; t < level.n_parts(); ++t) {
            state_index[static_cast<std::size_t>(li)].push_back(static_cast<int>(states_.size()));
            states_.push_back({li, levels[static_cast<std::size_t>(li)].context_id, t,
                               env::assembly::observe(level, t, params)});
        }
    }

    state_dist_.resize(static_cast<Eigen::Index>(states_.size()));
    for (std::size_t s = 0; s < states_.size(); ++s) {
        const auto& st = states_[s];
        state_dist_(static_cast<Eigen::Index>(s)) =
            level_probs_(st.level_index) *
            reach[static_cast<std::size_t>(st.level_index)][static_cast<std::size_t>(st.part_index)];
    }
    state_dist_ /= state_dist_.sum();

    // transition law over non-terminal pairs
    double mass_total = 0.0;
    for (int li = 0; li < n_levels; ++li) {
        const auto& level = levels[static_cast<std::size_t>(li)].assembly();
        for (int t = 0; t + 1 < level.n_parts(); ++t) {
            Eigen::Vector2d p = policy(level, t);
            const bool defective = level.parts[static_cast<std::size_t>(t)].defective;
            for (int a = 0; a < 2; ++a) {
                if (p(a) <= 0.0) continue;
                if (defective && a == env::kAccept) continue;  // early termination
                double mass = level_probs_(li) *
                              reach[static_cast<std::size_t>(li)][static_cast<std::size_t>(t)] * p(a);
                transitions_.push_back({state_index[static_cast<std::size_t>(li)][static_cast<std::size_t>(t)],
                                        a,
                                        state_index[static_cast<std::size_t>(li)][static_cast<std::size_t>(t) + 1],
                                        mass});
                mass_total += mass;
            }
        }
    }
    if (mass_total <= 0.0)
        throw std::invalid_argument("EnumeratedAssembly: no non-terminal transitions under policy");
    for (auto& tr : transitions_) tr.mass /= mass_total;

    // distinct observation symbols
    std::map<std::string, int> symbol;
    obs_symbol_.reserve(states_.size());
    for (const auto& st : states_) {
        std::string key(reinterpret_cast<const char*>(st.obs.data()),
                        static_cast<std::size_t>(st.obs.size()) * sizeof(double));
        auto [it, _] = symbol.try_emplace(key, static_cast<int>(symbol.size()));
        obs_symbol_.push_back(it->second);
    }
}

int EnumeratedAssembly::z_of(const ReprFn& repr, int state_index) const {
    const auto& st = states_[static_cast<std::size_t>(state_index)];
    return repr(st.level_index, st.part_index, st.obs);
}

std::map<int, double> EnumeratedAssembly::stationary_z(const ReprFn& repr) const {
    std::map<int, double> mu;
    for (std::size_t s = 0; s < states_.size(); ++s)
        mu[z_of(repr, static_cast<int>(s))] += state_dist_(static_cast<Eigen::Index>(s));
    return mu;
}

std::map<int, std::map<int, double>> EnumeratedAssembly::stationary_z_given_level(
    const ReprFn& repr) const {
    std::map<int, std::map<int, double>> mu;
    std::map<int, double> level_mass;
    for (std::size_t s = 0; s < states_.size(); ++s) {
        const auto& st = states_[s];
        mu[st.context_id][z_of(repr, static_cast<int>(s))] += state_dist_(static_cast<Eigen::Index>(s));
        level_mass[st.context_id] += state_dist_(static_cast<Eigen::Index>(s));
    }
    for (auto& [c, dist] : mu)
        for (auto& [z, m] : dist) m /= level_mass.at(c);
    return mu;
}

double EnumeratedAssembly::mi_z_level(const ReprFn& repr) const {
    mi::JointBuilder joint;
    for (std::size_t s = 0; s < states_.size(); ++s)
        joint.add(z_of(repr, static_cast<int>(s)), states_[s].context_id,
                  state_dist_(static_cast<Eigen::Index>(s)));
    return mi::exact_mi_discrete(joint.table());
}

double EnumeratedAssembly::mi_obs_level() const {
    mi::JointBuilder joint;
    for (std::size_t s = 0; s < states_.size(); ++s)
        joint.add(obs_symbol_[s], states_[s].context_id, state_dist_(static_cast<Eigen::Index>(s)));
    return mi::exact_mi_discrete(joint.table());
}

double EnumeratedAssembly::mi_xx() const {
    mi::JointBuilder joint;
    for (const auto& tr : transitions_) joint.add(tr.from, tr.to, tr.mass);
    return mi::exact_mi_discrete(joint.table());
}

double EnumeratedAssembly::mi_xx_action() const {
    mi::JointBuilder joint;
    const int n = static_cast<int>(states_.size());
    for (const auto& tr : transitions_) joint.add(tr.from * n + tr.to, tr.action, tr.mass);
    return mi::exact_mi_discrete(joint.table());
}

double EnumeratedAssembly::mi_zz(const ReprFn& repr) const {
    mi::JointBuilder joint;
    for (const auto& tr : transitions_) joint.add(z_of(repr, tr.from), z_of(repr, tr.to), tr.mass);
    return mi::exact_mi_discrete(joint.table());
}

double EnumeratedAssembly::mi_zz_action(const ReprFn& repr) const {
    mi::JointBuilder joint;
    std::map<std::pair<int, int>, int> pair_symbol;
    for (const auto& tr : transitions_) {
        auto key = std::make_pair(z_of(repr, tr.from), z_of(repr, tr.to));
        auto [it, _] = pair_symbol.try_emplace(key, static_cast<int>(pair_symbol.size()));
        joint.add(it->second, tr.action, tr.mass);
    }
    return mi::exact_mi_discrete(joint.table());
}

ReprFn optimal_actor_representation(const std::vector<env::LevelContext>& levels) {
    std::vector<const AssemblyLevel*> ptrs;
    ptrs.reserve(levels.size());
    for (const auto& l : levels) ptrs.push_back(&l.assembly());
    return [ptrs](int level_index, int part_index, const Eigen::VectorXd&) {
        return env::assembly::optimal_action(*ptrs[static_cast<std::size_t>(level_index)],
                                             part_index);
    };
}

CriticRepresentation optimal_critic_representation(const std::vector<env::LevelContext>& levels,
                                                   double gamma, const AssemblyParams& params) {
    // distinct optimal state values across the whole level set, 1e-9 grid
    std::vector<double> classes;
    auto class_of = [&classes](double v) {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (std::abs(classes[i] - v) <= 1e-9) return static_cast<int>(i);
        classes.push_back(v);
        return static_cast<int>(classes.size()) - 1;
    };
    std::vector<std::vector<int>> ids(levels.size());
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const auto& level = levels[li].assembly();
        for (int t = 0; t < level.n_parts(); ++t)
            ids[li].push_back(class_of(env::assembly::optimal_value(level, t, gamma, params)));
    }
    CriticRepresentation out;
    out.class_values = classes;
    out.repr = [ids = std::move(ids)](int level_index, int part_index, const Eigen::VectorXd&) {
        return ids[static_cast<std::size_t>(level_index)][static_cast<std::size_t>(part_index)];
    };
    return out;
}

std::vector<int> value_class_ids(const EnumeratedAssembly& enumeration, double gamma) {
    std::vector<double> classes;
    auto class_of = [&classes](double v) {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (std::abs(classes[i] - v) <= 1e-9) return static_cast<int>(i);
        classes.push_back(v);
        return static_cast<int>(classes.size()) - 1;
    };
    std::vector<int> out;
    out.reserve(enumeration.states().size());
    for (const auto& st : enumeration.states()) {
        const auto& level = enumeration.levels()[static_cast<std::size_t>(st.level_index)].assembly();
        out.push_back(class_of(
            env::assembly::optimal_value(level, st.part_index, gamma, enumeration.params())));
    }
    return out;
}

}  // namespace replab::theory
