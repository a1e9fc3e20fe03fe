#pragma once

#include <functional>
#include <map>

#include "replab/env/assembly.hpp"
#include "replab/mi/exact.hpp"

namespace replab::theory {

// Exact action probabilities for an enumerated assembly state.
using PolicyFn =
    std::function<Eigen::Vector2d(const env::AssemblyLevel& level, int part_index)>;

PolicyFn optimal_policy();
PolicyFn uniform_policy();
// (1 - eps) * optimal + eps * uniform
PolicyFn mixture_policy(double eps);

// A discrete representation over enumerated states.
using ReprFn = std::function<int(int level_index, int part_index, const Eigen::VectorXd& obs)>;

ReprFn injective_representation();
ReprFn constant_representation();

// Exact enumeration of the level set under a policy: full-episode visitation
// weights for every non-terminal state, and the transition law restricted to
// pairs of non-terminal states (the same restriction the sampling protocol
// applies).
class EnumeratedAssembly {
public:
    struct State {
        int level_index;
        int context_id;
        int part_index;
        Eigen::VectorXd obs;
    };

    EnumeratedAssembly(const std::vector<env::LevelContext>& levels,
                       const env::AssemblyParams& params, const PolicyFn& policy,
                       const std::vector<double>& level_weights = {});

    const std::vector<State>& states() const { return states_; }
    const env::AssemblyParams& params() const { return params_; }
    const std::vector<env::LevelContext>& levels() const { return *levels_; }

    // stationary visitation distribution mu(x) over non-terminal states
    const Eigen::VectorXd& state_dist() const { return state_dist_; }
    // P(c) after normalisation
    const Eigen::VectorXd& level_probs() const { return level_probs_; }

    struct Transition {
        int from;
        int action;
        int to;
        double mass;  // normalised over all recorded transitions
    };
    const std::vector<Transition>& transitions() const { return transitions_; }

    // stationary latent distribution and its per-level conditionals (Eq.-7 style)
    std::map<int, double> stationary_z(const ReprFn& repr) const;
    std::map<int, std::map<int, double>> stationary_z_given_level(const ReprFn& repr) const;

    // exact plug-in quantities over the stationary distribution
    double mi_z_level(const ReprFn& repr) const;
    double mi_obs_level() const;  // distinct observation vectors as symbols

    // exact plug-in quantities over the transition law
    double mi_xx() const;
    double mi_xx_action() const;
    double mi_zz(const ReprFn& repr) const;
    double mi_zz_action(const ReprFn& repr) const;

    int z_of(const ReprFn& repr, int state_index) const;

private:
    const std::vector<env::LevelContext>* levels_;
    env::AssemblyParams params_;
    std::vector<State> states_;
    Eigen::VectorXd state_dist_;
    Eigen::VectorXd level_probs_;
    std::vector<Transition> transitions_;
    std::vector<int> obs_symbol_;  // distinct observation id per state
};

// phi*_A: one latent per optimal action
ReprFn optimal_actor_representation(const std::vector<env::LevelContext>& levels);

// phi*_C: one latent per distinct optimal state value (1e-9 rounding)
struct CriticRepresentation {
    ReprFn repr;
    std::vector<double> class_values;  // latent id -> V*
};
CriticRepresentation optimal_critic_representation(const std::vector<env::LevelContext>& levels,
                                                   double gamma,
                                                   const env::AssemblyParams& params);

// optimal state value class id per state (used as the discrete V variable)
std::vector<int> value_class_ids(const EnumeratedAssembly& enumeration, double gamma);

}  // namespace replab::theory
