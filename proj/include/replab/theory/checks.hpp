#pragma once

#include <iosfwd>

#include "replab/agents/rollout.hpp"
#include "replab/theory/enumeration.hpp"

namespace replab::theory {

struct MarkovReport {
    double i_xx_action = 0.0;
    double i_zz_action = 0.0;
    double i_xx = 0.0;
    double i_zz = 0.0;
    double delta_inverse = 0.0;  // I((X,X');A) - I((Z,Z');A)
    double delta_density = 0.0;  // I(X;X') - I(Z;Z')
    double inverse_residual = 0.0;   // max |P(a|z,z') - P(a|x,x')|
    double density_residual = 0.0;   // max |P(x'|z)/P(x') - P(z'|z)/P(z')|
    bool certified = false;          // both deltas <= 1e-9
};

MarkovReport markov_check(const EnumeratedAssembly& enumeration, const ReprFn& repr);

// All 2^n defect assignments of a fixed length, and their Bernoulli weights.
std::vector<std::vector<bool>> all_defect_patterns(int n_parts);
// Every pattern of the given lengths whose defect rate is exactly 1/2.
std::vector<std::vector<bool>> balanced_defect_patterns(const std::vector<int>& lengths);
std::vector<double> bernoulli_weights(const std::vector<std::vector<bool>>& patterns,
                                      double defect_prob);

struct BoundReport {
    double train_return = 0.0;
    double test_return = 0.0;
    double gap = 0.0;
    double mi_za_level = 0.0;  // clamped KNN estimate, nats
    double d_constant = 0.0;
    int train_level_count = 0;
    double bound = 0.0;             // sqrt(2 D^2 / |L| * I)
    double bound_with_slack = 0.0;  // estimator slack added to I before the root
    bool holds = false;             // gap <= bound_with_slack
};

BoundReport generalisation_bound_check(const agents::ActorCriticModel& model,
                                       const env::AssemblyParams& params,
                                       const std::vector<env::LevelContext>& train_levels,
                                       const std::vector<env::LevelContext>& test_levels,
                                       int collection_steps, int analysis_n, int k,
                                       int eval_episodes, std::uint64_t seed,
                                       double slack_nats = 0.05);

struct LemmaReport {
    double heterogeneous_mi = 0.0;  // I(Z*_A;L), defect rates 0.1 vs 0.9
    double homogeneous_mi = 0.0;    // identical levels
    struct FamilyPoint {
        int classes;             // quantisation arity of the value encoding
        double level_specific;   // I(Z;V) - I(Z;V|L)
        double mi_zl;
        double chain_residual;   // |I(Z;L) - (I(Z;V) - I(Z;V|L) + I(Z;L|V))|
    };
    std::vector<FamilyPoint> family;
    double max_chain_residual = 0.0;
    bool monotone = false;        // I(Z;L) never drops when level_specific rises
    double full_context_mi = 0.0; // context id embedded in z
    double level_entropy = 0.0;   // H(L)
};

LemmaReport lemma_checks(std::uint64_t seed);

struct IncompatibilityReport {
    double optimal_return = 0.0;
    double best_measurable_return = 0.0;
    int policies_searched = 0;
    bool strictly_suboptimal = false;  // best measurable < optimal in expectation
    bool dominated_on_mixed_level = false;
};

// Exhaustive search over deterministic policies measurable on Z*_C.
IncompatibilityReport critic_incompatibility_check(const std::vector<env::LevelContext>& levels,
                                                   const std::vector<double>& level_weights,
                                                   double gamma,
                                                   const env::AssemblyParams& params);

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string note;
};

// The full exact-enumeration verification suite (Markov certification,
// stationary distributions, lemma checks, optimal-representation facts).
std::vector<CheckResult> run_verification_suite(std::uint64_t seed);

void write_verification_report(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace replab::theory
