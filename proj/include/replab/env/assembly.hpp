#pragma once

#include <memory>
#include <vector>

#include "replab/common/rng.hpp"
#include "replab/env/cmdp.hpp"

namespace replab::env {

struct AssemblyParams {
    int min_parts = 2;
    int max_parts = 8;
    double defect_prob = 0.3;
    int spec_dim = 4;
    double reward_correct = 1.0;   // r+
    double reward_mistake = -1.0;  // r-
    double gamma = 0.999;

    int obs_dim() const { return max_parts * (2 + spec_dim) + 2 * spec_dim; }
    double max_abs_reward() const;
};

inline constexpr int kAccept = 0;
inline constexpr int kReject = 1;

// Level construction. Defect flags are Bernoulli(defect_prob); a defective
// part's spec is the reference spec perturbed by at least a fixed margin in
// every coordinate, so the optimal action is readable from the observation.
AssemblyLevel make_assembly_level(Rng& rng, const AssemblyParams& params);
// Same spec-drawing scheme but with the defect pattern imposed; used by the
// enumeration checks that need exact control over defect statistics.
AssemblyLevel make_assembly_level_from_pattern(Rng& rng, const std::vector<bool>& pattern,
                                               const AssemblyParams& params);

namespace assembly {

// Observation layout: [one-hot of current part | per-part specs, zeroed once
// off the line | on-line mask | current part spec | reference spec]. Parts
// already inspected leave the line.
Eigen::VectorXd observe(const AssemblyLevel& level, int part_index, const AssemblyParams& params);

struct StepResult {
    double reward = 0.0;
    bool done = false;
    int next_part_index = 0;  // meaningful only when !done
};

// accept on good / reject on defective earns r+; the converse earns r-;
// accepting a defective part ends the episode immediately.
StepResult transition(const AssemblyLevel& level, int part_index, int action,
                      const AssemblyParams& params);

int optimal_action(const AssemblyLevel& level, int part_index);

// Backward induction: V*(x) = r+ + gamma * V*(next), terminal value 0.
double optimal_value(const AssemblyLevel& level, int part_index, double gamma,
                     const AssemblyParams& params);

// Expected optimal return of a level from its initial state.
double optimal_return(const AssemblyLevel& level, double gamma, const AssemblyParams& params);

}  // namespace assembly

class AssemblyEnv final : public Env {
public:
    explicit AssemblyEnv(const AssemblyParams& params);

    const CmdpSpec& spec() const override { return spec_; }
    Eigen::VectorXd reset(const LevelContext& level) override;
    StepOutcome step(int action) override;
    bool done() const override { return done_; }
    int step_index() const override { return t_; }
    int context_id() const override { return context_id_; }

    int part_index() const { return part_index_; }
    const AssemblyParams& params() const { return params_; }

private:
    AssemblyParams params_;
    CmdpSpec spec_;
    AssemblyLevel level_;
    int context_id_ = -1;
    int part_index_ = 0;
    int t_ = 0;
    bool done_ = true;
};

// Complete reachable non-terminal state set of a level: one state per part
// index. Observation included per state.
struct EnumeratedState {
    int part_index = 0;
    Eigen::VectorXd obs;
};
std::vector<EnumeratedState> enumerate_states(const AssemblyLevel& level,
                                              const AssemblyParams& params);

}  // namespace replab::env
