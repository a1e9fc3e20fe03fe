#pragma once

#include "replab/common/rng.hpp"
#include "replab/env/cmdp.hpp"

namespace replab::env {

struct GridworldParams {
    int size = 7;
    int view = 5;  // odd; egocentric window edge
    int texture_dim = 8;
    double wall_prob = 0.18;
    int max_steps = 64;
    int n_actions = 5;  // up, down, left, right, then no-op padding
    double goal_reward = 1.0;
    double gamma = 0.999;

    int obs_dim() const { return view * view + 2 + texture_dim; }
};

// Procedural room: random interior walls resampled until start and goal
// connect, plus an 8-dim texture vector that identifies the level.
GridworldLevel make_gridworld_level(Rng& rng, const GridworldParams& params);

class GridworldEnv final : public Env {
public:
    explicit GridworldEnv(const GridworldParams& params);

    const CmdpSpec& spec() const override { return spec_; }
    Eigen::VectorXd reset(const LevelContext& level) override;
    StepOutcome step(int action) override;
    bool done() const override { return done_; }
    int step_index() const override { return t_; }
    int context_id() const override { return context_id_; }

    int agent_r() const { return r_; }
    int agent_c() const { return c_; }
    const GridworldParams& params() const { return params_; }

private:
    Eigen::VectorXd observe() const;

    GridworldParams params_;
    CmdpSpec spec_;
    GridworldLevel level_;
    int context_id_ = -1;
    int r_ = 0, c_ = 0;
    int t_ = 0;
    bool done_ = true;
};

}  // namespace replab::env
