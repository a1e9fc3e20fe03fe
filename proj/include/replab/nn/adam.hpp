#pragma once

#include "replab/nn/mlp.hpp"

namespace replab::nn {

struct AdamState {
    ParamSet m;  // first moment
    ParamSet v;  // second moment
    long long step = 0;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-5;
    double max_grad_norm = 0.5;  // <= 0 disables clipping
};

AdamState make_adam_state(const ParamSet& shape, double lr = 5e-4, double eps = 1e-5,
                          double max_grad_norm = 0.5);

// Standard Adam with bias correction. Gradients are clipped to
// max_grad_norm (global L2 norm across the set) before the update.
// Non-finite gradients abort the run.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

// Several parameter sets updated as one optimiser: a shared step counter and
// a gradient-norm clip computed across the whole group.
class GroupAdam {
public:
    struct Member {
        ParamSet* params;
        ParamSet* grads;
    };

    GroupAdam() = default;
    GroupAdam(std::vector<Member> members, double lr, double eps, double max_grad_norm);

    // clips, updates every member, then zeroes the gradient buffers
    void step();
    long long step_count() const { return step_; }

private:
    std::vector<Member> members_;
    std::vector<ParamSet> m_;
    std::vector<ParamSet> v_;
    long long step_ = 0;
    double lr_ = 5e-4;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-5;
    double max_grad_norm_ = 0.5;
};

}  // namespace replab::nn
