#include "replab/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace replab::nn {

AdamState make_adam_state(const ParamSet& shape, double lr, double eps, double max_grad_norm) {
    AdamState s;
    s.m = zeros_like(shape);
    s.v = zeros_like(shape);
    s.lr = lr;
    s.eps = eps;
    s.max_grad_norm = max_grad_norm;
    return s;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
    if (!params.same_shape(grads) || !params.same_shape(state.m))
        throw std::invalid_argument("adam_step: shape mismatch");
    if (!grads.all_finite()) throw std::runtime_error("adam_step: non-finite gradient");

    double scale = 1.0;
    if (state.max_grad_norm > 0.0) {
        double norm = grads.global_norm();
        if (norm > state.max_grad_norm) scale = state.max_grad_norm / norm;
    }

    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.params.size(); ++i) {
        const auto g = (scale * grads.params[i].value).eval();
        auto& m = state.m.params[i].value;
        auto& v = state.v.params[i].value;
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
        const auto m_hat = (m / bc1).eval();
        const auto v_hat = (v / bc2).eval();
        params.params[i].value -=
            state.lr * m_hat.cwiseQuotient(v_hat.cwiseSqrt().array().matrix() +
                                           Eigen::MatrixXd::Constant(v_hat.rows(), v_hat.cols(),
                                                                     state.eps));
    }
}

GroupAdam::GroupAdam(std::vector<Member> members, double lr, double eps, double max_grad_norm)
    : members_(std::move(members)), lr_(lr), eps_(eps), max_grad_norm_(max_grad_norm) {
    for (const auto& member : members_) {
        m_.push_back(zeros_like(*member.params));
        v_.push_back(zeros_like(*member.params));
    }
}

void GroupAdam::step() {
    double sq_norm = 0.0;
    for (const auto& member : members_) {
        if (!member.grads->all_finite()) throw std::runtime_error("GroupAdam: non-finite gradient");
        double n = member.grads->global_norm();
        sq_norm += n * n;
    }
    double scale = 1.0;
    if (max_grad_norm_ > 0.0) {
        double norm = std::sqrt(sq_norm);
        if (norm > max_grad_norm_) scale = max_grad_norm_ / norm;
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t k = 0; k < members_.size(); ++k) {
        auto& params = *members_[k].params;
        auto& grads = *members_[k].grads;
        for (std::size_t i = 0; i < params.params.size(); ++i) {
            const auto g = (scale * grads.params[i].value).eval();
            auto& m = m_[k].params[i].value;
            auto& v = v_[k].params[i].value;
            m = beta1_ * m + (1.0 - beta1_) * g;
            v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
            params.params[i].value -=
                lr_ * (m / bc1).cwiseQuotient((v / bc2).cwiseSqrt().array().matrix() +
                                              Eigen::MatrixXd::Constant(v.rows(), v.cols(), eps_));
        }
        grads.set_zero();
    }
}

}  // namespace replab::nn
