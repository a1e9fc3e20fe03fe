#pragma once

#include <Eigen/Core>

#include "replab/common/rng.hpp"

namespace replab::nn {

// logsumexp-based categorical over logits; never produces non-finite values
// for finite logits.
struct Categorical {
    Eigen::VectorXd logits;

    Eigen::VectorXd log_probs() const;
    Eigen::VectorXd probs() const;
    double log_prob(int action) const { return log_probs()(action); }
    double entropy() const;
    int sample(Rng& rng) const;
};

// row-wise variants used by the batched losses
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits);
Eigen::VectorXd entropy_rows(const Eigen::MatrixXd& logits);

// KL(p || q) from log-probability vectors
double categorical_kl(const Eigen::VectorXd& log_p, const Eigen::VectorXd& log_q);

}  // namespace replab::nn
