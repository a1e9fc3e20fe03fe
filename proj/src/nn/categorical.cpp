#include "replab/nn/categorical.hpp"

#include <cmath>
#include <stdexcept>

namespace replab::nn {

namespace {

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    return logits.array() - lse;
}

}  // namespace

Eigen::VectorXd Categorical::log_probs() const {
    if (!logits.allFinite()) throw std::invalid_argument("Categorical: non-finite logits");
    return log_softmax(logits);
}

Eigen::VectorXd Categorical::probs() const { return log_probs().array().exp(); }

double Categorical::entropy() const {
    Eigen::VectorXd lp = log_probs();
    Eigen::VectorXd p = lp.array().exp();
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) h -= p(i) * lp(i);
    return h;
}

int Categorical::sample(Rng& rng) const {
    Eigen::VectorXd p = probs();
    double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        acc += p(i);
        if (u < acc) return i;
    }
    return static_cast<int>(p.size()) - 1;
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r)
        out.row(r) = log_softmax(logits.row(r).transpose()).transpose();
    return out;
}

Eigen::VectorXd entropy_rows(const Eigen::MatrixXd& logits) {
    Eigen::VectorXd out(logits.rows());
    for (Eigen::Index r = 0; r < logits.rows(); ++r)
        out(r) = Categorical{logits.row(r).transpose()}.entropy();
    return out;
}

double categorical_kl(const Eigen::VectorXd& log_p, const Eigen::VectorXd& log_q) {
    if (log_p.size() != log_q.size()) throw std::invalid_argument("categorical_kl: size mismatch");
    double kl = 0.0;
    for (int i = 0; i < log_p.size(); ++i) {
        double p = std::exp(log_p(i));
        if (p > 0.0) kl += p * (log_p(i) - log_q(i));
    }
    return kl;
}

}  // namespace replab::nn
