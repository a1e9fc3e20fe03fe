#include "replab/mi/exact.hpp"

#include <cmath>

namespace replab::mi {

double exact_mi_discrete(const Eigen::MatrixXd& joint) {
    if ((joint.array() < 0.0).any())
        throw std::invalid_argument("exact_mi_discrete: negative entry in joint table");
    double total = joint.sum();
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("exact_mi_discrete: joint table does not sum to 1");

    Eigen::VectorXd px = joint.rowwise().sum();
    Eigen::VectorXd py = joint.colwise().sum();
    double mi = 0.0;
    for (Eigen::Index i = 0; i < joint.rows(); ++i) {
        for (Eigen::Index j = 0; j < joint.cols(); ++j) {
            double p = joint(i, j);
            if (p > 0.0) mi += p * std::log(p / (px(i) * py(j)));
        }
    }
    return mi;
}

double exact_entropy(const Eigen::VectorXd& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) h -= p(i) * std::log(p(i));
    }
    return h;
}

double exact_conditional_mi(const std::vector<Eigen::MatrixXd>& joint_given_l,
                            const Eigen::VectorXd& p_l) {
    if (static_cast<Eigen::Index>(joint_given_l.size()) != p_l.size())
        throw std::invalid_argument("exact_conditional_mi: table count mismatch");
    double cmi = 0.0;
    for (Eigen::Index l = 0; l < p_l.size(); ++l) {
        if (p_l(l) <= 0.0) continue;
        cmi += p_l(l) * exact_mi_discrete(joint_given_l[static_cast<std::size_t>(l)]);
    }
    return cmi;
}

void JointBuilder::add(int x, int y, double weight) {
    if (weight < 0.0) throw std::invalid_argument("JointBuilder: negative weight");
    if (weight == 0.0) return;
    x_index_.try_emplace(x, static_cast<int>(x_index_.size()));
    y_index_.try_emplace(y, static_cast<int>(y_index_.size()));
    mass_[{x_index_.at(x), y_index_.at(y)}] += weight;
    total_ += weight;
}

Eigen::MatrixXd JointBuilder::table() const {
    if (total_ <= 0.0) throw std::logic_error("JointBuilder: empty joint");
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(x_arity(), y_arity());
    for (const auto& [key, w] : mass_) t(key.first, key.second) = w / total_;
    return t;
}

}  // namespace replab::mi
