#pragma once

#include <Eigen/Core>
#include <map>
#include <stdexcept>
#include <vector>

namespace replab::mi {

// Plug-in mutual information over a discrete joint probability table, in nats.
// Rows index the first variable, columns the second. Entries must be
// non-negative and sum to 1 within 1e-12; 0*ln(0) is treated as 0.
double exact_mi_discrete(const Eigen::MatrixXd& joint);

// Plug-in entropy of a probability vector, in nats.
double exact_entropy(const Eigen::VectorXd& p);

// Conditional mutual information I(X;Y|L) from per-context joint tables
// p(x,y|l) and the context distribution p(l). All tables share a shape.
double exact_conditional_mi(const std::vector<Eigen::MatrixXd>& joint_given_l,
                            const Eigen::VectorXd& p_l);

// Accumulates a weighted empirical joint over two discrete symbol spaces and
// renders it as a dense table. Symbols are arbitrary ints, mapped to dense
// indices in first-seen order.
class JointBuilder {
public:
    void add(int x, int y, double weight);
    Eigen::MatrixXd table() const;  // normalised
    double total() const { return total_; }
    int x_arity() const { return static_cast<int>(x_index_.size()); }
    int y_arity() const { return static_cast<int>(y_index_.size()); }

private:
    std::map<int, int> x_index_;
    std::map<int, int> y_index_;
    std::map<std::pair<int, int>, double> mass_;
    double total_ = 0.0;
};

}  // namespace replab::mi
