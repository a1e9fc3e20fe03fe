#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "replab/common/rng.hpp"

namespace replab::nn {

struct Param {
    std::string name;
    Eigen::MatrixXd value;  // weights: out x in, biases: out x 1
};

// Named parameter list; gradients use the same layout.
struct ParamSet {
    std::vector<Param> params;

    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    bool has(const std::string& name) const;

    std::size_t scalar_count() const;
    bool all_finite() const;
    bool same_shape(const ParamSet& other) const;

    void set_zero();
    // this += scale * other, shape-checked
    void add_scaled(const ParamSet& other, double scale);
    double global_norm() const;
};

ParamSet zeros_like(const ParamSet& shape);

// Dense tanh network. Weight matrices are orthogonally initialised (gain
// sqrt(2) on hidden layers by default); biases start at zero.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<int> dims, bool activate_output, std::string name_prefix);

    void init(Rng& rng, double hidden_gain, double output_gain);

    struct Tape {
        Eigen::MatrixXd input;
        std::vector<Eigen::MatrixXd> post;  // per-layer outputs, activation applied
    };

    // rows are samples; tape (optional) records what backward needs
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape* tape = nullptr) const;
    Eigen::VectorXd forward1(const Eigen::VectorXd& x) const;

    // dy: gradient w.r.t. the forward output. Accumulates parameter gradients
    // into `grads` (layout of params()) and returns the input gradient.
    Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& dy, ParamSet& grads) const;

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    int in_dim() const { return dims_.front(); }
    int out_dim() const { return dims_.back(); }
    int layer_count() const { return static_cast<int>(dims_.size()) - 1; }
    const std::string& prefix() const { return prefix_; }

private:
    std::vector<int> dims_;
    bool activate_output_ = false;
    std::string prefix_;
    ParamSet params_;
};

// gain-scaled orthogonal matrix via QR of a Gaussian draw
Eigen::MatrixXd orthogonal_init(Rng& rng, int rows, int cols, double gain);

}  // namespace replab::nn
