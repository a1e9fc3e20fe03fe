#include "replab/nn/mlp.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

namespace replab::nn {

Param& ParamSet::at(const std::string& name) {
    for (auto& p : params)
        if (p.name == name) return p;
    throw std::out_of_range("ParamSet: no parameter named " + name);
}

const Param& ParamSet::at(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return p;
    throw std::out_of_range("ParamSet: no parameter named " + name);
}

bool ParamSet::has(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return true;
    return false;
}

std::size_t ParamSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += static_cast<std::size_t>(p.value.size());
    return n;
}

bool ParamSet::all_finite() const {
    for (const auto& p : params)
        if (!p.value.allFinite()) return false;
    return true;
}

bool ParamSet::same_shape(const ParamSet& other) const {
    if (params.size() != other.params.size()) return false;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != other.params[i].name) return false;
        if (params[i].value.rows() != other.params[i].value.rows()) return false;
        if (params[i].value.cols() != other.params[i].value.cols()) return false;
    }
    return true;
}

void ParamSet::set_zero() {
    for (auto& p : params) p.value.setZero();
}

void ParamSet::add_scaled(const ParamSet& other, double scale) {
    if (!same_shape(other)) throw std::invalid_argument("ParamSet::add_scaled: shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value += scale * other.params[i].value;
}

double ParamSet::global_norm() const {
    double sq = 0.0;
    for (const auto& p : params) sq += p.value.squaredNorm();
    return std::sqrt(sq);
}

ParamSet zeros_like(const ParamSet& shape) {
    ParamSet out;
    out.params.reserve(shape.params.size());
    for (const auto& p : shape.params)
        out.params.push_back({p.name, Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols())});
    return out;
}

Eigen::MatrixXd orthogonal_init(Rng& rng, int rows, int cols, double gain) {
    const int n = std::max(rows, cols);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // sign fix so the decomposition is unique
    for (int i = 0; i < n; ++i)
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    return gain * q.topLeftCorner(rows, cols);
}

Mlp::Mlp(std::vector<int> dims, bool activate_output, std::string name_prefix)
    : dims_(std::move(dims)), activate_output_(activate_output), prefix_(std::move(name_prefix)) {
    if (dims_.size() < 2) throw std::invalid_argument("Mlp: need at least one layer");
    for (int l = 0; l + 1 < static_cast<int>(dims_.size()); ++l) {
        params_.params.push_back({prefix_ + ".W" + std::to_string(l),
                                  Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l])});
        params_.params.push_back(
            {prefix_ + ".b" + std::to_string(l), Eigen::MatrixXd::Zero(dims_[l + 1], 1)});
    }
}

void Mlp::init(Rng& rng, double hidden_gain, double output_gain) {
    const int layers = layer_count();
    for (int l = 0; l < layers; ++l) {
        double gain = l + 1 == layers ? output_gain : hidden_gain;
        params_.params[static_cast<std::size_t>(2 * l)].value =
            orthogonal_init(rng, dims_[l + 1], dims_[l], gain);
        params_.params[static_cast<std::size_t>(2 * l + 1)].value.setZero();
    }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape* tape) const {
    if (x.cols() != dims_.front()) throw std::invalid_argument("Mlp::forward: input width mismatch");
    if (tape) {
        tape->input = x;
        tape->post.clear();
        tape->post.reserve(static_cast<std::size_t>(layer_count()));
    }
    Eigen::MatrixXd h = x;
    const int layers = layer_count();
    for (int l = 0; l < layers; ++l) {
        const auto& w = params_.params[static_cast<std::size_t>(2 * l)].value;
        const auto& b = params_.params[static_cast<std::size_t>(2 * l + 1)].value;
        h = (h * w.transpose()).rowwise() + b.col(0).transpose();
        if (l + 1 < layers || activate_output_) h = h.array().tanh();
        if (tape) tape->post.push_back(h);
    }
    return h;
}

Eigen::VectorXd Mlp::forward1(const Eigen::VectorXd& x) const {
    return forward(x.transpose()).row(0).transpose();
}

Eigen::MatrixXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& dy, ParamSet& grads) const {
    const int layers = layer_count();
    if (static_cast<int>(tape.post.size()) != layers)
        throw std::invalid_argument("Mlp::backward: tape does not match network");
    Eigen::MatrixXd delta = dy;
    for (int l = layers - 1; l >= 0; --l) {
        const bool activated = (l + 1 < layers) || activate_output_;
        if (activated) {
            const auto& post = tape.post[static_cast<std::size_t>(l)];
            delta = delta.cwiseProduct((1.0 - post.array().square()).matrix());
        }
        const Eigen::MatrixXd& input = l == 0 ? tape.input : tape.post[static_cast<std::size_t>(l - 1)];
        grads.at(prefix_ + ".W" + std::to_string(l)).value += delta.transpose() * input;
        grads.at(prefix_ + ".b" + std::to_string(l)).value += delta.colwise().sum().transpose();
        if (l > 0) delta = delta * params_.params[static_cast<std::size_t>(2 * l)].value;
    }
    return delta * params_.params[0].value;
}

}  // namespace replab::nn
