#include "replab/env/assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace replab::env {

namespace {

constexpr double kDefectMarginLo = 0.5;
constexpr double kDefectMarginHi = 1.0;

Eigen::VectorXd draw_reference(Rng& rng, int dim) {
    Eigen::VectorXd ref(dim);
    for (int i = 0; i < dim; ++i) ref(i) = rng.uniform(-1.0, 1.0);
    return ref;
}

PartSpec draw_part(Rng& rng, const Eigen::VectorXd& ref, bool defective) {
    PartSpec part;
    part.defective = defective;
    part.features = ref;
    if (defective) {
        for (int i = 0; i < ref.size(); ++i) {
            double magnitude = rng.uniform(kDefectMarginLo, kDefectMarginHi);
            double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            part.features(i) += sign * magnitude;
        }
    }
    return part;
}

}  // namespace

int AssemblyLevel::defect_count() const {
    int n = 0;
    for (const auto& p : parts) n += p.defective ? 1 : 0;
    return n;
}

double AssemblyLevel::defect_rate() const {
    return parts.empty() ? 0.0 : static_cast<double>(defect_count()) / n_parts();
}

double AssemblyParams::max_abs_reward() const {
    return std::max(std::abs(reward_correct), std::abs(reward_mistake));
}

AssemblyLevel make_assembly_level(Rng& rng, const AssemblyParams& params) {
    int n = params.min_parts + rng.randint(params.max_parts - params.min_parts + 1);
    std::vector<bool> pattern(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pattern[static_cast<std::size_t>(i)] = rng.uniform() < params.defect_prob;
    return make_assembly_level_from_pattern(rng, pattern, params);
}

AssemblyLevel make_assembly_level_from_pattern(Rng& rng, const std::vector<bool>& pattern,
                                               const AssemblyParams& params) {
    if (pattern.empty()) throw std::invalid_argument("assembly level needs at least one part");
    if (static_cast<int>(pattern.size()) > params.max_parts)
        throw std::invalid_argument("assembly pattern longer than max_parts");
    AssemblyLevel level;
    level.reference_spec = draw_reference(rng, params.spec_dim);
    level.parts.reserve(pattern.size());
    for (bool defective : pattern) level.parts.push_back(draw_part(rng, level.reference_spec, defective));
    return level;
}

namespace assembly {

Eigen::VectorXd observe(const AssemblyLevel& level, int part_index, const AssemblyParams& params) {
    const int mp = params.max_parts;
    const int sd = params.spec_dim;
    Eigen::VectorXd obs = Eigen::VectorXd::Zero(params.obs_dim());
    if (part_index < 0 || part_index >= level.n_parts())
        throw std::out_of_range("assembly::observe: bad part index");

    obs(part_index) = 1.0;  // one-hot of the part under inspection
    for (int i = part_index; i < level.n_parts(); ++i) {
        obs.segment(mp + i * sd, sd) = level.parts[static_cast<std::size_t>(i)].features;
        obs(mp + mp * sd + i) = 1.0;  // still on the line
    }
    obs.segment(mp * (2 + sd), sd) = level.parts[static_cast<std::size_t>(part_index)].features;
    obs.segment(mp * (2 + sd) + sd, sd) = level.reference_spec;
    return obs;
}

StepResult transition(const AssemblyLevel& level, int part_index, int action,
                      const AssemblyParams& params) {
    if (action != kAccept && action != kReject)
        throw std::invalid_argument("assembly::transition: invalid action");
    const bool defective = level.parts[static_cast<std::size_t>(part_index)].defective;
    StepResult r;
    const bool correct = (action == kReject) == defective;
    r.reward = correct ? params.reward_correct : params.reward_mistake;
    if (defective && action == kAccept) {
        r.done = true;  // accepted a defective part: line stops
        return r;
    }
    if (part_index + 1 >= level.n_parts()) {
        r.done = true;
        return r;
    }
    r.next_part_index = part_index + 1;
    return r;
}

int optimal_action(const AssemblyLevel& level, int part_index) {
    return level.parts[static_cast<std::size_t>(part_index)].defective ? kReject : kAccept;
}

double optimal_value(const AssemblyLevel& level, int part_index, double gamma,
                     const AssemblyParams& params) {
    double v = 0.0;
    for (int i = level.n_parts() - 1; i >= part_index; --i) v = params.reward_correct + gamma * v;
    return v;
}

double optimal_return(const AssemblyLevel& level, double gamma, const AssemblyParams& params) {
    return optimal_value(level, 0, gamma, params);
}

}  // namespace assembly

AssemblyEnv::AssemblyEnv(const AssemblyParams& params) : params_(params) {
    spec_ = CmdpSpec{params.obs_dim(), 2, params.gamma, params.max_parts};
}

Eigen::VectorXd AssemblyEnv::reset(const LevelContext& level) {
    level_ = level.assembly();
    context_id_ = level.context_id;
    part_index_ = 0;
    t_ = 0;
    done_ = false;
    return assembly::observe(level_, part_index_, params_);
}

StepOutcome AssemblyEnv::step(int action) {
    if (done_) throw std::logic_error("AssemblyEnv::step: episode already terminated");
    auto r = assembly::transition(level_, part_index_, action, params_);
    ++t_;
    done_ = r.done;
    StepOutcome out;
    out.reward = r.reward;
    out.done = r.done;
    if (!r.done) {
        part_index_ = r.next_part_index;
        out.obs = assembly::observe(level_, part_index_, params_);
    } else {
        out.obs = Eigen::VectorXd::Zero(spec_.obs_dim);
    }
    return out;
}

std::vector<EnumeratedState> enumerate_states(const AssemblyLevel& level,
                                              const AssemblyParams& params) {
    std::vector<EnumeratedState> states;
    states.reserve(static_cast<std::size_t>(level.n_parts()));
    for (int i = 0; i < level.n_parts(); ++i)
        states.push_back({i, assembly::observe(level, i, params)});
    return states;
}

}  // namespace replab::env
