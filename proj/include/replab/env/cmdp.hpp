#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace replab::env {

enum class EnvKind { Assembly, Gridworld };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& s);

struct CmdpSpec {
    int obs_dim = 0;
    int n_actions = 0;
    double gamma = 1.0;
    int max_episode_len = 0;
};

struct PartSpec {
    Eigen::VectorXd features;
    bool defective = false;
};

// One assembly-line instance: an ordered part list, each part either matching
// the level's reference specification or perturbed away from it.
struct AssemblyLevel {
    Eigen::VectorXd reference_spec;
    std::vector<PartSpec> parts;

    int n_parts() const { return static_cast<int>(parts.size()); }
    int defect_count() const;
    double defect_rate() const;
};

struct GridworldLevel {
    int size = 0;
    std::vector<std::uint8_t> walls;  // row-major, 1 = wall
    int start_r = 0, start_c = 0;
    int goal_r = 0, goal_c = 0;
    Eigen::VectorXd texture;

    bool wall_at(int r, int c) const {
        if (r < 0 || c < 0 || r >= size || c >= size) return true;
        return walls[static_cast<std::size_t>(r * size + c)] != 0;
    }
};

struct LevelContext {
    int context_id = 0;
    std::uint64_t seed = 0;
    std::variant<AssemblyLevel, GridworldLevel> payload;

    const AssemblyLevel& assembly() const { return std::get<AssemblyLevel>(payload); }
    const GridworldLevel& gridworld() const { return std::get<GridworldLevel>(payload); }
};

struct Transition {
    Eigen::VectorXd obs;
    int action = 0;
    double reward = 0.0;
    Eigen::VectorXd next_obs;
    bool done = false;
    int context_id = 0;
    int t = 0;
};

struct StepOutcome {
    double reward = 0.0;
    bool done = false;
    Eigen::VectorXd obs;
};

// A single environment instance. Instances own their episode state and share
// nothing, so independent instances can be stepped concurrently.
class Env {
public:
    virtual ~Env() = default;
    virtual const CmdpSpec& spec() const = 0;
    virtual Eigen::VectorXd reset(const LevelContext& level) = 0;
    // pre: !done(). Stepping a finished episode is a contract violation.
    virtual StepOutcome step(int action) = 0;
    virtual bool done() const = 0;
    virtual int step_index() const = 0;
    virtual int context_id() const = 0;
};

// D such that |V^pi(x)| <= D/2 for every state and policy.
inline double reward_bound_D(double max_abs_reward, int max_episode_len) {
    return 2.0 * max_abs_reward * max_episode_len;
}

}  // namespace replab::env
