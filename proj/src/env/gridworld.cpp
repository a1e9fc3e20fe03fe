#include "replab/env/gridworld.hpp"

#include <deque>
#include <stdexcept>

namespace replab::env {

namespace {

bool connected(const GridworldLevel& level) {
    std::vector<std::uint8_t> seen(level.walls.size(), 0);
    std::deque<std::pair<int, int>> queue{{level.start_r, level.start_c}};
    seen[static_cast<std::size_t>(level.start_r * level.size + level.start_c)] = 1;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    while (!queue.empty()) {
        auto [r, c] = queue.front();
        queue.pop_front();
        if (r == level.goal_r && c == level.goal_c) return true;
        for (int d = 0; d < 4; ++d) {
            int nr = r + dr[d], nc = c + dc[d];
            if (level.wall_at(nr, nc)) continue;
            auto idx = static_cast<std::size_t>(nr * level.size + nc);
            if (!seen[idx]) {
                seen[idx] = 1;
                queue.emplace_back(nr, nc);
            }
        }
    }
    return false;
}

}  // namespace

GridworldLevel make_gridworld_level(Rng& rng, const GridworldParams& params) {
    GridworldLevel level;
    level.size = params.size;
    level.texture.resize(params.texture_dim);
    for (int i = 0; i < params.texture_dim; ++i) level.texture(i) = rng.uniform(-1.0, 1.0);

    const int cells = params.size * params.size;
    while (true) {
        level.walls.assign(static_cast<std::size_t>(cells), 0);
        for (int i = 0; i < cells; ++i)
            if (rng.uniform() < params.wall_prob) level.walls[static_cast<std::size_t>(i)] = 1;
        std::vector<int> free_cells;
        for (int i = 0; i < cells; ++i)
            if (!level.walls[static_cast<std::size_t>(i)]) free_cells.push_back(i);
        if (free_cells.size() < 2) continue;
        int s = free_cells[static_cast<std::size_t>(rng.randint(static_cast<int>(free_cells.size())))];
        int g = s;
        while (g == s)
            g = free_cells[static_cast<std::size_t>(rng.randint(static_cast<int>(free_cells.size())))];
        level.start_r = s / params.size;
        level.start_c = s % params.size;
        level.goal_r = g / params.size;
        level.goal_c = g % params.size;
        if (connected(level)) return level;
    }
}

GridworldEnv::GridworldEnv(const GridworldParams& params) : params_(params) {
    if (params.view % 2 == 0) throw std::invalid_argument("GridworldParams: view must be odd");
    spec_ = CmdpSpec{params.obs_dim(), params.n_actions, params.gamma, params.max_steps};
}

Eigen::VectorXd GridworldEnv::reset(const LevelContext& level) {
    level_ = level.gridworld();
    context_id_ = level.context_id;
    r_ = level_.start_r;
    c_ = level_.start_c;
    t_ = 0;
    done_ = false;
    return observe();
}

Eigen::VectorXd GridworldEnv::observe() const {
    Eigen::VectorXd obs(spec_.obs_dim);
    const int half = params_.view / 2;
    int idx = 0;
    for (int dr = -half; dr <= half; ++dr)
        for (int dc = -half; dc <= half; ++dc)
            obs(idx++) = level_.wall_at(r_ + dr, c_ + dc) ? 1.0 : 0.0;
    obs(idx++) = static_cast<double>(level_.goal_r - r_) / params_.size;
    obs(idx++) = static_cast<double>(level_.goal_c - c_) / params_.size;
    obs.segment(idx, params_.texture_dim) = level_.texture;
    return obs;
}

StepOutcome GridworldEnv::step(int action) {
    if (done_) throw std::logic_error("GridworldEnv::step: episode already terminated");
    if (action < 0 || action >= params_.n_actions)
        throw std::invalid_argument("GridworldEnv::step: invalid action");
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    if (action < 4) {
        int nr = r_ + dr[action], nc = c_ + dc[action];
        if (!level_.wall_at(nr, nc)) {
            r_ = nr;
            c_ = nc;
        }
    }
    ++t_;
    StepOutcome out;
    if (r_ == level_.goal_r && c_ == level_.goal_c) {
        out.reward = params_.goal_reward;
        out.done = true;
    } else {
        out.reward = 0.0;
        out.done = t_ >= params_.max_steps;
    }
    done_ = out.done;
    out.obs = observe();
    return out;
}

}  // namespace replab::env
