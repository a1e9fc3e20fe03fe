#include "replab/env/level_set.hpp"

#include <stdexcept>

namespace replab::env {

std::string to_string(EnvKind kind) {
    return kind == EnvKind::Assembly ? "assembly" : "gridworld";
}

EnvKind env_kind_from_string(const std::string& s) {
    if (s == "assembly") return EnvKind::Assembly;
    if (s == "gridworld") return EnvKind::Gridworld;
    throw std::invalid_argument("unknown environment kind: " + s);
}

std::vector<LevelContext> sample_assembly_levels(int count, std::uint64_t seed,
                                                 const AssemblyParams& params, int id_base) {
    if (count < 1) throw std::invalid_argument("sample_assembly_levels: count must be >= 1");
    std::vector<LevelContext> levels;
    levels.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        LevelContext ctx;
        ctx.context_id = id_base + i;
        ctx.seed = derive_stream(seed, "level.assembly", static_cast<std::uint64_t>(i));
        Rng rng(ctx.seed);
        ctx.payload = make_assembly_level(rng, params);
        levels.push_back(std::move(ctx));
    }
    return levels;
}

std::vector<LevelContext> sample_gridworld_levels(int count, std::uint64_t seed,
                                                  const GridworldParams& params, int id_base) {
    if (count < 1) throw std::invalid_argument("sample_gridworld_levels: count must be >= 1");
    std::vector<LevelContext> levels;
    levels.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        LevelContext ctx;
        ctx.context_id = id_base + i;
        ctx.seed = derive_stream(seed, "level.gridworld", static_cast<std::uint64_t>(i));
        Rng rng(ctx.seed);
        ctx.payload = make_gridworld_level(rng, params);
        levels.push_back(std::move(ctx));
    }
    return levels;
}

std::vector<LevelContext> make_patterned_assembly_levels(
    const std::vector<std::vector<bool>>& patterns, std::uint64_t seed,
    const AssemblyParams& params, bool share_specs, int id_base) {
    std::vector<LevelContext> levels;
    levels.reserve(patterns.size());
    for (int i = 0; i < static_cast<int>(patterns.size()); ++i) {
        LevelContext ctx;
        ctx.context_id = id_base + i;
        ctx.seed = share_specs ? derive_stream(seed, "level.assembly.shared")
                               : derive_stream(seed, "level.assembly", static_cast<std::uint64_t>(i));
        Rng rng(ctx.seed);
        ctx.payload =
            make_assembly_level_from_pattern(rng, patterns[static_cast<std::size_t>(i)], params);
        levels.push_back(std::move(ctx));
    }
    return levels;
}

LevelSet sample_level_set(EnvKind kind, int train_count, int test_count, std::uint64_t seed,
                          const AssemblyParams& assembly_params,
                          const GridworldParams& grid_params) {
    LevelSet set;
    set.kind = kind;
    const std::uint64_t test_seed = seed + kHeldOutSeedOffset;
    if (kind == EnvKind::Assembly) {
        set.train = sample_assembly_levels(train_count, seed, assembly_params, 0);
        set.test = sample_assembly_levels(test_count, test_seed, assembly_params, kHeldOutIdBase);
    } else {
        set.train = sample_gridworld_levels(train_count, seed, grid_params, 0);
        set.test = sample_gridworld_levels(test_count, test_seed, grid_params, kHeldOutIdBase);
    }
    return set;
}

std::unique_ptr<Env> make_env(EnvKind kind, const AssemblyParams& assembly_params,
                              const GridworldParams& grid_params) {
    if (kind == EnvKind::Assembly) return std::make_unique<AssemblyEnv>(assembly_params);
    return std::make_unique<GridworldEnv>(grid_params);
}

}  // namespace replab::env
