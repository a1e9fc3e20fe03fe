#pragma once

#include <memory>
#include <vector>

#include "replab/env/assembly.hpp"
#include "replab/env/gridworld.hpp"

namespace replab::env {

// Test levels come from a seed stream offset by this constant from the
// training stream, giving reproducible disjoint splits.
inline constexpr std::uint64_t kHeldOutSeedOffset = 0x5DEECE66DULL;
inline constexpr int kHeldOutIdBase = 1'000'000;

std::vector<LevelContext> sample_assembly_levels(int count, std::uint64_t seed,
                                                 const AssemblyParams& params, int id_base = 0);
std::vector<LevelContext> sample_gridworld_levels(int count, std::uint64_t seed,
                                                  const GridworldParams& params, int id_base = 0);

// Explicitly patterned assembly levels for the enumeration checks. One level
// per pattern; share_specs draws every level's reference/part specs from the
// same stream so payloads only differ through their defect patterns.
std::vector<LevelContext> make_patterned_assembly_levels(
    const std::vector<std::vector<bool>>& patterns, std::uint64_t seed,
    const AssemblyParams& params, bool share_specs = false, int id_base = 0);

struct LevelSet {
    EnvKind kind = EnvKind::Assembly;
    std::vector<LevelContext> train;
    std::vector<LevelContext> test;
};

// Train split from `seed`, held-out split from the offset stream.
LevelSet sample_level_set(EnvKind kind, int train_count, int test_count, std::uint64_t seed,
                          const AssemblyParams& assembly_params, const GridworldParams& grid_params);

std::unique_ptr<Env> make_env(EnvKind kind, const AssemblyParams& assembly_params,
                              const GridworldParams& grid_params);

}  // namespace replab::env
