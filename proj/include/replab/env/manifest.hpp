#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "replab/env/level_set.hpp"

namespace replab::env {

// Hex SHA-256 of the canonical payload bytes; stable across platforms.
std::string payload_digest(const LevelContext& level);

// Versioned text manifest (context_id, seed, payload digest) that makes a
// level set replayable: loading regenerates each payload from its seed and
// verifies the digest.
void write_manifest(std::ostream& os, EnvKind kind, const std::vector<LevelContext>& levels,
                    const AssemblyParams& assembly_params, const GridworldParams& grid_params);

std::vector<LevelContext> read_manifest(std::istream& is, EnvKind& kind,
                                        AssemblyParams& assembly_params,
                                        GridworldParams& grid_params);

void save_manifest_file(const std::string& path, EnvKind kind,
                        const std::vector<LevelContext>& levels,
                        const AssemblyParams& assembly_params, const GridworldParams& grid_params);
std::vector<LevelContext> load_manifest_file(const std::string& path, EnvKind& kind,
                                             AssemblyParams& assembly_params,
                                             GridworldParams& grid_params);

}  // namespace replab::env
