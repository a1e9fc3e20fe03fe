#pragma once

#include <filesystem>

#include "replab/agents/train.hpp"

namespace replab::harness {

enum class SweepAxis { None, ModelWidth, AuxBatchLevels, Coupling };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& s);

// Flat sectioned key-value configuration. Parsing is schema-checked: unknown
// sections or keys reject the file. A run is fully determined by
// (configuration, seed).
struct ExperimentConfig {
    std::string name = "experiment";
    env::EnvKind kind = env::EnvKind::Assembly;
    int train_levels = 200;
    int test_levels = 500;
    std::uint64_t level_seed = 1;
    long long budget = 200'000;

    agents::Algorithm algorithm = agents::Algorithm::PPO;
    agents::Coupling coupling = agents::Coupling::Coupled;

    env::AssemblyParams assembly;
    env::GridworldParams gridworld;
    agents::TrainConfig train;
    std::vector<aux::AttachmentConfig> attachments;

    // analysis protocol
    int collection_steps = 65536;  // 2^16
    int analysis_n = 4096;
    int analysis_k = 3;

    SweepAxis sweep_axis = SweepAxis::None;
    std::vector<double> sweep_values;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// canonical text form: one "section.key=value" line per setting, sorted
std::string canonical_config_text(const ExperimentConfig& config);
void write_config(std::ostream& os, const ExperimentConfig& config);

// SHA-256 hex digest of the canonical text
std::string config_digest(const ExperimentConfig& config);

// "mico:critic:0.5" etc.
aux::AttachmentConfig parse_attachment(const std::string& text,
                                       const std::map<std::string, std::string>& extra_params);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace replab::harness
