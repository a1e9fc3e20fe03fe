#pragma once

#include "replab/harness/config.hpp"
#include "replab/mi/analysis.hpp"
#include "replab/theory/checks.hpp"

namespace replab::harness {

struct RunRecord {
    std::string run_id;
    std::string config_digest;
    std::string label;  // algorithm[:coupling][+attachments], grouping key for tables
    env::EnvKind kind = env::EnvKind::Assembly;
    agents::Algorithm algorithm = agents::Algorithm::PPO;
    agents::Coupling coupling = agents::Coupling::Coupled;
    std::uint64_t seed = 0;
    double sweep_value = std::numeric_limits<double>::quiet_NaN();

    long long env_steps = 0;
    double final_train_return = 0.0;
    double final_test_return = 0.0;
    std::vector<mi::MiReport> mi_reports;  // shared, or actor + critic
    bool has_bound = false;
    theory::BoundReport bound;
    double wall_seconds = 0.0;
};

std::string run_label(const ExperimentConfig& config);

// Trains, measures, writes the run directory (config copy, checkpoints/,
// logs/metrics.jsonl, reports/, record.json) and returns the finalised record.
RunRecord execute_run(const ExperimentConfig& config, std::uint64_t seed,
                      const std::filesystem::path& out_dir, bool with_bound_check = true);

RunRecord load_run_record(const std::filesystem::path& run_dir);
// every record.json below `root`
std::vector<RunRecord> load_run_records(const std::filesystem::path& root);

// One run per (sweep value, seed). Honours the REPLAB_WORKERS environment
// variable; cells are independent, so results do not depend on scheduling.
std::vector<RunRecord> sweep(const ExperimentConfig& config,
                             const std::vector<std::uint64_t>& seeds,
                             const std::filesystem::path& out_dir);

// Applies one sweep-axis value to a copy of the config.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value);

int worker_count_from_env(int cells);

// (config, seed) fan-out used by both `train` and `sweep`
std::vector<RunRecord> run_many(const std::vector<std::pair<ExperimentConfig, std::uint64_t>>& cells,
                                const std::filesystem::path& out_dir, bool with_bound_check = true);

}  // namespace replab::harness
