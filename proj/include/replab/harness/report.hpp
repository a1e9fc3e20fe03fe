#pragma once

#include "replab/harness/run.hpp"
#include "replab/harness/stats.hpp"

namespace replab::harness {

struct ScoreRow {
    std::string label;
    int seeds = 0;
    double train_mean = 0.0;
    double test_mean = 0.0;
    double train_norm = 0.0;  // divided by the PPO-coupled baseline mean
    double test_norm = 0.0;
    double train_ci = 0.0;  // 95% half-width, NaN for a single seed
    double test_ci = 0.0;
    WelchResult train_welch;  // vs. baseline
    WelchResult test_welch;
    bool is_baseline = false;
};

struct ScoreTable {
    std::string baseline_label;
    std::vector<ScoreRow> rows;
};

// Groups records by label; scores are normalised by the PPO-coupled baseline
// mean. Throws when the records mix environments or no baseline is present.
ScoreTable build_score_table(const std::vector<RunRecord>& records);

void write_score_table(std::ostream& os, const ScoreTable& table);
void write_score_csv(std::ostream& os, const ScoreTable& table);

// metric, representation, mean, 95% CI half-width over seeds, one row per
// (label, representation, metric); plot-ready
void write_mi_csv(std::ostream& os, const std::vector<RunRecord>& records);

// I(Z_A;L) / I(Z_A;V) against the swept axis value (auxiliary batch levels)
void write_sweep_curve_csv(std::ostream& os, const std::vector<RunRecord>& records);

void emit_report(const std::vector<RunRecord>& records, const std::filesystem::path& out_dir);

}  // namespace replab::harness
