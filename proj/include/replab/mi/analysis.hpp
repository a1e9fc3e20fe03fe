#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "replab/mi/knn.hpp"

namespace replab::mi {

// One completed (or truncated) episode as recorded by a collection loop.
// obs/actions/rewards are aligned per timestep; obs has one entry per step.
struct EpisodeTrace {
    int context_id = 0;
    std::vector<Eigen::VectorXd> obs;
    std::vector<int> actions;
    std::vector<double> rewards;
    bool terminated = false;
};

// Aligned analysis arrays (a, o, o', z, z', v, c) built from collected
// trajectories. Rows correspond to even, non-terminal timesteps of
// terminated episodes; o' is always the following (odd) timestep of the
// same episode.
struct AnalysisSample {
    Eigen::MatrixXd obs;       // n x obs_dim
    Eigen::MatrixXd next_obs;  // n x obs_dim
    Eigen::MatrixXd z;         // n x z_dim
    Eigen::MatrixXd z_next;    // n x z_dim
    Eigen::VectorXd value;     // discounted return-to-go, raw rewards
    std::vector<int> action;
    std::vector<int> context;

    int n = 0;
    int collection_steps = 0;
    std::string policy_id;
    std::string level_set_id;
};

using RepresentationFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Applies the three exclusion rules, computes return-to-go, then samples n
// records uniformly without replacement. Throws std::runtime_error with the
// deficit when fewer than n usable timesteps remain.
AnalysisSample build_analysis_sample(const std::vector<EpisodeTrace>& episodes,
                                     const RepresentationFn& phi, double gamma, int n,
                                     std::uint64_t seed);

// Number of records the exclusion rules would keep; exposed for tests and
// for sizing collection runs.
int count_usable_timesteps(const std::vector<EpisodeTrace>& episodes);

struct MetricSet {
    MiEstimate level;      // I(.;L)
    MiEstimate value;      // I(.;V)
    MiEstimate action;     // I((.,.');A)
    MiEstimate next;       // I(.;.')
};

struct MiReport {
    std::string representation;
    MetricSet z;
    MetricSet obs;
    // min(I(Z;.)/I(O;.), 1) per metric; unset when I(O;.) <= 0
    std::optional<double> compression_level;
    std::optional<double> compression_value;
    std::optional<double> compression_action;
    std::optional<double> compression_next;
    int k = 0;
    int n = 0;
};

// Eq-style clamped ratio. Throws std::domain_error when i_o is not positive.
double compression_efficiency(const MiEstimate& i_z, const MiEstimate& i_o);

// The four metrics on Z plus the I(O;.) baselines and compression figures.
MiReport compute_metric_suite(const AnalysisSample& sample, const std::string& representation,
                              int k = 3, std::uint64_t jitter_seed = 0);

// One record per metric: tag, representation, clamped value, raw value, k, n,
// clamped flag. Plain text, parseable by the report generator.
void write_report(std::ostream& os, const MiReport& report);
MiReport read_report(std::istream& is);

}  // namespace replab::mi
