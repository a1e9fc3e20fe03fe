#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace replab::mi {

struct MiEstimate {
    double value = 0.0;  // raw estimate, nats; may be slightly negative
    std::string tag;
    int k = 0;
    int n = 0;
    int reduced_k_count = 0;  // samples whose neighbourhood had to shrink (mixed estimator)
    int dropped_singletons = 0;

    double clamped() const { return value < 0.0 ? 0.0 : value; }
};

// KNN mutual information between two continuous blocks (Kraskov variant 1):
//   I ~ psi(k) + psi(n) - mean_i[ psi(nx_i + 1) + psi(ny_i + 1) ]
// Joint neighbourhoods use the max over blocks of the within-block L2
// distance. Inputs are standardised per dimension and deterministically
// jittered (1e-10 of the per-dimension scale) to break ties.
MiEstimate ksg_mi_cc(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k = 3,
                     std::uint64_t jitter_seed = 0);

// Mixed continuous/discrete estimator (Ross):
//   I ~ psi(n) + mean_i psi(k_i) - mean_i psi(n_label_i) - mean_i psi(m_i)
// where k_i shrinks to n_label_i - 1 for under-populated labels and m_i
// counts points of any label strictly inside the same-label k-NN radius
// (the point itself included). Labels with a single sample are dropped.
MiEstimate mi_cd(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k = 3,
                 std::uint64_t jitter_seed = 0);

// psi(n) for positive integer arguments via the harmonic recurrence.
double digamma_int(int n);

}  // namespace replab::mi
