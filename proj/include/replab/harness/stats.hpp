#pragma once

#include <vector>

namespace replab::harness {

struct WelchResult {
    double t = 0.0;
    double dof = 0.0;
    bool significant = false;  // two-sided at 0.05
};

// Welch's unequal-variance t-test with the Welch-Satterthwaite degrees of
// freedom. Degenerate zero-variance pairs with equal means score t = 0.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // n-1 denominator
// 1.96 * stderr; NaN for fewer than two samples
double ci95_halfwidth(const std::vector<double>& xs);

}  // namespace replab::harness
