#include "replab/harness/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace replab::harness {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 samples");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double ci95_halfwidth(const std::vector<double>& xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return 1.96 * std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t_test: each sample needs at least 2 values");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a), vb = sample_variance(b);

    WelchResult r;
    const double se_sq = va / na + vb / nb;
    if (se_sq == 0.0) {
        // both samples constant: either no difference at all, or a separation
        // the test cannot scale
        r.t = ma == mb ? 0.0 : std::numeric_limits<double>::infinity() * (ma > mb ? 1.0 : -1.0);
        r.dof = na + nb - 2.0;
        r.significant = ma != mb;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se_sq);
    r.dof = se_sq * se_sq /
            (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
    boost::math::students_t dist(r.dof);
    const double critical = boost::math::quantile(dist, 0.975);
    r.significant = std::abs(r.t) > critical;
    return r;
}

}  // namespace replab::harness
