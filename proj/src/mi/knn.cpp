#include "replab/mi/knn.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "replab/common/rng.hpp"

namespace replab::mi {

namespace {

constexpr double kEulerMascheroni = 0.57721566490153286060651209;

std::vector<double> g_digamma_table = {0.0, -kEulerMascheroni};
std::mutex g_digamma_mutex;

void ensure_digamma(int n) {
    std::lock_guard<std::mutex> lock(g_digamma_mutex);
    while (static_cast<int>(g_digamma_table.size()) <= n) {
        int m = static_cast<int>(g_digamma_table.size());
        g_digamma_table.push_back(g_digamma_table.back() + 1.0 / (m - 1));
    }
}

void validate_block(const Eigen::MatrixXd& m, const char* name) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(name) + ": non-finite input");
    if (m.rows() < 2) throw std::invalid_argument(std::string(name) + ": need at least 2 samples");
}

double hash_jitter(std::uint64_t stream, Eigen::Index r, Eigen::Index c) {
    std::uint64_t state = stream ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(r) + 1)) ^
                          (0xbf58476d1ce4e5b9ULL * (static_cast<std::uint64_t>(c) + 1));
    std::uint64_t u = splitmix64_next(state);
    return 2.0 * (static_cast<double>(u >> 11) * 0x1.0p-53) - 1.0;
}

Eigen::MatrixXd standardise(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    const double n = static_cast<double>(m.rows());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double mean = m.col(c).mean();
        double sd = std::sqrt((m.col(c).array() - mean).square().sum() / n);
        if (sd < 1e-12) sd = 1.0;
        out.col(c) = (m.col(c).array() - mean) / sd;
    }
    return out;
}

std::uint64_t content_hash(const Eigen::MatrixXd& m) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(static_cast<std::uint64_t>(m.rows()));
    mix(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::uint64_t bits;
            double v = m(r, c);
            std::memcpy(&bits, &v, sizeof(bits));
            mix(bits);
        }
    return h;
}

void apply_jitter(Eigen::MatrixXd& m, std::uint64_t stream) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) += 1e-10 * hash_jitter(stream, r, c);
}

// Tie-breaking jitter for a pair of blocks. Each block's noise stream is
// keyed by the rank of its content hash rather than its argument position,
// so ksg_mi_cc(x, y) == ksg_mi_cc(y, x) bit-exactly, while bit-identical
// blocks (e.g. a constant representation measured against itself) still
// receive independent noise.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> standardise_and_jitter_pair(
    const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::uint64_t seed) {
    Eigen::MatrixXd xs = standardise(x);
    Eigen::MatrixXd ys = standardise(y);
    bool x_first = content_hash(xs) <= content_hash(ys);
    apply_jitter(xs, derive_stream(seed, "block", x_first ? 0 : 1));
    apply_jitter(ys, derive_stream(seed, "block", x_first ? 1 : 0));
    return {std::move(xs), std::move(ys)};
}

Eigen::MatrixXd standardise_and_jitter(const Eigen::MatrixXd& m, std::uint64_t seed) {
    Eigen::MatrixXd out = standardise(m);
    apply_jitter(out, derive_stream(seed, "block", 0));
    return out;
}

// squared L2 distances from row i to every row
void row_sq_dists(const Eigen::MatrixXd& m, Eigen::Index i, Eigen::VectorXd& out) {
    out = (m.rowwise() - m.row(i)).rowwise().squaredNorm();
}

void parallel_for(int n, const std::function<void(int, int)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(hw == 0 ? 1 : hw);
    workers = std::min(workers, std::max(1, n / 256));
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int lo = w * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& t : pool) t.join();
}

}  // namespace

double digamma_int(int n) {
    if (n < 1) throw std::invalid_argument("digamma_int: argument must be >= 1");
    ensure_digamma(n);
    return g_digamma_table[static_cast<std::size_t>(n)];
}

MiEstimate ksg_mi_cc(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k,
                     std::uint64_t jitter_seed) {
    validate_block(x, "ksg_mi_cc/x");
    validate_block(y, "ksg_mi_cc/y");
    if (x.rows() != y.rows()) throw std::invalid_argument("ksg_mi_cc: sample count mismatch");
    const int n = static_cast<int>(x.rows());
    if (n <= k) throw std::invalid_argument("ksg_mi_cc: need n > k");

    auto [xs, ys] = standardise_and_jitter_pair(x, y, derive_stream(jitter_seed, "mi.jitter"));

    ensure_digamma(n + 1);
    std::vector<double> psi_terms(static_cast<std::size_t>(n));
    parallel_for(n, [&](int lo, int hi) {
        Eigen::VectorXd dx(n), dy(n), dj(n);
        std::vector<double> scratch(static_cast<std::size_t>(n) - 1);
        for (int i = lo; i < hi; ++i) {
            row_sq_dists(xs, i, dx);
            row_sq_dists(ys, i, dy);
            dj = dx.cwiseMax(dy);
            int w = 0;
            for (int j = 0; j < n; ++j)
                if (j != i) scratch[static_cast<std::size_t>(w++)] = dj(j);
            std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
            double eps_sq = scratch[static_cast<std::size_t>(k - 1)];
            int nx = 0, ny = 0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                if (dx(j) < eps_sq) ++nx;
                if (dy(j) < eps_sq) ++ny;
            }
            psi_terms[static_cast<std::size_t>(i)] =
                g_digamma_table[static_cast<std::size_t>(nx + 1)] +
                g_digamma_table[static_cast<std::size_t>(ny + 1)];
        }
    });

    double mean_psi = 0.0;
    for (double v : psi_terms) mean_psi += v;
    mean_psi /= n;

    MiEstimate est;
    est.value = digamma_int(k) + digamma_int(n) - mean_psi;
    est.k = k;
    est.n = n;
    return est;
}

MiEstimate mi_cd(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k,
                 std::uint64_t jitter_seed) {
    validate_block(x, "mi_cd/x");
    if (static_cast<int>(labels.size()) != x.rows())
        throw std::invalid_argument("mi_cd: label count mismatch");
    if (static_cast<int>(x.rows()) <= k) throw std::invalid_argument("mi_cd: need n > k");

    Eigen::MatrixXd xs = standardise_and_jitter(x, derive_stream(jitter_seed, "mi.jitter"));

    // drop labels that occur once: they have no same-label neighbourhood
    std::map<int, int> counts;
    for (int lab : labels) ++counts[lab];
    std::vector<int> kept;
    kept.reserve(labels.size());
    for (int i = 0; i < static_cast<int>(labels.size()); ++i)
        if (counts[labels[i]] > 1) kept.push_back(i);

    MiEstimate est;
    est.dropped_singletons = static_cast<int>(labels.size() - kept.size());
    const int n = static_cast<int>(kept.size());
    if (n <= k) throw std::invalid_argument("mi_cd: too few usable samples after dropping singleton labels");

    Eigen::MatrixXd xk(n, xs.cols());
    std::vector<int> lab(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xk.row(i) = xs.row(kept[static_cast<std::size_t>(i)]);
        lab[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(kept[static_cast<std::size_t>(i)])];
    }
    std::map<int, int> kept_counts;
    for (int l : lab) ++kept_counts[l];

    ensure_digamma(n + 1);
    std::vector<double> psi_k(static_cast<std::size_t>(n)), psi_lab(static_cast<std::size_t>(n)),
        psi_m(static_cast<std::size_t>(n));
    std::vector<int> reduced(static_cast<std::size_t>(n), 0);
    parallel_for(n, [&](int lo, int hi) {
        Eigen::VectorXd dx(n);
        std::vector<double> same;
        for (int i = lo; i < hi; ++i) {
            row_sq_dists(xk, i, dx);
            int cnt = kept_counts.at(lab[static_cast<std::size_t>(i)]);
            int ki = std::min(k, cnt - 1);
            if (ki < k) reduced[static_cast<std::size_t>(i)] = 1;
            same.clear();
            for (int j = 0; j < n; ++j)
                if (j != i && lab[static_cast<std::size_t>(j)] == lab[static_cast<std::size_t>(i)])
                    same.push_back(dx(j));
            std::nth_element(same.begin(), same.begin() + (ki - 1), same.end());
            double radius_sq = same[static_cast<std::size_t>(ki - 1)];
            int m = 1;  // the point itself
            for (int j = 0; j < n; ++j)
                if (j != i && dx(j) < radius_sq) ++m;
            psi_k[static_cast<std::size_t>(i)] = g_digamma_table[static_cast<std::size_t>(ki)];
            psi_lab[static_cast<std::size_t>(i)] = g_digamma_table[static_cast<std::size_t>(cnt)];
            psi_m[static_cast<std::size_t>(i)] = g_digamma_table[static_cast<std::size_t>(m)];
        }
    });

    double mk = 0.0, ml = 0.0, mm = 0.0;
    int reduced_total = 0;
    for (int i = 0; i < n; ++i) {
        mk += psi_k[static_cast<std::size_t>(i)];
        ml += psi_lab[static_cast<std::size_t>(i)];
        mm += psi_m[static_cast<std::size_t>(i)];
        reduced_total += reduced[static_cast<std::size_t>(i)];
    }
    est.value = digamma_int(n) + (mk - ml - mm) / n;
    est.k = k;
    est.n = n;
    est.reduced_k_count = reduced_total;
    return est;
}

}  // namespace replab::mi
