#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <sstream>
#include <vector>

#include "replab/common/rng.hpp"
#include "replab/mi/analysis.hpp"
#include "replab/mi/exact.hpp"
#include "replab/mi/knn.hpp"

using namespace replab;
using namespace replab::mi;

namespace {

Eigen::MatrixXd gaussian_pair(int n, double rho, Rng& rng) {
    Eigen::MatrixXd out(n, 2);
    for (int i = 0; i < n; ++i) {
        double z1 = rng.normal();
        double z2 = rng.normal();
        out(i, 0) = z1;
        out(i, 1) = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    }
    return out;
}

// independent plug-in evaluation used as the oracle for the frozen constants
double direct_sum_mi(const Eigen::MatrixXd& joint) {
    Eigen::VectorXd px = joint.rowwise().sum();
    Eigen::VectorXd py = joint.colwise().sum();
    double s = 0.0;
    for (int i = 0; i < joint.rows(); ++i)
        for (int j = 0; j < joint.cols(); ++j)
            if (joint(i, j) > 0.0) s += joint(i, j) * std::log(joint(i, j) / (px(i) * py(j)));
    return s;
}

}  // namespace

TEST_CASE("exact_mi_discrete: independent uniform table is zero") {
    Eigen::MatrixXd t(2, 2);
    t << 0.25, 0.25, 0.25, 0.25;
    CHECK(exact_mi_discrete(t) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("exact_mi_discrete: diagonal table gives ln 2") {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, 2);
    t(0, 0) = 0.5;
    t(1, 1) = 0.5;
    CHECK(exact_mi_discrete(t) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("exact_mi_discrete: 2x2 example matches direct summation") {
    Eigen::MatrixXd t(2, 2);
    t << 0.4, 0.1, 0.1, 0.4;
    double expected = 2 * 0.4 * std::log(1.6) + 2 * 0.1 * std::log(0.4);
    CHECK(exact_mi_discrete(t) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(exact_mi_discrete(t) == doctest::Approx(0.19274).epsilon(1e-4));
    CHECK(exact_mi_discrete(t) == doctest::Approx(direct_sum_mi(t)).epsilon(1e-14));
}

TEST_CASE("exact_mi_discrete: rejects bad tables") {
    Eigen::MatrixXd neg(2, 2);
    neg << 0.5, 0.6, -0.1, 0.0;
    CHECK_THROWS_AS(exact_mi_discrete(neg), std::invalid_argument);
    Eigen::MatrixXd unnorm(2, 2);
    unnorm << 0.5, 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(exact_mi_discrete(unnorm), std::invalid_argument);
}

TEST_CASE("chain rule identity on random discrete joints") {
    // I(Z;Y) = I(Z;Y|L) + I(Z;L) - I(Z;L|Y), evaluated exactly
    Rng rng(11);
    const int nz = 3, ny = 4, nl = 2;
    std::vector<double> p(static_cast<std::size_t>(nz * ny * nl));
    double total = 0.0;
    for (auto& v : p) {
        v = rng.uniform() + 0.01;
        total += v;
    }
    for (auto& v : p) v /= total;
    auto at = [&](int z, int y, int l) { return p[static_cast<std::size_t>((z * ny + y) * nl + l)]; };

    Eigen::MatrixXd zy = Eigen::MatrixXd::Zero(nz, ny);
    Eigen::MatrixXd zl = Eigen::MatrixXd::Zero(nz, nl);
    Eigen::VectorXd pl = Eigen::VectorXd::Zero(nl);
    Eigen::VectorXd py = Eigen::VectorXd::Zero(ny);
    std::vector<Eigen::MatrixXd> zy_given_l(nl, Eigen::MatrixXd::Zero(nz, ny));
    std::vector<Eigen::MatrixXd> zl_given_y(ny, Eigen::MatrixXd::Zero(nz, nl));
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int l = 0; l < nl; ++l) {
                double v = at(z, y, l);
                zy(z, y) += v;
                zl(z, l) += v;
                pl(l) += v;
                py(y) += v;
                zy_given_l[static_cast<std::size_t>(l)](z, y) += v;
                zl_given_y[static_cast<std::size_t>(y)](z, l) += v;
            }
    for (int l = 0; l < nl; ++l) zy_given_l[static_cast<std::size_t>(l)] /= pl(l);
    for (int y = 0; y < ny; ++y) zl_given_y[static_cast<std::size_t>(y)] /= py(y);

    double i_zy = exact_mi_discrete(zy);
    double i_zl = exact_mi_discrete(zl);
    double i_zy_l = exact_conditional_mi(zy_given_l, pl);
    double i_zl_y = exact_conditional_mi(zl_given_y, py);
    CHECK(std::abs(i_zy - (i_zy_l + i_zl - i_zl_y)) < 1e-10);
}

TEST_CASE("ksg_mi_cc: independent uniforms near zero") {
    Rng rng(101);
    const int n = 4096;
    const int reps = 3;
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
        Eigen::MatrixXd x(n, 1), y(n, 1);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = rng.uniform();
            y(i, 0) = rng.uniform();
        }
        auto est = ksg_mi_cc(x, y, 3, static_cast<std::uint64_t>(r));
        CHECK(est.n == n);
        CHECK(est.k == 3);
        sum += est.value;
    }
    CHECK(std::abs(sum / reps) < 0.02);
}

TEST_CASE("ksg_mi_cc: correlated Gaussians match the analytic value") {
    Rng rng(202);
    const int n = 4096;
    const double rho = 0.9;
    double sum = 0.0;
    const int reps = 3;
    for (int r = 0; r < reps; ++r) {
        Eigen::MatrixXd xy = gaussian_pair(n, rho, rng);
        sum += ksg_mi_cc(xy.col(0), xy.col(1), 3, static_cast<std::uint64_t>(r)).value;
    }
    double truth = -0.5 * std::log(1.0 - rho * rho);
    CHECK(std::abs(sum / reps - truth) < 0.03);
}

TEST_CASE("ksg_mi_cc: deterministic dependence diverges") {
    Rng rng(303);
    const int n = 512;
    Eigen::MatrixXd x(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = rng.normal();
    auto est = ksg_mi_cc(x, x, 3, 5);
    CHECK(est.value > std::log(static_cast<double>(n)) / 2.0);
}

TEST_CASE("ksg_mi_cc: exact symmetry under argument swap") {
    Rng rng(404);
    const int n = 700;
    Eigen::MatrixXd x = gaussian_pair(n, 0.5, rng);
    Eigen::MatrixXd y = gaussian_pair(n, 0.0, rng);
    auto a = ksg_mi_cc(x, y, 3, 9);
    auto b = ksg_mi_cc(y, x, 3, 9);
    CHECK(a.value == b.value);
}

TEST_CASE("ksg_mi_cc: error decreases with n for the Gaussian family") {
    Rng rng(505);
    const double rho = 0.9;
    const double truth = -0.5 * std::log(1.0 - rho * rho);
    const int reps = 6;
    double err_small = 0.0, err_large = 0.0;
    for (int r = 0; r < reps; ++r) {
        Eigen::MatrixXd a = gaussian_pair(512, rho, rng);
        Eigen::MatrixXd b = gaussian_pair(4096, rho, rng);
        err_small += std::abs(ksg_mi_cc(a.col(0), a.col(1), 3, static_cast<std::uint64_t>(r)).value - truth);
        err_large += std::abs(ksg_mi_cc(b.col(0), b.col(1), 3, static_cast<std::uint64_t>(r)).value - truth);
    }
    CHECK(err_large / reps < err_small / reps);
}

TEST_CASE("ksg_mi_cc: input validation") {
    Eigen::MatrixXd x(3, 1), y(3, 1);
    x << 1, 2, 3;
    y << 1, 2, 3;
    CHECK_THROWS_AS(ksg_mi_cc(x, y, 3, 0), std::invalid_argument);  // n <= k
    Eigen::MatrixXd bad(5, 1), good(5, 1);
    bad << 1, 2, std::numeric_limits<double>::quiet_NaN(), 4, 5;
    good << 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(ksg_mi_cc(bad, good, 3, 0), std::invalid_argument);
}

TEST_CASE("mi_cd: labels independent of x near zero") {
    Rng rng(606);
    const int n = 4096;
    Eigen::MatrixXd x(n, 2);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        labels[static_cast<std::size_t>(i)] = rng.randint(3);
    }
    auto est = mi_cd(x, labels, 3, 2);
    CHECK(std::abs(est.value) < 0.02);
}

TEST_CASE("mi_cd: well separated clusters recover label entropy") {
    Rng rng(707);
    const int n = 4096;

    SUBCASE("two labels") {
        Eigen::MatrixXd x(n, 1);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) {
            int lab = rng.randint(2);
            labels[static_cast<std::size_t>(i)] = lab;
            x(i, 0) = rng.normal() + (lab == 0 ? -100.0 : 100.0);
        }
        auto est = mi_cd(x, labels, 3, 3);
        CHECK(std::abs(est.value - std::log(2.0)) < 0.02);
    }
    SUBCASE("four labels") {
        Eigen::MatrixXd x(n, 1);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) {
            int lab = rng.randint(4);
            labels[static_cast<std::size_t>(i)] = lab;
            x(i, 0) = rng.normal() + 200.0 * lab;
        }
        auto est = mi_cd(x, labels, 3, 4);
        CHECK(std::abs(est.value - std::log(4.0)) < 0.03);
    }
}

TEST_CASE("mi_cd: under-populated labels shrink k and singletons are dropped") {
    Rng rng(808);
    const int n = 64;
    Eigen::MatrixXd x(n + 3, 1);
    std::vector<int> labels(n + 3);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        labels[static_cast<std::size_t>(i)] = i % 2;
    }
    // one label with only 2 samples (k drops to 1) and one singleton
    labels[n] = 7;
    labels[n + 1] = 7;
    labels[n + 2] = 9;
    x(n, 0) = 5.0;
    x(n + 1, 0) = 5.1;
    x(n + 2, 0) = -5.0;
    auto est = mi_cd(x, labels, 3, 5);
    CHECK(est.reduced_k_count == 2);
    CHECK(est.dropped_singletons == 1);
    CHECK(est.n == n + 2);
}

TEST_CASE("metric suite: discrete toy matches exact plug-in within tolerance") {
    // c ~ U(4); s|c, a|s, s'|s,a from fixed tables; z embeds s, v = h(s') + U(0,1)
    Rng rng(909);
    const int n = 4096;
    Eigen::MatrixXd p_s_c(4, 3);
    p_s_c << 0.7, 0.2, 0.1, 0.1, 0.7, 0.2, 0.2, 0.1, 0.7, 1.0 / 3, 1.0 / 3, 1.0 / 3;
    Eigen::MatrixXd p_a_s(3, 2);
    p_a_s << 0.8, 0.2, 0.3, 0.7, 0.5, 0.5;
    std::vector<Eigen::MatrixXd> p_sp(2, Eigen::MatrixXd(3, 3));  // [a](s, s')
    p_sp[0] << 0.6, 0.3, 0.1, 0.1, 0.6, 0.3, 0.3, 0.1, 0.6;
    p_sp[1] << 0.2, 0.2, 0.6, 0.6, 0.2, 0.2, 0.2, 0.6, 0.2;
    Eigen::Vector3d h(0.0, 2.0, 5.0);

    auto draw = [&](const Eigen::VectorXd& p) {
        double u = rng.uniform(), acc = 0.0;
        for (int i = 0; i < p.size(); ++i) {
            acc += p(i);
            if (u < acc) return i;
        }
        return static_cast<int>(p.size()) - 1;
    };

    AnalysisSample sample;
    sample.n = n;
    sample.obs.resize(n, 2);
    sample.next_obs.resize(n, 2);
    sample.z.resize(n, 1);
    sample.z_next.resize(n, 1);
    sample.value.resize(n);
    sample.action.resize(n);
    sample.context.resize(n);
    for (int i = 0; i < n; ++i) {
        int c = rng.randint(4);
        int s = draw(p_s_c.row(c).transpose());
        int a = draw(p_a_s.row(s).transpose());
        int sp = draw(p_sp[static_cast<std::size_t>(a)].row(s).transpose());
        sample.obs(i, 0) = s * 3.0;
        sample.obs(i, 1) = c * 2.0;
        sample.next_obs(i, 0) = sp * 3.0;
        sample.next_obs(i, 1) = c * 2.0;
        sample.z(i, 0) = s * 3.0;
        sample.z_next(i, 0) = sp * 3.0;
        sample.value(i) = h(sp) + rng.uniform();
        sample.action[static_cast<std::size_t>(i)] = a;
        sample.context[static_cast<std::size_t>(i)] = c;
    }

    // exact values from the generating tables
    JointBuilder sc, ssp, pair_a;
    Eigen::VectorXd p_s = Eigen::VectorXd::Zero(3);
    for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 3; ++s) {
            sc.add(s, c, 0.25 * p_s_c(c, s));
            p_s(s) += 0.25 * p_s_c(c, s);
        }
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            for (int sp = 0; sp < 3; ++sp) {
                double w = p_s(s) * p_a_s(s, a) * p_sp[static_cast<std::size_t>(a)](s, sp);
                ssp.add(s, sp, w);
                pair_a.add(s * 3 + sp, a, w);
            }
    double i_zl = exact_mi_discrete(sc.table());
    double i_zzp = exact_mi_discrete(ssp.table());
    double i_pair_a = exact_mi_discrete(pair_a.table());

    MiReport r = compute_metric_suite(sample, "toy", 3, 77);
    CHECK(std::abs(r.z.level.value - i_zl) < 0.05);
    CHECK(std::abs(r.z.value.value - i_zzp) < 0.05);  // v is a relabelling of s'
    CHECK(std::abs(r.z.action.value - i_pair_a) < 0.05);
    CHECK(std::abs(r.z.next.value - i_zzp) < 0.05);

    // z is a coarsening of o: soft data-processing direction on the estimates
    CHECK(r.z.level.value <= r.obs.level.value + 0.05);
    CHECK(r.z.next.value <= r.obs.next.value + 0.05);
}

TEST_CASE("metric suite: constant representation carries no information") {
    Rng rng(111);
    const int n = 1024;
    AnalysisSample sample;
    sample.n = n;
    sample.obs.resize(n, 2);
    sample.next_obs.resize(n, 2);
    sample.z = Eigen::MatrixXd::Zero(n, 3);
    sample.z_next = Eigen::MatrixXd::Zero(n, 3);
    sample.value.resize(n);
    sample.action.resize(n);
    sample.context.resize(n);
    for (int i = 0; i < n; ++i) {
        sample.obs(i, 0) = rng.normal();
        sample.obs(i, 1) = rng.normal();
        sample.next_obs(i, 0) = rng.normal();
        sample.next_obs(i, 1) = rng.normal();
        sample.value(i) = rng.normal();
        sample.action[static_cast<std::size_t>(i)] = rng.randint(2);
        sample.context[static_cast<std::size_t>(i)] = rng.randint(4);
    }
    MiReport r = compute_metric_suite(sample, "const", 3, 13);
    CHECK(std::abs(r.z.level.value) < 0.05);
    CHECK(std::abs(r.z.value.value) < 0.05);
    CHECK(std::abs(r.z.action.value) < 0.05);
    CHECK(std::abs(r.z.next.value) < 0.05);
}

TEST_CASE("compression_efficiency: ratio, clamp and error") {
    MiEstimate z, o;
    z.value = 0.5;
    o.value = 1.0;
    CHECK(compression_efficiency(z, o) == doctest::Approx(0.5));
    z.value = 1.2;
    CHECK(compression_efficiency(z, o) == doctest::Approx(1.0));
    o.value = 0.0;
    CHECK_THROWS_AS(compression_efficiency(z, o), std::domain_error);
}

TEST_CASE("build_analysis_sample: exclusion rules") {
    // episode 1: two steps -> only the step-0 record survives
    // episode 2: unterminated -> contributes nothing
    EpisodeTrace two_step;
    two_step.context_id = 5;
    two_step.terminated = true;
    for (int t = 0; t < 2; ++t) {
        two_step.obs.push_back(Eigen::VectorXd::Constant(2, t));
        two_step.actions.push_back(t);
        two_step.rewards.push_back(1.0);
    }
    EpisodeTrace open_ended = two_step;
    open_ended.terminated = false;

    std::vector<EpisodeTrace> episodes = {two_step, open_ended};
    CHECK(count_usable_timesteps(episodes) == 1);

    auto identity = [](const Eigen::VectorXd& o) { return o; };
    auto sample = build_analysis_sample(episodes, identity, 0.5, 1, 42);
    CHECK(sample.n == 1);
    CHECK(sample.context[0] == 5);
    CHECK(sample.action[0] == 0);
    // v_0 = r_0 + gamma * r_1
    CHECK(sample.value(0) == doctest::Approx(1.0 + 0.5).epsilon(1e-12));
    CHECK(sample.obs(0, 0) == doctest::Approx(0.0));
    CHECK(sample.next_obs(0, 0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(build_analysis_sample(episodes, identity, 0.5, 2, 42), std::runtime_error);
}

TEST_CASE("build_analysis_sample: O and O' timesteps never overlap") {
    // a long episode: records use even t for o, odd t+1 for o'
    EpisodeTrace ep;
    ep.context_id = 0;
    ep.terminated = true;
    const int T = 31;
    for (int t = 0; t < T; ++t) {
        ep.obs.push_back(Eigen::VectorXd::Constant(1, t));
        ep.actions.push_back(0);
        ep.rewards.push_back(0.0);
    }
    std::vector<EpisodeTrace> episodes = {ep};
    int usable = count_usable_timesteps(episodes);
    CHECK(usable == 15);  // t in {0,2,...,28}
    auto identity = [](const Eigen::VectorXd& o) { return o; };
    auto sample = build_analysis_sample(episodes, identity, 1.0, usable, 1);
    for (int i = 0; i < sample.n; ++i) {
        int t_o = static_cast<int>(sample.obs(i, 0));
        int t_op = static_cast<int>(sample.next_obs(i, 0));
        CHECK(t_o % 2 == 0);
        CHECK(t_op == t_o + 1);
    }
}

TEST_CASE("MiReport round-trips through its text form") {
    MiReport r;
    r.representation = "actor";
    r.k = 3;
    r.n = 128;
    r.z.level.value = 0.25;
    r.z.value.value = -0.003;
    r.z.action.value = 0.5;
    r.z.next.value = 0.125;
    r.obs.level.value = 0.5;
    r.obs.value.value = 0.25;
    r.obs.action.value = 0.5;
    r.obs.next.value = 0.25;
    r.compression_level = 0.5;
    r.compression_value = 0.0;
    r.compression_action = 1.0;
    r.compression_next = 0.5;

    std::stringstream ss;
    write_report(ss, r);
    MiReport back = read_report(ss);
    CHECK(back.representation == "actor");
    CHECK(back.n == 128);
    CHECK(back.z.level.value == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(back.z.value.value == doctest::Approx(-0.003).epsilon(1e-15));
    CHECK(back.compression_action == doctest::Approx(1.0));
}
