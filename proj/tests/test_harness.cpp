#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "replab/harness/report.hpp"

using namespace replab;
using namespace replab::harness;

namespace {

const char* kSampleConfig = R"cfg(
# desk-scale assembly experiment
[experiment]
name = unit
env = assembly
train_levels = 4
test_levels = 8
level_seed = 7
budget = 128
algorithm = ppo
coupling = coupled

[train]
num_envs = 2
rollout_len = 16
minibatches_per_epoch = 2
eval_interval = 2
eval_episodes = 4

[analysis]
collection_steps = 2048
n = 256
k = 3

[aux]
attachments = mico:critic:0.5 ; augmentation:actor:0.1
aug_noise_sigma = 0.05
)cfg";

ExperimentConfig sample_config() {
    std::stringstream ss(kSampleConfig);
    return parse_config(ss);
}

std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("replab_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("welch_t_test: identical, separated, and hand-evaluated samples") {
    SUBCASE("identical samples") {
        std::vector<double> a{1, 2, 3}, b{1, 2, 3};
        auto r = welch_t_test(a, b);
        CHECK(r.t == doctest::Approx(0.0));
        CHECK_FALSE(r.significant);
    }
    SUBCASE("a large shift separates") {
        std::vector<double> a{1, 2, 3}, b{11, 12, 13};
        auto r = welch_t_test(a, b);
        CHECK(std::abs(r.t) > 10.0);
        CHECK(r.significant);
    }
    SUBCASE("hand evaluation of the Welch formulas") {
        std::vector<double> a{2.1, 2.5, 2.3, 2.2}, b{2.0, 2.4, 2.1};
        // independent direct evaluation
        const double ma = (2.1 + 2.5 + 2.3 + 2.2) / 4.0;
        const double mb = (2.0 + 2.4 + 2.1) / 3.0;
        double va = 0.0, vb = 0.0;
        for (double x : a) va += (x - ma) * (x - ma);
        va /= 3.0;
        for (double x : b) vb += (x - mb) * (x - mb);
        vb /= 2.0;
        const double se_sq = va / 4.0 + vb / 3.0;
        const double t_expected = (ma - mb) / std::sqrt(se_sq);
        const double dof_expected =
            se_sq * se_sq / (va * va / (16.0 * 3.0) + vb * vb / (9.0 * 2.0));

        auto r = welch_t_test(a, b);
        CHECK(r.t == doctest::Approx(t_expected).epsilon(1e-12));
        CHECK(r.dof == doctest::Approx(dof_expected).epsilon(1e-12));
        CHECK(r.t == doctest::Approx(0.7348).epsilon(1e-3));
        CHECK(r.dof == doctest::Approx(3.871).epsilon(1e-3));
        CHECK_FALSE(r.significant);
    }
    SUBCASE("degenerate zero-variance samples") {
        std::vector<double> a{2, 2, 2}, b{2, 2};
        auto r = welch_t_test(a, b);
        CHECK(r.t == 0.0);
        CHECK_FALSE(r.significant);
        std::vector<double> c{3, 3};
        CHECK(welch_t_test(a, c).significant);
    }
    SUBCASE("input validation") {
        std::vector<double> tiny{1.0};
        CHECK_THROWS_AS(welch_t_test(tiny, tiny), std::invalid_argument);
    }
}

TEST_CASE("ci95_halfwidth: normal-approximation formula") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 5.0};
    // independent recomputation
    double var = 0.0;
    for (double x : xs) var += (x - 3.0) * (x - 3.0);
    var /= 4.0;
    CHECK(ci95_halfwidth(xs) == doctest::Approx(1.96 * std::sqrt(var / 5.0)).epsilon(1e-12));
    CHECK(std::isnan(ci95_halfwidth({1.0})));
}

TEST_CASE("config: parsing, defaults, validation") {
    auto cfg = sample_config();
    CHECK(cfg.name == "unit");
    CHECK(cfg.kind == env::EnvKind::Assembly);
    CHECK(cfg.train_levels == 4);
    CHECK(cfg.budget == 128);
    CHECK(cfg.train.num_envs == 2);
    CHECK(cfg.train.gamma == doctest::Approx(0.999));  // default kept
    REQUIRE(cfg.attachments.size() == 2);
    CHECK(cfg.attachments[0].objective == aux::Objective::MICo);
    CHECK(cfg.attachments[0].target == aux::Target::Critic);
    CHECK(cfg.attachments[0].coefficient == doctest::Approx(0.5));
    CHECK(cfg.attachments[1].aug_noise_sigma == doctest::Approx(0.05));

    SUBCASE("unknown keys are rejected") {
        std::stringstream bad("[experiment]\nnme = typo\n");
        CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
        std::stringstream bad2("[exp]\nname = x\n");
        CHECK_THROWS_AS(parse_config(bad2), std::invalid_argument);
    }
    SUBCASE("invalid values are rejected") {
        std::stringstream bad("[train]\nclip_eps = 1.5\n");
        CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
        std::stringstream bad2("[experiment]\ntrain_levels = 0\n");
        CHECK_THROWS_AS(parse_config(bad2), std::invalid_argument);
    }
}

TEST_CASE("config: canonical round-trip keeps the digest stable") {
    auto cfg = sample_config();
    const std::string digest = config_digest(cfg);
    CHECK(digest.size() == 64);

    std::stringstream out;
    write_config(out, cfg);
    auto reloaded = parse_config(out);
    CHECK(config_digest(reloaded) == digest);

    // any change must move the digest
    reloaded.budget += 1;
    CHECK(config_digest(reloaded) != digest);
}

TEST_CASE("seed list parsing") {
    CHECK(parse_seed_list("0..4") == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
    CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
    CHECK(parse_seed_list("1,3,5") == std::vector<std::uint64_t>{1, 3, 5});
    CHECK_THROWS_AS(parse_seed_list("5..2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed_list(""), std::invalid_argument);
}

TEST_CASE("execute_run: directory layout, record round-trip, reproducibility" *
          doctest::timeout(600)) {
    auto cfg = sample_config();
    cfg.attachments.clear();

    auto dir_a = temp_dir("run_a");
    auto record = execute_run(cfg, 3, dir_a);

    const auto run_dir = dir_a / record.run_id;
    CHECK(std::filesystem::exists(run_dir / "config.cfg"));
    CHECK(std::filesystem::exists(run_dir / "levels.manifest"));
    CHECK(std::filesystem::exists(run_dir / "checkpoints" / "final.ckpt"));
    CHECK(std::filesystem::exists(run_dir / "logs" / "metrics.jsonl"));
    CHECK(std::filesystem::exists(run_dir / "record.json"));
    CHECK(record.env_steps == 128);
    CHECK(record.mi_reports.size() == 1);
    CHECK(record.mi_reports[0].representation == "shared");
    CHECK(record.has_bound);

    auto loaded = load_run_record(run_dir);
    CHECK(loaded.run_id == record.run_id);
    CHECK(loaded.config_digest == record.config_digest);
    CHECK(loaded.final_train_return == record.final_train_return);
    CHECK(loaded.mi_reports.size() == 1);
    CHECK(loaded.mi_reports[0].z.level.value ==
          doctest::Approx(record.mi_reports[0].z.level.value).epsilon(1e-15));
    CHECK(loaded.bound.holds == record.bound.holds);

    // bit-exact reproduction in a fresh directory
    auto dir_b = temp_dir("run_b");
    auto again = execute_run(cfg, 3, dir_b);
    CHECK(again.final_train_return == record.final_train_return);
    CHECK(again.final_test_return == record.final_test_return);
    CHECK(again.mi_reports[0].z.level.value == record.mi_reports[0].z.level.value);
    CHECK(again.mi_reports[0].z.next.value == record.mi_reports[0].z.next.value);
    CHECK(again.bound.mi_za_level == record.bound.mi_za_level);

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("score table: baseline normalisation and error cases") {
    RunRecord base1, base2, other;
    base1.label = "ppo:coupled";
    base1.kind = env::EnvKind::Assembly;
    base1.final_train_return = 4.0;
    base1.final_test_return = 2.0;
    base2 = base1;
    base2.final_train_return = 6.0;
    base2.final_test_return = 4.0;
    other = base1;
    other.label = "ppo:decoupled";
    other.final_train_return = 10.0;
    other.final_test_return = 6.0;
    RunRecord other2 = other;
    other2.final_train_return = 11.0;

    auto table = build_score_table({base1, base2, other, other2});
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) {
        if (row.is_baseline) {
            CHECK(row.train_norm == doctest::Approx(1.0));
            CHECK(row.test_norm == doctest::Approx(1.0));
        } else {
            CHECK(row.train_norm == doctest::Approx(10.5 / 5.0));
            CHECK(row.seeds == 2);
        }
    }

    SUBCASE("missing baseline") {
        CHECK_THROWS_AS(build_score_table({other, other2}), std::invalid_argument);
    }
    SUBCASE("mixed environments") {
        RunRecord grid = base1;
        grid.kind = env::EnvKind::Gridworld;
        CHECK_THROWS_AS(build_score_table({base1, grid}), std::invalid_argument);
    }
    SUBCASE("empty record set") {
        CHECK_THROWS_AS(build_score_table({}), std::invalid_argument);
        CHECK_THROWS_AS(emit_report({}, std::filesystem::temp_directory_path()),
                        std::invalid_argument);
    }
    SUBCASE("single-run table flags undefined confidence intervals") {
        auto single = build_score_table({base1});
        REQUIRE(single.rows.size() == 1);
        CHECK(std::isnan(single.rows[0].train_ci));
        std::stringstream os;
        write_score_table(os, single);
        CHECK(os.str().find("ppo:coupled") != std::string::npos);
    }
}

TEST_CASE("sweep: one run per (value, seed) and curve emission" * doctest::timeout(600)) {
    auto cfg = sample_config();
    cfg.attachments.clear();
    cfg.algorithm = agents::Algorithm::PPG;
    cfg.train.n_pi = 2;
    cfg.train.aux_epochs = 1;
    cfg.train.aux_minibatch_size = 32;
    cfg.budget = 2 * 2 * 16;  // two rollouts: exactly one aux phase at n_pi=2
    cfg.sweep_axis = SweepAxis::AuxBatchLevels;
    cfg.sweep_values = {1, 2};

    auto dir = temp_dir("sweep");
    auto records = sweep(cfg, {0, 1}, dir);
    CHECK(records.size() == 4);

    std::stringstream curves;
    write_sweep_curve_csv(curves, records);
    // a curve row for each swept value
    CHECK(curves.str().find("\n1,") != std::string::npos);
    CHECK(curves.str().find("\n2,") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run labels include live attachments") {
    auto cfg = sample_config();
    CHECK(run_label(cfg) == "ppo:coupled+mico(critic)+augmentation(actor)");
    cfg.attachments.clear();
    CHECK(run_label(cfg) == "ppo:coupled");
}
