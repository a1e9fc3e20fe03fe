#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "replab/harness/report.hpp"
#include "replab/nn/checkpoint.hpp"

using namespace replab;

namespace {

int cmd_train(const std::string& config_path, const std::string& seeds_text,
              const std::string& out_dir) {
    auto cfg = harness::load_config_file(config_path);
    auto seeds = harness::parse_seed_list(seeds_text);
    std::vector<std::pair<harness::ExperimentConfig, std::uint64_t>> cells;
    for (auto seed : seeds) cells.emplace_back(cfg, seed);
    auto records = harness::run_many(cells, out_dir);
    for (const auto& r : records)
        std::cout << r.run_id << ": train " << r.final_train_return << ", test "
                  << r.final_test_return << " (" << r.env_steps << " steps, " << r.wall_seconds
                  << " s)\n";
    return 0;
}

int cmd_measure(const std::string& config_path, const std::string& checkpoint_path,
                const std::string& representation, const std::string& out_path) {
    auto cfg = harness::load_config_file(config_path);
    auto set = env::sample_level_set(cfg.kind, cfg.train_levels, cfg.test_levels, cfg.level_seed,
                                     cfg.assembly, cfg.gridworld);

    agents::ModelConfig mc;
    auto probe = env::make_env(cfg.kind, cfg.assembly, cfg.gridworld);
    mc.obs_dim = probe->spec().obs_dim;
    mc.n_actions = probe->spec().n_actions;
    mc.hidden = cfg.train.hidden;
    mc.latent = cfg.train.latent;
    mc.width_multiplier = cfg.train.width_multiplier;
    mc.coupling = cfg.coupling;
    mc.aux_value_head = cfg.algorithm != agents::Algorithm::PPO &&
                        cfg.coupling == agents::Coupling::Decoupled;
    Rng init_rng(derive_stream(0, "measure.init"));
    agents::ActorCriticModel model(mc, init_rng);
    model.load_params(nn::load_checkpoint_file(checkpoint_path));

    std::vector<std::string> reps;
    if (representation == "auto")
        reps = cfg.coupling == agents::Coupling::Coupled
                   ? std::vector<std::string>{"shared"}
                   : std::vector<std::string>{"actor", "critic"};
    else
        reps = {representation};

    for (const auto& rep : reps) {
        agents::RolloutCollector collector(cfg.kind, cfg.assembly, cfg.gridworld, set.train,
                                           cfg.train.num_envs, derive_stream(1, "measure.collect"));
        auto episodes = collector.collect_episodes(model, cfg.collection_steps);
        mi::RepresentationFn phi;
        if (rep == "critic")
            phi = [&model](const Eigen::VectorXd& o) { return model.critic_latent(o); };
        else
            phi = [&model](const Eigen::VectorXd& o) { return model.actor_latent(o); };
        auto sample = mi::build_analysis_sample(episodes, phi, cfg.train.gamma, cfg.analysis_n,
                                                derive_stream(1, "measure.sample"));
        auto report = mi::compute_metric_suite(sample, rep, cfg.analysis_k,
                                               derive_stream(1, "measure.jitter"));
        mi::write_report(std::cout, report);
        if (!out_path.empty()) {
            std::ofstream os(out_path + (reps.size() > 1 ? "." + rep : ""));
            mi::write_report(os, report);
        }
    }
    return 0;
}

int cmd_verify(std::uint64_t seed, const std::string& out_path) {
    auto results = theory::run_verification_suite(seed);
    theory::write_verification_report(std::cout, results);
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        theory::write_verification_report(os, results);
    }
    for (const auto& r : results)
        if (!r.passed) return 1;
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_text, const std::string& seeds_text,
              const std::string& out_dir) {
    auto cfg = harness::load_config_file(config_path);
    if (!axis.empty()) cfg.sweep_axis = harness::sweep_axis_from_string(axis);
    if (!values_text.empty()) {
        cfg.sweep_values.clear();
        std::stringstream ss(values_text);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.sweep_values.push_back(std::stod(item));
    }
    auto seeds = harness::parse_seed_list(seeds_text);
    auto records = harness::sweep(cfg, seeds, out_dir);
    harness::emit_report(records, std::filesystem::path(out_dir) / "report");
    std::cout << records.size() << " runs completed; report written to " << out_dir << "/report\n";
    return 0;
}

int cmd_report(const std::string& runs_dir, const std::string& out_dir) {
    auto records = harness::load_run_records(runs_dir);
    if (records.empty()) {
        std::cerr << "no run records under " << runs_dir << "\n";
        return 1;
    }
    harness::emit_report(records, out_dir);
    auto table = harness::build_score_table(records);
    harness::write_score_table(std::cout, table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"actor-critic representation laboratory"};
    app.require_subcommand(1);

    std::string config_path, seeds_text = "0", out_dir = "runs", checkpoint_path;
    std::string representation = "auto", out_path, axis, values_text, runs_dir;
    std::uint64_t verify_seed = 2024;

    auto* train = app.add_subcommand("train", "train agents for each seed");
    train->add_option("--config", config_path, "experiment config file")->required();
    train->add_option("--seeds", seeds_text, "seed list: 0..4 or 0,1,2");
    train->add_option("--out", out_dir, "output directory");

    auto* measure = app.add_subcommand("measure", "mutual-information report for a checkpoint");
    measure->add_option("--config", config_path)->required();
    measure->add_option("--checkpoint", checkpoint_path)->required();
    measure->add_option("--rep", representation, "actor|critic|shared|auto");
    measure->add_option("--out", out_path, "also write the report here");

    auto* verify = app.add_subcommand("verify", "exact-enumeration theory checks");
    verify->add_option("--seed", verify_seed);
    verify->add_option("--out", out_path, "also write the report here");

    auto* sweep = app.add_subcommand("sweep", "grid of runs over a declared axis");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--axis", axis, "model_width|aux_batch_levels|coupling");
    sweep->add_option("--values", values_text, "comma-separated axis values");
    sweep->add_option("--seeds", seeds_text);
    sweep->add_option("--out", out_dir);

    auto* report = app.add_subcommand("report", "score table and MI CSVs from finished runs");
    report->add_option("--runs", runs_dir, "directory containing run records")->required();
    report->add_option("--out", out_dir, "report output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, seeds_text, out_dir);
        if (measure->parsed())
            return cmd_measure(config_path, checkpoint_path, representation, out_path);
        if (verify->parsed()) return cmd_verify(verify_seed, out_path);
        if (sweep->parsed()) return cmd_sweep(config_path, axis, values_text, seeds_text, out_dir);
        if (report->parsed()) return cmd_report(runs_dir, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
