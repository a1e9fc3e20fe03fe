#include "replab/harness/run.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <fstream>
#include <thread>

#include "replab/env/manifest.hpp"
#include "replab/nn/checkpoint.hpp"

namespace replab::harness {

using nlohmann::json;

std::string run_label(const ExperimentConfig& cfg) {
    std::string label = agents::to_string(cfg.algorithm) + ":" + agents::to_string(cfg.coupling);
    for (const auto& a : cfg.attachments) {
        if (a.coefficient == 0.0) continue;
        label += "+" + aux::to_string(a.objective) + "(" + aux::to_string(a.target) + ")";
    }
    return label;
}

namespace {

json log_record_to_json(const agents::LogRecord& r) {
    json j;
    j["env_steps"] = r.env_steps;
    if (std::isfinite(r.train_return)) j["train_return"] = r.train_return;
    if (std::isfinite(r.test_return)) j["test_return"] = r.test_return;
    j["policy_loss"] = r.policy_loss;
    j["value_loss"] = r.value_loss;
    j["entropy"] = r.entropy;
    j["clip_fraction"] = r.clip_fraction;
    if (std::isfinite(r.aux_phase_loss)) j["aux_phase_loss"] = r.aux_phase_loss;
    for (const auto& [tag, v] : r.attachment_losses) j["aux:" + tag] = v;
    return j;
}

json mi_report_to_json(const mi::MiReport& r) {
    json j;
    j["representation"] = r.representation;
    j["k"] = r.k;
    j["n"] = r.n;
    auto metric = [](const mi::MiEstimate& e) {
        return json{{"value", e.clamped()}, {"raw", e.value}};
    };
    j["z_level"] = metric(r.z.level);
    j["z_value"] = metric(r.z.value);
    j["zz_action"] = metric(r.z.action);
    j["z_next"] = metric(r.z.next);
    j["o_level"] = metric(r.obs.level);
    j["o_value"] = metric(r.obs.value);
    j["oo_action"] = metric(r.obs.action);
    j["o_next"] = metric(r.obs.next);
    auto put_compression = [&j](const char* key, const std::optional<double>& c) {
        if (c) j[key] = *c;
    };
    put_compression("compression_level", r.compression_level);
    put_compression("compression_value", r.compression_value);
    put_compression("compression_action", r.compression_action);
    put_compression("compression_next", r.compression_next);
    return j;
}

mi::MiReport mi_report_from_json(const json& j) {
    mi::MiReport r;
    r.representation = j.at("representation").get<std::string>();
    r.k = j.at("k").get<int>();
    r.n = j.at("n").get<int>();
    auto metric = [&j](const char* key) {
        mi::MiEstimate e;
        e.value = j.at(key).at("raw").get<double>();
        return e;
    };
    r.z.level = metric("z_level");
    r.z.value = metric("z_value");
    r.z.action = metric("zz_action");
    r.z.next = metric("z_next");
    r.obs.level = metric("o_level");
    r.obs.value = metric("o_value");
    r.obs.action = metric("oo_action");
    r.obs.next = metric("o_next");
    if (j.contains("compression_level")) r.compression_level = j["compression_level"].get<double>();
    if (j.contains("compression_value")) r.compression_value = j["compression_value"].get<double>();
    if (j.contains("compression_action"))
        r.compression_action = j["compression_action"].get<double>();
    if (j.contains("compression_next")) r.compression_next = j["compression_next"].get<double>();
    return r;
}

mi::MiReport measure_representation(const agents::ActorCriticModel& model,
                                    const ExperimentConfig& cfg,
                                    const std::vector<env::LevelContext>& levels,
                                    const std::string& representation, std::uint64_t seed) {
    agents::RolloutCollector collector(cfg.kind, cfg.assembly, cfg.gridworld, levels,
                                       cfg.train.num_envs,
                                       derive_stream(seed, "measure.collect"));
    auto episodes = collector.collect_episodes(model, cfg.collection_steps);
    mi::RepresentationFn phi;
    if (representation == "critic")
        phi = [&model](const Eigen::VectorXd& o) { return model.critic_latent(o); };
    else
        phi = [&model](const Eigen::VectorXd& o) { return model.actor_latent(o); };
    auto sample = mi::build_analysis_sample(episodes, phi, cfg.train.gamma, cfg.analysis_n,
                                            derive_stream(seed, "measure.sample"));
    return mi::compute_metric_suite(sample, representation, cfg.analysis_k,
                                    derive_stream(seed, "measure.jitter"));
}

}  // namespace

RunRecord execute_run(const ExperimentConfig& cfg, std::uint64_t seed,
                      const std::filesystem::path& out_dir, bool with_bound_check) {
    const auto t0 = std::chrono::steady_clock::now();

    RunRecord record;
    record.run_id = cfg.name + "-seed" + std::to_string(seed);
    record.config_digest = config_digest(cfg);
    record.label = run_label(cfg);
    record.kind = cfg.kind;
    record.algorithm = cfg.algorithm;
    record.coupling = cfg.coupling;
    record.seed = seed;
    if (cfg.sweep_axis == SweepAxis::ModelWidth)
        record.sweep_value = cfg.train.width_multiplier;
    else if (cfg.sweep_axis == SweepAxis::AuxBatchLevels)
        record.sweep_value = cfg.train.n_pi;

    const auto run_dir = out_dir / record.run_id;
    std::filesystem::create_directories(run_dir / "checkpoints");
    std::filesystem::create_directories(run_dir / "logs");
    std::filesystem::create_directories(run_dir / "reports");

    {
        std::ofstream cfg_out(run_dir / "config.cfg");
        write_config(cfg_out, cfg);
    }

    auto set = env::sample_level_set(cfg.kind, cfg.train_levels, cfg.test_levels, cfg.level_seed,
                                     cfg.assembly, cfg.gridworld);
    env::save_manifest_file((run_dir / "levels.manifest").string(), cfg.kind, set.train,
                            cfg.assembly, cfg.gridworld);

    auto result = agents::train(cfg.algorithm, cfg.coupling, cfg.train, cfg.kind, cfg.assembly,
                                cfg.gridworld, set.train, set.test, cfg.budget, seed,
                                cfg.attachments);
    record.env_steps = result.env_steps;

    {
        std::ofstream log_out(run_dir / "logs" / "metrics.jsonl");
        for (const auto& r : result.log.records) log_out << log_record_to_json(r).dump() << "\n";
    }
    nn::save_checkpoint_file((run_dir / "checkpoints" / "final.ckpt").string(),
                             result.model.gather_params());

    // final returns from a dedicated evaluation pass
    record.final_train_return = agents::evaluate_return(
        result.model, cfg.kind, cfg.assembly, cfg.gridworld, set.train, 256,
        derive_stream(seed, "final.train"));
    record.final_test_return = agents::evaluate_return(
        result.model, cfg.kind, cfg.assembly, cfg.gridworld, set.test, 256,
        derive_stream(seed, "final.test"));

    // measurement pipeline
    std::vector<std::string> representations;
    if (cfg.coupling == agents::Coupling::Coupled)
        representations = {"shared"};
    else
        representations = {"actor", "critic"};
    for (const auto& rep : representations) {
        auto report = measure_representation(result.model, cfg, set.train, rep,
                                             derive_stream(seed, "measure." + rep));
        std::ofstream rep_out(run_dir / "reports" / ("mi_" + rep + ".txt"));
        mi::write_report(rep_out, report);
        record.mi_reports.push_back(std::move(report));
    }

    if (with_bound_check && cfg.kind == env::EnvKind::Assembly) {
        record.bound = theory::generalisation_bound_check(
            result.model, cfg.assembly, set.train, set.test, cfg.collection_steps, cfg.analysis_n,
            cfg.analysis_k, 512, derive_stream(seed, "bound"));
        record.has_bound = true;
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json j;
    j["run_id"] = record.run_id;
    j["config_digest"] = record.config_digest;
    j["label"] = record.label;
    j["env"] = env::to_string(record.kind);
    j["algorithm"] = agents::to_string(record.algorithm);
    j["coupling"] = agents::to_string(record.coupling);
    j["seed"] = record.seed;
    if (std::isfinite(record.sweep_value)) j["sweep_value"] = record.sweep_value;
    j["env_steps"] = record.env_steps;
    j["final_train_return"] = record.final_train_return;
    j["final_test_return"] = record.final_test_return;
    j["wall_seconds"] = record.wall_seconds;
    j["mi_reports"] = json::array();
    for (const auto& r : record.mi_reports) j["mi_reports"].push_back(mi_report_to_json(r));
    if (record.has_bound) {
        j["bound"] = {{"train_return", record.bound.train_return},
                      {"test_return", record.bound.test_return},
                      {"gap", record.bound.gap},
                      {"mi_za_level", record.bound.mi_za_level},
                      {"d_constant", record.bound.d_constant},
                      {"train_level_count", record.bound.train_level_count},
                      {"bound", record.bound.bound},
                      {"bound_with_slack", record.bound.bound_with_slack},
                      {"holds", record.bound.holds}};
    }
    std::ofstream rec_out(run_dir / "record.json");
    rec_out << j.dump(2) << "\n";
    return record;
}

RunRecord load_run_record(const std::filesystem::path& run_dir) {
    std::ifstream in(run_dir / "record.json");
    if (!in) throw std::runtime_error("no record.json in " + run_dir.string());
    json j;
    in >> j;
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.kind = env::env_kind_from_string(j.at("env").get<std::string>());
    r.algorithm = agents::algorithm_from_string(j.at("algorithm").get<std::string>());
    r.coupling = agents::coupling_from_string(j.at("coupling").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("sweep_value")) r.sweep_value = j["sweep_value"].get<double>();
    r.env_steps = j.at("env_steps").get<long long>();
    r.final_train_return = j.at("final_train_return").get<double>();
    r.final_test_return = j.at("final_test_return").get<double>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& jr : j.at("mi_reports")) r.mi_reports.push_back(mi_report_from_json(jr));
    if (j.contains("bound")) {
        const auto& b = j["bound"];
        r.has_bound = true;
        r.bound.train_return = b.at("train_return").get<double>();
        r.bound.test_return = b.at("test_return").get<double>();
        r.bound.gap = b.at("gap").get<double>();
        r.bound.mi_za_level = b.at("mi_za_level").get<double>();
        r.bound.d_constant = b.at("d_constant").get<double>();
        r.bound.train_level_count = b.at("train_level_count").get<int>();
        r.bound.bound = b.at("bound").get<double>();
        r.bound.bound_with_slack = b.at("bound_with_slack").get<double>();
        r.bound.holds = b.at("holds").get<bool>();
    }
    return r;
}

std::vector<RunRecord> load_run_records(const std::filesystem::path& root) {
    std::vector<RunRecord> records;
    if (std::filesystem::exists(root / "record.json")) {
        records.push_back(load_run_record(root));
        return records;
    }
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == "record.json")
            records.push_back(load_run_record(entry.path().parent_path()));
    }
    std::sort(records.begin(), records.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.run_id < b.run_id; });
    return records;
}

int worker_count_from_env(int cells) {
    if (const char* env_value = std::getenv("REPLAB_WORKERS")) {
        int w = std::stoi(env_value);
        if (w < 1) w = 1;
        return std::min(w, cells);
    }
    unsigned hw = std::thread::hardware_concurrency();
    int fallback = hw == 0 ? 1 : static_cast<int>(hw / 2);
    return std::max(1, std::min(fallback, cells));
}

std::vector<RunRecord> run_many(const std::vector<std::pair<ExperimentConfig, std::uint64_t>>& cells,
                                const std::filesystem::path& out_dir, bool with_bound_check) {
    std::vector<RunRecord> records(cells.size());
    const int workers = worker_count_from_env(static_cast<int>(cells.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::mutex error_mutex;
    std::string first_error;
    auto body = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            try {
                records[i] = execute_run(cells[i].first, cells[i].second, out_dir, with_bound_check);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty())
                    first_error = cells[i].first.name + " seed " +
                                  std::to_string(cells[i].second) + ": " + e.what();
            }
        }
    };
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error("run failed: " + first_error);
    return records;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value) {
    ExperimentConfig out = config;
    switch (config.sweep_axis) {
        case SweepAxis::ModelWidth:
            out.train.width_multiplier = value;
            out.name = config.name + "-w" + std::to_string(value);
            break;
        case SweepAxis::AuxBatchLevels:
            out.train.n_pi = static_cast<int>(value);
            out.name = config.name + "-npi" + std::to_string(static_cast<int>(value));
            break;
        case SweepAxis::Coupling:
            out.coupling = value < 0.5 ? agents::Coupling::Coupled : agents::Coupling::Decoupled;
            out.name = config.name + "-" + agents::to_string(out.coupling);
            break;
        case SweepAxis::None:
            throw std::invalid_argument("sweep: config declares no sweep axis");
    }
    return out;
}

std::vector<RunRecord> sweep(const ExperimentConfig& config,
                             const std::vector<std::uint64_t>& seeds,
                             const std::filesystem::path& out_dir) {
    if (config.sweep_axis == SweepAxis::None)
        throw std::invalid_argument("sweep: config declares no sweep axis");
    if (config.sweep_values.empty()) throw std::invalid_argument("sweep: no axis values declared");
    std::vector<std::pair<ExperimentConfig, std::uint64_t>> cells;
    for (double value : config.sweep_values)
        for (auto seed : seeds) cells.emplace_back(apply_sweep_value(config, value), seed);
    return run_many(cells, out_dir);
}

}  // namespace replab::harness
