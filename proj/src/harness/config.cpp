#include "replab/harness/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace replab::harness {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "yes" || v == "true" || v == "1") return true;
    if (v == "no" || v == "false" || v == "0") return false;
    throw std::invalid_argument("config: bad boolean value: " + v);
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::None: return "none";
        case SweepAxis::ModelWidth: return "model_width";
        case SweepAxis::AuxBatchLevels: return "aux_batch_levels";
        case SweepAxis::Coupling: return "coupling";
    }
    return "none";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "none") return SweepAxis::None;
    if (s == "model_width") return SweepAxis::ModelWidth;
    if (s == "aux_batch_levels") return SweepAxis::AuxBatchLevels;
    if (s == "coupling") return SweepAxis::Coupling;
    throw std::invalid_argument("unknown sweep axis: " + s);
}

aux::AttachmentConfig parse_attachment(const std::string& text,
                                       const std::map<std::string, std::string>& extra_params) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3)
        throw std::invalid_argument("attachment must be objective:target:coefficient, got " + text);
    aux::AttachmentConfig c;
    c.objective = aux::objective_from_string(parts[0]);
    c.target = aux::target_from_string(parts[1]);
    c.coefficient = std::stod(parts[2]);
    for (const auto& [key, value] : extra_params) {
        if (key == "target_net_tau") c.target_net_tau = std::stod(value);
        else if (key == "mico_beta_theta") c.mico_beta_theta = std::stod(value);
        else if (key == "in_dist_weight") c.in_dist_weight = std::stod(value);
        else if (key == "ood_state_weight") c.ood_state_weight = std::stod(value);
        else if (key == "ood_action_weight") c.ood_action_weight = std::stod(value);
        else if (key == "aug_noise_sigma") c.aug_noise_sigma = std::stod(value);
        else if (key == "aug_dropout_prob") c.aug_dropout_prob = std::stod(value);
        else throw std::invalid_argument("unknown attachment parameter: " + key);
    }
    return c;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    auto range_pos = text.find("..");
    if (range_pos != std::string::npos) {
        std::uint64_t lo = std::stoull(trim(text.substr(0, range_pos)));
        std::uint64_t hi = std::stoull(trim(text.substr(range_pos + 2)));
        if (hi < lo) throw std::invalid_argument("bad seed range: " + text);
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw std::invalid_argument("empty seed list: " + text);
    return seeds;
}

ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> aux_extras;
    std::vector<std::string> attachment_specs;

    using Setter = std::function<void(const std::string&)>;
    std::map<std::string, Setter> schema;
    auto reg = [&schema](const std::string& key, Setter setter) { schema[key] = std::move(setter); };

    reg("experiment.name", [&](const std::string& v) { cfg.name = v; });
    reg("experiment.env", [&](const std::string& v) { cfg.kind = env::env_kind_from_string(v); });
    reg("experiment.train_levels", [&](const std::string& v) { cfg.train_levels = std::stoi(v); });
    reg("experiment.test_levels", [&](const std::string& v) { cfg.test_levels = std::stoi(v); });
    reg("experiment.level_seed", [&](const std::string& v) { cfg.level_seed = std::stoull(v); });
    reg("experiment.budget", [&](const std::string& v) { cfg.budget = std::stoll(v); });
    reg("experiment.algorithm",
        [&](const std::string& v) { cfg.algorithm = agents::algorithm_from_string(v); });
    reg("experiment.coupling",
        [&](const std::string& v) { cfg.coupling = agents::coupling_from_string(v); });

    reg("env.assembly.min_parts", [&](const std::string& v) { cfg.assembly.min_parts = std::stoi(v); });
    reg("env.assembly.max_parts", [&](const std::string& v) { cfg.assembly.max_parts = std::stoi(v); });
    reg("env.assembly.defect_prob",
        [&](const std::string& v) { cfg.assembly.defect_prob = std::stod(v); });
    reg("env.assembly.spec_dim", [&](const std::string& v) { cfg.assembly.spec_dim = std::stoi(v); });
    reg("env.assembly.reward_correct",
        [&](const std::string& v) { cfg.assembly.reward_correct = std::stod(v); });
    reg("env.assembly.reward_mistake",
        [&](const std::string& v) { cfg.assembly.reward_mistake = std::stod(v); });
    reg("env.gridworld.size", [&](const std::string& v) { cfg.gridworld.size = std::stoi(v); });
    reg("env.gridworld.view", [&](const std::string& v) { cfg.gridworld.view = std::stoi(v); });
    reg("env.gridworld.texture_dim",
        [&](const std::string& v) { cfg.gridworld.texture_dim = std::stoi(v); });
    reg("env.gridworld.wall_prob",
        [&](const std::string& v) { cfg.gridworld.wall_prob = std::stod(v); });
    reg("env.gridworld.max_steps",
        [&](const std::string& v) { cfg.gridworld.max_steps = std::stoi(v); });
    reg("env.gridworld.n_actions",
        [&](const std::string& v) { cfg.gridworld.n_actions = std::stoi(v); });
    reg("env.gridworld.goal_reward",
        [&](const std::string& v) { cfg.gridworld.goal_reward = std::stod(v); });

    auto& t = cfg.train;
    reg("train.gamma", [&](const std::string& v) {
        t.gamma = std::stod(v);
        cfg.assembly.gamma = t.gamma;
        cfg.gridworld.gamma = t.gamma;
    });
    reg("train.gae_lambda", [&](const std::string& v) { t.gae_lambda = std::stod(v); });
    reg("train.rollout_len", [&](const std::string& v) { t.rollout_len = std::stoi(v); });
    reg("train.num_envs", [&](const std::string& v) { t.num_envs = std::stoi(v); });
    reg("train.minibatches_per_epoch",
        [&](const std::string& v) { t.minibatches_per_epoch = std::stoi(v); });
    reg("train.ppo_epochs", [&](const std::string& v) { t.ppo_epochs = std::stoi(v); });
    reg("train.actor_epochs", [&](const std::string& v) { t.actor_epochs = std::stoi(v); });
    reg("train.critic_epochs", [&](const std::string& v) { t.critic_epochs = std::stoi(v); });
    reg("train.policy_phase_epochs",
        [&](const std::string& v) { t.policy_phase_epochs = std::stoi(v); });
    reg("train.clip_eps", [&](const std::string& v) { t.clip_eps = std::stod(v); });
    reg("train.entropy_coef", [&](const std::string& v) { t.entropy_coef = std::stod(v); });
    reg("train.value_coef", [&](const std::string& v) { t.value_coef = std::stod(v); });
    reg("train.lr", [&](const std::string& v) { t.lr = std::stod(v); });
    reg("train.adam_eps", [&](const std::string& v) { t.adam_eps = std::stod(v); });
    reg("train.max_grad_norm", [&](const std::string& v) { t.max_grad_norm = std::stod(v); });
    reg("train.return_normalization",
        [&](const std::string& v) { t.return_normalization = parse_bool(v); });
    reg("train.n_pi", [&](const std::string& v) { t.n_pi = std::stoi(v); });
    reg("train.aux_epochs", [&](const std::string& v) { t.aux_epochs = std::stoi(v); });
    reg("train.aux_minibatch_size",
        [&](const std::string& v) { t.aux_minibatch_size = std::stoi(v); });
    reg("train.beta_clone", [&](const std::string& v) { t.beta_clone = std::stod(v); });
    reg("train.aux_distill_coef",
        [&](const std::string& v) { t.aux_distill_coef = std::stod(v); });
    reg("train.delayed_value_coef",
        [&](const std::string& v) { t.delayed_value_coef = std::stod(v); });
    reg("train.hidden", [&](const std::string& v) { t.hidden = std::stoi(v); });
    reg("train.latent", [&](const std::string& v) { t.latent = std::stoi(v); });
    reg("train.width_multiplier",
        [&](const std::string& v) { t.width_multiplier = std::stod(v); });
    reg("train.eval_episodes", [&](const std::string& v) { t.eval_episodes = std::stoi(v); });
    reg("train.eval_interval", [&](const std::string& v) { t.eval_interval = std::stoi(v); });

    reg("aux.attachments", [&](const std::string& v) {
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ';'))
            if (!trim(item).empty()) attachment_specs.push_back(trim(item));
    });
    for (const char* key : {"target_net_tau", "mico_beta_theta", "in_dist_weight",
                            "ood_state_weight", "ood_action_weight", "aug_noise_sigma",
                            "aug_dropout_prob"}) {
        reg(std::string("aux.") + key,
            [&aux_extras, key](const std::string& v) { aux_extras[key] = v; });
    }

    reg("analysis.collection_steps",
        [&](const std::string& v) { cfg.collection_steps = std::stoi(v); });
    reg("analysis.n", [&](const std::string& v) { cfg.analysis_n = std::stoi(v); });
    reg("analysis.k", [&](const std::string& v) { cfg.analysis_k = std::stoi(v); });

    reg("sweep.axis", [&](const std::string& v) { cfg.sweep_axis = sweep_axis_from_string(v); });
    reg("sweep.values", [&](const std::string& v) {
        cfg.sweep_values.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.sweep_values.push_back(std::stod(trim(item)));
    });

    std::string line, section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        std::string key = section.empty() ? trim(line.substr(0, eq))
                                          : section + "." + trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = schema.find(key);
        if (it == schema.end())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        try {
            it->second(value);
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + " (" + key +
                                        "): " + e.what());
        }
    }

    for (const auto& spec : attachment_specs)
        cfg.attachments.push_back(parse_attachment(spec, aux_extras));

    if (cfg.train_levels < 1 || cfg.test_levels < 0)
        throw std::invalid_argument("config: level counts out of range");
    if (cfg.train.clip_eps <= 0.0 || cfg.train.clip_eps >= 1.0)
        throw std::invalid_argument("config: clip_eps must lie in (0,1)");
    if (cfg.train.gamma <= 0.0 || cfg.train.gamma > 1.0)
        throw std::invalid_argument("config: gamma must lie in (0,1]");
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path.string());
    return parse_config(is);
}

namespace {

std::string attachment_text(const aux::AttachmentConfig& a) {
    std::ostringstream os;
    os.precision(17);
    os << aux::to_string(a.objective) << ":" << aux::to_string(a.target) << ":" << a.coefficient;
    return os.str();
}

}  // namespace

std::string canonical_config_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    std::map<std::string, std::string> kv;
    auto put = [&kv](const std::string& key, auto value) {
        std::ostringstream v;
        v.precision(17);
        v << value;
        kv[key] = v.str();
    };

    put("experiment.name", cfg.name);
    put("experiment.env", env::to_string(cfg.kind));
    put("experiment.train_levels", cfg.train_levels);
    put("experiment.test_levels", cfg.test_levels);
    put("experiment.level_seed", cfg.level_seed);
    put("experiment.budget", cfg.budget);
    put("experiment.algorithm", agents::to_string(cfg.algorithm));
    put("experiment.coupling", agents::to_string(cfg.coupling));

    put("env.assembly.min_parts", cfg.assembly.min_parts);
    put("env.assembly.max_parts", cfg.assembly.max_parts);
    put("env.assembly.defect_prob", cfg.assembly.defect_prob);
    put("env.assembly.spec_dim", cfg.assembly.spec_dim);
    put("env.assembly.reward_correct", cfg.assembly.reward_correct);
    put("env.assembly.reward_mistake", cfg.assembly.reward_mistake);
    put("env.gridworld.size", cfg.gridworld.size);
    put("env.gridworld.view", cfg.gridworld.view);
    put("env.gridworld.texture_dim", cfg.gridworld.texture_dim);
    put("env.gridworld.wall_prob", cfg.gridworld.wall_prob);
    put("env.gridworld.max_steps", cfg.gridworld.max_steps);
    put("env.gridworld.n_actions", cfg.gridworld.n_actions);
    put("env.gridworld.goal_reward", cfg.gridworld.goal_reward);

    const auto& t = cfg.train;
    put("train.gamma", t.gamma);
    put("train.gae_lambda", t.gae_lambda);
    put("train.rollout_len", t.rollout_len);
    put("train.num_envs", t.num_envs);
    put("train.minibatches_per_epoch", t.minibatches_per_epoch);
    put("train.ppo_epochs", t.ppo_epochs);
    put("train.actor_epochs", t.actor_epochs);
    put("train.critic_epochs", t.critic_epochs);
    put("train.policy_phase_epochs", t.policy_phase_epochs);
    put("train.clip_eps", t.clip_eps);
    put("train.entropy_coef", t.entropy_coef);
    put("train.value_coef", t.value_coef);
    put("train.lr", t.lr);
    put("train.adam_eps", t.adam_eps);
    put("train.max_grad_norm", t.max_grad_norm);
    put("train.return_normalization", t.return_normalization ? "yes" : "no");
    put("train.n_pi", t.n_pi);
    put("train.aux_epochs", t.aux_epochs);
    put("train.aux_minibatch_size", t.aux_minibatch_size);
    put("train.beta_clone", t.beta_clone);
    put("train.aux_distill_coef", t.aux_distill_coef);
    put("train.delayed_value_coef", t.delayed_value_coef);
    put("train.hidden", t.hidden);
    put("train.latent", t.latent);
    put("train.width_multiplier", t.width_multiplier);
    put("train.eval_episodes", t.eval_episodes);
    put("train.eval_interval", t.eval_interval);

    std::ostringstream att;
    for (std::size_t i = 0; i < cfg.attachments.size(); ++i) {
        if (i) att << ";";
        att << attachment_text(cfg.attachments[i]);
    }
    put("aux.attachments", att.str());
    if (!cfg.attachments.empty()) {
        const auto& a = cfg.attachments.front();
        put("aux.target_net_tau", a.target_net_tau);
        put("aux.mico_beta_theta", a.mico_beta_theta);
        put("aux.in_dist_weight", a.in_dist_weight);
        put("aux.ood_state_weight", a.ood_state_weight);
        put("aux.ood_action_weight", a.ood_action_weight);
        put("aux.aug_noise_sigma", a.aug_noise_sigma);
        put("aux.aug_dropout_prob", a.aug_dropout_prob);
    }

    put("analysis.collection_steps", cfg.collection_steps);
    put("analysis.n", cfg.analysis_n);
    put("analysis.k", cfg.analysis_k);
    put("sweep.axis", to_string(cfg.sweep_axis));
    std::ostringstream sv;
    for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
        if (i) sv << ",";
        sv << cfg.sweep_values[i];
    }
    put("sweep.values", sv.str());

    for (const auto& [key, value] : kv) os << key << "=" << value << "\n";
    return os.str();
}

void write_config(std::ostream& os, const ExperimentConfig& cfg) {
    // canonical text doubles as a loadable config once sectioned
    std::istringstream lines(canonical_config_text(cfg));
    std::string line, current;
    while (std::getline(lines, line)) {
        auto eq = line.find('=');
        auto key = line.substr(0, eq);
        auto dot = key.rfind('.');
        auto section = key.substr(0, dot);
        if (section != current) {
            os << "[" << section << "]\n";
            current = section;
        }
        os << key.substr(dot + 1) << " = " << line.substr(eq + 1) << "\n";
    }
}

std::string config_digest(const ExperimentConfig& cfg) {
    return sha256_hex(canonical_config_text(cfg));
}

}  // namespace replab::harness
