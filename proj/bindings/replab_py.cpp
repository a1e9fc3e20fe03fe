#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "replab/harness/report.hpp"
#include "replab/nn/checkpoint.hpp"

namespace py = pybind11;
using namespace replab;

namespace {

// A level set plus one live environment instance, reset on demand.
class PyEnvironment {
public:
    PyEnvironment(const std::string& kind, int train_levels, int test_levels, std::uint64_t seed)
        : kind_(env::env_kind_from_string(kind)) {
        set_ = env::sample_level_set(kind_, train_levels, test_levels, seed, assembly_,
                                     gridworld_);
        env_ = env::make_env(kind_, assembly_, gridworld_);
    }

    int obs_dim() const { return env_->spec().obs_dim; }
    int n_actions() const { return env_->spec().n_actions; }
    int train_level_count() const { return static_cast<int>(set_.train.size()); }
    int test_level_count() const { return static_cast<int>(set_.test.size()); }

    Eigen::VectorXd reset(int level_index, bool test = false) {
        const auto& levels = test ? set_.test : set_.train;
        return env_->reset(levels.at(static_cast<std::size_t>(level_index)));
    }

    py::tuple step(int action) {
        auto out = env_->step(action);
        return py::make_tuple(out.obs, out.reward, out.done);
    }

    bool done() const { return env_->done(); }
    int context_id() const { return env_->context_id(); }

    int optimal_action() const {
        if (kind_ != env::EnvKind::Assembly)
            throw std::invalid_argument("optimal_action: assembly environment only");
        const auto* assembly_env = dynamic_cast<const env::AssemblyEnv*>(env_.get());
        for (const auto& level : set_.train)
            if (level.context_id == assembly_env->context_id())
                return env::assembly::optimal_action(level.assembly(), assembly_env->part_index());
        for (const auto& level : set_.test)
            if (level.context_id == assembly_env->context_id())
                return env::assembly::optimal_action(level.assembly(), assembly_env->part_index());
        throw std::runtime_error("optimal_action: unknown level");
    }

    double optimal_mean_return() const {
        if (kind_ != env::EnvKind::Assembly)
            throw std::invalid_argument("optimal_mean_return: assembly environment only");
        double total = 0.0;
        for (const auto& level : set_.train)
            total += env::assembly::optimal_return(level.assembly(), assembly_.gamma, assembly_);
        return total / static_cast<double>(set_.train.size());
    }

    env::EnvKind kind_;
    env::AssemblyParams assembly_;
    env::GridworldParams gridworld_;
    env::LevelSet set_;
    std::unique_ptr<env::Env> env_;
};

struct PyAgent {
    agents::ActorCriticModel model;
    env::EnvKind kind;
    env::AssemblyParams assembly;
    env::GridworldParams gridworld;
    env::LevelSet set;
    agents::TrainConfig train_config;
    double final_train_return = 0.0;
    double final_test_return = 0.0;
    long long env_steps = 0;

    Eigen::VectorXd policy_logits(const Eigen::VectorXd& obs) const {
        return model.policy(obs).logits;
    }
    Eigen::VectorXd action_probabilities(const Eigen::VectorXd& obs) const {
        return model.policy(obs).probs();
    }
    double value(const Eigen::VectorXd& obs) const { return model.value(obs); }
    Eigen::VectorXd actor_latent(const Eigen::VectorXd& obs) const {
        return model.actor_latent(obs);
    }
    Eigen::VectorXd critic_latent(const Eigen::VectorXd& obs) const {
        return model.critic_latent(obs);
    }
    void save_checkpoint(const std::string& path) const {
        nn::save_checkpoint_file(path, model.gather_params());
    }
};

PyAgent train_agent(const std::string& env_kind, const std::string& algorithm,
                    const std::string& coupling, long long budget, std::uint64_t seed,
                    int train_levels, int test_levels, std::uint64_t level_seed, int num_envs,
                    int rollout_len, const std::vector<std::string>& attachments) {
    PyAgent agent;
    agent.kind = env::env_kind_from_string(env_kind);
    agent.set = env::sample_level_set(agent.kind, train_levels, test_levels, level_seed,
                                      agent.assembly, agent.gridworld);
    agent.train_config.num_envs = num_envs;
    agent.train_config.rollout_len = rollout_len;

    std::vector<aux::AttachmentConfig> aux_configs;
    for (const auto& spec : attachments)
        aux_configs.push_back(harness::parse_attachment(spec, {}));

    auto result = agents::train(agents::algorithm_from_string(algorithm),
                                agents::coupling_from_string(coupling), agent.train_config,
                                agent.kind, agent.assembly, agent.gridworld, agent.set.train,
                                agent.set.test, budget, seed, aux_configs);
    agent.model = std::move(result.model);
    agent.env_steps = result.env_steps;
    agent.final_train_return =
        agents::evaluate_return(agent.model, agent.kind, agent.assembly, agent.gridworld,
                                agent.set.train, 256, derive_stream(seed, "py.final.train"));
    agent.final_test_return =
        agents::evaluate_return(agent.model, agent.kind, agent.assembly, agent.gridworld,
                                agent.set.test, 256, derive_stream(seed, "py.final.test"));
    return agent;
}

py::dict measure_agent(const PyAgent& agent, const std::string& representation,
                       int collection_steps, int n, int k, std::uint64_t seed) {
    agents::RolloutCollector collector(agent.kind, agent.assembly, agent.gridworld,
                                       agent.set.train, agent.train_config.num_envs,
                                       derive_stream(seed, "py.measure"));
    auto episodes = collector.collect_episodes(agent.model, collection_steps);
    const auto& model = agent.model;
    mi::RepresentationFn phi;
    if (representation == "critic")
        phi = [&model](const Eigen::VectorXd& o) { return model.critic_latent(o); };
    else
        phi = [&model](const Eigen::VectorXd& o) { return model.actor_latent(o); };
    auto sample = mi::build_analysis_sample(episodes, phi, agent.train_config.gamma, n,
                                            derive_stream(seed, "py.sample"));
    auto report = mi::compute_metric_suite(sample, representation, k,
                                           derive_stream(seed, "py.jitter"));
    py::dict out;
    out["representation"] = report.representation;
    out["z_level"] = report.z.level.clamped();
    out["z_value"] = report.z.value.clamped();
    out["zz_action"] = report.z.action.clamped();
    out["z_next"] = report.z.next.clamped();
    out["o_level"] = report.obs.level.clamped();
    out["o_value"] = report.obs.value.clamped();
    out["oo_action"] = report.obs.action.clamped();
    out["o_next"] = report.obs.next.clamped();
    if (report.compression_level) out["compression_level"] = *report.compression_level;
    if (report.compression_value) out["compression_value"] = *report.compression_value;
    if (report.compression_action) out["compression_action"] = *report.compression_action;
    if (report.compression_next) out["compression_next"] = *report.compression_next;
    return out;
}

py::list verify_theory(std::uint64_t seed) {
    py::list out;
    for (const auto& r : theory::run_verification_suite(seed)) {
        py::dict d;
        d["name"] = r.name;
        d["passed"] = r.passed;
        d["measured"] = r.measured;
        d["tolerance"] = r.tolerance;
        d["note"] = r.note;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "actor-critic representation laboratory";

    m.def(
        "ksg_mi_cc",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k, std::uint64_t seed) {
            return mi::ksg_mi_cc(x, y, k, seed).value;
        },
        py::arg("x"), py::arg("y"), py::arg("k") = 3, py::arg("seed") = 0,
        "KNN mutual information between two continuous blocks (nats)");
    m.def(
        "mi_cd",
        [](const Eigen::MatrixXd& x, const std::vector<int>& labels, int k, std::uint64_t seed) {
            return mi::mi_cd(x, labels, k, seed).value;
        },
        py::arg("x"), py::arg("labels"), py::arg("k") = 3, py::arg("seed") = 0,
        "mixed continuous/discrete mutual information (nats)");
    m.def("exact_mi_discrete", &mi::exact_mi_discrete, py::arg("joint"),
          "plug-in mutual information of a discrete joint table (nats)");
    m.def(
        "compression_efficiency",
        [](double i_z, double i_o) {
            mi::MiEstimate z, o;
            z.value = i_z;
            o.value = i_o;
            return mi::compression_efficiency(z, o);
        },
        py::arg("i_z"), py::arg("i_o"), "min(I(Z;.)/I(O;.), 1)");

    m.def(
        "welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            auto r = harness::welch_t_test(a, b);
            return py::make_tuple(r.t, r.dof, r.significant);
        },
        py::arg("a"), py::arg("b"), "(t, dof, significant at 0.05)");

    py::class_<PyEnvironment>(m, "Environment")
        .def(py::init<const std::string&, int, int, std::uint64_t>(), py::arg("kind"),
             py::arg("train_levels") = 8, py::arg("test_levels") = 8, py::arg("seed") = 1)
        .def_property_readonly("obs_dim", &PyEnvironment::obs_dim)
        .def_property_readonly("n_actions", &PyEnvironment::n_actions)
        .def_property_readonly("train_level_count", &PyEnvironment::train_level_count)
        .def_property_readonly("test_level_count", &PyEnvironment::test_level_count)
        .def("reset", &PyEnvironment::reset, py::arg("level_index"), py::arg("test") = false)
        .def("step", &PyEnvironment::step, py::arg("action"),
             "returns (observation, reward, done)")
        .def("done", &PyEnvironment::done)
        .def("context_id", &PyEnvironment::context_id)
        .def("optimal_action", &PyEnvironment::optimal_action)
        .def("optimal_mean_return", &PyEnvironment::optimal_mean_return);

    py::class_<PyAgent>(m, "Agent")
        .def_readonly("final_train_return", &PyAgent::final_train_return)
        .def_readonly("final_test_return", &PyAgent::final_test_return)
        .def_readonly("env_steps", &PyAgent::env_steps)
        .def("policy_logits", &PyAgent::policy_logits, py::arg("obs"))
        .def("action_probabilities", &PyAgent::action_probabilities, py::arg("obs"))
        .def("value", &PyAgent::value, py::arg("obs"))
        .def("actor_latent", &PyAgent::actor_latent, py::arg("obs"))
        .def("critic_latent", &PyAgent::critic_latent, py::arg("obs"))
        .def("save_checkpoint", &PyAgent::save_checkpoint, py::arg("path"));

    m.def("train_agent", &train_agent, py::arg("env_kind") = "assembly",
          py::arg("algorithm") = "ppo", py::arg("coupling") = "coupled",
          py::arg("budget") = 20'000, py::arg("seed") = 0, py::arg("train_levels") = 8,
          py::arg("test_levels") = 16, py::arg("level_seed") = 1, py::arg("num_envs") = 8,
          py::arg("rollout_len") = 64, py::arg("attachments") = std::vector<std::string>{},
          py::call_guard<py::gil_scoped_release>(),
          "train an agent and return it with its final train/test returns");

    m.def("measure_agent", &measure_agent, py::arg("agent"), py::arg("representation") = "actor",
          py::arg("collection_steps") = 16384, py::arg("n") = 2048, py::arg("k") = 3,
          py::arg("seed") = 0, "mutual-information metric suite for a trained agent");

    m.def("verify_theory", &verify_theory, py::arg("seed") = 2024,
          "exact-enumeration verification suite; list of check dicts");

    m.attr("__version__") = "0.1.0";
}
