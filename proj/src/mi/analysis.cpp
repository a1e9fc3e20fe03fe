#include "replab/mi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "replab/common/rng.hpp"

namespace replab::mi {

namespace {

struct UsableStep {
    int episode;
    int t;
};

std::vector<UsableStep> usable_steps(const std::vector<EpisodeTrace>& episodes) {
    std::vector<UsableStep> out;
    for (int e = 0; e < static_cast<int>(episodes.size()); ++e) {
        const auto& ep = episodes[static_cast<std::size_t>(e)];
        if (!ep.terminated) continue;  // return-to-go undefined
        const int T = static_cast<int>(ep.obs.size());
        if (ep.actions.size() != ep.obs.size() || ep.rewards.size() != ep.obs.size())
            throw std::invalid_argument("EpisodeTrace: misaligned arrays");
        // even timesteps only, and never the termination step itself
        for (int t = 0; t + 1 < T; t += 2) out.push_back({e, t});
    }
    return out;
}

}  // namespace

int count_usable_timesteps(const std::vector<EpisodeTrace>& episodes) {
    return static_cast<int>(usable_steps(episodes).size());
}

AnalysisSample build_analysis_sample(const std::vector<EpisodeTrace>& episodes,
                                     const RepresentationFn& phi, double gamma, int n,
                                     std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("build_analysis_sample: n must be >= 1");
    auto usable = usable_steps(episodes);
    if (static_cast<int>(usable.size()) < n) {
        std::ostringstream msg;
        msg << "build_analysis_sample: need " << n << " usable timesteps, have " << usable.size()
            << " (deficit " << n - static_cast<int>(usable.size()) << ")";
        throw std::runtime_error(msg.str());
    }

    // uniform subsample without replacement: partial Fisher-Yates
    Rng rng(derive_stream(seed, "analysis.subsample"));
    for (int i = 0; i < n; ++i) {
        int j = i + rng.randint(static_cast<int>(usable.size()) - i);
        std::swap(usable[static_cast<std::size_t>(i)], usable[static_cast<std::size_t>(j)]);
    }
    usable.resize(static_cast<std::size_t>(n));

    // return-to-go per touched episode
    std::map<int, std::vector<double>> rtg;
    for (const auto& u : usable) {
        if (rtg.count(u.episode)) continue;
        const auto& ep = episodes[static_cast<std::size_t>(u.episode)];
        std::vector<double> v(ep.rewards.size(), 0.0);
        double acc = 0.0;
        for (int t = static_cast<int>(ep.rewards.size()) - 1; t >= 0; --t) {
            acc = ep.rewards[static_cast<std::size_t>(t)] + gamma * acc;
            v[static_cast<std::size_t>(t)] = acc;
        }
        rtg[u.episode] = std::move(v);
    }

    const auto& first_obs = episodes[static_cast<std::size_t>(usable.front().episode)]
                                .obs[static_cast<std::size_t>(usable.front().t)];
    const int obs_dim = static_cast<int>(first_obs.size());
    const int z_dim = static_cast<int>(phi(first_obs).size());

    AnalysisSample s;
    s.n = n;
    s.obs.resize(n, obs_dim);
    s.next_obs.resize(n, obs_dim);
    s.z.resize(n, z_dim);
    s.z_next.resize(n, z_dim);
    s.value.resize(n);
    s.action.resize(static_cast<std::size_t>(n));
    s.context.resize(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const auto& u = usable[static_cast<std::size_t>(i)];
        const auto& ep = episodes[static_cast<std::size_t>(u.episode)];
        const auto& o = ep.obs[static_cast<std::size_t>(u.t)];
        const auto& o_next = ep.obs[static_cast<std::size_t>(u.t) + 1];
        s.obs.row(i) = o.transpose();
        s.next_obs.row(i) = o_next.transpose();
        s.z.row(i) = phi(o).transpose();
        s.z_next.row(i) = phi(o_next).transpose();
        s.value(i) = rtg.at(u.episode)[static_cast<std::size_t>(u.t)];
        s.action[static_cast<std::size_t>(i)] = ep.actions[static_cast<std::size_t>(u.t)];
        s.context[static_cast<std::size_t>(i)] = ep.context_id;
    }
    return s;
}

double compression_efficiency(const MiEstimate& i_z, const MiEstimate& i_o) {
    if (i_o.value <= 0.0)
        throw std::domain_error("compression_efficiency: I(O;.) must be positive");
    return std::min(i_z.clamped() / i_o.value, 1.0);
}

namespace {

MetricSet metric_set(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_next,
                     const Eigen::VectorXd& value, const std::vector<int>& action,
                     const std::vector<int>& context, const std::string& prefix, int k,
                     std::uint64_t jitter_seed) {
    MetricSet m;
    m.level = mi_cd(a, context, k, derive_stream(jitter_seed, prefix + ".level"));
    m.level.tag = prefix + ";L";
    m.value = ksg_mi_cc(a, value, k, derive_stream(jitter_seed, prefix + ".value"));
    m.value.tag = prefix + ";V";
    Eigen::MatrixXd pair(a.rows(), a.cols() + a_next.cols());
    pair << a, a_next;
    m.action = mi_cd(pair, action, k, derive_stream(jitter_seed, prefix + ".action"));
    m.action.tag = "(" + prefix + "," + prefix + "');A";
    m.next = ksg_mi_cc(a, a_next, k, derive_stream(jitter_seed, prefix + ".next"));
    m.next.tag = prefix + ";" + prefix + "'";
    return m;
}

std::optional<double> safe_compression(const MiEstimate& z, const MiEstimate& o) {
    if (o.value <= 0.0) return std::nullopt;
    return compression_efficiency(z, o);
}

}  // namespace

MiReport compute_metric_suite(const AnalysisSample& sample, const std::string& representation,
                              int k, std::uint64_t jitter_seed) {
    MiReport r;
    r.representation = representation;
    r.k = k;
    r.n = sample.n;
    r.z = metric_set(sample.z, sample.z_next, sample.value, sample.action, sample.context, "Z", k,
                     derive_stream(jitter_seed, "suite.z"));
    r.obs = metric_set(sample.obs, sample.next_obs, sample.value, sample.action, sample.context,
                       "O", k, derive_stream(jitter_seed, "suite.o"));
    r.compression_level = safe_compression(r.z.level, r.obs.level);
    r.compression_value = safe_compression(r.z.value, r.obs.value);
    r.compression_action = safe_compression(r.z.action, r.obs.action);
    r.compression_next = safe_compression(r.z.next, r.obs.next);
    return r;
}

namespace {

void write_metric(std::ostream& os, const std::string& rep, const char* tag,
                  const MiEstimate& e) {
    os << "metric " << tag << " rep=" << rep << " value=" << e.clamped() << " raw=" << e.value
       << " k=" << e.k << " n=" << e.n << " clamped=" << (e.value < 0.0 ? 1 : 0) << "\n";
}

void write_compression(std::ostream& os, const std::string& rep, const char* tag,
                       const std::optional<double>& c) {
    os << "compression " << tag << " rep=" << rep;
    if (c)
        os << " value=" << *c << "\n";
    else
        os << " value=inapplicable\n";
}

}  // namespace

void write_report(std::ostream& os, const MiReport& r) {
    os.precision(17);
    os << "mi-report v1 rep=" << r.representation << " k=" << r.k << " n=" << r.n << "\n";
    write_metric(os, r.representation, "z_level", r.z.level);
    write_metric(os, r.representation, "z_value", r.z.value);
    write_metric(os, r.representation, "zz_action", r.z.action);
    write_metric(os, r.representation, "z_next", r.z.next);
    write_metric(os, r.representation, "o_level", r.obs.level);
    write_metric(os, r.representation, "o_value", r.obs.value);
    write_metric(os, r.representation, "oo_action", r.obs.action);
    write_metric(os, r.representation, "o_next", r.obs.next);
    write_compression(os, r.representation, "level", r.compression_level);
    write_compression(os, r.representation, "value", r.compression_value);
    write_compression(os, r.representation, "action", r.compression_action);
    write_compression(os, r.representation, "next", r.compression_next);
}

MiReport read_report(std::istream& is) {
    MiReport r;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_report: empty input");
    {
        std::istringstream head(line);
        std::string word, version;
        head >> word >> version;
        if (word != "mi-report" || version != "v1")
            throw std::runtime_error("read_report: bad header: " + line);
        while (head >> word) {
            if (word.rfind("rep=", 0) == 0) r.representation = word.substr(4);
            if (word.rfind("k=", 0) == 0) r.k = std::stoi(word.substr(2));
            if (word.rfind("n=", 0) == 0) r.n = std::stoi(word.substr(2));
        }
    }
    auto parse_kv = [](const std::string& token, const char* key) -> std::optional<std::string> {
        std::string prefix = std::string(key) + "=";
        if (token.rfind(prefix, 0) == 0) return token.substr(prefix.size());
        return std::nullopt;
    };
    while (std::getline(is, line)) {
        if (line.empty()) break;
        std::istringstream ls(line);
        std::string kind, tag;
        ls >> kind >> tag;
        std::string token;
        double raw = 0.0, value = 0.0;
        bool inapplicable = false;
        int k = 0, n = 0;
        while (ls >> token) {
            if (auto v = parse_kv(token, "raw")) raw = std::stod(*v);
            if (auto v = parse_kv(token, "value")) {
                if (*v == "inapplicable")
                    inapplicable = true;
                else
                    value = std::stod(*v);
            }
            if (auto v = parse_kv(token, "k")) k = std::stoi(*v);
            if (auto v = parse_kv(token, "n")) n = std::stoi(*v);
        }
        if (kind == "metric") {
            MiEstimate e;
            e.value = raw;
            e.k = k;
            e.n = n;
            e.tag = tag;
            if (tag == "z_level") r.z.level = e;
            else if (tag == "z_value") r.z.value = e;
            else if (tag == "zz_action") r.z.action = e;
            else if (tag == "z_next") r.z.next = e;
            else if (tag == "o_level") r.obs.level = e;
            else if (tag == "o_value") r.obs.value = e;
            else if (tag == "oo_action") r.obs.action = e;
            else if (tag == "o_next") r.obs.next = e;
        } else if (kind == "compression" && !inapplicable) {
            if (tag == "level") r.compression_level = value;
            else if (tag == "value") r.compression_value = value;
            else if (tag == "action") r.compression_action = value;
            else if (tag == "next") r.compression_next = value;
        }
    }
    return r;
}

}  // namespace replab::mi
