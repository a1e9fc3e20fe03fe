#include "replab/env/manifest.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <map>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace replab::env {

namespace {

void append_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_double(std::string& buf, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    append_u64(buf, bits);
}

std::string canonical_bytes(const LevelContext& level) {
    std::string buf;
    if (std::holds_alternative<AssemblyLevel>(level.payload)) {
        const auto& a = level.assembly();
        buf += "assembly";
        append_u64(buf, static_cast<std::uint64_t>(a.n_parts()));
        append_u64(buf, static_cast<std::uint64_t>(a.reference_spec.size()));
        for (int i = 0; i < a.reference_spec.size(); ++i) append_double(buf, a.reference_spec(i));
        for (const auto& part : a.parts) {
            buf.push_back(part.defective ? 1 : 0);
            for (int i = 0; i < part.features.size(); ++i) append_double(buf, part.features(i));
        }
    } else {
        const auto& g = level.gridworld();
        buf += "gridworld";
        append_u64(buf, static_cast<std::uint64_t>(g.size));
        for (auto w : g.walls) buf.push_back(static_cast<char>(w));
        append_u64(buf, static_cast<std::uint64_t>(g.start_r));
        append_u64(buf, static_cast<std::uint64_t>(g.start_c));
        append_u64(buf, static_cast<std::uint64_t>(g.goal_r));
        append_u64(buf, static_cast<std::uint64_t>(g.goal_c));
        for (int i = 0; i < g.texture.size(); ++i) append_double(buf, g.texture(i));
    }
    return buf;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace

std::string payload_digest(const LevelContext& level) { return sha256_hex(canonical_bytes(level)); }

void write_manifest(std::ostream& os, EnvKind kind, const std::vector<LevelContext>& levels,
                    const AssemblyParams& ap, const GridworldParams& gp) {
    os.precision(17);
    os << "replab-levels v1 kind=" << to_string(kind) << " count=" << levels.size() << "\n";
    if (kind == EnvKind::Assembly) {
        os << "params min_parts=" << ap.min_parts << " max_parts=" << ap.max_parts
           << " defect_prob=" << ap.defect_prob << " spec_dim=" << ap.spec_dim
           << " reward_correct=" << ap.reward_correct << " reward_mistake=" << ap.reward_mistake
           << " gamma=" << ap.gamma << "\n";
    } else {
        os << "params size=" << gp.size << " view=" << gp.view << " texture_dim=" << gp.texture_dim
           << " wall_prob=" << gp.wall_prob << " max_steps=" << gp.max_steps
           << " n_actions=" << gp.n_actions << " goal_reward=" << gp.goal_reward
           << " gamma=" << gp.gamma << "\n";
    }
    for (const auto& level : levels)
        os << "level context_id=" << level.context_id << " seed=" << level.seed
           << " digest=" << payload_digest(level) << "\n";
}

namespace {

std::map<std::string, std::string> parse_kv_line(const std::string& line, std::size_t skip_words) {
    std::istringstream ls(line);
    std::string tok;
    for (std::size_t i = 0; i < skip_words; ++i) ls >> tok;
    std::map<std::string, std::string> kv;
    while (ls >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

}  // namespace

std::vector<LevelContext> read_manifest(std::istream& is, EnvKind& kind, AssemblyParams& ap,
                                        GridworldParams& gp) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("manifest: empty file");
    {
        std::istringstream head(line);
        std::string magic, version;
        head >> magic >> version;
        if (magic != "replab-levels" || version != "v1")
            throw std::runtime_error("manifest: unsupported header: " + line);
    }
    auto header = parse_kv_line(line, 2);
    kind = env_kind_from_string(header.at("kind"));

    if (!std::getline(is, line) || line.rfind("params ", 0) != 0)
        throw std::runtime_error("manifest: missing params line");
    auto params = parse_kv_line(line, 1);
    if (kind == EnvKind::Assembly) {
        ap.min_parts = std::stoi(params.at("min_parts"));
        ap.max_parts = std::stoi(params.at("max_parts"));
        ap.defect_prob = std::stod(params.at("defect_prob"));
        ap.spec_dim = std::stoi(params.at("spec_dim"));
        ap.reward_correct = std::stod(params.at("reward_correct"));
        ap.reward_mistake = std::stod(params.at("reward_mistake"));
        ap.gamma = std::stod(params.at("gamma"));
    } else {
        gp.size = std::stoi(params.at("size"));
        gp.view = std::stoi(params.at("view"));
        gp.texture_dim = std::stoi(params.at("texture_dim"));
        gp.wall_prob = std::stod(params.at("wall_prob"));
        gp.max_steps = std::stoi(params.at("max_steps"));
        gp.n_actions = std::stoi(params.at("n_actions"));
        gp.goal_reward = std::stod(params.at("goal_reward"));
        gp.gamma = std::stod(params.at("gamma"));
    }

    std::vector<LevelContext> levels;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("level ", 0) != 0) throw std::runtime_error("manifest: bad line: " + line);
        auto kv = parse_kv_line(line, 1);
        LevelContext ctx;
        ctx.context_id = std::stoi(kv.at("context_id"));
        ctx.seed = std::stoull(kv.at("seed"));
        Rng rng(ctx.seed);
        if (kind == EnvKind::Assembly)
            ctx.payload = make_assembly_level(rng, ap);
        else
            ctx.payload = make_gridworld_level(rng, gp);
        if (payload_digest(ctx) != kv.at("digest"))
            throw std::runtime_error("manifest: digest mismatch for context " +
                                     std::to_string(ctx.context_id));
        levels.push_back(std::move(ctx));
    }
    return levels;
}

void save_manifest_file(const std::string& path, EnvKind kind,
                        const std::vector<LevelContext>& levels, const AssemblyParams& ap,
                        const GridworldParams& gp) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open manifest for writing: " + path);
    write_manifest(os, kind, levels, ap, gp);
}

std::vector<LevelContext> load_manifest_file(const std::string& path, EnvKind& kind,
                                             AssemblyParams& ap, GridworldParams& gp) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest: " + path);
    return read_manifest(is, kind, ap, gp);
}

}  // namespace replab::env
