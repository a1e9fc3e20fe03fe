#include "replab/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace replab::nn {

namespace {

constexpr char kMagic[8] = {'R', 'L', 'C', 'P', 'v', '0', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_checkpoint(std::ostream& os, const ParamSet& params) {
    os.write(kMagic, sizeof(kMagic));
    write_u64(os, params.params.size());
    for (const auto& p : params.params) {
        write_u64(os, p.name.size());
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_u64(os, static_cast<std::uint64_t>(p.value.rows()));
        write_u64(os, static_cast<std::uint64_t>(p.value.cols()));
        for (Eigen::Index r = 0; r < p.value.rows(); ++r)
            for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
                std::uint64_t bits;
                double d = p.value(r, c);
                std::memcpy(&bits, &d, sizeof(bits));
                write_u64(os, bits);
            }
    }
    if (!os) throw std::runtime_error("checkpoint: write failed");
}

ParamSet read_checkpoint(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic/version");
    ParamSet out;
    std::uint64_t count = read_u64(is);
    out.params.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t name_len = read_u64(is);
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        std::uint64_t rows = read_u64(is);
        std::uint64_t cols = read_u64(is);
        Eigen::MatrixXd value(rows, cols);
        for (std::uint64_t r = 0; r < rows; ++r)
            for (std::uint64_t c = 0; c < cols; ++c) {
                std::uint64_t bits = read_u64(is);
                double d;
                std::memcpy(&d, &bits, sizeof(d));
                value(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = d;
            }
        out.params.push_back({std::move(name), std::move(value)});
    }
    return out;
}

void save_checkpoint_file(const std::string& path, const ParamSet& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    write_checkpoint(os, params);
}

ParamSet load_checkpoint_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    return read_checkpoint(is);
}

}  // namespace replab::nn
