#pragma once

#include <iosfwd>
#include <string>

#include "replab/nn/mlp.hpp"

namespace replab::nn {

// Versioned binary checkpoint: names, shapes, row-major doubles. Values
// round-trip bit-exactly.
void write_checkpoint(std::ostream& os, const ParamSet& params);
ParamSet read_checkpoint(std::istream& is);

void save_checkpoint_file(const std::string& path, const ParamSet& params);
ParamSet load_checkpoint_file(const std::string& path);

}  // namespace replab::nn
