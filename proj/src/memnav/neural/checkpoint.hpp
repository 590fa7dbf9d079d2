#pragma once

#include <string>

#include <json.hpp>

#include "memnav/neural/params.hpp"

namespace memnav::neural {

// Versioned binary container: little-endian float32 tensors (name, shape,
// data) plus a JSON metadata blob (config hash, iteration, ...). A loaded
// checkpoint saves back byte-identically.
void save_checkpoint(const ParameterSet& params, const nlohmann::json& metadata,
                     const std::string& path);

struct Checkpoint {
    ParameterSet params;
    nlohmann::json metadata;
};

Checkpoint load_checkpoint(const std::string& path);

} // namespace memnav::neural
