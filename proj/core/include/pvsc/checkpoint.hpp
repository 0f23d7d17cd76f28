#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pvsc/hjb.hpp"

namespace pvsc {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ValueField value;
  PolicyField policy;
  std::uint64_t config_hash = 0;
};

// Binary field checkpoint: one JSON header line (dimensions, grid, config
// hash), then flat little-endian 64-bit float arrays for the value and the
// policy (charge fraction, discharge power), then one regime byte per node.
void write_checkpoint(const std::string& path, const ValueField& value,
                      const PolicyField& policy, std::uint64_t config_hash);

Checkpoint read_checkpoint(const std::string& path);

}  // namespace pvsc
