// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container, all integers little-endian:
//
//   offset  size  field
//   0       8     magic "DPPCKPT\0"
//   8       4     u32 format version (1)
//   12      8     u64 config hash (FNV-1a 64 of the config bytes)
//   20      4     u32 config length L
//   24      L     config text (JSON)
//   ..      4     u32 tensor count T
//   then T records:
//           4     u32 name length n
//           n     name bytes
//           1     u8 trainable flag
//           4     u32 rows
//           4     u32 cols
//           8*r*c f64 values, row-major, IEEE-754 bit patterns

#pragma once

#include <cstdint>
#include <string>

#include "dpp/nn/tensor.hpp"

namespace dpp::nn {

inline constexpr std::uint32_t kContainerVersion = 1;

struct Container {
  std::string config;
  std::uint64_t config_hash = 0;
  ParamStore store;
};

std::string encode_container(const std::string& config, const ParamStore& store);
/// Throws IoError on truncated or malformed input, including a stored hash
/// that does not match the stored config bytes.
Container decode_container(const std::string& bytes);

void save_container(const std::string& path, const std::string& config, const ParamStore& store);
Container load_container(const std::string& path);

}  // namespace dpp::nn
