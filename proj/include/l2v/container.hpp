// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "l2v/types.hpp"

namespace l2v {

/** Raised for malformed exchange or checkpoint files. */
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NamedArray {
  std::string name;
  Matrix value;
};
using NamedArrays = std::vector<NamedArray>;

// Checkpoint container, little-endian:
//   "L2VC" | u32 version (1) | u32 count | count x { u32 name_len | name |
//   u32 rows | u32 cols | rows*cols f64 row-major }
// Values are stored at full 64-bit precision so checksums survive a round trip.
void write_container(const std::filesystem::path& path, const NamedArrays& arrays);
NamedArrays read_container(const std::filesystem::path& path);

/** FNV-1a over names, shapes, and raw value bytes, in order. */
std::uint64_t checksum(const NamedArrays& arrays);
std::string checksum_hex(std::uint64_t sum);

/** Snapshot of a parameter tree through its visit() overload. */
template <class Params>
NamedArrays to_named(Params& params, const std::string& prefix) {
  NamedArrays out;
  visit(params, prefix, [&](const std::string& name, Matrix& m) { out.push_back({name, m}); });
  return out;
}

/** Overwrites every parameter of an already-shaped tree; names and shapes must match. */
template <class Params>
void load_named(Params& params, const std::string& prefix, const NamedArrays& arrays) {
  visit(params, prefix, [&](const std::string& name, Matrix& m) {
    for (const auto& a : arrays) {
      if (a.name != name) continue;
      if (a.value.rows() != m.rows() || a.value.cols() != m.cols()) {
        throw FormatError("checkpoint: shape mismatch for " + name);
      }
      m = a.value;
      return;
    }
    throw FormatError("checkpoint: missing array " + name);
  });
}

template <class Params>
std::uint64_t param_checksum(Params& params, const std::string& prefix) {
  return checksum(to_named(params, prefix));
}

/** Collects pointers to every parameter matrix of a tree, in visit order. */
template <class Params>
std::vector<Matrix*> param_pointers(Params& params, const std::string& prefix) {
  std::vector<Matrix*> out;
  visit(params, prefix, [&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

}  // namespace l2v
