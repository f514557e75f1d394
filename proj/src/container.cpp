// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace l2v {

static_assert(std::endian::native == std::endian::little, "exchange formats assume little-endian");

namespace {

constexpr char kMagic[4] = {'L', '2', 'V', 'C'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated " + what);
  return v;
}

}  // namespace

void write_container(const std::filesystem::path& path, const NamedArrays& arrays) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(a.name.size()));
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(a.value.rows()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(a.value.cols()));
    os.write(reinterpret_cast<const char*>(a.value.data()),
             static_cast<std::streamsize>(a.value.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

NamedArrays read_container(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad checkpoint magic");
  }
  if (get<std::uint32_t>(is, "version") != kVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version");
  }
  const auto count = get<std::uint32_t>(is, "count");
  NamedArrays out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(is, "name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw FormatError("truncated array name");
    const auto rows = get<std::uint32_t>(is, "rows");
    const auto cols = get<std::uint32_t>(is, "cols");
    Matrix m(rows, cols);
    if (!is.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(m.size() * sizeof(double)))) {
      throw FormatError("truncated payload for " + name);
    }
    out.push_back({std::move(name), std::move(m)});
  }
  return out;
}

std::uint64_t checksum(const NamedArrays& arrays) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& a : arrays) {
    mix(a.name.data(), a.name.size());
    const std::int64_t shape[2] = {a.value.rows(), a.value.cols()};
    mix(shape, sizeof(shape));
    mix(a.value.data(), static_cast<std::size_t>(a.value.size()) * sizeof(double));
  }
  return h;
}

std::string checksum_hex(std::uint64_t sum) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << sum;
  return os.str();
}

}  // namespace l2v
