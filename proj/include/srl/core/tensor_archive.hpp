#pragma once

#include "srl/core/transition.hpp"
#include "srl/nets/parameter_set.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace srl {

/// Binary tensor archive, little-endian:
///   "SRLTENS1" | u32 count | count x (u32 name_len | name | u32 rows | u32 cols | u8 dtype | data)
/// dtype 1 = float32, 2 = float64; data is column-major.
namespace archive {

inline constexpr char kMagic[8] = {'S', 'R', 'L', 'T', 'E', 'N', 'S', '1'};

static_assert(std::endian::native == std::endian::little, "tensor archives assume a little-endian host");

template <typename Scalar>
constexpr std::uint8_t dtype_code() {
  if constexpr (std::is_same_v<Scalar, float>) return 1;
  else if constexpr (std::is_same_v<Scalar, double>) return 2;
  else static_assert(sizeof(Scalar) == 0, "unsupported scalar type");
}

inline void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw std::runtime_error("tensor archive: truncated file");
  return v;
}

}  // namespace archive

template <typename Scalar>
void save_tensors(const std::filesystem::path& path, const nets::ParameterSet<Scalar>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("tensor archive: cannot open " + path.string() + " for writing");
  os.write(archive::kMagic, sizeof(archive::kMagic));
  archive::write_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& name = tensors.name(i);
    const auto& t = tensors[i];
    archive::write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    archive::write_u32(os, static_cast<std::uint32_t>(t.rows()));
    archive::write_u32(os, static_cast<std::uint32_t>(t.cols()));
    const std::uint8_t code = archive::dtype_code<Scalar>();
    os.write(reinterpret_cast<const char*>(&code), 1);
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(Scalar)));
  }
  if (!os) throw std::runtime_error("tensor archive: write failed for " + path.string());
}

template <typename Scalar>
nets::ParameterSet<Scalar> load_tensors(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("tensor archive: cannot open " + path.string());
  char magic[sizeof(archive::kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, archive::kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("tensor archive: bad magic in " + path.string());
  }
  nets::ParameterSet<Scalar> out;
  const std::uint32_t count = archive::read_u32(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(archive::read_u32(is), '\0');
    is.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto rows = archive::read_u32(is);
    const auto cols = archive::read_u32(is);
    std::uint8_t code = 0;
    is.read(reinterpret_cast<char*>(&code), 1);
    if (code != archive::dtype_code<Scalar>()) {
      throw std::runtime_error("tensor archive: dtype mismatch for tensor '" + name + "'");
    }
    const auto idx = out.add(name, rows, cols);
    is.read(reinterpret_cast<char*>(out[idx].data()), static_cast<std::streamsize>(out[idx].size() * sizeof(Scalar)));
    if (!is) throw std::runtime_error("tensor archive: truncated tensor '" + name + "'");
  }
  return out;
}

/// Copies tensors by name into an existing set with the same layout.
template <typename Scalar>
void assign_tensors(nets::ParameterSet<Scalar>& dst, const nets::ParameterSet<Scalar>& src) {
  if (!dst.same_layout(src)) throw DimensionError("assign_tensors: archive layout does not match the network");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i];
}

template <typename Scalar>
void save_batch(const std::filesystem::path& path, const TransitionBatch<Scalar>& b) {
  nets::ParameterSet<Scalar> t;
  t[t.add("states", b.states.rows(), b.states.cols())] = b.states;
  t[t.add("actions", b.actions.rows(), b.actions.cols())] = b.actions;
  t[t.add("rewards", 1, b.rewards.cols())] = b.rewards;
  t[t.add("next_states", b.next_states.rows(), b.next_states.cols())] = b.next_states;
  t[t.add("dones", 1, b.dones.cols())] = b.dones;
  save_tensors(path, t);
}

template <typename Scalar>
TransitionBatch<Scalar> load_batch(const std::filesystem::path& path) {
  const auto t = load_tensors<Scalar>(path);
  auto get = [&](const char* name) -> const Matrix<Scalar>& {
    const auto idx = t.find(name);
    if (!idx) throw std::runtime_error(std::string("load_batch: missing tensor ") + name);
    return t[*idx];
  };
  return {get("states"), get("actions"), get("rewards"), get("next_states"), get("dones")};
}

}  // namespace srl
