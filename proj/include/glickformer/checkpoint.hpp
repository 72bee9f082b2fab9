#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "glickformer/params.hpp"

// Flat binary weight checkpoints ("GLKW"), little-endian:
//   magic "GLKW" | version u32 | count u32
//   per parameter: name_len u16 | name bytes | rank u8 | dims u32 each |
//                  values f64
namespace glick::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace detail {

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("checkpoint: truncated file");
  return v;
}

}  // namespace detail

inline void save_checkpoint(const ParameterStore& store,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
  out.write("GLKW", 4);
  detail::write_raw<std::uint32_t>(out, 1);
  detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Parameter& p = store.at(i);
    detail::write_raw<std::uint16_t>(out,
                                     static_cast<std::uint16_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    detail::write_raw<std::uint8_t>(out,
                                    static_cast<std::uint8_t>(p.value.shape.size()));
    for (auto d : p.value.shape) {
      detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    }
    out.write(reinterpret_cast<const char*>(p.value.v.data()),
              static_cast<std::streamsize>(p.value.v.size() * sizeof(double)));
  }
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

/// Loads weights into an existing store. Every file entry must match a
/// parameter by name and shape, and every parameter must be covered.
inline void load_checkpoint(ParameterStore& store, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "GLKW", 4) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  auto version = detail::read_raw<std::uint32_t>(in);
  if (version != 1) {
    throw DataError("checkpoint: unsupported version " +
                    std::to_string(version));
  }
  auto count = detail::read_raw<std::uint32_t>(in);
  std::vector<bool> seen(store.size(), false);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name_len = detail::read_raw<std::uint16_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    auto rank = detail::read_raw<std::uint8_t>(in);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = detail::read_raw<std::uint32_t>(in);
    Parameter* p = store.find(name);
    if (!p) throw DataError("checkpoint: unknown parameter '" + name + "'");
    if (p->value.shape != shape) {
      throw DataError("checkpoint: shape mismatch for '" + name + "': file " +
                      Tensor::shape_str(shape) + " vs model " +
                      Tensor::shape_str(p->value.shape));
    }
    in.read(reinterpret_cast<char*>(p->value.v.data()),
            static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated values for '" + name + "'");
    seen[p->index] = true;
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!seen[i]) {
      throw DataError("checkpoint: missing parameter '" + store.at(i).name +
                      "'");
    }
  }
}

}  // namespace glick::nn
