#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/mlp.hpp"
#include "gmx/numerics/tensor.hpp"

// Checkpoint layout: "GMX1", then per tensor: rank (u64), dims (u64 each),
// values (f64 each). All little-endian. Records run to end of file.

namespace gmx {

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw IoError("checkpoint: truncated record");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace detail

inline std::string encode_checkpoint(const std::vector<const Tensor*>& tensors) {
  std::string out = "GMX1";
  for (const Tensor* t : tensors) {
    detail::put_u64(out, t->rank());
    for (std::size_t d : t->shape()) detail::put_u64(out, d);
    for (double v : t->data()) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

inline std::vector<Tensor> decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "GMX1") != 0) throw IoError("checkpoint: bad magic");
  std::vector<Tensor> out;
  std::size_t pos = 4;
  while (pos < bytes.size()) {
    const std::uint64_t rank = detail::get_u64(bytes, pos);
    if (rank == 0 || rank > 8) throw IoError("checkpoint: implausible rank " + std::to_string(rank));
    Shape shape;
    for (std::uint64_t i = 0; i < rank; ++i) shape.push_back(detail::get_u64(bytes, pos));
    std::vector<double> data(shape_volume(shape));
    for (double& v : data) v = std::bit_cast<double>(detail::get_u64(bytes, pos));
    out.emplace_back(std::move(shape), std::move(data));
  }
  return out;
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelBundle& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
  const std::string bytes = encode_checkpoint(model.parameters());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("checkpoint: write failed for " + path.string());
}

/// Loads parameters into `model`, whose architecture must match the file.
inline void load_checkpoint(const std::filesystem::path& path, ModelBundle& model) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::vector<Tensor> tensors = decode_checkpoint(bytes);
  auto params = model.parameters();
  if (tensors.size() != params.size()) {
    throw DimensionError("checkpoint: " + std::to_string(tensors.size()) + " tensors, model has " +
                         std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], tensors[i], "checkpoint");
    *params[i] = std::move(tensors[i]);
  }
}

}  // namespace gmx
