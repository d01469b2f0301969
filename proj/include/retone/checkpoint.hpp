#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retone/errors.hpp"
#include "retone/generator.hpp"
#include "retone/types.hpp"

namespace retone {

enum class ModelKind : std::uint8_t { generator = 0, discriminator = 1, multiscale = 2 };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::generator: return "generator";
    case ModelKind::discriminator: return "discriminator";
    case ModelKind::multiscale: return "multiscale";
  }
  return "?";
}

/// One named tensor; data is little-endian raw bytes, column-major.
struct CheckpointTensor {
  std::string name;
  std::uint8_t dtype = 0;  // 0 = f32, 1 = f64
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::uint8_t> data;
};

/// Binary container for model parameters plus the resolved configuration,
/// training step and seed. Round-trips bit-exactly; fixed little-endian
/// layout regardless of host.
struct Checkpoint {
  std::uint32_t version = 1;
  ModelKind kind = ModelKind::generator;
  std::string config_text;
  std::uint64_t training_step = 0;
  std::uint64_t seed = 0;
  std::vector<CheckpointTensor> tensors;

  const CheckpointTensor* find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  }
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

namespace detail {

template <typename S>
constexpr std::uint8_t dtype_of() {
  return sizeof(S) == 4 ? 0 : 1;
}

template <typename S>
void store_scalar_le(std::vector<std::uint8_t>& out, S value) {
  if constexpr (sizeof(S) == 4) {
    auto u = std::bit_cast<std::uint32_t>(static_cast<float>(value));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  } else {
    auto u = std::bit_cast<std::uint64_t>(static_cast<double>(value));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
}

template <typename S>
S load_scalar_le(const std::uint8_t* p) {
  if constexpr (sizeof(S) == 4) {
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(u);
  } else {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(u);
  }
}

}  // namespace detail

/// Appends tensors from views; names get an optional prefix and must end
/// up unique within the checkpoint.
template <typename S>
void checkpoint_put_tensors(Checkpoint& ckpt, const std::vector<TensorView<S>>& views,
                            const std::string& prefix = "") {
  for (const auto& v : views) {
    CheckpointTensor t;
    t.name = prefix + v.name;
    if (ckpt.find(t.name)) throw UsageError("checkpoint: duplicate tensor name " + t.name);
    t.dtype = detail::dtype_of<S>();
    t.rows = v.rows;
    t.cols = v.cols;
    t.data.reserve(static_cast<std::size_t>(v.size()) * sizeof(S));
    for (Eigen::Index i = 0; i < v.size(); ++i) detail::store_scalar_le<S>(t.data, v.data[i]);
    ckpt.tensors.push_back(std::move(t));
  }
}

/// Copies stored tensors back into views; shapes and names must match.
template <typename S>
void checkpoint_get_tensors(const Checkpoint& ckpt, std::vector<TensorView<S>> views,
                            const std::string& prefix = "") {
  for (auto& v : views) {
    const CheckpointTensor* t = ckpt.find(prefix + v.name);
    if (!t) throw DataError("checkpoint: missing tensor " + prefix + v.name);
    if (t->rows != v.rows || t->cols != v.cols)
      throw DataError("checkpoint: shape mismatch for " + t->name);
    if (t->dtype != detail::dtype_of<S>())
      throw DataError("checkpoint: dtype mismatch for " + t->name);
    const std::size_t n = static_cast<std::size_t>(v.size());
    if (t->data.size() != n * sizeof(S)) throw DataError("checkpoint: truncated tensor " + t->name);
    for (std::size_t i = 0; i < n; ++i)
      v.data[i] = detail::load_scalar_le<S>(t->data.data() + i * sizeof(S));
  }
}

}  // namespace retone
