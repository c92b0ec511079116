#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "bevlift/tensor.hpp"

namespace bevlift {

// Binary tensor container: magic `CDTN`, u8 version = 1, u8 dtype
// (0 = f32, 1 = f64), u16 ndim, ndim x u64 extents, then the row-major
// payload. All integers and floats little-endian. Round trips are
// bit-identical, including NaN payloads.

enum class TensorDType : std::uint8_t { f32 = 0, f64 = 1 };

void write_tensor(const std::filesystem::path& path, const Tensor& t);
void write_tensor(const std::filesystem::path& path, const TensorD& t);

std::variant<Tensor, TensorD> read_tensor(const std::filesystem::path& path);

// Reads any supported dtype and converts to the requested precision.
Tensor read_tensor_f32(const std::filesystem::path& path);
TensorD read_tensor_f64(const std::filesystem::path& path);

}  // namespace bevlift
