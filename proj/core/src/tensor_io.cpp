#include "bevlift/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "bevlift/errors.hpp"

namespace bevlift {

namespace {

constexpr char kMagic[4] = {'C', 'D', 'T', 'N'};
constexpr std::uint8_t kVersion = 1;

void put_u16(std::vector<unsigned char>& buf, std::uint16_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    buf.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xff));
  }
}

template <typename T, typename Bits>
void write_impl(const std::filesystem::path& path, const BasicTensor<T>& t,
                TensorDType dtype) {
  std::vector<unsigned char> buf;
  buf.reserve(16 + t.rank() * 8 + t.size() * sizeof(T));
  buf.insert(buf.end(), kMagic, kMagic + 4);
  buf.push_back(kVersion);
  buf.push_back(static_cast<std::uint8_t>(dtype));
  put_u16(buf, static_cast<std::uint16_t>(t.rank()));
  for (std::size_t e : t.shape()) put_u64(buf, static_cast<std::uint64_t>(e));
  for (T v : t.data()) {
    const Bits bits = std::bit_cast<Bits>(v);
    for (std::size_t b = 0; b < sizeof(Bits); ++b) {
      buf.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xff));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write tensor file: " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("short write on tensor file: " + path.string());
}

template <typename T, typename Bits>
BasicTensor<T> payload_to_tensor(const std::vector<unsigned char>& raw,
                                 std::size_t offset,
                                 std::vector<std::size_t> shape,
                                 std::size_t count,
                                 const std::filesystem::path& path) {
  if (raw.size() - offset != count * sizeof(Bits)) {
    throw DataError("tensor payload length mismatch: " + path.string());
  }
  std::vector<T> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    Bits bits = 0;
    for (std::size_t b = 0; b < sizeof(Bits); ++b) {
      bits |= static_cast<Bits>(raw[offset + i * sizeof(Bits) + b]) << (8 * b);
    }
    data[i] = std::bit_cast<T>(bits);
  }
  return BasicTensor<T>(std::move(shape), std::move(data));
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_impl<float, std::uint32_t>(path, t, TensorDType::f32);
}

void write_tensor(const std::filesystem::path& path, const TensorD& t) {
  write_impl<double, std::uint64_t>(path, t, TensorDType::f64);
}

std::variant<Tensor, TensorD> read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file: " + path.string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (raw.size() < 8 || std::memcmp(raw.data(), kMagic, 4) != 0) {
    throw DataError("not a tensor file: " + path.string());
  }
  if (raw[4] != kVersion) {
    throw DataError("unsupported tensor file version: " + path.string());
  }
  const std::uint8_t dtype = raw[5];
  if (dtype != 0 && dtype != 1) {
    throw DataError("unsupported tensor dtype: " + path.string());
  }
  const std::size_t ndim = static_cast<std::size_t>(raw[6]) |
                           (static_cast<std::size_t>(raw[7]) << 8);
  if (raw.size() < 8 + ndim * 8) {
    throw DataError("truncated tensor header: " + path.string());
  }
  std::vector<std::size_t> shape(ndim);
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndim; ++d) {
    std::uint64_t e = 0;
    for (int b = 0; b < 8; ++b) {
      e |= static_cast<std::uint64_t>(raw[8 + d * 8 + b]) << (8 * b);
    }
    if (e == 0) throw DataError("tensor extent of zero: " + path.string());
    shape[d] = static_cast<std::size_t>(e);
    count *= shape[d];
  }
  if (ndim == 0) count = 0;
  const std::size_t offset = 8 + ndim * 8;
  if (dtype == 0) {
    return payload_to_tensor<float, std::uint32_t>(raw, offset, std::move(shape),
                                                   count, path);
  }
  return payload_to_tensor<double, std::uint64_t>(raw, offset, std::move(shape),
                                                  count, path);
}

Tensor read_tensor_f32(const std::filesystem::path& path) {
  auto t = read_tensor(path);
  if (std::holds_alternative<Tensor>(t)) return std::get<Tensor>(std::move(t));
  return tensor_cast<float>(std::get<TensorD>(t));
}

TensorD read_tensor_f64(const std::filesystem::path& path) {
  auto t = read_tensor(path);
  if (std::holds_alternative<TensorD>(t)) return std::get<TensorD>(std::move(t));
  return tensor_cast<double>(std::get<Tensor>(t));
}

}  // namespace bevlift
