#pragma once

// Minimal NPY container support: v1.0 on write, v1.0/2.0/3.0 on read,
// little-endian C-order arrays only.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rankseg::npy {

enum class DType { f4, f8, u1, u2, u4, u8, i1, i2, i4, i8, b1 };

std::size_t item_size(DType dtype) noexcept;
bool is_floating(DType dtype) noexcept;
/// NumPy descr string, e.g. "<f8" or "|u1".
std::string descr(DType dtype);

struct Header {
  DType dtype = DType::f8;
  std::vector<std::size_t> shape;
  int major_version = 1;
};

struct Array {
  Header header;
  std::vector<std::byte> data;

  std::size_t size() const noexcept;  // element count
};

Header parse_header(std::string_view dict);
Array read(const std::filesystem::path& path);
Array parse(std::span<const std::byte> bytes);

std::vector<std::byte> serialize(DType dtype, std::span<const std::size_t> shape,
                                 std::span<const std::byte> payload);
void write(const std::filesystem::path& path, DType dtype,
           std::span<const std::size_t> shape, std::span<const std::byte> payload);

/// Converts a floating-point array to doubles; throws ErrorCode::dtype otherwise.
std::vector<double> to_doubles(const Array& array);
/// Converts an integer or bool array to int64; throws ErrorCode::dtype otherwise.
std::vector<std::int64_t> to_integers(const Array& array);

}  // namespace rankseg::npy
