#pragma once

// QMEK container:
//   "QMEK" | version u32 | dtype u32 | ndim u32 | dims ndim*u32 | payload | checksum u64
// All integers and values little-endian, payload row-major. The checksum is
// FNV-1a (64 bit) over the payload bytes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "qmoco/types.hpp"

namespace qmoco::io {

inline constexpr std::uint32_t kQmekVersion = 1;

enum class DType : std::uint32_t { f32 = 1, c64 = 2, u8 = 3 };

std::size_t dtype_size(DType t);

struct Array {
  DType dtype = DType::f32;
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t count() const;

  static Array from_real(std::vector<std::size_t> dims, std::span<const double> v);
  static Array from_complex(std::vector<std::size_t> dims, std::span<const cplx> v);
  static Array from_bytes(std::vector<std::size_t> dims, std::span<const std::uint8_t> v);

  // Conversions check the stored dtype.
  std::vector<double> to_real() const;
  std::vector<cplx> to_complex() const;
  std::vector<std::uint8_t> to_bytes() const;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_qmek(const Array& a);
Array decode_qmek(std::span<const std::uint8_t> bytes);

void write_qmek(const std::filesystem::path& path, const Array& a);
Array read_qmek(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_atomic(const std::filesystem::path& path, std::string_view text);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// 8-bit P5 image; values mapped linearly from [lo, hi] to [0, 255], clamped.
std::vector<std::uint8_t> encode_pgm(const RealImage& img, double lo, double hi);
void write_pgm(const std::filesystem::path& path, const RealImage& img, double lo, double hi);

/// Rounds every value through float, matching what a QMEK f32 file stores.
std::vector<double> round_to_f32(std::span<const double> v);

}  // namespace qmoco::io
