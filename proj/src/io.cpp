#include "qmoco/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace qmoco::io {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f32(std::uint8_t* p, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(bits >> (8 * i));
}

double get_f32(const std::uint8_t* p) { return static_cast<double>(std::bit_cast<float>(get_u32(p))); }

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::c64: return 8;
    case DType::u8: return 1;
  }
  throw ValidationError("qmek: unknown dtype");
}

std::size_t Array::count() const { return product(dims); }

Array Array::from_real(std::vector<std::size_t> dims, std::span<const double> v) {
  require(product(dims) == v.size(), "qmek: dims do not match value count");
  Array a{DType::f32, std::move(dims), std::vector<std::uint8_t>(4 * v.size())};
  for (std::size_t i = 0; i < v.size(); ++i) put_f32(a.payload.data() + 4 * i, v[i]);
  return a;
}

Array Array::from_complex(std::vector<std::size_t> dims, std::span<const cplx> v) {
  require(product(dims) == v.size(), "qmek: dims do not match value count");
  Array a{DType::c64, std::move(dims), std::vector<std::uint8_t>(8 * v.size())};
  for (std::size_t i = 0; i < v.size(); ++i) {
    put_f32(a.payload.data() + 8 * i, v[i].real());
    put_f32(a.payload.data() + 8 * i + 4, v[i].imag());
  }
  return a;
}

Array Array::from_bytes(std::vector<std::size_t> dims, std::span<const std::uint8_t> v) {
  require(product(dims) == v.size(), "qmek: dims do not match value count");
  return Array{DType::u8, std::move(dims), std::vector<std::uint8_t>(v.begin(), v.end())};
}

std::vector<double> Array::to_real() const {
  require(dtype == DType::f32, "qmek: expected f32 data");
  std::vector<double> v(count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = get_f32(payload.data() + 4 * i);
  return v;
}

std::vector<cplx> Array::to_complex() const {
  require(dtype == DType::c64, "qmek: expected c64 data");
  std::vector<cplx> v(count());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = {get_f32(payload.data() + 8 * i), get_f32(payload.data() + 8 * i + 4)};
  return v;
}

std::vector<std::uint8_t> Array::to_bytes() const {
  require(dtype == DType::u8, "qmek: expected u8 data");
  return payload;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::uint8_t> encode_qmek(const Array& a) {
  require(a.payload.size() == a.count() * dtype_size(a.dtype), "qmek: payload length mismatch");
  std::vector<std::uint8_t> out{'Q', 'M', 'E', 'K'};
  put_u32(out, kQmekVersion);
  put_u32(out, static_cast<std::uint32_t>(a.dtype));
  put_u32(out, static_cast<std::uint32_t>(a.dims.size()));
  for (auto d : a.dims) {
    require(d <= 0xffffffffull, "qmek: dimension too large");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  out.insert(out.end(), a.payload.begin(), a.payload.end());
  put_u64(out, fnv1a64(a.payload));
  return out;
}

Array decode_qmek(std::span<const std::uint8_t> b) {
  auto need = [&](std::size_t n) {
    if (b.size() < n) throw IoError("qmek: truncated file");
  };
  need(16);
  if (std::memcmp(b.data(), "QMEK", 4) != 0) throw IoError("qmek: bad magic");
  if (get_u32(b.data() + 4) != kQmekVersion) throw IoError("qmek: unsupported version");
  const std::uint32_t code = get_u32(b.data() + 8);
  if (code < 1 || code > 3) throw IoError("qmek: unknown dtype code");
  Array a;
  a.dtype = static_cast<DType>(code);
  const std::size_t ndim = get_u32(b.data() + 12);
  need(16 + 4 * ndim);
  for (std::size_t i = 0; i < ndim; ++i) a.dims.push_back(get_u32(b.data() + 16 + 4 * i));
  const std::size_t start = 16 + 4 * ndim;
  const std::size_t len = a.count() * dtype_size(a.dtype);
  if (b.size() != start + len + 8) throw IoError("qmek: payload length does not match dims");
  a.payload.assign(b.begin() + start, b.begin() + start + len);
  if (get_u64(b.data() + start + len) != fnv1a64(a.payload)) throw IoError("qmek: checksum mismatch");
  return a;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + ": " + ec.message());
}

void write_atomic(const std::filesystem::path& path, std::string_view text) {
  write_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_qmek(const std::filesystem::path& path, const Array& a) { write_atomic(path, encode_qmek(a)); }

Array read_qmek(const std::filesystem::path& path) { return decode_qmek(read_file(path)); }

std::vector<std::uint8_t> encode_pgm(const RealImage& img, double lo, double hi) {
  require(hi > lo, "pgm: empty window");
  const std::string header =
      "P5\n" + std::to_string(img.grid.cols) + " " + std::to_string(img.grid.rows) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : img.data) {
    const double t = std::isfinite(v) ? (v - lo) / (hi - lo) : 0.0;
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(t, 0.0, 1.0))));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const RealImage& img, double lo, double hi) {
  write_atomic(path, encode_pgm(img, lo, hi));
}

std::vector<double> round_to_f32(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(static_cast<float>(v[i]));
  return out;
}

}  // namespace qmoco::io
