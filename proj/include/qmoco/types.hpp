#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmoco {

using cplx = std::complex<double>;

/// Bad input, inconsistent dimensions, invalid configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Missing files, short reads, checksum mismatches.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

/// Slice geometry. Rows run along phase encoding (one k-space line per row),
/// columns along readout.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Grid&) const = default;
};

template <class T>
struct Image {
  Grid grid;
  std::vector<T> data;

  Image() = default;
  explicit Image(Grid g, T fill = T{}) : grid(g), data(g.size(), fill) {}

  T& at(std::size_t r, std::size_t c) { return data[r * grid.cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return data[r * grid.cols + c]; }
};

using ComplexImage = Image<cplx>;
using RealImage = Image<double>;
using RegionMask = Image<std::uint8_t>;

inline std::size_t count(const RegionMask& m) {
  std::size_t n = 0;
  for (auto v : m.data) n += v != 0;
  return n;
}

/// Complex multi-echo images of one slice, echo-major (E x H x W).
struct EchoSeries {
  Grid grid;
  std::vector<double> echo_times;  // ms
  std::vector<cplx> data;

  EchoSeries() = default;
  EchoSeries(Grid g, std::vector<double> te)
      : grid(g), echo_times(std::move(te)), data(grid.size() * echo_times.size()) {}

  std::size_t n_echoes() const { return echo_times.size(); }
  std::span<cplx> echo(std::size_t e) { return {data.data() + e * grid.size(), grid.size()}; }
  std::span<const cplx> echo(std::size_t e) const {
    return {data.data() + e * grid.size(), grid.size()};
  }
};

/// Real echo magnitudes, same layout as EchoSeries.
struct MagnitudeSeries {
  Grid grid;
  std::vector<double> echo_times;
  std::vector<double> data;

  MagnitudeSeries() = default;
  MagnitudeSeries(Grid g, std::vector<double> te)
      : grid(g), echo_times(std::move(te)), data(grid.size() * echo_times.size()) {}

  std::size_t n_echoes() const { return echo_times.size(); }
  std::span<double> echo(std::size_t e) { return {data.data() + e * grid.size(), grid.size()}; }
  std::span<const double> echo(std::size_t e) const {
    return {data.data() + e * grid.size(), grid.size()};
  }
};

/// Coil sensitivities, coil-major (C x H x W).
struct CoilMaps {
  Grid grid;
  std::size_t n_coils = 0;
  std::vector<cplx> maps;

  std::span<const cplx> coil(std::size_t c) const {
    return {maps.data() + c * grid.size(), grid.size()};
  }
  std::span<cplx> coil(std::size_t c) { return {maps.data() + c * grid.size(), grid.size()}; }
};

/// Cartesian multicoil multi-echo k-space of one slice, laid out
/// [echo][coil][ky][kx] with ky centered (DC at row rows/2).
struct KSpaceData {
  Grid grid;
  std::size_t n_coils = 0;
  std::vector<double> echo_times;
  std::vector<cplx> data;

  KSpaceData() = default;
  KSpaceData(Grid g, std::size_t coils, std::vector<double> te)
      : grid(g), n_coils(coils), echo_times(std::move(te)),
        data(grid.size() * n_coils * echo_times.size()) {}

  std::size_t n_echoes() const { return echo_times.size(); }
  std::span<cplx> view(std::size_t e, std::size_t c) {
    return {data.data() + (e * n_coils + c) * grid.size(), grid.size()};
  }
  std::span<const cplx> view(std::size_t e, std::size_t c) const {
    return {data.data() + (e * n_coils + c) * grid.size(), grid.size()};
  }
};

/// Per phase-encode line weights in [0,1]; 1 keeps a line, 0 excludes it.
struct ExclusionMask {
  std::vector<double> weights;

  ExclusionMask() = default;
  explicit ExclusionMask(std::size_t n, double fill = 1.0) : weights(n, fill) {}
  explicit ExclusionMask(std::vector<double> w) : weights(std::move(w)) {}

  std::size_t size() const { return weights.size(); }
  bool operator==(const ExclusionMask&) const = default;
};

/// Number of phase-encode lines the mask predictor emits.
inline constexpr std::size_t kMaskLines = 92;

}  // namespace qmoco
