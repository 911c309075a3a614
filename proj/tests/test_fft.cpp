#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "qmoco/fft.hpp"

using namespace qmoco;

TEST_SUITE("fft") {
  TEST_CASE("centered transform matches a literal DFT") {
    std::mt19937_64 rng(1);
    for (Grid g : {Grid{8, 8}, Grid{6, 10}, Grid{9, 5}}) {
      auto x = qt::random_complex(g.size(), rng);
      auto y = x;
      fft_for(g).forward(y);
      CHECK(qt::max_abs_diff(y, qt::dft2(x, g)) <= 1e-12);
      fft_for(g).inverse(y);
      CHECK(qt::max_abs_diff(y, x) <= 1e-12);
    }
  }

  TEST_CASE("separable axis transforms compose to the 2D transform") {
    std::mt19937_64 rng(2);
    const Grid g{12, 10};
    auto x = qt::random_complex(g.size(), rng);
    auto a = x, b = x;
    fft_for(g).forward(a);
    fft_for(g).forward_rows(b);
    fft_for(g).forward_cols(b);
    CHECK(qt::max_abs_diff(a, b) <= 1e-12);
  }

  TEST_CASE("DC sits at the center index") {
    const Grid g{8, 6};
    std::vector<cplx> x(g.size(), 1.0);
    fft_for(g).forward(x);
    CHECK(std::abs(x[4 * 6 + 3] - std::sqrt(48.0)) <= 1e-12);
    x[4 * 6 + 3] = 0;
    CHECK(qt::norm(x) <= 1e-12);
  }

  TEST_CASE("batch transform is the unnormalized DFT") {
    std::mt19937_64 rng(4);
    const std::size_t n = 7, count = 3;
    auto x = qt::random_complex(n * count, rng);
    auto y = x;
    batch_fft_for(n, count).forward(y);
    const double pi = 3.14159265358979323846;
    for (std::size_t b = 0; b < count; ++b)
      for (std::size_t k = 0; k < n; ++k) {
        cplx s = 0;
        for (std::size_t j = 0; j < n; ++j) s += x[b * n + j] * std::polar(1.0, -2.0 * pi * static_cast<double>(k * j) / n);
        CHECK(std::abs(s - y[b * n + k]) <= 1e-12);
      }
    batch_fft_for(n, count).inverse(y);
    for (auto& v : y) v /= static_cast<double>(n);
    CHECK(qt::max_abs_diff(x, y) <= 1e-12);
  }

  TEST_CASE("screened Neumann solve inverts I + lambda L") {
    std::mt19937_64 rng(6);
    const Grid g{7, 9};
    const double lambda = 0.8;
    auto f = qt::random_real(g.size(), rng);
    auto u = f;
    solve_screened_neumann(g, lambda, u);
    // Apply (I + lambda L) with the 5-point Neumann Laplacian (L = -div grad, PSD).
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c) {
        const auto at = [&](std::size_t rr, std::size_t cc) { return u[rr * g.cols + cc]; };
        double lap = 0.0;
        if (r > 0) lap += at(r, c) - at(r - 1, c);
        if (r + 1 < g.rows) lap += at(r, c) - at(r + 1, c);
        if (c > 0) lap += at(r, c) - at(r, c - 1);
        if (c + 1 < g.cols) lap += at(r, c) - at(r, c + 1);
        CHECK(std::abs(at(r, c) + lambda * lap - f[r * g.cols + c]) <= 1e-10);
      }
  }
}
