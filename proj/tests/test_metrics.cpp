#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "qmoco/metrics.hpp"

using namespace qmoco;

namespace {

RealImage random_image(Grid g, std::mt19937_64& rng, double lo = 0.0, double hi = 100.0) {
  RealImage img(g);
  img.data = qt::random_real(g.size(), rng, lo, hi);
  return img;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("mae") {
    std::mt19937_64 rng(1);
    const Grid g{20, 17};
    const auto a = random_image(g, rng), b = random_image(g, rng), c = random_image(g, rng);
    RegionMask r(g, 0);
    for (std::size_t i = 0; i < g.size(); i += 3) r.data[i] = 1;
    CHECK(mae(a, a, r) == 0.0);
    auto shifted = a;
    for (auto& v : shifted.data) v += 5.0;
    CHECK(std::abs(mae(a, shifted, r) - 5.0) <= 1e-12);

    double direct = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (r.data[i]) {
        direct += std::abs(a.data[i] - b.data[i]);
        ++n;
      }
    CHECK(std::abs(mae(a, b, r) - direct / n) <= 1e-12);
    CHECK(mae(a, c, r) <= mae(a, b, r) + mae(b, c, r) + 1e-12);
    CHECK_THROWS_AS(mae(a, b, RegionMask(g, 0)), ValidationError);
  }

  TEST_CASE("ssim identities") {
    std::mt19937_64 rng(2);
    const Grid g{30, 25};
    const auto a = random_image(g, rng), b = random_image(g, rng);
    CHECK(ssim(a, a) == 1.0);
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-12);
    // Checkerboard: local means near zero, so the negative structure term decides.
    RealImage centered(g);
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c) centered.at(r, c) = (r + c) % 2 ? 50.0 : -50.0;
    auto neg = centered;
    for (auto& v : neg.data) v = -v;
    SsimParams p;
    p.data_range = 200.0;
    CHECK(ssim(centered, neg, p) < 0.0);
  }

  TEST_CASE("ssim on one full window matches the closed form") {
    std::mt19937_64 rng(3);
    const Grid g{11, 11};
    const auto a = random_image(g, rng), b = random_image(g, rng);
    RegionMask center(g, 0);
    center.at(5, 5) = 1;
    SsimParams p;
    double wsum = 0, ma = 0, mb = 0;
    std::vector<double> w(121);
    for (int r = 0; r < 11; ++r)
      for (int c = 0; c < 11; ++c) {
        w[r * 11 + c] = std::exp(-((r - 5) * (r - 5) + (c - 5) * (c - 5)) / (2 * 1.5 * 1.5));
        wsum += w[r * 11 + c];
      }
    for (int i = 0; i < 121; ++i) {
      ma += w[i] * a.data[i] / wsum;
      mb += w[i] * b.data[i] / wsum;
    }
    double va = 0, vb = 0, cov = 0;
    for (int i = 0; i < 121; ++i) {
      va += w[i] * (a.data[i] - ma) * (a.data[i] - ma) / wsum;
      vb += w[i] * (b.data[i] - mb) * (b.data[i] - mb) / wsum;
      cov += w[i] * (a.data[i] - ma) * (b.data[i] - mb) / wsum;
    }
    const double c1 = std::pow(0.01 * 200.0, 2), c2 = std::pow(0.03 * 200.0, 2);
    const double expect = (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    CHECK(std::abs(ssim(a, b, center, p) - expect) <= 1e-9);
  }

  TEST_CASE("ssim parameter checks") {
    const RealImage a({5, 5}, 1.0);
    SsimParams p;
    p.window = 4;
    CHECK_THROWS_AS(ssim(a, a, p), ValidationError);
    p.window = 11;
    p.data_range = 0.0;
    CHECK_THROWS_AS(ssim(a, a, p), ValidationError);
  }

  TEST_CASE("detection scores") {
    ExclusionMask truth(92, 1.0);
    for (std::size_t l = 20; l < 30; ++l) truth.weights[l] = 0.0;
    const auto same = detection_scores(truth, truth);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.f1 == 1.0);

    const auto none = detection_scores(ExclusionMask(92, 1.0), truth);
    CHECK(none.recall == 0.0);
    CHECK(none.precision == 0.0);
    CHECK(none.precision_undefined);
    CHECK(!none.recall_undefined);
    CHECK(none.f1 == 0.0);

    const auto clean = detection_scores(ExclusionMask(92, 1.0), ExclusionMask(92, 1.0));
    CHECK(clean.f1 == 1.0);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      ExclusionMask p(qt::random_real(92, rng, 0.0, 1.0)), t(qt::random_real(92, rng, 0.0, 1.0));
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t l = 0; l < 92; ++l) {
        const int pe = p.weights[l] < 0.5, te = t.weights[l] < 0.5;
        tp += pe & te;
        fp += pe & !te;
        fn += !pe & te;
      }
      const auto s = detection_scores(p, t);
      REQUIRE(s.tp == tp);
      REQUIRE(s.fp == fp);
      REQUIRE(s.fn == fn);
      CHECK(std::abs(s.f1 - 2.0 * tp / (2.0 * tp + fp + fn)) <= 1e-12);
    }
  }
}
