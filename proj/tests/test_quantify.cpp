#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "qmoco/quantify.hpp"

using namespace qmoco;

namespace {

MagnitudeSeries model_series(const std::vector<double>& s0, const std::vector<double>& t2, const std::vector<double>& te) {
  MagnitudeSeries m({1, s0.size()}, te);
  for (std::size_t e = 0; e < te.size(); ++e)
    for (std::size_t v = 0; v < s0.size(); ++v) m.echo(e)[v] = s0[v] * std::exp(-te[e] / t2[v]);
  return m;
}

std::vector<double> train() {
  std::vector<double> te;
  for (int e = 1; e <= 12; ++e) te.push_back(5.0 * e);
  return te;
}

RegionMask all(Grid g) { return RegionMask(g, 1); }

}  // namespace

TEST_SUITE("quantify") {
  TEST_CASE("exact on model data") {
    const auto te = train();
    const auto m = model_series({100.0, 0.7, 3.0}, {50.0, 23.0, 140.0}, te);
    for (bool lm : {false, true}) {
      FitOptions o;
      o.refine_lm = lm;
      const auto q = fit_t2star(m, all(m.grid), o);
      CHECK(q.method == (lm ? "loglinear+lm" : "loglinear"));
      CHECK(std::abs(q.s0[0] - 100.0) <= 1e-9 * 100.0);
      CHECK(std::abs(q.t2star[0] - 50.0) <= 1e-9 * 50.0);
      CHECK(std::abs(q.t2star[1] - 23.0) <= 1e-9 * 23.0);
      CHECK(std::abs(q.t2star[2] - 140.0) <= 1e-9 * 140.0);
      for (auto v : q.valid) CHECK(v == 1);
      const auto p = predict_signal(q, te);
      CHECK(qt::max_abs_diff(p.data, m.data) <= 1e-9);
    }
  }

  TEST_CASE("flat signal is invalid at the cap") {
    MagnitudeSeries m({1, 1}, train());
    std::fill(m.data.begin(), m.data.end(), 3.0);
    const auto q = fit_t2star(m, all(m.grid));
    CHECK(q.valid[0] == 0);
    CHECK(q.t2star[0] == FitOptions{}.t2star_cap);
  }

  TEST_CASE("voxels outside the region are skipped") {
    const auto m = model_series({1.0, 1.0}, {40.0, 40.0}, train());
    RegionMask r(m.grid, 0);
    r.data[1] = 1;
    const auto q = fit_t2star(m, r);
    CHECK(q.valid[0] == 0);
    CHECK(q.valid[1] == 1);
    const auto img = t2star_image(q, r);
    CHECK(img.data[0] == 0.0);
    CHECK(std::abs(img.data[1] - 40.0) <= 1e-9);
  }

  TEST_CASE("scale equivariance") {
    std::mt19937_64 rng(1);
    const auto te = train();
    auto m = model_series({0.9, 0.4}, {45.0, 70.0}, te);
    std::normal_distribution<double> g(0.0, 0.01);
    for (auto& v : m.data) v += g(rng);
    for (bool lm : {false, true}) {
      FitOptions o;
      o.refine_lm = lm;
      const auto a = fit_t2star(m, all(m.grid), o);
      auto scaled = m;
      for (auto& v : scaled.data) v *= 7.5;
      const auto b = fit_t2star(scaled, all(m.grid), o);
      for (std::size_t v = 0; v < 2; ++v) {
        CHECK(std::abs(b.s0[v] - 7.5 * a.s0[v]) <= 1e-9 * b.s0[v]);
        CHECK(std::abs(b.t2star[v] - a.t2star[v]) <= 1e-9 * a.t2star[v]);
      }
    }
  }

  TEST_CASE("LM never increases the objective over the log-linear start") {
    std::mt19937_64 rng(2);
    const auto te = train();
    std::normal_distribution<double> g(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
      auto m = model_series({100.0}, {std::uniform_real_distribution<double>(20, 90)(rng)}, te);
      for (auto& v : m.data) v = std::max(0.5, v + g(rng));
      FitOptions lin, lm;
      lm.refine_lm = true;
      const auto a = fit_t2star(m, all(m.grid), lin), b = fit_t2star(m, all(m.grid), lm);
      if (!a.valid[0]) continue;
      const std::vector<double> s(m.data.begin(), m.data.end());
      REQUIRE(exp_objective(s, te, b.s0[0], b.t2star[0]) <= exp_objective(s, te, a.s0[0], a.t2star[0]) + 1e-12);
    }
  }

  TEST_CASE("LM agrees with a brute-force grid search") {
    std::mt19937_64 rng(3);
    const auto te = train();
    auto m = model_series({100.0}, {50.0}, te);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& v : m.data) v += g(rng);
    FitOptions o;
    o.refine_lm = true;
    const auto q = fit_t2star(m, all(m.grid), o);
    const std::vector<double> s(m.data.begin(), m.data.end());

    double best = 1e300, bs0 = 0, bt2 = 0, ss = 0;
    for (double v : s) ss += v * v;
    for (int i = 0; i <= 4000; ++i) {
      const double t2 = 30.0 + 0.01 * i;
      double se = 0, ee = 0;
      for (std::size_t e = 0; e < te.size(); ++e) {
        const double d = std::exp(-te[e] / t2);
        se += s[e] * d;
        ee += d * d;
      }
      for (int j = 0; j <= 4000; ++j) {
        const double s0 = 80.0 + 0.01 * j;
        const double obj = ss - 2.0 * s0 * se + s0 * s0 * ee;
        if (obj < best) {
          best = obj;
          bs0 = s0;
          bt2 = t2;
        }
      }
    }
    CHECK(std::abs(q.s0[0] - bs0) <= 0.01);
    CHECK(std::abs(q.t2star[0] - bt2) <= 0.01);
    CHECK(exp_objective(s, te, q.s0[0], q.t2star[0]) <= best + 1e-9);
  }

  TEST_CASE("prediction") {
    const auto te = train();
    const auto q = fit_t2star(model_series({2.0, 1.0}, {30.0, 80.0}, te), all({1, 2}));
    const auto zero = predict_signal(q, {0.0});
    CHECK(std::abs(zero.data[0] - q.s0[0]) <= 1e-15);
    CHECK(std::abs(zero.data[1] - q.s0[1]) <= 1e-15);
    const auto p = predict_signal(q, te);
    for (std::size_t e = 1; e < te.size(); ++e)
      for (std::size_t v = 0; v < 2; ++v) CHECK(p.echo(e)[v] < p.echo(e - 1)[v]);
  }

  TEST_CASE("invalid options are rejected") {
    const auto m = model_series({1.0}, {40.0}, train());
    FitOptions o;
    o.t2star_cap = 0.0;
    CHECK_THROWS_AS(fit_t2star(m, all(m.grid), o), ValidationError);
    CHECK_THROWS_AS(fit_t2star(m, RegionMask({2, 2}, 1)), ValidationError);
  }
}
