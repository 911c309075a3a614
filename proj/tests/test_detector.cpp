#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "qmoco/detector.hpp"
#include "qmoco/scenario.hpp"

using namespace qmoco;

namespace {

Scenario small_scenario(std::vector<MotionEvent> events, std::size_t cols = 32, std::uint64_t seed = 0) {
  ScenarioSpec spec;
  spec.phantom.cols = cols;
  spec.phantom.slices = 4;
  spec.phantom.csf_fraction = 0.0;
  spec.n_coils = 1;
  spec.events = std::move(events);
  spec.seed = seed;
  return simulate_scenario(spec);
}

SubjectData subject_of(const Scenario& s) { return make_subject(s.corrupted, s.coils, s.brain_regions()); }

double mean_pair_distance(const std::vector<ExclusionMask>& m) {
  double d = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j, ++n)
      for (std::size_t l = 0; l < m[i].size(); ++l) d += std::abs(m[i].weights[l] - m[j].weights[l]) / m[i].size();
  return d / n;
}

}  // namespace

TEST_SUITE("detector") {
  TEST_CASE("predictor initialization") {
    const auto a = predictor_init(5, 8), b = predictor_init(5, 8), c = predictor_init(6, 8);
    CHECK(a.theta == b.theta);
    CHECK(a.theta != c.theta);
    for (std::size_t z = 0; z < 8; ++z) {
      const auto m = predictor_forward(a, z);
      REQUIRE(m.size() == 92);
      for (double w : m.weights) {
        CHECK(w >= 0.9);
        CHECK(w < 1.0);
      }
      CHECK(predictor_forward(a, z) == m);
    }
  }

  TEST_CASE("outputs stay strictly inside (0, 1)") {
    auto p = predictor_init(1, 6);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 3.0);
    for (auto& t : p.theta) t = g(rng);
    for (std::size_t z = 0; z < 6; ++z)
      for (double w : predictor_forward(p, z).weights) {
        CHECK(w > 0.0);
        CHECK(w < 1.0);
      }
  }

  TEST_CASE("neighbouring slices differ by at most a Lipschitz bound") {
    for (auto act : {Activation::relu, Activation::tanh}) {
      auto p = predictor_init(2, 10, kMaskLines, act, 0.5);
      std::mt19937_64 rng(2);
      std::normal_distribution<double> g(0.0, 0.3);
      for (auto& t : p.theta) t += g(rng);
      // Numeric Lipschitz constant of the logits in the slice input, from a fine sweep
      // over the continuous input; the sigmoid is 1/4-Lipschitz on top.
      const std::size_t n_lines = p.n_lines();
      double lip = 0;
      MaskPredictor probe = p;
      for (std::size_t z = 0; z + 1 < 10; ++z) {
        const auto a = p.trace(z), b = p.trace(z + 1);
        for (std::size_t l = 0; l < n_lines; ++l)
          lip = std::max(lip, std::abs(a.logits[l] - b.logits[l]) / std::abs(b.input - a.input));
      }
      const double step = 2.0 / 9.0;
      for (std::size_t z = 0; z + 1 < 10; ++z) {
        const auto a = predictor_forward(p, z), b = predictor_forward(p, z + 1);
        for (std::size_t l = 0; l < n_lines; ++l) CHECK(std::abs(a.weights[l] - b.weights[l]) <= 0.25 * lip * step + 1e-12);
      }
    }
  }

  TEST_CASE("backward matches finite differences") {
    for (auto act : {Activation::relu, Activation::tanh}) {
      auto p = predictor_init(3, 5, 12, act, 0.8);
      std::mt19937_64 rng(3);
      std::normal_distribution<double> g(0.0, 0.5);
      for (auto& t : p.theta) t += g(rng);
      const std::size_t z = 3;
      const auto dl = qt::random_real(12, rng);
      const auto objective = [&](const MaskPredictor& q) {
        const auto t = q.trace(z);
        double s = 0;
        for (std::size_t l = 0; l < 12; ++l) s += dl[l] * t.logits[l];
        return s;
      };
      std::vector<double> grad(p.n_params(), 0.0);
      p.backward(p.trace(z), dl, grad);
      double worst = 0;
      for (std::size_t i = 0; i < p.n_params(); ++i) {
        auto a = p, b = p;
        const double h = 1e-6;
        a.theta[i] += h;
        b.theta[i] -= h;
        worst = std::max(worst, std::abs((objective(a) - objective(b)) / (2 * h) - grad[i]));
      }
      CHECK(worst <= 1e-6);
    }
  }

  TEST_CASE("binarize") {
    ExclusionMask m(92, 0.95);
    CHECK(binarize_mask(m) == ExclusionMask(92, 1.0));
    m.weights[3] = 0.5;
    m.weights[4] = 0.4999;
    const auto b = binarize_mask(m);
    CHECK(b.weights[3] == 1.0);
    CHECK(b.weights[4] == 0.0);
    CHECK(binarize_mask(b) == b);
  }

  TEST_CASE("loss evaluation on simulated subjects") {
    const auto severe = small_scenario(severe_motion_events(92, 0));
    const auto sub = subject_of(severe);
    const ReconConfig rc;
    const std::vector<ExclusionMask> ones(4, ExclusionMask(92, 1.0)), oracle(4, severe.truth_mask);
    const auto a = evaluate_masks(ones, sub, rc), b = evaluate_masks(oracle, sub, rc);
    CHECK(b.total < a.total);
    CHECK(a.l_reg == 0.0);
    CHECK(b.l_reg == 0.0);

    const auto still = small_scenario({});
    const auto c = evaluate_masks(ones, subject_of(still), rc);
    // Floor: the same pipeline on the clean, fully sampled echoes.
    std::vector<double> floor;
    for (std::size_t z = 0; z < 4; ++z)
      floor.push_back(slice_physics_loss(prepare(still.clean[z]), ones[0], still.coils, still.brain_regions()[z], rc, {}));
    double fmax = 0;
    for (double f : floor) fmax = std::max(fmax, f);
    CHECK(c.l_phys <= fmax + 1e-15);
    CHECK(a.l_phys > 10.0 * fmax);
  }

  TEST_CASE("config validation") {
    DetectorConfig d;
    CHECK_NOTHROW(d.validate());
    d.batch_slices = 1;
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d = {};
    d.adam_epsilon = 0.0;
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d = {};
    d.lambda = -1;
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d = {};
    d.init_keep = 1.0;
    CHECK_THROWS_AS(d.validate(), ValidationError);
  }

  TEST_CASE("optimizer: monotone best trace, determinism, reference row") {
    const auto s = small_scenario(severe_motion_events(92, 1), 32);
    const auto sub = subject_of(s);
    DetectorConfig d;
    d.max_epochs = 6;
    d.population = 2;
    d.lambda = 0.0;
    d.seed = 3;
    const std::vector<ExclusionMask> oracle(4, s.truth_mask);
    for (auto opt : {DetectorOptimizer::nes, DetectorOptimizer::fd_adam}) {
      d.optimizer = opt;
      const auto r1 = optimize_masks(sub, d, {}, &oracle);
      const auto r2 = optimize_masks(sub, d, {}, &oracle);
      REQUIRE(r1.trace.size() == 6);
      for (std::size_t i = 1; i < r1.trace.size(); ++i) CHECK(r1.trace[i].best_total <= r1.trace[i - 1].best_total);
      CHECK(r1.masks == r2.masks);
      for (std::size_t i = 0; i < r1.trace.size(); ++i) {
        CHECK(r1.trace[i].l_phys == r2.trace[i].l_phys);
        CHECK(r1.trace[i].total == r2.trace[i].total);
      }
      REQUIRE(r1.reference.has_value());
      CHECK(r1.reference->total == evaluate_masks(oracle, sub, {}, 0.0).total);
    }
  }

  TEST_CASE("larger lambda pulls slice masks together") {
    const auto s = small_scenario(severe_motion_events(92, 2), 32);
    const auto sub = subject_of(s);
    DetectorConfig d;
    d.max_epochs = 40;
    d.population = 2;
    d.learning_rate = 0.1;
    d.patience = 100;
    std::vector<double> dist;
    for (double lam : {0.0, 0.1, 1.0, 10.0}) {
      d.lambda = lam;
      const auto r = optimize_masks(sub, d, {});
      dist.push_back(mean_pair_distance(r.masks));
    }
    CAPTURE(dist[0]);
    CAPTURE(dist[1]);
    CAPTURE(dist[2]);
    CAPTURE(dist[3]);
    CHECK(dist[3] <= dist[1]);
    CHECK(dist[3] < dist[0]);
  }

  TEST_CASE("central lines may be excluded") {
    // One event straddling the k-space center.
    const auto s = small_scenario({{40, 52, {4.0, 2.0, 1.0}}}, 32);
    const auto sub = subject_of(s);
    DetectorConfig d;
    d.lambda = 0.0;
    d.population = 16;
    d.learning_rate = 0.05;
    d.sigma = 1.0;
    d.max_epochs = 80;
    const auto r = optimize_masks(sub, d, {});
    double central = 0;
    for (const auto& m : r.masks)
      for (std::size_t l = 44; l < 48; ++l) central += m.weights[l] / (4.0 * 4.0);
    CHECK(central < 0.5);
  }
}
