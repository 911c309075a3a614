#include "qmoco/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "qmoco/parallel.hpp"

namespace qmoco {

// ---------------------------------------------------------------------------
// Mask predictor

namespace {

constexpr std::size_t E = MaskPredictor::kEmbed;
constexpr std::size_t H1 = MaskPredictor::kHidden1;
constexpr std::size_t H2 = MaskPredictor::kHidden2;

struct Layout {
  std::size_t we, be, w1, b1, w2, b2, wo, bo, total;

  explicit Layout(std::size_t lines) {
    we = 0;
    be = we + E;
    w1 = be + E;
    b1 = w1 + H1 * E;
    w2 = b1 + H1;
    b2 = w2 + H2 * H1;
    wo = b2 + H2;
    bo = wo + lines * H2;
    total = bo + lines;
  }
};

double act(Activation a, double x) { return a == Activation::relu ? std::max(0.0, x) : std::tanh(x); }

double act_grad(Activation a, double pre) {
  if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

// Logits clamped to +-30 so weights stay strictly inside (0, 1) in double precision.
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-std::clamp(x, -30.0, 30.0))); }

// Dense y = W x + b with W stored row-major (out x in).
void affine(const double* w, const double* b, const std::vector<double>& x, std::vector<double>& y,
            std::size_t out) {
  y.assign(out, 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    double s = b[o];
    for (std::size_t i = 0; i < x.size(); ++i) s += w[o * x.size() + i] * x[i];
    y[o] = s;
  }
}

}  // namespace

MaskPredictor::MaskPredictor(std::size_t n_slices, std::size_t n_lines, Activation act)
    : theta(Layout(n_lines).total, 0.0), n_slices_(n_slices), n_lines_(n_lines), act_(act) {
  require(n_slices >= 1, "MaskPredictor: need at least one slice");
  require(n_lines >= 1, "MaskPredictor: need at least one output line");
}

MaskPredictor::Trace MaskPredictor::trace(std::size_t z) const {
  require(z < n_slices_, "MaskPredictor: slice index out of range");
  const Layout L(n_lines_);
  const double* th = theta.data();
  Trace t;
  t.input = n_slices_ > 1 ? 2.0 * static_cast<double>(z) / static_cast<double>(n_slices_ - 1) - 1.0 : 0.0;
  t.embed.resize(E);
  for (std::size_t k = 0; k < E; ++k) t.embed[k] = th[L.we + k] * t.input + th[L.be + k];
  affine(th + L.w1, th + L.b1, t.embed, t.pre1, H1);
  t.h1.resize(H1);
  for (std::size_t i = 0; i < H1; ++i) t.h1[i] = act(act_, t.pre1[i]);
  affine(th + L.w2, th + L.b2, t.h1, t.pre2, H2);
  t.h2.resize(H2);
  for (std::size_t i = 0; i < H2; ++i) t.h2[i] = act(act_, t.pre2[i]);
  affine(th + L.wo, th + L.bo, t.h2, t.logits, n_lines_);
  return t;
}

ExclusionMask MaskPredictor::forward(std::size_t z) const {
  const Trace t = trace(z);
  ExclusionMask m(n_lines_);
  for (std::size_t l = 0; l < n_lines_; ++l) m.weights[l] = sigmoid(t.logits[l]);
  return m;
}

void MaskPredictor::backward(const Trace& t, std::span<const double> g, std::span<double> d) const {
  require(g.size() == n_lines_ && d.size() == theta.size(), "MaskPredictor::backward: size mismatch");
  const Layout L(n_lines_);
  const double* th = theta.data();

  std::vector<double> dh2(H2, 0.0);
  for (std::size_t o = 0; o < n_lines_; ++o) {
    d[L.bo + o] += g[o];
    for (std::size_t i = 0; i < H2; ++i) {
      d[L.wo + o * H2 + i] += g[o] * t.h2[i];
      dh2[i] += th[L.wo + o * H2 + i] * g[o];
    }
  }
  std::vector<double> dh1(H1, 0.0);
  for (std::size_t o = 0; o < H2; ++o) {
    const double dp = dh2[o] * act_grad(act_, t.pre2[o]);
    d[L.b2 + o] += dp;
    for (std::size_t i = 0; i < H1; ++i) {
      d[L.w2 + o * H1 + i] += dp * t.h1[i];
      dh1[i] += th[L.w2 + o * H1 + i] * dp;
    }
  }
  std::vector<double> de(E, 0.0);
  for (std::size_t o = 0; o < H1; ++o) {
    const double dp = dh1[o] * act_grad(act_, t.pre1[o]);
    d[L.b1 + o] += dp;
    for (std::size_t i = 0; i < E; ++i) {
      d[L.w1 + o * E + i] += dp * t.embed[i];
      de[i] += th[L.w1 + o * E + i] * dp;
    }
  }
  for (std::size_t k = 0; k < E; ++k) {
    d[L.we + k] += de[k] * t.input;
    d[L.be + k] += de[k];
  }
}

MaskPredictor predictor_init(std::uint64_t seed, std::size_t n_slices, std::size_t n_lines,
                             Activation act, double init_keep) {
  require(init_keep > 0.0 && init_keep < 1.0, "predictor_init: init_keep must lie in (0,1)");
  MaskPredictor p(n_slices, n_lines, act);
  const Layout L(n_lines);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto fill = [&](std::size_t off, std::size_t count, double sd) {
    for (std::size_t i = 0; i < count; ++i) p.theta[off + i] = sd * n01(rng);
  };
  fill(L.we, E, 1.0);
  fill(L.be, E, 0.5);
  fill(L.w1, H1 * E, std::sqrt(2.0 / E));
  std::fill_n(p.theta.begin() + L.b1, H1, 0.1);
  fill(L.w2, H2 * H1, std::sqrt(2.0 / H1));
  std::fill_n(p.theta.begin() + L.b2, H2, 0.1);
  fill(L.wo, n_lines * H2, 0.01 / std::sqrt(static_cast<double>(H2)));
  std::fill_n(p.theta.begin() + L.bo, n_lines, std::log(init_keep / (1.0 - init_keep)));
  return p;
}

ExclusionMask predictor_forward(const MaskPredictor& p, std::size_t z) { return p.forward(z); }

ExclusionMask binarize_mask(const ExclusionMask& mask, double threshold) {
  require(threshold > 0.0 && threshold < 1.0, "binarize_mask: threshold must lie in (0,1)");
  ExclusionMask out(mask.size());
  for (std::size_t l = 0; l < mask.size(); ++l) out.weights[l] = mask.weights[l] >= threshold ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Loss evaluation

void DetectorConfig::validate() const {
  require(patience >= 1, "detector: patience must be >= 1");
  require(batch_slices >= 2, "detector: batch_slices must be >= 2");
  require(max_epochs >= 1, "detector: max_epochs must be >= 1");
  require(population >= 1, "detector: population must be >= 1");
  require(sigma > 0.0 && fd_epsilon > 0.0, "detector: perturbation scales must be positive");
  require(learning_rate > 0.0, "detector: learning_rate must be positive");
  require(lambda >= 0.0, "detector: lambda must be >= 0");
  require(adam_epsilon > 0.0, "detector: adam_epsilon must be positive");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          "detector: Adam betas must lie in [0,1)");
  require(init_keep > 0.0 && init_keep < 1.0, "detector: init_keep must lie in (0,1)");
}

SubjectData make_subject(const std::vector<KSpaceData>& kspace, CoilMaps coils,
                         std::vector<RegionMask> regions) {
  require(kspace.size() == regions.size(), "make_subject: one region per slice required");
  SubjectData s;
  for (std::size_t z = 0; z < kspace.size(); ++z) {
    require(kspace[z].grid == coils.grid && kspace[z].n_coils == coils.n_coils,
            "make_subject: coil maps do not match k-space");
    require(regions[z].grid == coils.grid, "make_subject: region grid mismatch");
    s.slices.push_back(prepare(kspace[z]));
  }
  s.coils = std::move(coils);
  s.regions = std::move(regions);
  return s;
}

double slice_physics_loss(const PreparedKSpace& y, const ExclusionMask& mask, const CoilMaps& coils,
                          const RegionMask& region, const ReconConfig& rcfg, const FitOptions& fit) {
  const EchoSeries x = unrolled_reconstruct(y, mask, coils, rcfg);
  const MagnitudeSeries s_rec = magnitudes(x);
  const QuantMaps q = fit_t2star(s_rec, region, fit);
  const MagnitudeSeries s_fit = predict_signal(q, s_rec.echo_times);
  return physics_loss(s_rec, s_fit, region);
}

LossReport evaluate_masks(const std::vector<ExclusionMask>& masks, const SubjectData& subject,
                          const ReconConfig& rcfg, double lambda, const FitOptions& fit,
                          std::vector<std::size_t> slices) {
  if (slices.empty()) {
    slices.resize(subject.n_slices());
    for (std::size_t z = 0; z < slices.size(); ++z) slices[z] = z;
  }
  require(masks.size() == slices.size(), "evaluate_masks: one mask per slice required");
  for (auto z : slices) require(z < subject.n_slices(), "evaluate_masks: slice out of range");
  std::vector<double> phys(slices.size());
  parallel_for(slices.size(), [&](std::size_t i) {
    const std::size_t z = slices[i];
    phys[i] = slice_physics_loss(subject.slices[z], masks[i], subject.coils, subject.regions[z], rcfg, fit);
  });
  double l_phys = 0.0;
  for (double p : phys) l_phys += p;
  l_phys /= static_cast<double>(phys.size());
  return total_loss(l_phys, mask_regularizer(masks, slices), lambda);
}

// ---------------------------------------------------------------------------
// Optimization

namespace {

// Batch of distinct slices that always contains at least one (z, z+2) pair.
std::vector<std::size_t> sample_batch(std::size_t n_slices, std::size_t batch, std::mt19937_64& rng) {
  if (batch >= n_slices) {
    std::vector<std::size_t> all(n_slices);
    for (std::size_t z = 0; z < n_slices; ++z) all[z] = z;
    return all;
  }
  std::uniform_int_distribution<std::size_t> pick(0, n_slices - 3);
  const std::size_t z0 = pick(rng);
  std::vector<std::size_t> rest;
  for (std::size_t z = 0; z < n_slices; ++z)
    if (z != z0 && z != z0 + 2) rest.push_back(z);
  std::shuffle(rest.begin(), rest.end(), rng);
  std::vector<std::size_t> out{z0, z0 + 2};
  for (std::size_t i = 0; out.size() < batch; ++i) out.push_back(rest[i]);
  std::sort(out.begin(), out.end());
  return out;
}

ExclusionMask mask_from_logits(const std::vector<double>& logits) {
  ExclusionMask m(logits.size());
  for (std::size_t l = 0; l < logits.size(); ++l) m.weights[l] = sigmoid(logits[l]);
  return m;
}

void check_finite(double v) {
  if (!std::isfinite(v)) throw ValidationError("optimize_masks: non-finite loss (pipeline misconfigured)");
}

}  // namespace

DetectionResult optimize_masks(const SubjectData& subject, const DetectorConfig& dcfg,
                               const ReconConfig& rcfg, const std::vector<ExclusionMask>* reference_masks) {
  dcfg.validate();
  rcfg.validate();
  const std::size_t n_slices = subject.n_slices();
  require(n_slices >= 4, "optimize_masks: need at least 4 slices");
  const std::size_t n_lines = subject.slices[0].grid.rows;
  const auto t_start = std::chrono::steady_clock::now();

  DetectionResult res;
  if (reference_masks) res.reference = evaluate_masks(*reference_masks, subject, rcfg, dcfg.lambda, dcfg.fit);

  MaskPredictor pred = predictor_init(dcfg.seed, n_slices, n_lines, dcfg.activation, dcfg.init_keep);
  std::mt19937_64 rng(dcfg.seed ^ 0x9E3779B97F4A7C15ull);
  std::normal_distribution<double> n01(0.0, 1.0);
  const std::size_t np = pred.n_params();
  std::vector<double> m1(np, 0.0), m2(np, 0.0), grad(np);
  std::vector<double> best_theta = pred.theta;
  double best_total = std::numeric_limits<double>::infinity();
  double best_monitor = std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;

  for (std::size_t epoch = 0; epoch < dcfg.max_epochs; ++epoch) {
    const auto batch = sample_batch(n_slices, std::min(dcfg.batch_slices, n_slices), rng);
    const std::size_t nb = batch.size();
    std::vector<MaskPredictor::Trace> traces(nb);
    std::vector<ExclusionMask> masks(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      traces[i] = pred.trace(batch[i]);
      masks[i] = mask_from_logits(traces[i].logits);
    }

    // Candidate logit vectors: the current point plus perturbations, per slice.
    struct Candidate {
      std::size_t slot;
      std::vector<double> logits;
    };
    std::vector<Candidate> cands;
    std::vector<std::vector<double>> directions;  // nes: one per pair and slice
    for (std::size_t i = 0; i < nb; ++i) cands.push_back({i, traces[i].logits});
    if (dcfg.optimizer == DetectorOptimizer::nes) {
      for (std::size_t i = 0; i < nb; ++i) {
        for (std::size_t k = 0; k < dcfg.population; ++k) {
          std::vector<double> u(n_lines);
          for (auto& v : u) v = n01(rng);
          auto plus = traces[i].logits, minus = traces[i].logits;
          for (std::size_t l = 0; l < n_lines; ++l) {
            plus[l] += dcfg.sigma * u[l];
            minus[l] -= dcfg.sigma * u[l];
          }
          cands.push_back({i, std::move(plus)});
          cands.push_back({i, std::move(minus)});
          directions.push_back(std::move(u));
        }
      }
    } else {
      for (std::size_t i = 0; i < nb; ++i) {
        for (std::size_t l = 0; l < n_lines; ++l) {
          auto plus = traces[i].logits, minus = traces[i].logits;
          plus[l] += dcfg.fd_epsilon;
          minus[l] -= dcfg.fd_epsilon;
          cands.push_back({i, std::move(plus)});
          cands.push_back({i, std::move(minus)});
        }
      }
    }

    std::vector<double> losses(cands.size());
    parallel_for(cands.size(), [&](std::size_t c) {
      const std::size_t z = batch[cands[c].slot];
      losses[c] = slice_physics_loss(subject.slices[z], mask_from_logits(cands[c].logits),
                                     subject.coils, subject.regions[z], rcfg, dcfg.fit);
    });
    for (double l : losses) check_finite(l);

    double l_phys = 0.0;
    for (std::size_t i = 0; i < nb; ++i) l_phys += losses[i];
    l_phys /= static_cast<double>(nb);
    const double l_reg = mask_regularizer(masks, batch);
    const LossReport rep = total_loss(l_phys, l_reg, dcfg.lambda);

    if (rep.total < best_total) {
      best_total = rep.total;
      best_theta = pred.theta;
      res.best_epoch = epoch;
    }
    const double monitor = dcfg.monitor == StopMonitor::total ? rep.total : rep.l_reg;
    if (monitor < best_monitor) {
      best_monitor = monitor;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    res.trace.push_back({epoch, rep.l_phys, rep.l_reg, rep.total, best_total, wall});
    if (since_improvement >= dcfg.patience) break;

    // Gradient of the batch loss with respect to each slice's output logits.
    const auto reg_grad = mask_regularizer_grad(masks, batch);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
      std::vector<double> g(n_lines, 0.0);
      if (dcfg.optimizer == DetectorOptimizer::nes) {
        for (std::size_t k = 0; k < dcfg.population; ++k) {
          const std::size_t d = i * dcfg.population + k;
          const std::size_t c = nb + 2 * d;
          const double coef = (losses[c] - losses[c + 1]) / (2.0 * dcfg.sigma * dcfg.population);
          for (std::size_t l = 0; l < n_lines; ++l) g[l] += coef * directions[d][l];
        }
      } else {
        for (std::size_t l = 0; l < n_lines; ++l) {
          const std::size_t c = nb + 2 * (i * n_lines + l);
          g[l] = (losses[c] - losses[c + 1]) / (2.0 * dcfg.fd_epsilon);
        }
      }
      for (std::size_t l = 0; l < n_lines; ++l) {
        const double w = masks[i].weights[l];
        g[l] = g[l] / static_cast<double>(nb) + dcfg.lambda * reg_grad[i][l] * w * (1.0 - w);
      }
      pred.backward(traces[i], g, grad);
    }

    const double t = static_cast<double>(epoch + 1);
    const double c1 = 1.0 - std::pow(dcfg.adam_beta1, t);
    const double c2 = 1.0 - std::pow(dcfg.adam_beta2, t);
    for (std::size_t j = 0; j < np; ++j) {
      m1[j] = dcfg.adam_beta1 * m1[j] + (1.0 - dcfg.adam_beta1) * grad[j];
      m2[j] = dcfg.adam_beta2 * m2[j] + (1.0 - dcfg.adam_beta2) * grad[j] * grad[j];
      pred.theta[j] -= dcfg.learning_rate * (m1[j] / c1) / (std::sqrt(m2[j] / c2) + dcfg.adam_epsilon);
    }
  }

  pred.theta = best_theta;
  for (std::size_t z = 0; z < n_slices; ++z) res.masks.push_back(pred.forward(z));
  res.predictor = std::move(pred);
  return res;
}

}  // namespace qmoco
