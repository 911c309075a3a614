#include "qmoco/pipeline.hpp"

#include <cstdio>
#include <optional>

#include "qmoco/forward.hpp"
#include "qmoco/io.hpp"
#include "qmoco/parallel.hpp"
#include "qmoco/scenario.hpp"

namespace qmoco {

namespace fs = std::filesystem;

std::vector<EchoSeries> reconstruct_volume(const std::vector<PreparedKSpace>& kspace,
                                           const std::vector<ExclusionMask>& masks, const CoilMaps& coils,
                                           const ReconConfig& cfg) {
  require(kspace.size() == masks.size(), "reconstruct: one mask per slice required");
  std::vector<EchoSeries> out(kspace.size());
  parallel_for(kspace.size(), [&](std::size_t z) { out[z] = unrolled_reconstruct(kspace[z], masks[z], coils, cfg); });
  return out;
}

std::vector<QuantMaps> fit_volume(const std::vector<EchoSeries>& recon, const PhantomVolume& vol,
                                  const FitOptions& fit) {
  require(recon.size() == vol.slice_count, "fit: slice count mismatch");
  std::vector<QuantMaps> out(recon.size());
  parallel_for(recon.size(), [&](std::size_t z) { out[z] = fit_t2star(magnitudes(recon[z]), vol.head(z), fit); });
  return out;
}

std::vector<RealImage> t2star_images(const std::vector<QuantMaps>& maps, const PhantomVolume& vol) {
  std::vector<RealImage> out;
  for (std::size_t z = 0; z < maps.size(); ++z) out.push_back(t2star_image(maps[z], vol.head(z)));
  return out;
}

MapScores score_t2star(const std::vector<RealImage>& est, const PhantomVolume& vol, const SsimParams& ssim_params) {
  require(est.size() == vol.slice_count, "score: slice count mismatch");
  MapScores s;
  auto score = [&](auto region_of, double& mae_out, double& ssim_out) {
    double abs_sum = 0.0, ssim_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t z = 0; z < est.size(); ++z) {
      const RegionMask r = region_of(z);
      const std::size_t k = count(r);
      if (k == 0) continue;
      const RealImage truth = vol.t2star(z);
      abs_sum += mae(est[z], truth, r) * static_cast<double>(k);
      ssim_sum += ssim(est[z], truth, r, ssim_params) * static_cast<double>(k);
      n += k;
    }
    require(n > 0, "score: empty region");
    mae_out = abs_sum / static_cast<double>(n);
    ssim_out = ssim_sum / static_cast<double>(n);
  };
  score([&](std::size_t z) { return vol.tissue(z, Tissue::gm); }, s.mae_gm, s.ssim_gm);
  score([&](std::size_t z) { return vol.tissue(z, Tissue::wm); }, s.mae_wm, s.ssim_wm);
  score([&](std::size_t z) { return vol.brain(z); }, s.mae_brain, s.ssim_brain);
  return s;
}

DetectionScores pooled_detection(const std::vector<ExclusionMask>& pred, const std::vector<ExclusionMask>& truth,
                                 double threshold) {
  require(pred.size() == truth.size() && !pred.empty(), "detection: one mask per slice required");
  ExclusionMask p, t;
  for (std::size_t z = 0; z < pred.size(); ++z) {
    p.weights.insert(p.weights.end(), pred[z].weights.begin(), pred[z].weights.end());
    t.weights.insert(t.weights.end(), truth[z].weights.begin(), truth[z].weights.end());
  }
  return detection_scores(p, t, threshold);
}

std::string default_tag(MaskSource source) {
  switch (source) {
    case MaskSource::ones: return "nomoco";
    case MaskSource::oracle: return "oracle";
    case MaskSource::file: return "file";
  }
  return "file";
}

// ---------------------------------------------------------------------------
// File layer

namespace {

fs::path at(const RunConfig& cfg, const std::string& name) { return cfg.output_dir / name; }

void sidecar(const RunConfig& cfg, const std::string& command) {
  io::write_atomic(at(cfg, command + ".cfg"), dump_config(cfg));
}

io::Array read_checked(const fs::path& path, io::DType dtype, std::size_t ndim) {
  if (!fs::exists(path)) throw IoError("missing input " + path.string());
  io::Array a = io::read_qmek(path);
  if (a.dtype != dtype || a.dims.size() != ndim) throw IoError("unexpected layout in " + path.string());
  return a;
}

void save_phantom(const RunConfig& cfg, const PhantomVolume& v) {
  const std::vector<std::size_t> dims{v.slice_count, v.grid.rows, v.grid.cols};
  io::write_qmek(at(cfg, "t2star_true.qmek"), io::Array::from_real(dims, v.t2star_map));
  io::write_qmek(at(cfg, "s0_true.qmek"), io::Array::from_real(dims, v.s0_map));
  io::write_qmek(at(cfg, "labels.qmek"), io::Array::from_bytes(dims, v.tissue_labels));
  io::write_qmek(at(cfg, "brain_mask.qmek"), io::Array::from_bytes(dims, v.brain_mask));
}

PhantomVolume load_phantom(const RunConfig& cfg) {
  const auto t2 = read_checked(at(cfg, "t2star_true.qmek"), io::DType::f32, 3);
  const auto s0 = read_checked(at(cfg, "s0_true.qmek"), io::DType::f32, 3);
  const auto lab = read_checked(at(cfg, "labels.qmek"), io::DType::u8, 3);
  const auto brain = read_checked(at(cfg, "brain_mask.qmek"), io::DType::u8, 3);
  if (s0.dims != t2.dims || lab.dims != t2.dims || brain.dims != t2.dims)
    throw IoError("phantom files disagree in shape");
  PhantomVolume v;
  v.slice_count = t2.dims[0];
  v.grid = {t2.dims[1], t2.dims[2]};
  v.t2star_map = t2.to_real();
  v.s0_map = s0.to_real();
  v.phase_map.assign(v.t2star_map.size(), 0.0);
  v.tissue_labels = lab.to_bytes();
  v.brain_mask = brain.to_bytes();
  return v;
}

void save_coils(const RunConfig& cfg, const CoilMaps& c) {
  io::write_qmek(at(cfg, "coils.qmek"), io::Array::from_complex({c.n_coils, c.grid.rows, c.grid.cols}, c.maps));
}

CoilMaps load_coils(const RunConfig& cfg) {
  const auto a = read_checked(at(cfg, "coils.qmek"), io::DType::c64, 3);
  CoilMaps c;
  c.n_coils = a.dims[0];
  c.grid = {a.dims[1], a.dims[2]};
  c.maps = a.to_complex();
  return c;
}

std::vector<double> load_echo_times(const RunConfig& cfg) {
  return read_checked(at(cfg, "echo_times.qmek"), io::DType::f32, 1).to_real();
}

void save_series(const fs::path& path, const std::vector<EchoSeries>& xs) {
  require(!xs.empty(), "save: no slices");
  std::vector<cplx> all;
  for (const auto& x : xs) all.insert(all.end(), x.data.begin(), x.data.end());
  io::write_qmek(path, io::Array::from_complex({xs.size(), xs[0].n_echoes(), xs[0].grid.rows, xs[0].grid.cols}, all));
}

std::vector<EchoSeries> load_series(const fs::path& path, const std::vector<double>& te) {
  const auto a = read_checked(path, io::DType::c64, 4);
  if (a.dims[1] != te.size()) throw IoError("echo count mismatch in " + path.string());
  const auto v = a.to_complex();
  const Grid g{a.dims[2], a.dims[3]};
  std::vector<EchoSeries> out;
  for (std::size_t z = 0; z < a.dims[0]; ++z) {
    EchoSeries x(g, te);
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(z * x.data.size()), x.data.size(), x.data.begin());
    out.push_back(std::move(x));
  }
  return out;
}

void save_kspace(const fs::path& path, const std::vector<KSpaceData>& ys) {
  std::vector<cplx> all;
  for (const auto& y : ys) all.insert(all.end(), y.data.begin(), y.data.end());
  const auto& y0 = ys.at(0);
  io::write_qmek(path, io::Array::from_complex({ys.size(), y0.n_echoes(), y0.n_coils, y0.grid.rows, y0.grid.cols}, all));
}

std::vector<KSpaceData> load_kspace(const fs::path& path, const std::vector<double>& te) {
  const auto a = read_checked(path, io::DType::c64, 5);
  if (a.dims[1] != te.size()) throw IoError("echo count mismatch in " + path.string());
  const auto v = a.to_complex();
  std::vector<KSpaceData> out;
  for (std::size_t z = 0; z < a.dims[0]; ++z) {
    KSpaceData y({a.dims[3], a.dims[4]}, a.dims[2], te);
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(z * y.data.size()), y.data.size(), y.data.begin());
    out.push_back(std::move(y));
  }
  return out;
}

void save_masks(const fs::path& path, const std::vector<ExclusionMask>& masks) {
  std::vector<double> all;
  for (const auto& m : masks) all.insert(all.end(), m.weights.begin(), m.weights.end());
  io::write_qmek(path, io::Array::from_real({masks.size(), masks.at(0).size()}, all));
}

std::vector<ExclusionMask> load_masks(const fs::path& path) {
  const auto a = read_checked(path, io::DType::f32, 2);
  const auto v = a.to_real();
  std::vector<ExclusionMask> out;
  for (std::size_t z = 0; z < a.dims[0]; ++z)
    out.emplace_back(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(z * a.dims[1]),
                                         v.begin() + static_cast<std::ptrdiff_t>((z + 1) * a.dims[1])));
  return out;
}

std::vector<ExclusionMask> rounded(const std::vector<ExclusionMask>& masks) {
  std::vector<ExclusionMask> out;
  for (const auto& m : masks) out.emplace_back(io::round_to_f32(m.weights));
  return out;
}

// Slices side by side.
RealImage strip(const std::vector<RealImage>& imgs) {
  const Grid g = imgs.at(0).grid;
  RealImage out({g.rows, g.cols * imgs.size()});
  for (std::size_t z = 0; z < imgs.size(); ++z)
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c) out.at(r, z * g.cols + c) = imgs[z].at(r, c);
  return out;
}

void save_t2star(const RunConfig& cfg, const std::string& tag, const std::vector<QuantMaps>& maps,
                 const PhantomVolume& vol) {
  const auto imgs = t2star_images(maps, vol);
  std::vector<double> t2, s0;
  std::vector<std::uint8_t> valid;
  for (std::size_t z = 0; z < maps.size(); ++z) {
    t2.insert(t2.end(), imgs[z].data.begin(), imgs[z].data.end());
    s0.insert(s0.end(), maps[z].s0.begin(), maps[z].s0.end());
    valid.insert(valid.end(), maps[z].valid.begin(), maps[z].valid.end());
  }
  const std::vector<std::size_t> dims{maps.size(), vol.grid.rows, vol.grid.cols};
  io::write_qmek(at(cfg, "t2star_" + tag + ".qmek"), io::Array::from_real(dims, t2));
  io::write_qmek(at(cfg, "s0_" + tag + ".qmek"), io::Array::from_real(dims, s0));
  io::write_qmek(at(cfg, "valid_" + tag + ".qmek"), io::Array::from_bytes(dims, valid));
  if (cfg.write_pgm) io::write_pgm(at(cfg, "t2star_" + tag + ".pgm"), strip(imgs), 0.0, kT2starWindow);
}

std::vector<RealImage> load_t2star(const fs::path& path, const PhantomVolume& vol) {
  const auto a = read_checked(path, io::DType::f32, 3);
  if (a.dims[0] != vol.slice_count || a.dims[1] != vol.grid.rows || a.dims[2] != vol.grid.cols)
    throw IoError("map shape mismatch in " + path.string());
  const auto v = a.to_real();
  std::vector<RealImage> out;
  for (std::size_t z = 0; z < vol.slice_count; ++z) {
    RealImage img(vol.grid);
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(z * vol.grid.size()), vol.grid.size(), img.data.begin());
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<PreparedKSpace> prepare_all(const std::vector<KSpaceData>& ys) {
  std::vector<PreparedKSpace> out(ys.size());
  parallel_for(ys.size(), [&](std::size_t z) { out[z] = prepare(ys[z]); });
  return out;
}

void reconstruct_and_fit(const RunConfig& cfg, const std::string& tag, const std::vector<ExclusionMask>& masks) {
  const auto te = load_echo_times(cfg);
  const auto coils = load_coils(cfg);
  const auto kspace = prepare_all(load_kspace(at(cfg, "kspace_corrupted.qmek"), te));
  require(masks.size() == kspace.size(), "reconstruct: mask file must hold one mask per slice");
  const auto recon = reconstruct_volume(kspace, masks, coils, cfg.recon);
  save_series(at(cfg, "recon_" + tag + ".qmek"), recon);
  save_masks(at(cfg, "masks_" + tag + ".qmek"), masks);
  const PhantomVolume vol = load_phantom(cfg);
  save_t2star(cfg, tag, fit_volume(recon, vol, cfg.fit), vol);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void cmd_phantom(const RunConfig& cfg) {
  cfg.validate();
  const ScenarioSpec spec = cfg.resolved_scenario();
  const PhantomVolume vol = make_phantom(spec.phantom, spec.seed);
  const CoilMaps coils = make_coil_maps(spec.n_coils, vol.grid, spec.seed + 1);
  const auto te = echo_train(spec.n_echoes, spec.te1, spec.dte);
  std::vector<EchoSeries> echoes(vol.slice_count);
  parallel_for(vol.slice_count, [&](std::size_t z) { echoes[z] = synthesize_echoes(vol, te, z); });
  save_phantom(cfg, vol);
  save_coils(cfg, coils);
  io::write_qmek(at(cfg, "echo_times.qmek"), io::Array::from_real({te.size()}, te));
  save_series(at(cfg, "echoes_clean.qmek"), echoes);
  if (cfg.write_pgm) {
    std::vector<RealImage> t2;
    for (std::size_t z = 0; z < vol.slice_count; ++z) t2.push_back(vol.t2star(z));
    io::write_pgm(at(cfg, "t2star_truth.pgm"), strip(t2), 0.0, kT2starWindow);
  }
  sidecar(cfg, "phantom");
}

void cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  const ScenarioSpec spec = cfg.resolved_scenario();
  const auto te = load_echo_times(cfg);
  const auto coils = load_coils(cfg);
  const auto echoes = load_series(at(cfg, "echoes_clean.qmek"), te);
  const MotionTrajectory traj = make_trajectory(spec.events, coils.grid.rows, spec.order);
  const MotionTrajectory still = make_trajectory({}, coils.grid.rows, spec.order);
  std::vector<KSpaceData> corrupted(echoes.size()), clean(echoes.size());
  parallel_for(echoes.size(), [&](std::size_t z) {
    corrupted[z] = forward_model(echoes[z], coils, traj);
    clean[z] = forward_model(echoes[z], coils, still);
    const std::uint64_t noise_seed = spec.seed * 1000003ull + 7919ull * (z + 1);
    add_kspace_noise(corrupted[z], spec.noise_sigma, noise_seed);
    add_kspace_noise(clean[z], spec.noise_sigma, noise_seed);
  });
  save_kspace(at(cfg, "kspace_corrupted.qmek"), corrupted);
  save_kspace(at(cfg, "kspace_clean.qmek"), clean);
  save_masks(at(cfg, "mask_truth.qmek"), std::vector<ExclusionMask>(echoes.size(), ground_truth_mask(traj)));
  sidecar(cfg, "simulate");
}

void cmd_reconstruct(const RunConfig& cfg, MaskSource source, const fs::path& mask_file, const std::string& tag) {
  cfg.validate();
  require(!tag.empty(), "reconstruct: empty tag");
  std::vector<ExclusionMask> masks;
  if (source == MaskSource::ones) {
    const auto truth = load_masks(at(cfg, "mask_truth.qmek"));
    masks.assign(truth.size(), ExclusionMask(truth.at(0).size(), 1.0));
  } else if (source == MaskSource::oracle) {
    masks = load_masks(at(cfg, "mask_truth.qmek"));
  } else {
    masks = load_masks(mask_file);
  }
  for (const auto& m : masks) check_mask(m, masks.at(0).size());
  reconstruct_and_fit(cfg, tag, masks);
  sidecar(cfg, "reconstruct_" + tag);
}

void cmd_fit(const RunConfig& cfg, const std::string& tag) {
  cfg.validate();
  const auto te = load_echo_times(cfg);
  const auto recon = load_series(at(cfg, "recon_" + tag + ".qmek"), te);
  const PhantomVolume vol = load_phantom(cfg);
  save_t2star(cfg, tag, fit_volume(recon, vol, cfg.fit), vol);
  sidecar(cfg, "fit_" + tag);
}

void cmd_detect(const RunConfig& cfg) {
  cfg.validate();
  const auto te = load_echo_times(cfg);
  const auto coils = load_coils(cfg);
  const auto kspace = load_kspace(at(cfg, "kspace_corrupted.qmek"), te);
  const PhantomVolume vol = load_phantom(cfg);
  std::vector<RegionMask> regions;
  for (std::size_t z = 0; z < vol.slice_count; ++z) regions.push_back(vol.brain(z));
  const SubjectData subject = make_subject(kspace, coils, regions);
  std::optional<std::vector<ExclusionMask>> truth;
  if (fs::exists(at(cfg, "mask_truth.qmek"))) truth = load_masks(at(cfg, "mask_truth.qmek"));
  const DetectionResult res = optimize_masks(subject, cfg.resolved_detector(), cfg.detector_recon, truth ? &*truth : nullptr);

  std::string csv = "epoch,l_phys,l_reg,total,best_total,wall_ms\n";
  for (const auto& r : res.trace)
    csv += std::to_string(r.epoch) + "," + num(r.l_phys) + "," + num(r.l_reg) + "," + num(r.total) + "," +
           num(r.best_total) + "," + num(r.wall_ms) + "\n";
  io::write_atomic(at(cfg, "trace_detect.csv"), csv);
  std::string summary = "key,value\nbest_epoch," + std::to_string(res.best_epoch) + "\nepochs," +
                        std::to_string(res.trace.size()) + "\n";
  if (res.reference)
    summary += "reference_l_phys," + num(res.reference->l_phys) + "\nreference_total," + num(res.reference->total) + "\n";
  io::write_atomic(at(cfg, "detect_summary.csv"), summary);
  // Round through f32 first so re-running reconstruct on the saved masks is bit-exact.
  reconstruct_and_fit(cfg, "detect", rounded(res.masks));
  sidecar(cfg, "detect");
}

void cmd_orba(const RunConfig& cfg) {
  cfg.validate();
  const auto te = load_echo_times(cfg);
  const auto coils = load_coils(cfg);
  const auto kspace = load_kspace(at(cfg, "kspace_corrupted.qmek"), te);
  std::vector<EchoSeries> recon(kspace.size());
  std::vector<ExclusionMask> mean_masks(kspace.size());
  for (std::size_t z = 0; z < kspace.size(); ++z) {
    OrbaResult r = orba_reconstruct(kspace[z], coils, cfg.recon, cfg.orba, cfg.orba_seed());
    recon[z] = std::move(r.recon);
    mean_masks[z] = std::move(r.mean_mask);
  }
  save_series(at(cfg, "recon_orba.qmek"), recon);
  save_masks(at(cfg, "masks_orba_mean.qmek"), mean_masks);
  const PhantomVolume vol = load_phantom(cfg);
  save_t2star(cfg, "orba", fit_volume(recon, vol, cfg.fit), vol);
  sidecar(cfg, "orba");
}

void cmd_metrics(const RunConfig& cfg, const std::vector<std::string>& pairs) {
  cfg.validate();
  require(!pairs.empty(), "metrics: no map pairs given");
  const PhantomVolume vol = load_phantom(cfg);
  const fs::path truth_masks = at(cfg, "mask_truth.qmek");
  std::string csv = "context,region,metric,value\n";
  for (const auto& pair : pairs) {
    // "a" compares t2star_a against the phantom truth, "a:b" compares two maps.
    const auto colon = pair.find(':');
    const std::string a = pair.substr(0, colon);
    const std::string b = colon == std::string::npos ? "truth" : pair.substr(colon + 1);
    require(!a.empty() && !b.empty(), "metrics: malformed pair '" + pair + "'");
    const auto maps_of = [&](const std::string& tag) {
      if (tag != "truth") return load_t2star(at(cfg, "t2star_" + tag + ".qmek"), vol);
      std::vector<RealImage> t;
      for (std::size_t z = 0; z < vol.slice_count; ++z) t.push_back(vol.t2star(z));
      return t;
    };
    PhantomVolume ref = vol;
    if (b != "truth") {
      const auto mb = maps_of(b);
      for (std::size_t z = 0; z < vol.slice_count; ++z)
        std::copy(mb[z].data.begin(), mb[z].data.end(), ref.t2star_map.begin() + static_cast<std::ptrdiff_t>(z * vol.grid.size()));
    }
    const MapScores s = score_t2star(maps_of(a), ref, cfg.ssim);
    const std::string ctx = a + (b == "truth" ? "" : ":" + b);
    csv += ctx + ",gm,mae," + num(s.mae_gm) + "\n" + ctx + ",wm,mae," + num(s.mae_wm) + "\n" + ctx + ",brain,mae," +
           num(s.mae_brain) + "\n" + ctx + ",gm,ssim," + num(s.ssim_gm) + "\n" + ctx + ",wm,ssim," +
           num(s.ssim_wm) + "\n" + ctx + ",brain,ssim," + num(s.ssim_brain) + "\n";
    const fs::path mp = at(cfg, "masks_" + a + ".qmek");
    if (b == "truth" && fs::exists(mp) && fs::exists(truth_masks)) {
      const auto d = pooled_detection(load_masks(mp), load_masks(truth_masks), cfg.detection_threshold);
      csv += ctx + ",lines,precision," + num(d.precision) + "\n" + ctx + ",lines,recall," + num(d.recall) + "\n" +
             ctx + ",lines,f1," + num(d.f1) + "\n";
    }
  }
  io::write_atomic(at(cfg, "metrics.csv"), csv);
  sidecar(cfg, "metrics");
}

void cmd_report(const RunConfig& cfg) {
  cfg.validate();
  const PhantomVolume vol = load_phantom(cfg);
  std::vector<std::string> tags;
  for (const char* t : {"nomoco", "orba", "detect", "oracle"})
    if (fs::exists(at(cfg, std::string("t2star_") + t + ".qmek"))) tags.push_back(t);
  require(!tags.empty(), "report: no reconstructed maps found");
  cmd_metrics(cfg, tags);

  std::string csv = "tag,mae_brain,ssim_brain,mae_gm,mae_wm,ssim_gm,ssim_wm,f1\n";
  std::vector<std::vector<RealImage>> columns;
  for (const auto& tag : tags) {
    auto imgs = load_t2star(at(cfg, "t2star_" + tag + ".qmek"), vol);
    const MapScores s = score_t2star(imgs, vol, cfg.ssim);
    std::string f1 = "";
    const fs::path mp = at(cfg, "masks_" + tag + ".qmek");
    if (fs::exists(mp) && fs::exists(at(cfg, "mask_truth.qmek")))
      f1 = num(pooled_detection(load_masks(mp), load_masks(at(cfg, "mask_truth.qmek")), cfg.detection_threshold).f1);
    csv += tag + "," + num(s.mae_brain) + "," + num(s.ssim_brain) + "," + num(s.mae_gm) + "," + num(s.mae_wm) + "," +
           num(s.ssim_gm) + "," + num(s.ssim_wm) + "," + f1 + "\n";
    columns.push_back(std::move(imgs));
  }
  io::write_atomic(at(cfg, "summary.csv"), csv);

  // T2* panel: one row per slice, one column per method, truth last.
  std::vector<RealImage> truth;
  for (std::size_t z = 0; z < vol.slice_count; ++z) truth.push_back(vol.t2star(z));
  columns.push_back(truth);
  const Grid g = vol.grid;
  const std::size_t gap = 2;
  RealImage panel({vol.slice_count * (g.rows + gap), columns.size() * (g.cols + gap)});
  for (std::size_t k = 0; k < columns.size(); ++k)
    for (std::size_t z = 0; z < vol.slice_count; ++z)
      for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols; ++c)
          panel.at(z * (g.rows + gap) + r, k * (g.cols + gap) + c) = columns[k][z].at(r, c);
  io::write_pgm(at(cfg, "panel_t2star.pgm"), panel, 0.0, kT2starWindow);

  // Mask panel: one block per mask set (rows = slices, columns = lines).
  std::vector<std::vector<ExclusionMask>> sets;
  for (const char* name : {"mask_truth", "masks_detect", "masks_orba_mean"})
    if (fs::exists(at(cfg, std::string(name) + ".qmek"))) sets.push_back(load_masks(at(cfg, std::string(name) + ".qmek")));
  if (!sets.empty()) {
    const std::size_t cell = 4, lines = sets[0].at(0).size();
    RealImage masks({sets.size() * (vol.slice_count * cell + gap), lines * cell});
    for (std::size_t k = 0; k < sets.size(); ++k)
      for (std::size_t z = 0; z < sets[k].size(); ++z)
        for (std::size_t l = 0; l < lines; ++l)
          for (std::size_t dr = 0; dr < cell; ++dr)
            for (std::size_t dc = 0; dc < cell; ++dc)
              masks.at(k * (vol.slice_count * cell + gap) + z * cell + dr, l * cell + dc) = sets[k][z].weights[l];
    io::write_pgm(at(cfg, "panel_masks.pgm"), masks, 0.0, 1.0);
  }
  sidecar(cfg, "report");
}

void cmd_run(const RunConfig& cfg) {
  cmd_phantom(cfg);
  cmd_simulate(cfg);
  cmd_reconstruct(cfg, MaskSource::ones, {}, "nomoco");
  cmd_reconstruct(cfg, MaskSource::oracle, {}, "oracle");
  cmd_detect(cfg);
  cmd_orba(cfg);
  cmd_report(cfg);
  sidecar(cfg, "run");
}

}  // namespace qmoco
