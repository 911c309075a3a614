#include "qmoco/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "qmoco/io.hpp"

namespace qmoco {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw ValidationError("config: " + key + " expects a number, got '" + v + "'");
  return d;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t u = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), u);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ValidationError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  return u;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: " + key + " expects true/false, got '" + v + "'");
}

template <class E>
struct EnumNames {
  std::vector<std::pair<E, std::string>> names;

  std::string get(E e) const {
    for (auto& [k, n] : names)
      if (k == e) return n;
    return "?";
  }
  E set(const std::string& key, const std::string& v) const {
    for (auto& [k, n] : names)
      if (n == v) return k;
    std::string all;
    for (auto& p : names) all += (all.empty() ? "" : "|") + p.second;
    throw ValidationError("config: " + key + " must be one of " + all + ", got '" + v + "'");
  }
};

const EnumNames<MotionPreset> kPreset{{{MotionPreset::none, "none"}, {MotionPreset::severe, "severe"}, {MotionPreset::minor, "minor"}}};
const EnumNames<SamplingOrder> kOrder{{{SamplingOrder::linear, "linear"}, {SamplingOrder::center_out, "center_out"}}};
const EnumNames<DenoiserKind> kDenoiser{
    {{DenoiserKind::identity, "identity"}, {DenoiserKind::tikhonov, "tikhonov"}, {DenoiserKind::tv_prox, "tv_prox"}}};
const EnumNames<ReconInit> kInit{{{ReconInit::adjoint, "adjoint"}, {ReconInit::zero_filled, "zero_filled"}}};
const EnumNames<DetectorOptimizer> kOptimizer{{{DetectorOptimizer::nes, "nes"}, {DetectorOptimizer::fd_adam, "fd_adam"}}};
const EnumNames<StopMonitor> kMonitor{{{StopMonitor::total, "total"}, {StopMonitor::l_reg, "l_reg"}}};
const EnumNames<Activation> kActivation{{{Activation::relu, "relu"}, {Activation::tanh, "tanh"}}};

struct Binding {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

// Ordered key table bound to one config instance.
std::vector<std::pair<std::string, Binding>> bindings(RunConfig& c) {
  std::vector<std::pair<std::string, Binding>> t;
  auto real = [&t](std::string key, double& ref) {
    t.push_back({key, {[&ref] { return fmt(ref); }, [&ref, key](const std::string& v) { ref = to_double(key, v); }}});
  };
  auto size = [&t](std::string key, std::size_t& ref) {
    t.push_back({key,
                 {[&ref] { return std::to_string(ref); },
                  [&ref, key](const std::string& v) { ref = static_cast<std::size_t>(to_uint(key, v)); }}});
  };
  auto u64 = [&t](std::string key, std::uint64_t& ref) {
    t.push_back({key, {[&ref] { return std::to_string(ref); }, [&ref, key](const std::string& v) { ref = to_uint(key, v); }}});
  };
  auto flag = [&t](std::string key, bool& ref) {
    t.push_back({key, {[&ref] { return std::string(ref ? "true" : "false"); },
                       [&ref, key](const std::string& v) { ref = to_bool(key, v); }}});
  };
  auto choice = [&t](std::string key, auto& ref, const auto& names) {
    t.push_back({key, {[&ref, &names] { return names.get(ref); },
                       [&ref, &names, key](const std::string& v) { ref = names.set(key, v); }}});
  };

  auto& ph = c.scenario.phantom;
  size("phantom.rows", ph.rows);
  size("phantom.cols", ph.cols);
  size("phantom.slices", ph.slices);
  real("phantom.t2s_gm", ph.t2s_gm);
  real("phantom.t2s_wm", ph.t2s_wm);
  real("phantom.t2s_csf", ph.t2s_csf);
  real("phantom.s0_gm", ph.s0_gm);
  real("phantom.s0_wm", ph.s0_wm);
  real("phantom.s0_csf", ph.s0_csf);
  real("phantom.t2s_variation", ph.t2s_variation);
  real("phantom.s0_variation", ph.s0_variation);
  real("phantom.csf_fraction", ph.csf_fraction);
  real("phantom.phase_amplitude", ph.phase_amplitude);
  size("phantom.n_echoes", c.scenario.n_echoes);
  real("phantom.te1", c.scenario.te1);
  real("phantom.dte", c.scenario.dte);
  size("phantom.n_coils", c.scenario.n_coils);

  choice("trajectory.preset", c.preset, kPreset);
  real("trajectory.preset_fraction", c.preset_fraction);
  t.push_back({"trajectory.events",
               {[&c] { return format_events(c.scenario.events); },
                [&c](const std::string& v) { c.scenario.events = parse_events(v); }}});
  choice("trajectory.order", c.scenario.order, kOrder);
  real("trajectory.noise_sigma", c.scenario.noise_sigma);

  size("recon.n_unrolled", c.recon.n_unrolled);
  real("recon.dc_step_size", c.recon.dc_step_size);
  choice("recon.denoiser", c.recon.denoiser.kind, kDenoiser);
  real("recon.denoiser_lambda", c.recon.denoiser.lambda);
  size("recon.denoiser_iters", c.recon.denoiser.inner_iters);
  choice("recon.init", c.recon.init, kInit);

  real("fit.t2star_cap", c.fit.t2star_cap);
  flag("fit.refine_lm", c.fit.refine_lm);
  size("fit.lm_max_iters", c.fit.lm_max_iters);

  auto& d = c.detector;
  real("detector.lambda", d.lambda);
  size("detector.batch_slices", d.batch_slices);
  size("detector.patience", d.patience);
  size("detector.max_epochs", d.max_epochs);
  choice("detector.optimizer", d.optimizer, kOptimizer);
  real("detector.fd_epsilon", d.fd_epsilon);
  size("detector.population", d.population);
  real("detector.sigma", d.sigma);
  real("detector.learning_rate", d.learning_rate);
  real("detector.adam_beta1", d.adam_beta1);
  real("detector.adam_beta2", d.adam_beta2);
  real("detector.adam_epsilon", d.adam_epsilon);
  choice("detector.monitor", d.monitor, kMonitor);
  choice("detector.activation", d.activation, kActivation);
  real("detector.init_keep", d.init_keep);
  size("detector.recon_n_unrolled", c.detector_recon.n_unrolled);
  real("detector.recon_dc_step_size", c.detector_recon.dc_step_size);
  choice("detector.recon_denoiser", c.detector_recon.denoiser.kind, kDenoiser);
  real("detector.recon_denoiser_lambda", c.detector_recon.denoiser.lambda);
  size("detector.recon_denoiser_iters", c.detector_recon.denoiser.inner_iters);
  choice("detector.recon_init", c.detector_recon.init, kInit);

  size("orba.n_masks", c.orba.n_masks);
  real("orba.rate", c.orba.rate);
  size("orba.center", c.orba.center);
  real("orba.density_slope", c.orba.density_slope);

  size("metrics.ssim_window", c.ssim.window);
  real("metrics.ssim_sigma", c.ssim.sigma);
  real("metrics.ssim_k1", c.ssim.k1);
  real("metrics.ssim_k2", c.ssim.k2);
  real("metrics.data_range", c.ssim.data_range);
  real("metrics.detection_threshold", c.detection_threshold);

  u64("seeds.base", c.seed);

  t.push_back({"output.dir", {[&c] { return c.output_dir.string(); },
                              [&c](const std::string& v) { c.output_dir = v; }}});
  flag("output.pgm", c.write_pgm);
  return t;
}

}  // namespace

std::string format_events(const std::vector<MotionEvent>& events) {
  std::string s;
  for (const auto& e : events) {
    if (!s.empty()) s += ";";
    s += std::to_string(e.first) + ":" + std::to_string(e.last) + ":" + fmt(e.state.rotation_deg) + ":" +
         fmt(e.state.dx) + ":" + fmt(e.state.dy);
  }
  return s;
}

std::vector<MotionEvent> parse_events(const std::string& text) {
  std::vector<MotionEvent> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::vector<std::string> f;
    std::stringstream is(item);
    std::string part;
    while (std::getline(is, part, ':')) f.push_back(trim(part));
    if (f.size() != 5) throw ValidationError("config: event '" + item + "' must be first:last:rot:dx:dy");
    MotionEvent e;
    e.first = static_cast<std::size_t>(to_uint("trajectory.events", f[0]));
    e.last = static_cast<std::size_t>(to_uint("trajectory.events", f[1]));
    e.state = {to_double("trajectory.events", f[2]), to_double("trajectory.events", f[3]),
               to_double("trajectory.events", f[4])};
    out.push_back(e);
  }
  return out;
}

std::vector<MotionEvent> RunConfig::resolved_events() const {
  const std::size_t n = scenario.phantom.rows;
  std::vector<MotionEvent> ev = scenario.events;
  if (preset == MotionPreset::severe) {
    const auto p = preset_fraction > 0 ? severe_motion_events(n, seed, preset_fraction) : severe_motion_events(n, seed);
    ev.insert(ev.end(), p.begin(), p.end());
  } else if (preset == MotionPreset::minor) {
    const auto p = preset_fraction > 0 ? minor_motion_events(n, seed, preset_fraction) : minor_motion_events(n, seed);
    ev.insert(ev.end(), p.begin(), p.end());
  }
  return ev;
}

ScenarioSpec RunConfig::resolved_scenario() const {
  ScenarioSpec s = scenario;
  s.events = resolved_events();
  s.seed = seed;
  return s;
}

DetectorConfig RunConfig::resolved_detector() const {
  DetectorConfig d = detector;
  d.fit = fit;
  d.seed = seed + 17;
  return d;
}

void RunConfig::validate() const {
  const auto& ph = scenario.phantom;
  require(ph.rows >= 32 && ph.cols >= 32, "config: phantom grid must be at least 32x32");
  require(ph.slices >= 4, "config: phantom.slices must be >= 4");
  require(scenario.n_echoes >= 3, "config: phantom.n_echoes must be >= 3");
  require(scenario.te1 > 0 && scenario.dte > 0, "config: echo times must be positive");
  require(scenario.n_coils >= 1, "config: phantom.n_coils must be >= 1");
  require(scenario.noise_sigma >= 0, "config: trajectory.noise_sigma must be >= 0");
  require(preset_fraction >= 0 && preset_fraction < 0.5, "config: trajectory.preset_fraction must lie in [0, 0.5)");
  recon.validate();
  detector_recon.validate();
  detector.validate();
  require(orba.n_masks >= 1 && orba.rate >= 0 && orba.rate <= 1, "config: invalid orba settings");
  require(orba.center <= ph.rows, "config: orba.center exceeds line count");
  require(ssim.data_range > 0 && ssim.window % 2 == 1, "config: invalid SSIM settings");
  require(detection_threshold > 0 && detection_threshold < 1, "config: detection_threshold must lie in (0,1)");
  require(fit.t2star_cap > 0, "config: fit.t2star_cap must be positive");
  make_trajectory(resolved_events(), ph.rows, scenario.order);
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  auto table = bindings(c);
  std::map<std::string, Binding*> index;
  for (auto& [k, b] : table) index[k] = &b;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second->set(value);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

std::string dump_config(const RunConfig& c) {
  RunConfig copy = c;
  std::string out = "# resolved configuration\n";
  std::string section;
  for (auto& [k, b] : bindings(copy)) {
    const std::string s = k.substr(0, k.find('.'));
    if (s != section) {
      if (!section.empty()) out += "\n";
      section = s;
    }
    out += k + " = " + b.get() + "\n";
  }
  return out;
}

}  // namespace qmoco
