#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "qmoco/io.hpp"
#include "qmoco/pipeline.hpp"

using namespace qmoco;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& name) {
  RunConfig c;
  c.scenario.phantom.cols = 32;
  c.scenario.n_coils = 2;
  c.output_dir = fs::temp_directory_path() / ("qmoco_test_" + name);
  fs::remove_all(c.output_dir);
  return c;
}

std::map<std::string, double> read_metrics(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    const auto last = line.rfind(',');
    out[line.substr(0, last)] = std::stod(line.substr(last + 1));
  }
  return out;
}

std::vector<std::uint8_t> bytes(const fs::path& p) { return io::read_file(p); }

std::vector<fs::path> qmek_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".qmek") out.push_back(e.path().filename());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("motion-free round trip recovers the phantom maps") {
    const auto cfg = small_config("roundtrip");
    cmd_phantom(cfg);
    cmd_simulate(cfg);
    cmd_reconstruct(cfg, MaskSource::ones, {}, "nomoco");
    cmd_fit(cfg, "nomoco");
    cmd_metrics(cfg, {"nomoco", "nomoco:nomoco"});
    const auto m = read_metrics(cfg.output_dir / "metrics.csv");
    CHECK(m.at("nomoco,brain,mae") <= 1e-3);
    CHECK(m.at("nomoco,gm,mae") <= 1e-3);
    CHECK(m.at("nomoco:nomoco,brain,mae") == 0.0);
    CHECK(m.at("nomoco:nomoco,brain,ssim") == 1.0);
    CHECK(m.at("nomoco:nomoco,wm,ssim") == 1.0);
    // With no motion nothing is excluded.
    CHECK(m.at("nomoco,lines,f1") == 1.0);
    for (const char* s : {"phantom.cfg", "simulate.cfg", "reconstruct_nomoco.cfg", "fit_nomoco.cfg", "metrics.cfg"})
      CHECK(fs::exists(cfg.output_dir / s));
    // The sidecar reproduces the run configuration.
    CHECK(dump_config(load_config(cfg.output_dir / "phantom.cfg")) == dump_config(cfg));
    fs::remove_all(cfg.output_dir);
  }

  TEST_CASE("every written QMEK file re-reads") {
    auto cfg = small_config("reread");
    cfg.preset = MotionPreset::severe;
    cmd_phantom(cfg);
    cmd_simulate(cfg);
    cmd_reconstruct(cfg, MaskSource::oracle, {}, "oracle");
    for (const auto& f : qmek_files(cfg.output_dir)) CHECK_NOTHROW(io::read_qmek(cfg.output_dir / f));
    const auto truth = io::read_qmek(cfg.output_dir / "mask_truth.qmek").to_real();
    CHECK(io::read_qmek(cfg.output_dir / "masks_oracle.qmek").to_real() == truth);
    fs::remove_all(cfg.output_dir);
  }

  TEST_CASE("detected masks fed back to reconstruct reproduce the detect maps") {
    auto cfg = small_config("compose");
    cfg.preset = MotionPreset::severe;
    cfg.scenario.n_coils = 1;
    cfg.detector.max_epochs = 3;
    cfg.detector.population = 2;
    cmd_phantom(cfg);
    cmd_simulate(cfg);
    cmd_detect(cfg);
    cmd_reconstruct(cfg, MaskSource::file, cfg.output_dir / "masks_detect.qmek", "again");
    for (const char* kind : {"t2star_", "s0_", "valid_", "recon_"})
      CHECK(bytes(cfg.output_dir / (std::string(kind) + "detect.qmek")) ==
            bytes(cfg.output_dir / (std::string(kind) + "again.qmek")));
    std::ifstream trace(cfg.output_dir / "trace_detect.csv");
    std::string header;
    std::getline(trace, header);
    CHECK(header == "epoch,l_phys,l_reg,total,best_total,wall_ms");
    fs::remove_all(cfg.output_dir);
  }

  TEST_CASE("missing inputs and corrupt files are I/O errors") {
    const auto cfg = small_config("missing");
    CHECK_THROWS_AS(cmd_simulate(cfg), IoError);
    cmd_phantom(cfg);
    auto b = bytes(cfg.output_dir / "coils.qmek");
    b[30] ^= 0xff;
    io::write_atomic(cfg.output_dir / "coils.qmek", b);
    CHECK_THROWS_AS(cmd_simulate(cfg), IoError);
    fs::remove_all(cfg.output_dir);
  }
}

#ifdef QMOCO_CLI_PATH
TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    const fs::path dir = fs::temp_directory_path() / "qmoco_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = QMOCO_CLI_PATH;
    auto run = [&](const std::string& args) {
      const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
      return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    {
      std::ofstream(dir / "ok.cfg") << "phantom.cols = 32\nphantom.n_coils = 1\n";
      std::ofstream(dir / "typo.cfg") << "phantom.colz = 32\n";
      std::ofstream(dir / "bad.cfg") << "phantom.cols = 8\n";
    }
    const std::string out = " --out " + (dir / "out").string();
    CHECK(run("--help") == 0);
    CHECK(run("") == 1);
    CHECK(run("--config " + (dir / "typo.cfg").string() + out + " phantom") == 1);
    CHECK(run("--config " + (dir / "bad.cfg").string() + out + " phantom") == 1);
    CHECK(run("--config " + (dir / "absent.cfg").string() + out + " phantom") == 2);
    CHECK(run("--config " + (dir / "ok.cfg").string() + out + " simulate") == 2);
    CHECK(run("--config " + (dir / "ok.cfg").string() + out + " phantom") == 0);
    CHECK(run("--config " + (dir / "ok.cfg").string() + out + " --seed 4 simulate") == 0);
    CHECK(fs::exists(dir / "out" / "kspace_corrupted.qmek"));
    CHECK(load_config(dir / "out" / "simulate.cfg").seed == 4);
    CHECK(run("--config " + (dir / "ok.cfg").string() + out + " reconstruct --mask " + (dir / "nope.qmek").string()) == 2);
    fs::remove_all(dir);
  }
}
#endif
