#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmoco/config.hpp"
#include "qmoco/parallel.hpp"
#include "qmoco/pipeline.hpp"

using namespace qmoco;

int main(int argc, char** argv) {
  CLI::App app{"qmoco: motion-robust multi-echo T2* mapping on synthetic data"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t n_threads = 1;
  app.add_option("--config", config_path, "config file (section.key = value)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "base seed (overrides seeds.base)");
  app.add_option("--threads", n_threads, "worker threads")->check(CLI::PositiveNumber);

  auto* phantom = app.add_subcommand("phantom", "generate phantom, coils and clean echoes");
  auto* simulate = app.add_subcommand("simulate", "corrupt k-space with the configured motion");
  auto* recon = app.add_subcommand("reconstruct", "unrolled reconstruction with a given mask");
  std::string mask = "ones", recon_tag;
  recon->add_option("--mask", mask, "ones, oracle or a QMEK mask file");
  recon->add_option("--tag", recon_tag, "output tag (default: nomoco, oracle or file)");
  auto* fit = app.add_subcommand("fit", "T2* fit of a reconstruction");
  std::string fit_tag = "nomoco";
  fit->add_option("--tag", fit_tag, "reconstruction tag");
  auto* detect = app.add_subcommand("detect", "learn exclusion masks, then reconstruct and fit");
  auto* orba = app.add_subcommand("orba", "bootstrap-aggregated baseline");
  auto* metrics = app.add_subcommand("metrics", "MAE, SSIM and detection scores");
  std::vector<std::string> pairs;
  metrics->add_option("--pairs", pairs, "tag or tag_a:tag_b entries")->required();
  auto* report = app.add_subcommand("report", "summary CSV and PGM panels");
  auto* run = app.add_subcommand("run", "every step in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    set_threads(n_threads);

    if (*phantom) cmd_phantom(cfg);
    else if (*simulate) cmd_simulate(cfg);
    else if (*recon) {
      MaskSource src = MaskSource::file;
      if (mask == "ones") src = MaskSource::ones;
      else if (mask == "oracle") src = MaskSource::oracle;
      cmd_reconstruct(cfg, src, mask, recon_tag.empty() ? default_tag(src) : recon_tag);
    } else if (*fit) cmd_fit(cfg, fit_tag);
    else if (*detect) cmd_detect(cfg);
    else if (*orba) cmd_orba(cfg);
    else if (*metrics) cmd_metrics(cfg, pairs);
    else if (*report) cmd_report(cfg);
    else if (*run) cmd_run(cfg);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
