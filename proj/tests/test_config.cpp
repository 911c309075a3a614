#include "doctest.h"
#include "qmoco/config.hpp"

using namespace qmoco;

TEST_SUITE("config") {
  TEST_CASE("defaults carry the reference values") {
    const RunConfig c;
    CHECK(c.scenario.n_echoes == 12);
    CHECK(c.scenario.dte == 5.0);
    CHECK(c.scenario.phantom.rows == 92);
    CHECK(c.detector.lambda == 0.1);
    CHECK(c.detector.batch_slices == 4);
    CHECK(c.detector.patience == 50);
    CHECK(c.recon.n_unrolled == 5);
    CHECK(c.orba.n_masks == 15);
    CHECK(c.orba.rate == 0.5);
    CHECK(c.orba.center == 10);
    CHECK(c.seed == 0);
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("dump and parse round trip") {
    RunConfig c;
    c.scenario.phantom.cols = 40;
    c.scenario.events = {{3, 9, {2.5, -1.25, 0.1}}, {50, 60, {-4, 0, 2}}};
    c.recon.denoiser.kind = DenoiserKind::tv_prox;
    c.recon.denoiser.lambda = 0.0123456789012345;
    c.detector.optimizer = DetectorOptimizer::fd_adam;
    c.detector_recon.n_unrolled = 3;
    c.preset = MotionPreset::minor;
    c.seed = 99;
    c.write_pgm = false;
    c.output_dir = "some/dir";
    const std::string text = dump_config(c);
    const RunConfig d = parse_config(text);
    CHECK(dump_config(d) == text);
    CHECK(d.recon.denoiser.lambda == c.recon.denoiser.lambda);
    REQUIRE(d.scenario.events.size() == 2);
    CHECK(d.scenario.events[0].state.dx == -1.25);
    CHECK(d.detector_recon.n_unrolled == 3);
    CHECK(d.output_dir == "some/dir");
  }

  TEST_CASE("comments, blanks and whitespace") {
    const auto c = parse_config("# header\n\n  phantom.cols = 36   # trailing\nseeds.base=7\n");
    CHECK(c.scenario.phantom.cols == 36);
    CHECK(c.seed == 7);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(parse_config("phantom.colz = 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("phantom.cols 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("phantom.cols = -3\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("phantom.cols = 3x\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("detector.lambda = abc\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("recon.denoiser = cnn\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("output.pgm = maybe\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("trajectory.events = 1:2:3\n"), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/qmoco.cfg"), IoError);
    // Parses, but fails validation.
    CHECK_THROWS_AS(parse_config("phantom.cols = 16\n").validate(), ValidationError);
    CHECK_THROWS_AS(parse_config("trajectory.events = 1:2:50:0:0\n").validate(), ValidationError);
    CHECK_THROWS_AS(parse_config("recon.dc_step_size = 2\n").validate(), ValidationError);
  }

  TEST_CASE("presets resolve deterministically from the seed") {
    RunConfig c;
    c.preset = MotionPreset::severe;
    const auto a = c.resolved_events();
    CHECK(a == c.resolved_events());
    CHECK_FALSE(a.empty());
    c.seed = 1;
    CHECK(c.resolved_events() != a);
    c.preset = MotionPreset::none;
    CHECK(c.resolved_events().empty());
  }
}
