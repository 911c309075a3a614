#include <filesystem>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "qmoco/io.hpp"

using namespace qmoco;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qmoco_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("fnv1a reference values") {
    CHECK(io::fnv1a64({}) == 0xcbf29ce484222325ull);
    const std::uint8_t a[] = {'a'};
    CHECK(io::fnv1a64(a) == 0xaf63dc4c8601ec8cull);
    const std::string s = "foobar";
    CHECK(io::fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())) == 0x85944171f73967e8ull);
  }

  TEST_CASE("header layout is bit-exact") {
    const auto bytes = io::encode_qmek(io::Array::from_real({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6}));
    REQUIRE(bytes.size() == 4 + 4 * 3 + 4 * 2 + 6 * 4 + 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "QMEK");
    CHECK(bytes[4] == 1);   // version
    CHECK(bytes[8] == 1);   // f32
    CHECK(bytes[12] == 2);  // ndim
    CHECK(bytes[16] == 2);
    CHECK(bytes[20] == 3);
    // 1.0f little-endian
    CHECK(bytes[24] == 0x00);
    CHECK(bytes[27] == 0x3f);
    CHECK(bytes[26] == 0x80);
  }

  TEST_CASE("round trip for every dtype") {
    std::mt19937_64 rng(4);
    const auto dir = scratch_dir("io_rt");
    const auto re = io::round_to_f32(qt::random_real(60, rng));
    auto cx = qt::random_complex(24, rng);
    for (auto& v : cx) v = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
    std::vector<std::uint8_t> by(10);
    for (std::size_t i = 0; i < by.size(); ++i) by[i] = static_cast<std::uint8_t>(i * 25);

    io::write_qmek(dir / "r.qmek", io::Array::from_real({3, 4, 5}, re));
    io::write_qmek(dir / "c.qmek", io::Array::from_complex({2, 12}, cx));
    io::write_qmek(dir / "b.qmek", io::Array::from_bytes({10}, by));
    const auto r = io::read_qmek(dir / "r.qmek");
    CHECK(r.dims == std::vector<std::size_t>{3, 4, 5});
    CHECK(r.to_real() == re);
    CHECK(io::read_qmek(dir / "c.qmek").to_complex() == cx);
    CHECK(io::read_qmek(dir / "b.qmek").to_bytes() == by);
    CHECK_FALSE(fs::exists(dir / "r.qmek.tmp"));
    CHECK_THROWS_AS(r.to_complex(), ValidationError);
    fs::remove_all(dir);
  }

  TEST_CASE("corruption is detected") {
    const auto good = io::encode_qmek(io::Array::from_real({4}, std::vector<double>{1, 2, 3, 4}));
    CHECK_NOTHROW(io::decode_qmek(good));
    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    bad = good;
    bad[4] = 9;
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    bad = good;
    bad[8] = 7;
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    bad = good;
    bad[20] ^= 1;  // payload bit flip
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    bad = good;
    bad.back() ^= 1;  // checksum bit flip
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    bad = good;
    bad.pop_back();
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    bad = good;
    bad.push_back(0);
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    bad = good;
    bad[16] = 5;  // dims claim more values than stored
    CHECK_THROWS_AS(io::decode_qmek(bad), IoError);
    CHECK_THROWS_AS(io::decode_qmek(std::vector<std::uint8_t>(8, 0)), IoError);
    CHECK_THROWS_AS(io::read_qmek("/nonexistent/qmoco/file.qmek"), IoError);
  }

  TEST_CASE("pgm encoding") {
    RealImage img(Grid{1, 4});
    img.data = {-10, 0, 100, 500};
    const auto b = io::encode_pgm(img, 0, 200);
    const std::string header = "P5\n4 1\n255\n";
    REQUIRE(b.size() == header.size() + 4);
    CHECK(std::string(b.begin(), b.begin() + header.size()) == header);
    CHECK(b[header.size()] == 0);
    CHECK(b[header.size() + 1] == 0);
    CHECK(b[header.size() + 2] == 128);
    CHECK(b[header.size() + 3] == 255);
    CHECK_THROWS_AS(io::encode_pgm(img, 1, 1), ValidationError);
  }
}
