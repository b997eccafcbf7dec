#include <doctest.h>

#include <string>

#include "oracles.hpp"
#include "smash/codec.hpp"
#include "smash/error.hpp"

using namespace smash;

namespace {

// Volume whose samples are exactly representable as binary32.
VideoVolume float_volume(Dims3 d, std::uint64_t seed) {
  VideoVolume v = oracle::random_volume(d, seed);
  for (double& x : v.data()) x = static_cast<float>(x);
  return v;
}

bool same(const VideoVolume& a, const VideoVolume& b) {
  return a.dims() == b.dims() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

MachFilter sample_filter(std::uint64_t seed, const std::string& label, ViewKind kind) {
  MachFilter f;
  f.volume = float_volume(Dims3{4, 5, 3}, seed);
  f.label = label;
  f.params = MachParams{0.25, 1e-3, 7.5, f.params.noise_constant};
  f.view_tag.kind = kind;
  return f;
}

Bytes text(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

TEST_SUITE("codec") {
  TEST_CASE("primitive encoding is little-endian") {
    ByteWriter w;
    w.u32(0x01020304u);
    w.f64(1.0);
    const Bytes b = w.take();
    CHECK(b[0] == 0x04);
    CHECK(b[3] == 0x01);
    CHECK(b[11] == 0x3F);
    CHECK(b[10] == 0xF0);
    ByteReader r(b, "t");
    CHECK(r.u32() == 0x01020304u);
    CHECK(r.f64() == 1.0);
    CHECK_NOTHROW(r.expect_end());
  }

  TEST_CASE("RVF1 round trip and layout") {
    const VideoVolume v = float_volume(Dims3{3, 4, 2}, 1);
    const Bytes b = encode_rvf(v);
    CHECK(b.size() == 4 + 12 + 24 * 4);
    CHECK(std::string(b.begin(), b.begin() + 4) == "RVF1");
    CHECK(b[4] == 3);
    CHECK(same(decode_rvf(b), v));
    CHECK(encode_rvf(decode_rvf(b)) == b);
  }

  TEST_CASE("truncation names expected and actual sizes") {
    Bytes b = encode_rvf(float_volume(Dims3{2, 2, 2}, 2));
    const std::size_t full = b.size();
    b.resize(full - 3);
    try {
      (void)decode_rvf(b, "clip.rvf");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::truncation);
      const std::string msg = e.what();
      CHECK(msg.find("clip.rvf") != std::string::npos);
      CHECK(msg.find(std::to_string(full)) != std::string::npos);
      CHECK(msg.find(std::to_string(full - 3)) != std::string::npos);
    }
  }

  TEST_CASE("bad magic and trailing bytes") {
    Bytes b = encode_rvf(float_volume(Dims3{2, 2, 1}, 3));
    Bytes wrong = b;
    wrong[0] = 'X';
    try {
      (void)decode_rvf(wrong);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::format);
    }
    b.push_back(0);
    CHECK_THROWS_AS(decode_rvf(b), Error);
  }

  TEST_CASE("oversized headers are rejected before allocation") {
    ByteWriter w;
    w.raw("RVF1");
    w.u32(0xFFFFFFFFu);
    w.u32(0xFFFFFFFFu);
    w.u32(0xFFFFFFFFu);
    try {
      (void)decode_rvf(w.take());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK((e.code() == Errc::sizing || e.code() == Errc::truncation));
    }
  }

  TEST_CASE("MCH1 preserves parameters, label and view kind") {
    for (ViewKind kind : {ViewKind::type1, ViewKind::type2, ViewKind::compensated}) {
      const MachFilter f = sample_filter(4, "wave \xC3\xA9", kind);
      const Bytes b = encode_filter(f);
      const MachFilter g = decode_filter(b);
      CHECK(g.label == f.label);
      CHECK(g.params.alpha == f.params.alpha);
      CHECK(g.params.beta == f.params.beta);
      CHECK(g.params.gamma == f.params.gamma);
      CHECK(g.view_tag.kind == kind);
      CHECK(same(g.volume, f.volume));
      CHECK(encode_filter(g) == b);
    }
  }

  TEST_CASE("BNK1 keeps filter order") {
    const FilterBank bank = FilterBank::from_filters(
        {sample_filter(5, "b", ViewKind::type1), sample_filter(6, "a", ViewKind::type2), sample_filter(7, "b", ViewKind::type1)});
    const Bytes b = encode_bank(bank);
    const FilterBank back = decode_bank(b);
    REQUIRE(back.size() == 3);
    CHECK(back.actions == bank.actions);
    CHECK(back.filter_to_action == bank.filter_to_action);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same(back.filters[i].volume, bank.filters[i].volume));
    CHECK(encode_bank(back) == b);
  }

  TEST_CASE("PHI1 seed-only and materialized files agree") {
    for (Distribution dist : {Distribution::gaussian, Distribution::bernoulli}) {
      const MeasurementMatrix m = make_matrix(dist, 42, 16, 100);
      const Bytes seed_only = encode_matrix(m, false);
      const Bytes full = encode_matrix(m, true);
      CHECK(seed_only.size() == 4 + 1 + 8 + 4 + 4 + 1);
      CHECK(full.size() == seed_only.size() + 16 * 100 * 4);
      const MeasurementMatrix a = decode_matrix(seed_only);
      const MeasurementMatrix b = decode_matrix(full);
      CHECK(a.same_source(m));
      CHECK(b.same_source(m));
      CHECK(std::equal(a.entries().begin(), a.entries().end(), b.entries().begin(), b.entries().end()));
      CHECK(encode_matrix(b, true) == full);
    }
  }

  TEST_CASE("CMP1 replay gives the same response") {
    const VideoVolume v = float_volume(Dims3{10, 10, 6}, 8);
    const MeasurementMatrix m = make_matrix(Distribution::gaussian, 9, 20, 100);
    const CompressedVideo z = compressed_temporal_derivative(compress(v, m, 0.1, 3));
    const Bytes b = encode_compressed(z);
    const CompressedVideo once = decode_compressed(b);
    CHECK(once.derivative_order == 1);
    CHECK(once.columns == 5);
    CHECK(once.scene == z.scene);
    CHECK(once.matrix_seed == 9);
    CHECK(once.noise_sigma == doctest::Approx(0.1).epsilon(1e-7));
    for (std::size_t i = 0; i < z.measurements.size(); ++i)
      CHECK(once.measurements[i] == static_cast<double>(static_cast<float>(z.measurements[i])));
    const CompressedVideo twice = decode_compressed(encode_compressed(once));
    CHECK(encode_compressed(once) == b);
    MachFilter f;
    f.volume = float_volume(Dims3{3, 3, 2}, 10);
    const MeasurementMatrix replayed = make_matrix(once.distribution, once.matrix_seed, once.measurements_per_frame, 100);
    const ResponseVolume r1 = smashed_response(once, f, replayed);
    const ResponseVolume r2 = smashed_response(twice, f, replayed);
    CHECK(same(r1.values, r2.values));
  }

  TEST_CASE("MDL1 round trip") {
    SvmModel m;
    m.class_count = 2;
    m.dim = 3;
    m.weights = {0.1, -0.2, 0.3, 1e-300, 5.0, -7.0};
    m.bias = {0.5, -0.25};
    m.feature_mean = {1.0, 2.0, 3.0};
    m.feature_std = {1.0, 0.5, 4.0};
    const Bytes b = encode_model(m);
    CHECK(b.size() == 4 + 8 + 2 * 4 * 8 + 6 * 8);
    const SvmModel back = decode_model(b);
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.feature_mean == m.feature_mean);
    CHECK(back.feature_std == m.feature_std);
    CHECK(encode_model(back) == b);
  }

  TEST_CASE("PGM sequence ingestion") {
    oracle::TempDir dir("pgm");
    write_file_atomic(dir.path() / "frame_0002.pgm", text(std::string("P5\n2 2\n255\n") + '\x00' + '\xFF' + '\x33' + '\x66'));
    write_file_atomic(dir.path() / "frame_0001.pgm",
                      text(std::string("P5\n# comment\n2 2\n255\n") + '\x01' + '\x02' + '\x03' + '\x04'));
    const VideoVolume v = load_video(dir.path());
    REQUIRE(v.dims() == Dims3{2, 2, 2});
    CHECK(v(0, 0, 0) == 1.0 / 255.0);
    CHECK(v(1, 1, 0) == 4.0 / 255.0);
    CHECK(v(0, 1, 1) == 1.0);
    CHECK(v(1, 0, 1) == 0x33 / 255.0);
    const Bytes again = encode_pgm(v, 1);
    CHECK(again == text(std::string("P5\n2 2\n255\n") + '\x00' + '\xFF' + '\x33' + '\x66'));

    oracle::TempDir bad("pgm_bad");
    write_file_atomic(bad.path() / "a.pgm", text("P5\n2 2\n255\nab"));
    try {
      (void)read_pgm_sequence(bad.path());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::truncation);
    }
    CHECK_THROWS_AS(read_pgm_sequence(dir.path() / "missing"), Error);
  }

  TEST_CASE("files round trip through disk") {
    oracle::TempDir dir("rvf");
    const VideoVolume v = float_volume(Dims3{5, 4, 3}, 11);
    write_file_atomic(dir.path() / "v.rvf", encode_rvf(v));
    CHECK(same(load_video(dir.path() / "v.rvf"), v));
    try {
      (void)read_file(dir.path() / "nope.rvf");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.is_io());
    }
  }

  TEST_CASE("overlay pixels") {
    VideoVolume v(Dims3{2, 2, 1});
    v(0, 0, 0) = 0.0;
    v(0, 1, 0) = 1.0;
    v(1, 0, 0) = 0.5;
    v(1, 1, 0) = 0.25;
    BoundingBox box;
    box.top = 0;
    box.left = 0;
    box.height = 1;
    box.width = 1;
    const auto frames = render_overlay(v, {box});
    REQUIRE(frames.size() == 1);
    const std::string header = "P6\n2 2\n255\n";
    const Bytes& ppm = frames[0].ppm;
    REQUIRE(ppm.size() == header.size() + 12);
    CHECK(std::string(ppm.begin(), ppm.begin() + static_cast<std::ptrdiff_t>(header.size())) == header);
    const Bytes pixels(ppm.begin() + static_cast<std::ptrdiff_t>(header.size()), ppm.end());
    CHECK(pixels == Bytes{0, 255, 0, 255, 255, 255, 128, 128, 128, 64, 64, 64});
    CHECK_FALSE(frames[0].clipped);

    const auto plain = render_overlay(v, {});
    CHECK(Bytes(plain[0].ppm.begin() + static_cast<std::ptrdiff_t>(header.size()), plain[0].ppm.end()) ==
          Bytes{0, 0, 0, 255, 255, 255, 128, 128, 128, 64, 64, 64});
  }

  TEST_CASE("full-frame box outlines every edge and clipping is reported") {
    const VideoVolume v(Dims3{4, 5, 1}, 0.0);
    BoundingBox box;
    box.height = 4;
    box.width = 5;
    const auto f = render_overlay(v, {box});
    const std::size_t head = std::string("P6\n5 4\n255\n").size();
    auto green = [&](std::size_t r, std::size_t c) {
      const std::size_t i = head + 3 * (r * 5 + c);
      return f[0].ppm[i] == 0 && f[0].ppm[i + 1] == 255 && f[0].ppm[i + 2] == 0;
    };
    for (std::size_t c = 0; c < 5; ++c) CHECK((green(0, c) && green(3, c)));
    for (std::size_t r = 0; r < 4; ++r) CHECK((green(r, 0) && green(r, 4)));
    CHECK_FALSE(green(1, 1));

    box.top = 2;
    box.left = 3;
    CHECK(render_overlay(v, {box})[0].clipped);
    box.frame_index = 1;
    CHECK_THROWS_AS(render_overlay(v, {box}), Error);
  }
}
