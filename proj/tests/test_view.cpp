#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "smash/error.hpp"
#include "smash/mach.hpp"
#include "smash/view.hpp"

using namespace smash;

namespace {

MachFilter filter_of(VideoVolume v) {
  MachFilter f;
  f.volume = std::move(v);
  f.label = "a";
  return f;
}

AffineView view_of(std::array<double, 4> a, std::array<double, 2> b) {
  AffineView v;
  v.a = a;
  v.b = b;
  return v;
}

}  // namespace

TEST_SUITE("view") {
  TEST_CASE("parse and print") {
    const AffineView v = AffineView::parse("1,0.5,-0.25,2,3,-4");
    CHECK(v.a == std::array<double, 4>{1.0, 0.5, -0.25, 2.0});
    CHECK(v.b == std::array<double, 2>{3.0, -4.0});
    CHECK(AffineView::parse(v.to_string()) == v);
    CHECK(v.abs_det() == doctest::Approx(2.125));
    for (const char* bad : {"1,0,0,1,0", "1,0,0,1,0,x", ""}) {
      try {
        (void)AffineView::parse(bad);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.code() == Errc::format);
      }
    }
  }

  TEST_CASE("identity compensation is exact") {
    const MachFilter f = filter_of(oracle::random_volume(Dims3{6, 5, 3}, 1));
    const MachFilter g = compensate(f, AffineView::identity());
    CHECK(oracle::max_diff(g.volume.data(), f.volume.data()) == 0.0);
    CHECK(g.params.alpha == f.params.alpha);
    CHECK(g.view_tag.kind == ViewKind::compensated);
  }

  TEST_CASE("integer translation shifts every frame") {
    VideoVolume v(Dims3{6, 7, 3});
    const VideoVolume inner = oracle::random_volume(Dims3{4, 5, 3}, 2);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 5; ++c) v(r + 1, c + 1, t) = inner(r, c, t);
    const MachFilter g = compensate(filter_of(v), view_of({1, 0, 0, 1}, {1, 0}));
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 7; ++c) CHECK(g.volume(r, c, t) == (c + 1 < 7 ? v(r, c + 1, t) : 0.0));
  }

  TEST_CASE("scaling a smooth blob matches the analytic warp") {
    // Bilinear error at half-pixel sites is at most 0.125 * max|f''| per axis: 2 * 0.125 / 16 for sigma 4.
    const double s = 4.0;
    const MachFilter f = filter_of(oracle::gaussian_blob(Dims3{40, 40, 2}, 10.0, 10.0, s));
    const AffineView half = view_of({0.5, 0, 0, 0.5}, {0, 0});
    const MachFilter g = compensate(f, half);
    CHECK(g.params.alpha == doctest::Approx(0.0625 * f.params.alpha));
    double err = 0.0;
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t r = 0; r < 40; ++r)
        for (std::size_t c = 0; c < 40; ++c) {
          const double dr = 0.5 * static_cast<double>(r) - 10.0, dc = 0.5 * static_cast<double>(c) - 10.0;
          const double expect = 0.0625 * std::exp(-(dr * dr + dc * dc) / (2.0 * s * s));
          err = std::max(err, std::abs(g.volume(r, c, t) - expect) / 0.0625);
        }
    CHECK(err < 2e-2);
  }

  TEST_CASE("horizontal flip") {
    const MachFilter f = filter_of(oracle::random_volume(Dims3{4, 6, 3}, 3));
    const MachFilter g = flip_horizontal(f);
    CHECK(g.view_tag.kind == ViewKind::type2);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 6; ++c) CHECK(g.volume(r, c, t) == f.volume(r, 5 - c, t));
    CHECK(oracle::max_diff(flip_horizontal(g).volume.data(), f.volume.data()) == 0.0);
    const MachFilter h = compensate(f, view_of({-1, 0, 0, 1}, {5, 0}));
    CHECK(oracle::max_diff(h.volume.data(), g.volume.data()) == 0.0);
  }

  TEST_CASE("flipping a compensated filter composes the views") {
    const MachFilter f = filter_of(oracle::random_volume(Dims3{4, 6, 2}, 4));
    const AffineView shift = view_of({1, 0, 0, 1}, {1, 0});
    const MachFilter g = flip_horizontal(compensate(f, shift));
    REQUIRE(g.view_tag.kind == ViewKind::compensated);
    CHECK(g.view_tag.view == compose(view_of({-1, 0, 0, 1}, {5, 0}), shift));
  }

  TEST_CASE("compose matches successive warps") {
    const AffineView first = view_of({0.9, 0.1, -0.2, 1.1}, {1.5, -0.5});
    const AffineView second = view_of({1.05, -0.15, 0.05, 0.95}, {-2.0, 0.75});
    const AffineView both = compose(second, first);
    // Pointwise: second maps x to y, first maps y to the source.
    const double x1 = 3.0, x2 = -1.0;
    const double y1 = second.a[0] * x1 + second.a[1] * x2 + second.b[0];
    const double y2 = second.a[2] * x1 + second.a[3] * x2 + second.b[1];
    const double s1 = first.a[0] * y1 + first.a[1] * y2 + first.b[0];
    const double s2 = first.a[2] * y1 + first.a[3] * y2 + first.b[1];
    CHECK(both.a[0] * x1 + both.a[1] * x2 + both.b[0] == doctest::Approx(s1));
    CHECK(both.a[2] * x1 + both.a[3] * x2 + both.b[1] == doctest::Approx(s2));
  }

  TEST_CASE("compensation composes on smooth filters within interpolation tolerance") {
    const MachFilter f = filter_of(oracle::gaussian_blob(Dims3{40, 40, 2}, 19.5, 19.5, 4.0));
    const double c = std::cos(0.1), s = std::sin(0.1);
    const AffineView v1 = view_of({c, -s, s, c}, {19.5 - 19.5 * c + 19.5 * s, 19.5 - 19.5 * s - 19.5 * c});
    const AffineView v2 = view_of({1.1, 0.2, 0.0, 0.95}, {-3.0, 1.0});
    const MachFilter twice = compensate(compensate(f, v1), v2);
    const MachFilter once = compensate(f, compose(v2, v1));
    CHECK(twice.params.alpha == doctest::Approx(once.params.alpha).epsilon(1e-12));
    const double peak = oracle::max_abs(once.volume.data());
    CHECK(oracle::max_diff(twice.volume.data(), once.volume.data()) / peak < 2.0 * 2e-2);
  }

  TEST_CASE("shear view is centred on the middle row") {
    const AffineView v = shear_view(15.0, 11, 20);
    const double k = std::tan(15.0 * std::numbers::pi / 180.0);
    CHECK(v.a == std::array<double, 4>{1.0, k, 0.0, 1.0});
    CHECK(v.a[1] * 5.0 + v.b[0] == doctest::Approx(0.0));
    CHECK(v.det() == doctest::Approx(1.0));
  }

  TEST_CASE("bilinear sampling between pixels") {
    VideoVolume v(Dims3{2, 2, 1});
    v(0, 0, 0) = 1.0;
    v(0, 1, 0) = 2.0;
    v(1, 0, 0) = 3.0;
    v(1, 1, 0) = 4.0;
    const VideoVolume w = warp_volume(v, view_of({1, 0, 0, 1}, {0.5, 0.5}));
    CHECK(w(0, 0, 0) == doctest::Approx(2.5));
    CHECK(w(1, 1, 0) == doctest::Approx(1.0));  // only the (1,1) source corner lies inside
  }

  TEST_CASE("singular views are rejected") {
    const MachFilter f = filter_of(oracle::random_volume(Dims3{3, 3, 2}, 5));
    try {
      (void)compensate(f, view_of({1, 2, 2, 4}, {0, 0}));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invertibility);
    }
  }
}
