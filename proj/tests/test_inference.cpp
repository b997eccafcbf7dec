#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "smash/error.hpp"
#include "smash/inference.hpp"

using namespace smash;

namespace {

ResponseVolume response_of(VideoVolume v) {
  ResponseVolume r;
  r.values = std::move(v);
  return r;
}

ResponseVolume random_response(Dims3 d, std::uint64_t seed) { return response_of(oracle::random_volume(d, seed)); }

// Per-cell maximum by scanning floor(k * dim / 2^l) boundaries.
std::array<double, kPoolCells> pooled_oracle(const VideoVolume& v) {
  std::array<double, kPoolCells> out{};
  std::size_t slot = 0;
  const Dims3& d = v.dims();
  for (std::size_t level = 0; level < 3; ++level) {
    const std::size_t n = std::size_t{1} << level;
    for (std::size_t ft = 0; ft < n; ++ft)
      for (std::size_t fr = 0; fr < n; ++fr)
        for (std::size_t fc = 0; fc < n; ++fc) {
          double m = -std::numeric_limits<double>::infinity();
          for (std::size_t t = ft * d.frames / n; t < (ft + 1) * d.frames / n; ++t)
            for (std::size_t r = fr * d.rows / n; r < (fr + 1) * d.rows / n; ++r)
              for (std::size_t c = fc * d.cols / n; c < (fc + 1) * d.cols / n; ++c) m = std::max(m, v(r, c, t));
          out[slot++] = m;
        }
  }
  return out;
}

double normal(SplitMix64& rng) { return rng.gaussian_pair().first; }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

SvmModel hand_model(std::vector<double> weights, std::vector<double> bias, std::size_t dim) {
  SvmModel m;
  m.class_count = bias.size();
  m.dim = dim;
  m.weights = std::move(weights);
  m.bias = std::move(bias);
  m.feature_mean.assign(dim, 0.0);
  m.feature_std.assign(dim, 1.0);
  return m;
}

// Two Gaussian clusters in dim dimensions, n per class, centres at +-gap.
void clusters(std::size_t n, std::size_t dim, double gap, std::uint64_t seed, std::vector<std::vector<double>>& x,
              std::vector<std::size_t>& labels) {
  SplitMix64 rng(seed);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(dim);
      for (double& v : p) v = normal(rng) + (c == 0 ? -gap : gap);
      x.push_back(std::move(p));
      labels.push_back(c);
    }
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("constant response pools to the constant") {
    const PooledFeatures p = max_pool_features(response_of(VideoVolume(Dims3{6, 5, 7}, 3.0)));
    for (double v : p.values) CHECK(v == 3.0);
    const PsrFeatures s = psr_features(response_of(VideoVolume(Dims3{6, 5, 7}, 3.0)), p.peaks);
    for (double v : s.values) CHECK(v == 0.0);
  }

  TEST_CASE("a single spike appears once per level") {
    VideoVolume v(Dims3{8, 8, 8}, -1.0);
    v(5, 2, 6) = 4.0;
    const PooledFeatures p = max_pool_features(response_of(v));
    CHECK(std::count(p.values.begin(), p.values.end(), 4.0) == 3);
    CHECK(p.values[0] == 4.0);
    CHECK(p.peaks[0] == Index3{5, 2, 6});
  }

  TEST_CASE("pooling matches per-cell maxima") {
    for (Dims3 d : {Dims3{8, 8, 8}, Dims3{5, 7, 9}, Dims3{4, 13, 6}}) {
      const ResponseVolume r = random_response(d, d.size());
      const PooledFeatures p = max_pool_features(r);
      const auto ref = pooled_oracle(r.values);
      for (std::size_t k = 0; k < kPoolCells; ++k) {
        CHECK(p.values[k] == ref[k]);
        const Index3 at = p.peaks[k];
        CHECK(r(at.row, at.col, at.frame) == p.values[k]);
      }
    }
  }

  TEST_CASE("pooling is positively homogeneous and PSR scale invariant") {
    const ResponseVolume r = random_response(Dims3{9, 10, 8}, 4);
    const ResponseVolume s = response_of(r.values * 3.5);
    const PooledFeatures pr = max_pool_features(r), ps = max_pool_features(s);
    const PsrFeatures qr = psr_features(r, pr.peaks), qs = psr_features(s, ps.peaks);
    for (std::size_t k = 0; k < kPoolCells; ++k) {
      CHECK(ps.values[k] == doctest::Approx(3.5 * pr.values[k]).epsilon(1e-14));
      CHECK(qs.values[k] == doctest::Approx(qr.values[k]).epsilon(1e-12));
    }
  }

  TEST_CASE("pooling needs four cells per axis") {
    try {
      (void)max_pool_features(response_of(VideoVolume(Dims3{3, 8, 8})));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::pooling_resolution);
    }
  }

  TEST_CASE("PSR matches direct sidelobe statistics") {
    VideoVolume v(Dims3{13, 13, 13});
    SplitMix64 rng(5);
    for (double& x : v.data()) x = normal(rng);
    v(6, 6, 6) = 10.0;
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 1; t <= 11; ++t)
      for (std::size_t r = 1; r <= 11; ++r)
        for (std::size_t c = 1; c <= 11; ++c) {
          if (t >= 4 && t <= 8 && r >= 4 && r <= 8 && c >= 4 && c <= 8) continue;
          sum += v(r, c, t);
          sq += v(r, c, t) * v(r, c, t);
          ++n;
        }
    CHECK(n == 11 * 11 * 11 - 5 * 5 * 5);
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
    bool degenerate = true;
    const double psr = peak_to_sidelobe(response_of(v), Index3{6, 6, 6}, &degenerate);
    CHECK_FALSE(degenerate);
    CHECK(std::abs(psr - (10.0 - mean) / sd) < 1e-10);
  }

  TEST_CASE("PSR sidelobe window clips at the border") {
    VideoVolume v(Dims3{6, 6, 6});
    SplitMix64 rng(6);
    for (double& x : v.data()) x = normal(rng);
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 6; ++c) {
          if (t <= 2 && r <= 2 && c <= 2) continue;
          sum += v(r, c, t);
          sq += v(r, c, t) * v(r, c, t);
          ++n;
        }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
    CHECK(peak_to_sidelobe(response_of(v), Index3{0, 0, 0}) == doctest::Approx((v(0, 0, 0) - mean) / sd).epsilon(1e-10));
  }

  TEST_CASE("PSR window that is all core is degenerate") {
    const ResponseVolume r = random_response(Dims3{3, 3, 3}, 7);
    bool degenerate = false;
    CHECK(peak_to_sidelobe(r, Index3{1, 1, 1}, &degenerate) == 0.0);
    CHECK(degenerate);
  }

  TEST_CASE("feature vector layout") {
    const std::vector<ResponseVolume> rs{random_response(Dims3{8, 8, 6}, 8), random_response(Dims3{7, 9, 5}, 9),
                                         random_response(Dims3{6, 6, 6}, 10)};
    const FeatureVector fv = feature_vector(rs);
    REQUIRE(fv.values.size() == 438);
    CHECK(fv.blocks() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const PooledFeatures p = max_pool_features(rs[i]);
      const PsrFeatures q = psr_features(rs[i], p.peaks);
      for (std::size_t k = 0; k < kPoolCells; ++k) {
        CHECK(fv.values[i * kBlockSize + k] == p.values[k]);
        CHECK(fv.values[i * kBlockSize + kPoolCells + k] == q.values[k]);
      }
    }
    const FeatureVector swapped = feature_vector({rs[2], rs[0], rs[1]});
    CHECK(std::equal(swapped.values.begin(), swapped.values.begin() + kBlockSize, fv.values.begin() + 2 * kBlockSize));
    CHECK(feature_vector({rs[0]}).values.size() == 146);
    CHECK(feature_vector(rs).values == fv.values);
    const auto names = feature_names(2);
    CHECK(names.size() == 292);
    CHECK(names[0] == "f0_pool0");
    CHECK(names[73] == "f0_psr0");
    CHECK(names[146] == "f1_pool0");
  }

  TEST_CASE("hinge subgradient matches finite differences off the kinks") {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> labels;
    clusters(6, 3, 0.5, 11, x, labels);
    std::vector<double> y;
    for (std::size_t l : labels) y.push_back(l == 0 ? -1.0 : 1.0);
    SplitMix64 rng(12);
    int checked = 0;
    while (checked < 20) {
      std::vector<double> w{normal(rng), normal(rng), normal(rng)};
      const double b = normal(rng);
      bool near_kink = false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(1.0 - y[i] * (dot(w, x[i]) + b)) < 1e-3) near_kink = true;
      if (near_kink) continue;
      const auto g = hinge_subgradient(w, b, x, y, 0.1);
      const double h = 1e-6;
      for (std::size_t j = 0; j <= 3; ++j) {
        auto wp = w, wm = w;
        double bp = b, bm = b;
        if (j < 3) {
          wp[j] += h;
          wm[j] -= h;
        } else {
          bp += h;
          bm -= h;
        }
        const double num = (hinge_objective(wp, bp, x, y, 0.1) - hinge_objective(wm, bm, x, y, 0.1)) / (2.0 * h);
        CHECK(std::abs(num - g[j]) < 1e-5);
      }
      ++checked;
    }
  }

  TEST_CASE("binary SVM reaches the grid-searched optimum") {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> labels;
    clusters(5, 2, 0.6, 13, x, labels);
    std::vector<double> y;
    for (std::size_t l : labels) y.push_back(l == 0 ? -1.0 : 1.0);
    const double lambda = 0.1;
    // For fixed w the objective is convex piecewise linear in b, so its
    // minimum sits at one of the sample breakpoints b = y_i - w.x_i.
    double ref = std::numeric_limits<double>::infinity();
    for (int i = -320; i <= 320; ++i)
      for (int j = -320; j <= 320; ++j) {
        const std::vector<double> w{0.01 * i, 0.01 * j};
        for (std::size_t k = 0; k < x.size(); ++k)
          ref = std::min(ref, hinge_objective(w, y[k] - dot(w, x[k]), x, y, lambda));
      }
    SvmParams params;
    params.lambda = lambda;
    const BinarySvm svm = train_binary_svm(x, y, params);
    const double got = hinge_objective(svm.w, svm.b, x, y, lambda);
    CHECK(got <= 1.01 * ref);
  }

  TEST_CASE("SVM separates clusters deterministically") {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> labels;
    clusters(15, 6, 2.0, 14, x, labels);
    SvmParams params;
    params.seed = 99;
    const SvmModel a = train_svm(x, labels, params);
    const SvmModel b = train_svm(x, labels, params);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    CHECK(a.class_count == 2);
    CHECK(a.weights.size() == 12);
    for (double s : a.feature_std) CHECK(s > 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(classify(x[i], a).label == labels[i]);
  }

  TEST_CASE("zero-variance features get unit scale") {
    std::vector<std::vector<double>> x{{1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}};
    const SvmModel m = train_svm(x, {0, 1, 1}, SvmParams{});
    CHECK(m.feature_std[1] == 1.0);
    CHECK(m.feature_mean[1] == 5.0);
  }

  TEST_CASE("SVM label errors") {
    std::vector<std::vector<double>> x{{1.0}, {2.0}};
    try {
      (void)train_svm(x, {0, 0}, SvmParams{});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_labels);
    }
    try {
      (void)train_svm(x, {0, 2}, SvmParams{});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_labels);
    }
    CHECK_THROWS_AS(train_svm(x, {0}, SvmParams{}), Error);
  }

  TEST_CASE("classify scores, ties and bias shifts") {
    SvmModel m = hand_model({1.0, 0.0, -1.0, 0.0, 0.5, 0.5}, {0.0, 0.0, 0.1}, 2);
    m.feature_mean = {0.5, -1.0};
    m.feature_std = {2.0, 4.0};
    const std::vector<double> f{3.0, 1.0};
    const Classification c = classify(f, m);
    const std::vector<double> z{(3.0 - 0.5) / 2.0, (1.0 + 1.0) / 4.0};
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(std::abs(c.scores[k] - (m.bias[k] + dot(m.class_weights(k), z))) < 1e-12);
    CHECK(c.label == 0);

    SvmModel shifted = m;
    for (double& b : shifted.bias) b += 7.25;
    CHECK(classify(f, shifted).label == c.label);

    const SvmModel tie = hand_model({1.0, 1.0}, {0.0, 0.0}, 1);
    const std::vector<double> one{2.0};
    CHECK(classify(one, tie).label == 0);

    const std::vector<double> wrong{1.0, 2.0, 3.0};
    try {
      (void)classify(wrong, m);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::dimension);
    }
  }

  TEST_CASE("peak-PSR baseline reads each filter's strongest-peak PSR") {
    std::vector<MachFilter> filters(3);
    filters[0].label = "a";
    filters[1].label = "b";
    filters[2].label = "a";
    const FilterBank bank = FilterBank::from_filters(filters);
    FeatureVector fv;
    fv.values.assign(3 * kBlockSize, 0.0);
    fv.values[0 * kBlockSize + kPoolCells] = 2.0;
    fv.values[1 * kBlockSize + kPoolCells] = 3.0;
    fv.values[2 * kBlockSize + kPoolCells] = 4.0;
    fv.values[1 * kBlockSize + kPoolCells + 40] = 50.0;  // a fine cell, ignored
    const Classification c = classify_peak_psr(fv, bank);
    CHECK(c.scores == std::vector<double>{4.0, 3.0});
    CHECK(c.label == 0);

    FeatureVector zero;
    zero.values.assign(3 * kBlockSize, 0.0);
    CHECK(classify_peak_psr(zero, bank).label == 0);

    FeatureVector short_fv;
    short_fv.values.assign(kBlockSize, 0.0);
    CHECK_THROWS_AS(classify_peak_psr(short_fv, bank), Error);
  }
}
