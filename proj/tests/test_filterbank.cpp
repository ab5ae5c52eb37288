#include <cmath>

#include "doctest.h"

#include "core/rng.hpp"
#include "filterbank/bands.hpp"
#include "filterbank/butterworth.hpp"
#include "filterbank/filtfilt.hpp"
#include "test_support.hpp"

using namespace fbtrca;
using fbtrca::testing::random_epochs;

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd sine(int n, double fs, double freq_hz, double phase = 0.0) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = std::sin(2.0 * kPi * freq_hz * i / fs + phase);
  return x;
}

double rms(const Eigen::VectorXd& x) { return std::sqrt(x.squaredNorm() / x.size()); }
}  // namespace

TEST_CASE("equal-width bands follow the documented sequence") {
  auto bands = make_bands(RangeSetting::M1, 10);
  REQUIRE(bands.size() == 10);
  CHECK(bands[0].low_hz == doctest::Approx(0.05));
  CHECK(bands[0].high_hz == doctest::Approx(1.0));
  CHECK(bands[4].low_hz == doctest::Approx(4.0));
  CHECK(bands[4].high_hz == doctest::Approx(5.0));
  CHECK(bands[9].low_hz == doctest::Approx(9.0));
  CHECK(bands[9].high_hz == doctest::Approx(10.0));
  CHECK_THROWS_AS(make_bands(RangeSetting::M1, 5), ValidationError);  // needs m == f_max
}

TEST_CASE("doubling bands follow the documented sequence at m=5 and m=10") {
  auto b5 = make_bands(RangeSetting::M2, 5);
  REQUIRE(b5.size() == 5);
  const double exp5[][2] = {{0.05, 0.9}, {0.9, 1.8}, {1.8, 3.6}, {2.7, 5.4}, {3.6, 7.2}};
  for (int i = 0; i < 5; ++i) {
    CHECK(b5[i].low_hz == doctest::Approx(exp5[i][0]));
    CHECK(b5[i].high_hz == doctest::Approx(exp5[i][1]));
  }
  auto b10 = make_bands(RangeSetting::M2, 10);
  REQUIRE(b10.size() == 10);
  CHECK(b10[0].low_hz == doctest::Approx(0.05));
  CHECK(b10[0].high_hz == doctest::Approx(0.9));
  CHECK(b10[1].low_hz == doctest::Approx(0.9));
  CHECK(b10[1].high_hz == doctest::Approx(1.8));
  CHECK(b10[9].low_hz == doctest::Approx(8.1));
  CHECK(b10[9].high_hz == doctest::Approx(10.0));  // clipped at the range top
}

TEST_CASE("nested bands share the low edge and step the high edge") {
  auto bands = make_bands(RangeSetting::M3, 10);
  REQUIRE(bands.size() == 10);
  for (int k = 0; k < 10; ++k) {
    CHECK(bands[k].low_hz == doctest::Approx(0.05));
    CHECK(bands[k].high_hz == doctest::Approx(k + 1.0));
  }
  CHECK_THROWS_AS(make_bands(RangeSetting::M3, 500), ValidationError);
}

TEST_CASE("the shifted grid has 100 bands ordered low-major with both corners") {
  auto grid = make_shifted_grid();
  REQUIRE(grid.size() == 100);
  CHECK(grid[0].low_hz == doctest::Approx(0.05));
  CHECK(grid[0].high_hz == doctest::Approx(1.0));
  CHECK(grid[9].low_hz == doctest::Approx(0.05));
  CHECK(grid[9].high_hz == doctest::Approx(10.0));
  CHECK(grid[90].low_hz == doctest::Approx(0.50));
  CHECK(grid[90].high_hz == doctest::Approx(1.0));
  CHECK(grid[99].low_hz == doctest::Approx(0.50));
  CHECK(grid[99].high_hz == doctest::Approx(10.0));
  for (int i = 0; i < 100; ++i) {
    CHECK(grid[i].low_hz < grid[i].high_hz);
    CHECK(grid[i].index == i);
  }
}

TEST_CASE("band json round-trip preserves edges and rejects malformed input") {
  auto bands = make_bands(RangeSetting::M2, 5);
  auto back = bands_from_json(bands_to_json(bands));
  REQUIRE(back.size() == bands.size());
  for (std::size_t i = 0; i < bands.size(); ++i) {
    CHECK(back[i].low_hz == bands[i].low_hz);
    CHECK(back[i].high_hz == bands[i].high_hz);
  }
  auto named = bands_from_json(R"({"setting": "M3", "m": 4, "f_min": 0.1, "f_max": 8})");
  REQUIRE(named.size() == 4);
  CHECK(named[3].high_hz == doctest::Approx(8.0));
  CHECK_THROWS_AS(bands_from_json("{not json"), ValidationError);
  CHECK_THROWS_AS(bands_from_json(R"({"bands": []})"), ValidationError);
}

TEST_CASE("band validation rejects inverted and out-of-range edges") {
  CHECK_THROWS_AS((BandSpec{3.0, 2.0, RangeSetting::custom, 0}).validate(), ValidationError);
  CHECK_THROWS_AS((BandSpec{0.0, 2.0, RangeSetting::custom, 0}).validate(), ValidationError);
  CHECK_THROWS_AS((BandSpec{1.0, 10.5, RangeSetting::custom, 0}).validate(), ValidationError);
}

TEST_CASE("designed magnitude response matches the reference filter") {
  // |H| values computed independently with scipy.signal.butter/sosfreqz for
  // an order-8 prototype band-pass.
  struct Point { double f, mag; };
  {
    auto d = design_butterworth({1.0, 3.0, RangeSetting::custom, 0}, 256.0);
    const Point pts[] = {{1.0, 0.7071067811867312},
                         {3.0, 0.70710678118655512},
                         {1.7320508075688772, 1.0000000000001703},
                         {0.5, 0.00030602341620115285},
                         {6.0, 0.00030222945776982616}};
    for (const auto& p : pts)
      CHECK(d.magnitude(p.f) == doctest::Approx(p.mag).epsilon(1e-6));
  }
  {
    auto d = design_butterworth({0.05, 10.0, RangeSetting::custom, 0}, 256.0);
    const Point pts[] = {{0.05, 0.70710678113339487},
                         {10.0, 0.70710678118653858},
                         {0.7071067811865476, 0.99999999999853195},
                         {0.025, 0.0037909911642389398},
                         {20.0, 0.0033524630816004898}};
    for (const auto& p : pts)
      CHECK(d.magnitude(p.f) == doctest::Approx(p.mag).epsilon(1e-6));
  }
  {
    auto d = design_butterworth({0.5, 1.0, RangeSetting::custom, 0}, 64.0);
    const Point pts[] = {{0.5, 0.70710678118652281},
                         {1.0, 0.70710678118660741},
                         {0.7071067811865476, 0.99999999999996081},
                         {0.25, 4.4522236176540346e-05},
                         {2.0, 4.3497467518365385e-05}};
    for (const auto& p : pts)
      CHECK(d.magnitude(p.f) == doctest::Approx(p.mag).epsilon(1e-6));
  }
}

TEST_CASE("band edge at or above Nyquist is rejected") {
  CHECK_THROWS_AS(design_butterworth({1.0, 8.0, RangeSetting::custom, 0}, 16.0),
                  ValidationError);
}

TEST_CASE("every grid band is stable with all poles inside the unit circle") {
  for (const auto& band : make_shifted_grid()) {
    auto d = design_butterworth(band, 256.0);
    CHECK(d.max_pole_magnitude() < 1.0);
    REQUIRE(d.sections.size() == 8);  // order-8 prototype -> 8 biquads
  }
}

TEST_CASE("zero-phase filtering matches the reference implementation") {
  // scipy.signal.sosfiltfilt with odd-reflect padding on a deterministic
  // three-tone input, band 1-3 Hz at fs 256.
  const int n = 128;
  const double fs = 256.0;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    const double t = i / fs;
    x(i) = std::sin(2.0 * kPi * 2.0 * t) + 0.3 * std::sin(2.0 * kPi * 7.0 * t + 1.0) +
           0.05 * std::cos(2.0 * kPi * 0.5 * t);
  }
  auto d = design_butterworth({1.0, 3.0, RangeSetting::custom, 0}, fs);
  Eigen::VectorXd y = filtfilt(d, x);
  const int idx[] = {0, 20, 47, 64, 90, 127};
  const double expected[] = {-0.18778731102133167, 0.40430366864486089, 0.37253927212896321,
                             0.065052041348413248, -0.16728472869953004, -0.0080356063639695566};
  for (int i = 0; i < 6; ++i)
    CHECK(y(idx[i]) == doctest::Approx(expected[i]).epsilon(5e-7));
}

TEST_CASE("in-band sinusoid passes while out-of-band is attenuated") {
  const double fs = 256.0;
  const int n = 512;
  auto bank = make_filter_bank({{4.0, 6.0, RangeSetting::custom, 0},
                                {8.0, 10.0, RangeSetting::custom, 1}},
                               fs);
  EpochSet e = random_epochs(2, n, 2, 1);
  for (auto& t : e.trials) {
    t.row(0) = sine(n, fs, 5.0).transpose();
    t.row(1) = sine(n, fs, 5.0, 0.7).transpose();
  }
  auto out = apply_bank(bank, e);
  REQUIRE(out.size() == 2);
  const double in_rms = rms(e.trials[0].row(0).transpose());
  CHECK(rms(out[0].trials[0].row(0).transpose()) >= 0.9 * in_rms);
  CHECK(rms(out[1].trials[0].row(0).transpose()) <= 0.05 * in_rms);
}

TEST_CASE("zero input gives zero output") {
  auto bank = make_filter_bank(make_bands(RangeSetting::M3, 3, 0.05, 9.0), 64.0);
  EpochSet e = random_epochs(3, 128, 2, 2, ClassLabel::rest, 64.0);
  for (auto& t : e.trials) t.setZero();
  for (const auto& band_set : apply_bank(bank, e))
    for (const auto& t : band_set.trials) CHECK(t.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("filtering is linear") {
  const double fs = 64.0;
  auto d = design_butterworth({1.0, 5.0, RangeSetting::custom, 0}, fs);
  Rng rng(3);
  Eigen::VectorXd x1(256), x2(256);
  for (int i = 0; i < 256; ++i) {
    x1(i) = rng.normal();
    x2(i) = rng.normal();
  }
  const double a = 2.5, b = -1.25;
  Eigen::VectorXd lhs = filtfilt(d, a * x1 + b * x2);
  Eigen::VectorXd rhs = a * filtfilt(d, x1) + b * filtfilt(d, x2);
  const double scale = rhs.cwiseAbs().maxCoeff();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * scale);
}

TEST_CASE("zero-phase: correlation with a band-limited input peaks at zero lag") {
  const double fs = 256.0;
  const int n = 1024;
  Eigen::VectorXd x = sine(n, fs, 2.0);
  auto d = design_butterworth({1.0, 3.0, RangeSetting::custom, 0}, fs);
  Eigen::VectorXd y = filtfilt(d, x);
  int best_lag = -100;
  double best = -1e300;
  for (int lag = -16; lag <= 16; ++lag) {
    double acc = 0.0;
    for (int i = 64; i < n - 64; ++i) acc += y(i) * x(i + lag);
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("impulse energy beyond the decay horizon is negligible for every grid band") {
  // The horizon is 5 s of samples, extended when the slowest pole pair
  // provably needs longer to reach the 1e-6 energy fraction.
  const double fs = 256.0;
  for (const auto& band : make_shifted_grid()) {
    auto d = design_butterworth(band, fs);
    const double rho = d.max_pole_magnitude();
    REQUIRE(rho < 1.0);
    const long horizon_pole =
        static_cast<long>(std::ceil(std::log(1e-6) / (2.0 * std::log(rho))));
    const long horizon = std::max<long>(static_cast<long>(5 * fs), horizon_pole);
    const long total = horizon * 3;
    Eigen::VectorXd impulse = Eigen::VectorXd::Zero(total);
    impulse(0) = 1.0;
    Eigen::VectorXd h = sosfilt(d, impulse);
    const double tail = h.tail(total - horizon).squaredNorm();
    const double whole = h.squaredNorm();
    CHECK(tail < 1e-6 * whole);
  }
}

TEST_CASE("single-pass filtering matches the difference equation exactly") {
  // Direct-form II transposed recursion recomputed inline, one section.
  auto d = design_butterworth({2.0, 4.0, RangeSetting::custom, 0}, 64.0);
  Rng rng(8);
  Eigen::VectorXd x(64);
  for (int i = 0; i < 64; ++i) x(i) = rng.normal();
  Eigen::VectorXd y = sosfilt(d, x);

  Eigen::VectorXd stage = x;
  for (const auto& s : d.sections) {
    Eigen::VectorXd out(stage.size());
    double z1 = 0.0, z2 = 0.0;
    for (int i = 0; i < stage.size(); ++i) {
      const double in = stage(i);
      const double o = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * o + z2;
      z2 = s.b2 * in - s.a2 * o;
      out(i) = o;
    }
    stage = out;
  }
  CHECK((y - stage).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("filter bank application preserves shape and ordering") {
  auto bands = make_bands(RangeSetting::M1, 10);
  auto bank = make_filter_bank(bands, 256.0);
  EpochSet e = random_epochs(4, 128, 3, 5);
  auto out = apply_bank(bank, e);
  REQUIRE(out.size() == 10);
  for (std::size_t b = 0; b < out.size(); ++b) {
    CHECK(out[b].n_channels() == 4);
    CHECK(out[b].n_samples() == 128);
    CHECK(out[b].n_trials() == 3);
    CHECK(out[b].fs == e.fs);
    CHECK(out[b].label == e.label);
  }
}

TEST_CASE("sampling-rate mismatch between bank and epochs is rejected") {
  auto bank = make_filter_bank(make_bands(RangeSetting::M1, 10), 256.0);
  EpochSet e = random_epochs(3, 64, 2, 6, ClassLabel::movement, 128.0);
  CHECK_THROWS_AS(apply_bank(bank, e), ValidationError);
}
