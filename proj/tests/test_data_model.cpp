#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "doctest.h"

#include "core/epoch_io.hpp"
#include "core/types.hpp"
#include "core/zscore.hpp"
#include "test_support.hpp"

using namespace fbtrca;
using fbtrca::testing::TempDir;
using fbtrca::testing::random_epochs;

TEST_CASE("epoch set invariants reject degenerate shapes") {
  EpochSet e = random_epochs(3, 16, 4, 1);
  CHECK_NOTHROW(e.validate());

  EpochSet one_channel = random_epochs(1, 16, 4, 1);
  CHECK_THROWS_AS(one_channel.validate(), ValidationError);

  EpochSet one_trial = random_epochs(3, 16, 1, 1);
  CHECK_THROWS_AS(one_trial.validate(), ValidationError);

  EpochSet nan_sample = random_epochs(3, 16, 4, 1);
  nan_sample.trials[2](1, 5) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nan_sample.validate(), ValidationError);

  EpochSet ragged = random_epochs(3, 16, 4, 1);
  ragged.trials[1] = Eigen::MatrixXd::Zero(3, 8);
  CHECK_THROWS_AS(ragged.validate(), ValidationError);
}

TEST_CASE("binary epoch round-trip is bitwise identity") {
  TempDir tmp("epoch_io");
  EpochSet e = random_epochs(5, 32, 7, 42);
  save_epochs(e, tmp.sub("m"), EpochFormat::packed_binary);
  EpochSet back = load_epochs(tmp.sub("m"));
  REQUIRE(back.n_channels() == 5);
  REQUIRE(back.n_samples() == 32);
  REQUIRE(back.n_trials() == 7);
  CHECK(back.fs == e.fs);
  CHECK(back.label == e.label);
  CHECK(back.channel_names == e.channel_names);
  CHECK(back.window == e.window);
  for (int t = 0; t < 7; ++t)
    CHECK(back.trials[t] == e.trials[t]);  // exact: payload is raw float64
}

TEST_CASE("csv epoch round-trip is bitwise identity") {
  TempDir tmp("epoch_csv");
  EpochSet e = random_epochs(3, 10, 4, 43);
  save_epochs(e, tmp.sub("m"), EpochFormat::csv_dir);
  EpochSet back = load_epochs(tmp.sub("m"));
  for (int t = 0; t < 4; ++t)
    CHECK(back.trials[t] == e.trials[t]);  // 17-digit text is reparse-exact
}

TEST_CASE("loading a payload with a non-finite sample fails") {
  TempDir tmp("epoch_nan");
  EpochSet e = random_epochs(3, 8, 3, 44);
  save_epochs(e, tmp.sub("m"));
  // Corrupt one float64 in place with a NaN bit pattern.
  std::fstream f(tmp.sub("m") + "/epochs.f64le",
                 std::ios::in | std::ios::out | std::ios::binary);
  REQUIRE(f.good());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.seekp(5 * sizeof(double));
  f.write(reinterpret_cast<const char*>(&nan), sizeof(double));
  f.close();
  CHECK_THROWS_AS(load_epochs(tmp.sub("m")), ValidationError);
}

TEST_CASE("loading a truncated payload reports a dimension mismatch") {
  TempDir tmp("epoch_trunc");
  EpochSet e = random_epochs(3, 8, 3, 45);
  save_epochs(e, tmp.sub("m"));
  std::filesystem::resize_file(tmp.sub("m") + "/epochs.f64le", 3 * 8 * 2 * sizeof(double));
  CHECK_THROWS_AS(load_epochs(tmp.sub("m")), ValidationError);
}

TEST_CASE("loading a missing directory fails") {
  CHECK_THROWS_AS(load_epochs("no_such_dir_anywhere"), Error);
}

TEST_CASE("dataset round-trip preserves both classes") {
  TempDir tmp("dataset_io");
  Dataset d;
  d.movement = random_epochs(4, 16, 5, 50, ClassLabel::movement);
  d.rest = random_epochs(4, 16, 6, 51, ClassLabel::rest);
  save_dataset(d, tmp.sub("ds"));
  Dataset back = load_dataset(tmp.sub("ds"));
  CHECK(back.movement.n_trials() == 5);
  CHECK(back.rest.n_trials() == 6);
  CHECK(back.movement.trials[0] == d.movement.trials[0]);
  CHECK(back.rest.trials[5] == d.rest.trials[5]);
}

TEST_CASE("z-score of the series 1,2,3 is the analytic unit-variance ramp") {
  EpochSet e;
  e.fs = 10.0;
  e.channel_names = {"a", "b"};
  e.label = ClassLabel::movement;
  e.window = {0.0, 0.3};
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 10, 20, 30;
  e.trials = {m, m};
  EpochSet z = zscore_normalize(e);
  for (const auto& trial : z.trials)
    for (int c = 0; c < 2; ++c) {
      CHECK(trial(c, 0) == doctest::Approx(-1.0).epsilon(1e-12));
      CHECK(trial(c, 1) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(trial(c, 2) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("z-score recomputation: per-series mean 0 and sample sd 1") {
  EpochSet e = random_epochs(6, 64, 9, 77);
  EpochSet z = zscore_normalize(e);
  for (const auto& trial : z.trials)
    for (int c = 0; c < 6; ++c) {
      const Eigen::VectorXd row = trial.row(c).transpose();
      const double mean = row.mean();
      const double sd = std::sqrt((row.array() - mean).square().sum() / (row.size() - 1));
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(sd - 1.0) < 1e-9);
    }
}

TEST_CASE("z-score is idempotent") {
  EpochSet e = random_epochs(4, 48, 5, 78);
  EpochSet z1 = zscore_normalize(e);
  EpochSet z2 = zscore_normalize(z1);
  for (int t = 0; t < 5; ++t)
    CHECK((z2.trials[t] - z1.trials[t]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("z-score rejects a constant series naming channel and trial") {
  EpochSet e = random_epochs(3, 16, 4, 79);
  e.trials[2].row(1).setConstant(3.25);
  try {
    zscore_normalize(e);
    FAIL("expected a degenerate-channel error");
  } catch (const ValidationError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("channel 1") != std::string::npos);
    CHECK(msg.find("trial 2") != std::string::npos);
  }
}

TEST_CASE("feature matrix provenance must be a bijection") {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(4, 12);
  f.labels = {1, 1, 0, 0};
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < 6; ++k)
      f.columns.push_back({b, static_cast<CoefficientKind>(k)});
  CHECK_NOTHROW(f.validate());

  FeatureMatrix dup = f;
  dup.columns[7] = dup.columns[1];  // duplicated (band, kind) pair
  CHECK_THROWS_AS(dup.validate(), ValidationError);

  FeatureMatrix bad_label = f;
  bad_label.labels[2] = 7;
  CHECK_THROWS_AS(bad_label.validate(), ValidationError);
}

TEST_CASE("feature csv export includes header and all rows") {
  TempDir tmp("feat_csv");
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(2, 6);
  f.labels = {1, 0};
  for (int k = 0; k < 6; ++k) f.columns.push_back({3, static_cast<CoefficientKind>(k)});
  export_features(f, tmp.sub("f.csv"));

  std::ifstream in(tmp.sub("f.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 3);  // header + one row per trial
}

TEST_CASE("feature csv round-trip reproduces values exactly") {
  TempDir tmp("feat_rt");
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(9, 18) * 3.7;
  f.values(0, 0) = 1e-300;
  f.values(1, 1) = -0.1;
  f.labels.assign(9, 0);
  for (int i = 0; i < 4; ++i) f.labels[i] = 1;
  for (int b = 0; b < 3; ++b)
    for (int k = 0; k < 6; ++k) f.columns.push_back({b, static_cast<CoefficientKind>(k)});
  export_features(f, tmp.sub("f.csv"));
  FeatureMatrix back = load_features(tmp.sub("f.csv"));
  REQUIRE(back.n_trials() == 9);
  REQUIRE(back.n_features() == 18);
  CHECK(back.labels == f.labels);
  CHECK((back.values - f.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.columns[7].band_index == 1);
  CHECK(back.columns[7].kind == CoefficientKind::rho1_2);
}

TEST_CASE("exporting an empty feature matrix fails") {
  TempDir tmp("feat_empty");
  FeatureMatrix f;
  CHECK_THROWS_AS(export_features(f, tmp.sub("f.csv")), ValidationError);
}

TEST_CASE("float formatting survives parse round-trip on hostile values") {
  for (double v : {0.1, 1.0 / 3.0, 1e-308, 6.02e23, -0.0, 123456789.123456789,
                   5e-324, 0.30000000000000004}) {
    const std::string s = format_double(v);
    // strtod instead of std::stod: the latter throws on subnormal results.
    const double parsed = std::strtod(s.c_str(), nullptr);
    CHECK(parsed == v);
  }
}

TEST_CASE("select_columns keeps order and provenance") {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(3, 12);
  f.labels = {1, 0, 1};
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < 6; ++k) f.columns.push_back({b, static_cast<CoefficientKind>(k)});
  FeatureMatrix sel = f.select_columns({7, 2});
  REQUIRE(sel.n_features() == 2);
  CHECK(sel.values.col(0) == f.values.col(7));
  CHECK(sel.values.col(1) == f.values.col(2));
  CHECK(sel.columns[0].band_index == 1);
  CHECK(sel.columns[1].kind == CoefficientKind::rho2_1);
  CHECK(sel.labels == f.labels);
}
