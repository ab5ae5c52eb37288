#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include <json.hpp>

#include "core/rng.hpp"
#include "core/types.hpp"
#include "featsel/mutual_information.hpp"
#include "featsel/selectors.hpp"

using namespace fbtrca;
using doctest::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

MiTable random_table(int d, std::uint64_t seed) {
  Rng rng(seed);
  MiTable t;
  t.relevance.resize(d);
  t.redundancy.resize(d, d);
  t.cond_redundancy.resize(d, d);
  for (int i = 0; i < d; ++i) t.relevance[i] = std::abs(rng.normal());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double red = std::abs(rng.normal());
      const double cond = 0.5 * std::abs(rng.normal());
      t.redundancy(i, j) = t.redundancy(j, i) = red;
      t.cond_redundancy(i, j) = t.cond_redundancy(j, i) = cond;
    }
  }
  return t;
}

// Direct evaluation of each greedy criterion, written from the definitions:
// given the running selected set, score every remaining candidate and take
// the argmax, breaking ties toward the lowest index. This is the reference
// the library's forward search must reproduce step for step.
double reference_step_score(const MiTable& mi, Selector method, int candidate,
                            const std::vector<int>& selected) {
  const double rel = mi.relevance[candidate];
  const int s = static_cast<int>(selected.size());
  if (s == 0) return rel;

  double red_sum = 0.0;
  double penalty_sum = 0.0;
  double min_gain = std::numeric_limits<double>::infinity();
  for (int j : selected) {
    const double red = mi.redundancy(candidate, j);
    const double cond = mi.cond_redundancy(candidate, j);
    red_sum += red;
    penalty_sum += red - cond;
    min_gain = std::min(min_gain, rel - (red - cond));
  }
  const double red_mean = red_sum / s;
  switch (method) {
    case Selector::maxrel: return rel;
    case Selector::minred: return -red_mean;
    case Selector::mrmr: return rel - red_mean;
    case Selector::miq: return rel / std::max(red_mean, 1e-12);
    case Selector::cife: return rel - penalty_sum;
    case Selector::cmim: return min_gain;
    case Selector::mrmtr: return rel - (2.0 / s) * red_sum;
    case Selector::qpfs: break;
  }
  throw std::logic_error("not a greedy criterion");
}

SelectorRanking reference_greedy(const MiTable& mi, Selector method, int k) {
  const int d = mi.size();
  SelectorRanking out;
  out.method = method;
  std::vector<bool> taken(d, false);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_score = 0.0;
    for (int i = 0; i < d; ++i) {
      if (taken[i]) continue;
      const double score = reference_step_score(mi, method, i, out.order);
      if (best < 0 || score > best_score) {
        best = i;
        best_score = score;
      }
    }
    taken[best] = true;
    out.order.push_back(best);
    out.scores.push_back(best_score);
  }
  return out;
}

const std::vector<Selector>& greedy_selectors() {
  static const std::vector<Selector> methods{
      Selector::miq,  Selector::maxrel, Selector::minred, Selector::mrmr,
      Selector::cife, Selector::cmim,   Selector::mrmtr};
  return methods;
}

// Trials x 18 feature matrix (3 bands x 6 kinds, band-major column order)
// with labels and mildly informative values.
FeatureMatrix small_feature_matrix(int n_trials, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix fm;
  const int bands = 3;
  fm.values.resize(n_trials, bands * kCoefficientKinds);
  fm.labels.resize(n_trials);
  for (int t = 0; t < n_trials; ++t) fm.labels[t] = t % 2;
  for (int b = 0; b < bands; ++b) {
    for (int k = 0; k < kCoefficientKinds; ++k) {
      FeatureColumn col;
      col.band_index = b;
      col.kind = static_cast<CoefficientKind>(k);
      fm.columns.push_back(col);
      const int c = b * kCoefficientKinds + k;
      for (int t = 0; t < n_trials; ++t)
        fm.values(t, c) = 0.3 * fm.labels[t] * (k % 2 ? 1.0 : -1.0) + rng.normal();
    }
  }
  return fm;
}

}  // namespace

TEST_CASE("small categorical joint distribution gives the hand-computed value in nats") {
  const Eigen::VectorXd x = vec({0, 0, 0, 1, 1, 1, 2, 2, 2, 2});
  const Eigen::VectorXd y = vec({0, 0, 1, 1, 1, 0, 0, 1, 1, 1});
  // Plug-in estimate from the exact joint counts of this table.
  CHECK(mutual_information(x, y, 3) == Approx(0.066169108184845421).epsilon(1e-12));
  CHECK(mutual_information(x, y, 5) == Approx(0.066169108184845421).epsilon(1e-12));
}

TEST_CASE("a variable carries ln 2 of information about its own median split") {
  const int n = 1000;
  Rng rng(11);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  CHECK(mutual_information(x, x, 2) == Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("independent draws share almost no information") {
  // The plug-in estimate carries a positive bias of about
  // (bins_x - 1)(bins_y - 1) / (2n) nats, so the check uses a bin count
  // where that bias is far below the threshold.
  const int n = 10000;
  Rng rng(12);
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  const double few_bins = mutual_information(x, y, 4);
  CHECK(few_bins < 0.01);
  // With the default bin count the estimate stays within a few multiples
  // of the analytic bias term instead of finding spurious structure.
  const int b = default_bins(n);
  const double bias = double(b - 1) * double(b - 1) / (2.0 * n);
  CHECK(mutual_information(x, y, b) < 3.0 * bias);
}

TEST_CASE("the information estimate is symmetric in its arguments") {
  const int n = 257;
  Rng rng(13);
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = 0.5 * x[i] + rng.normal();
  }
  CHECK(mutual_information(x, y, 4) == Approx(mutual_information(y, x, 4)).epsilon(1e-12));
}

TEST_CASE("monotone rescaling of either variable leaves the estimate untouched") {
  const int n = 300;
  Rng rng(14);
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + 0.8 * rng.normal();
  }
  const double base = mutual_information(x, y, 5);
  const Eigen::VectorXd ex = x.array().exp();
  const Eigen::VectorXd sy = 3.0 * y.array() - 7.0;
  CHECK(mutual_information(ex, y, 5) == base);
  CHECK(mutual_information(x, sy, 5) == base);
  CHECK(mutual_information(ex, sy, 5) == base);
}

TEST_CASE("information estimation rejects malformed inputs") {
  const Eigen::VectorXd a = vec({1, 2, 3, 4});
  const Eigen::VectorXd b = vec({1, 2, 3});
  CHECK_THROWS_AS(mutual_information(a, b, 3), ValidationError);
  CHECK_THROWS_AS(mutual_information(b, b, 3), ValidationError);  // too few rows
  CHECK_THROWS_AS(equal_frequency_bins(a, 1), ValidationError);
  CHECK_THROWS_AS(equal_frequency_bins(Eigen::VectorXd(), 2), ValidationError);
}

TEST_CASE("binning keeps few-valued variables categorical and splits the rest by rank") {
  // Three distinct values and four bins: each value is its own category.
  const auto cats = equal_frequency_bins(vec({5.0, -1.0, 5.0, 3.0}), 4);
  CHECK(cats == std::vector<int>{2, 0, 2, 1});

  // Eight distinct values into two bins: lower half then upper half.
  const auto halves = equal_frequency_bins(vec({8, 1, 6, 2, 7, 3, 5, 4}), 2);
  CHECK(halves == std::vector<int>{1, 0, 1, 0, 1, 0, 1, 0});

  // Binary labels never get split however many bins are requested.
  Eigen::VectorXd labels(9);
  for (int i = 0; i < 9; ++i) labels[i] = i % 2;
  const auto lab = equal_frequency_bins(labels, 7);
  CHECK(*std::max_element(lab.begin(), lab.end()) == 1);
  for (int i = 0; i < 9; ++i) CHECK(lab[i] == i % 2);
}

TEST_CASE("the pairwise information table is consistent, symmetric, and self-entropic") {
  const int n = 10;
  Eigen::MatrixXd x(n, 2);
  x.col(0) = vec({0, 0, 0, 1, 1, 1, 2, 2, 2, 2});
  Rng rng(15);
  for (int i = 0; i < n; ++i) x(i, 1) = rng.normal();
  const std::vector<int> labels{0, 0, 1, 1, 1, 0, 0, 1, 1, 1};

  MiTable t = build_mi_table(x, labels, 3);
  REQUIRE(t.size() == 2);

  // Relevance of the categorical column matches the standalone estimate.
  CHECK(t.relevance[0] == Approx(0.066169108184845421).epsilon(1e-12));
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = labels[i];
  CHECK(t.relevance[1] == Approx(mutual_information(x.col(1), y, 3)).epsilon(1e-12));

  // A column shares exactly its own entropy with itself; counts 3/3/4 out
  // of 10 give H = -(0.3 ln 0.3 + 0.3 ln 0.3 + 0.4 ln 0.4).
  CHECK(t.redundancy(0, 0) == Approx(1.0888999753452238).epsilon(1e-12));

  CHECK(t.redundancy(0, 1) == t.redundancy(1, 0));
  CHECK(t.cond_redundancy(0, 1) == t.cond_redundancy(1, 0));
  CHECK(t.cond_redundancy.minCoeff() >= 0.0);
}

TEST_CASE("table slicing reindexes every entry faithfully") {
  MiTable t = random_table(5, 16);
  const std::vector<int> keep{3, 0, 2};
  MiTable s = t.slice(keep);
  REQUIRE(s.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(s.relevance[i] == t.relevance[keep[i]]);
    for (int j = 0; j < 3; ++j) {
      CHECK(s.redundancy(i, j) == t.redundancy(keep[i], keep[j]));
      CHECK(s.cond_redundancy(i, j) == t.cond_redundancy(keep[i], keep[j]));
    }
  }
}

TEST_CASE("every greedy criterion reproduces its exhaustive step-by-step reference") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    MiTable t = random_table(8, seed);
    for (Selector method : greedy_selectors()) {
      SelectorRanking got = rank_features(t, method, 5);
      SelectorRanking want = reference_greedy(t, method, 5);
      REQUIRE(got.order == want.order);
      REQUIRE(got.scores.size() == want.scores.size());
      for (std::size_t i = 0; i < want.scores.size(); ++i)
        CHECK(got.scores[i] == want.scores[i]);
    }
  }
}

TEST_CASE("a duplicated informative column is deferred by redundancy-aware criteria") {
  // Column 1 duplicates column 0 (binned identically); column 2 carries its
  // own weaker but independent class information.
  const int n = 200;
  Rng rng(17);
  Eigen::MatrixXd x(n, 3);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % 2;
    x(i, 0) = labels[i] + 0.05 * rng.normal();
    x(i, 1) = x(i, 0);
    x(i, 2) = labels[i] + 0.8 * rng.normal();
  }
  MiTable t = build_mi_table(x, labels, default_bins(n));
  REQUIRE(t.relevance[0] > t.relevance[2]);  // the duplicate pair is strongest

  // Pure relevance picks the duplicated strongest column twice in its top 2.
  CHECK(rank_features(t, Selector::maxrel, 2).order == std::vector<int>{0, 1});
  // Redundancy-penalized criteria take one duplicate then the fresh column.
  CHECK(rank_features(t, Selector::mrmr, 2).order == std::vector<int>{0, 2});
  CHECK(rank_features(t, Selector::minred, 3).order == std::vector<int>{0, 2, 1});
  CHECK(rank_features(t, Selector::mrmtr, 2).order == std::vector<int>{0, 2});

  // Every greedy method still matches its reference on this construction.
  for (Selector method : greedy_selectors()) {
    CHECK(rank_features(t, method, 3).order == reference_greedy(t, method, 3).order);
  }
}

TEST_CASE("quadratic-program weights live on the probability simplex") {
  for (std::uint64_t seed = 200; seed < 212; ++seed) {
    MiTable t = random_table(10, seed);
    Eigen::VectorXd alpha = qpfs_weights(t);
    REQUIRE(alpha.size() == 10);
    CHECK(alpha.minCoeff() >= -1e-8);
    CHECK(std::abs(alpha.sum() - 1.0) <= 1e-8);
  }
}

TEST_CASE("quadratic-program ranking orders features by their weights") {
  MiTable t = random_table(9, 21);
  Eigen::VectorXd alpha = qpfs_weights(t);
  SelectorRanking r = rank_features(t, Selector::qpfs, 9);
  REQUIRE(r.order.size() == 9);
  REQUIRE(r.scores.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(r.scores[i] == alpha[r.order[i]]);
  for (int i = 1; i < 9; ++i) {
    CHECK(r.scores[i - 1] >= r.scores[i]);
    if (r.scores[i - 1] == r.scores[i]) CHECK(r.order[i - 1] < r.order[i]);
  }
  // Prefix property: asking for fewer features returns the same head.
  SelectorRanking head = rank_features(t, Selector::qpfs, 4);
  CHECK(std::equal(head.order.begin(), head.order.end(), r.order.begin()));
}

TEST_CASE("with no redundancy the penalized criteria collapse to pure relevance") {
  MiTable t = random_table(7, 22);
  t.redundancy.setZero();
  t.cond_redundancy.setZero();
  const std::vector<int> want = rank_features(t, Selector::maxrel, 7).order;
  CHECK(rank_features(t, Selector::mrmr, 7).order == want);
  CHECK(rank_features(t, Selector::cife, 7).order == want);
  CHECK(rank_features(t, Selector::cmim, 7).order == want);
  CHECK(rank_features(t, Selector::mrmtr, 7).order == want);
}

TEST_CASE("selecting every feature returns a permutation") {
  MiTable t = random_table(6, 23);
  for (Selector method : all_selectors()) {
    std::vector<int> order = rank_features(t, method, 6).order;
    std::sort(order.begin(), order.end());
    std::vector<int> iota(6);
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(order == iota);
  }
}

TEST_CASE("a single candidate is selected with its relevance as the score") {
  MiTable t = random_table(1, 24);
  for (Selector method : greedy_selectors()) {
    SelectorRanking r = rank_features(t, method, 1);
    CHECK(r.order == std::vector<int>{0});
    CHECK(r.scores[0] == t.relevance[0]);
  }
  SelectorRanking q = rank_features(t, Selector::qpfs, 1);
  CHECK(q.order == std::vector<int>{0});
  CHECK(q.scores[0] == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exact score ties resolve toward the lowest feature index") {
  MiTable t;
  t.relevance = vec({0.5, 0.5, 0.5, 0.2});
  t.redundancy = Eigen::MatrixXd::Zero(4, 4);
  t.cond_redundancy = Eigen::MatrixXd::Zero(4, 4);
  CHECK(rank_features(t, Selector::maxrel, 4).order == std::vector<int>{0, 1, 2, 3});
  CHECK(rank_features(t, Selector::mrmr, 4).order == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("ranking rejects malformed tables and selection sizes") {
  MiTable empty;
  empty.relevance.resize(0);
  empty.redundancy.resize(0, 0);
  empty.cond_redundancy.resize(0, 0);
  CHECK_THROWS_AS(rank_features(empty, Selector::mrmr, 1), ValidationError);

  MiTable t = random_table(4, 25);
  CHECK_THROWS_AS(rank_features(t, Selector::mrmr, 0), ValidationError);
  CHECK_THROWS_AS(rank_features(t, Selector::mrmr, 5), ValidationError);

  MiTable bad = random_table(4, 26);
  bad.redundancy.resize(3, 3);
  CHECK_THROWS_AS(rank_features(bad, Selector::mrmr, 2), ValidationError);
}

TEST_CASE("selector and arrangement names round-trip and reject unknowns") {
  for (Selector method : all_selectors())
    CHECK(selector_from_string(to_string(method)) == method);
  CHECK(selector_from_string("MRMR") == Selector::mrmr);
  CHECK_THROWS_AS(selector_from_string("bogus"), ValidationError);
  CHECK(arrangement_from_string("type1") == ArrangementType::type1);
  CHECK(arrangement_from_string("2") == ArrangementType::type2);
  CHECK_THROWS_AS(arrangement_from_string("type3"), ValidationError);
}

TEST_CASE("per-kind arrangement with full depth keeps every column exactly once") {
  FeatureMatrix fm = small_feature_matrix(60, 27);
  ArrangementPlan plan;
  plan.type = ArrangementType::type1;
  plan.k1 = 3;  // equals the band count, so every column survives
  SelectionResult res = select_arrangement(fm, plan, Selector::mrmr);

  std::vector<int> all(18);
  std::iota(all.begin(), all.end(), 0);
  CHECK(res.selected == all);
  REQUIRE(res.rankings.size() == 6);
  REQUIRE(res.groups.size() == 6);
  for (int kind = 0; kind < 6; ++kind) {
    REQUIRE(res.groups[kind].size() == 3);
    for (int global : res.groups[kind])
      CHECK(static_cast<int>(fm.columns[global].kind) == kind);
    // The ranking's order holds global indices drawn from its own group.
    for (int global : res.rankings[kind].order) {
      CHECK(std::find(res.groups[kind].begin(), res.groups[kind].end(), global) !=
            res.groups[kind].end());
    }
  }
}

TEST_CASE("pool arrangement picks the requested number of distinct columns") {
  FeatureMatrix fm = small_feature_matrix(60, 28);
  ArrangementPlan plan;
  plan.type = ArrangementType::type2;
  plan.k2 = 13;
  SelectionResult res = select_arrangement(fm, plan, Selector::mrmr);
  REQUIRE(res.selected.size() == 13);
  CHECK(std::is_sorted(res.selected.begin(), res.selected.end()));
  CHECK(std::adjacent_find(res.selected.begin(), res.selected.end()) == res.selected.end());
  for (int idx : res.selected) {
    CHECK(idx >= 0);
    CHECK(idx < 18);
  }
  REQUIRE(res.rankings.size() == 1);
  CHECK(res.rankings[0].order.size() == 13);
  REQUIRE(res.groups.size() == 1);
  CHECK(res.groups[0].size() == 18);
}

TEST_CASE("arrangement plans outside the pool bounds are rejected") {
  FeatureMatrix fm = small_feature_matrix(60, 29);
  ArrangementPlan p1{ArrangementType::type1, 4, 13};  // only 3 bands exist
  CHECK_THROWS_AS(select_arrangement(fm, p1, Selector::mrmr), ValidationError);
  ArrangementPlan p2{ArrangementType::type2, 3, 19};  // only 18 columns exist
  CHECK_THROWS_AS(select_arrangement(fm, p2, Selector::mrmr), ValidationError);

  FeatureMatrix ragged = fm;
  ragged.values.conservativeResize(Eigen::NoChange, 17);
  ragged.columns.pop_back();
  ArrangementPlan p3{ArrangementType::type2, 3, 5};
  CHECK_THROWS_AS(select_arrangement(ragged, p3, Selector::mrmr), ValidationError);
}

TEST_CASE("the selection report carries method, plan, and column provenance") {
  FeatureMatrix fm = small_feature_matrix(60, 30);
  ArrangementPlan plan;
  plan.type = ArrangementType::type2;
  plan.k2 = 5;
  SelectionResult res = select_arrangement(fm, plan, Selector::cmim);
  const std::string text = selection_report_json(res, fm, plan, Selector::cmim);

  const nlohmann::json report = nlohmann::json::parse(text);
  CHECK(report.at("method") == "cmim");
  CHECK(report.at("arrangement") == "type2");
  CHECK(report.at("k2") == 5);
  REQUIRE(report.at("selected_columns").size() == 5);
  for (const auto& col : report.at("selected_columns")) {
    const int idx = col.at("column").get<int>();
    CHECK(col.at("band_index").get<int>() == fm.columns[idx].band_index);
    CHECK(col.at("kind").get<std::string>() == to_string(fm.columns[idx].kind));
  }
  REQUIRE(report.at("rankings").size() == 1);
  CHECK(report.at("rankings")[0].at("steps").size() == 5);
}
