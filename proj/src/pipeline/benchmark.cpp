#include "pipeline/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "core/epoch_io.hpp"
#include "core/rng.hpp"
#include "core/zscore.hpp"
#include "filterbank/butterworth.hpp"
#include "filterbank/filtfilt.hpp"
#include "strca/strca.hpp"

namespace fbtrca {

namespace {

// Merge two ascending index lists (used to combine outer and inner held-out
// trials for nested statistics).
std::vector<int> merge_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> constant_labels(std::size_t n_movement, std::size_t n_rest) {
  std::vector<int> y(n_movement + n_rest, 1);
  std::fill(y.begin() + static_cast<std::ptrdiff_t>(n_movement), y.end(), 0);
  return y;
}

TrainOptions fold_options(const CvConfig& cfg, int fold_id) {
  TrainOptions opts;
  opts.seed = derive_seed(cfg.seed, 7000 + static_cast<std::uint64_t>(fold_id));
  return opts;
}

}  // namespace

std::string to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::strca1: return "strca1";
    case BenchMethod::strca2: return "strca2";
    case BenchMethod::cvt: return "cvt";
    case BenchMethod::fbtrca_lda: return "fbtrca-lda";
    case BenchMethod::fbtrca_svm: return "fbtrca-svm";
    case BenchMethod::fbtrca_nn: return "fbtrca-nn";
  }
  throw ValidationError("unknown benchmark method");
}

BenchMethod bench_method_from_string(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '_', '-');
  std::replace(s.begin(), s.end(), ':', '-');  // accepts the fbtrca:svm spelling
  if (s == "strca1") return BenchMethod::strca1;
  if (s == "strca2") return BenchMethod::strca2;
  if (s == "cvt") return BenchMethod::cvt;
  if (s == "fbtrca-lda") return BenchMethod::fbtrca_lda;
  if (s == "fbtrca-svm" || s == "fbtrca") return BenchMethod::fbtrca_svm;
  if (s == "fbtrca-nn") return BenchMethod::fbtrca_nn;
  throw ValidationError("unknown benchmark method: " + name);
}

void finalize_stats(BenchmarkResult& r) {
  const std::size_t n = r.per_fold_accuracy.size();
  if (n == 0) {
    r.mean = 0.0;
    r.sd = 0.0;
    return;
  }
  double sum = 0.0;
  for (double a : r.per_fold_accuracy) sum += a;
  r.mean = sum / static_cast<double>(n);
  if (n < 2) {
    r.sd = 0.0;
    return;
  }
  double ss = 0.0;
  for (double a : r.per_fold_accuracy) ss += (a - r.mean) * (a - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(n - 1));
}

std::vector<BandData> prepare_bands(const EpochSet& movement, const EpochSet& rest,
                                    const std::vector<BandSpec>& bands, const CvConfig& cfg,
                                    AuditLog* audit) {
  movement.validate();
  rest.validate();
  if (bands.empty()) throw ValidationError("band list is empty");
  if (movement.fs != rest.fs)
    throw ValidationError("movement and rest sets have different sampling rates");
  if (movement.n_channels() != rest.n_channels() || movement.n_samples() != rest.n_samples())
    throw ValidationError("movement and rest sets have different shapes");

  if (audit) {
    for (int j = 0; j < movement.n_trials(); ++j) audit->log(-1, AccessPhase::prepare, 1, j);
    for (int j = 0; j < rest.n_trials(); ++j) audit->log(-1, AccessPhase::prepare, 0, j);
  }

  const EpochSet mz = cfg.normalize ? zscore_normalize(movement) : movement;
  const EpochSet rz = cfg.normalize ? zscore_normalize(rest) : rest;

  std::vector<BandData> out;
  out.reserve(bands.size());
  for (const BandSpec& band : bands) {
    band.validate();
    const SosDesign design = design_butterworth(band, movement.fs);
    EpochSet fm = apply_band(design, mz);
    EpochSet fr = apply_band(design, rz);
    ClassStats ms(fm);
    ClassStats rs(fr);
    out.push_back(BandData{std::move(fm), std::move(fr), std::move(ms), std::move(rs)});
  }
  return out;
}

double eval_strca_subset(const BandData& bd, int n_vec, const std::vector<int>& m_train,
                         const std::vector<int>& r_train, const std::vector<int>& m_held,
                         const std::vector<int>& r_held, const std::vector<int>& m_test,
                         const std::vector<int>& r_test, ClassifierKind kind,
                         const TrainOptions& topts, AuditLog* audit, int fold_id,
                         AccessPhase test_phase, int* trainings) {
  const auto s1 = bd.m_stats.subset_excluding(bd.movement, m_held);
  const auto s2 = bd.r_stats.subset_excluding(bd.rest, r_held);
  const StrcaModel model =
      trca_filter_from(s1, s2, bd.movement.n_channels(), bd.movement.n_samples(), n_vec);
  if (trainings) ++*trainings;
  const CcpExtractor extractor(model);

  const int n_train = static_cast<int>(m_train.size() + r_train.size());
  Eigen::MatrixXd x(n_train, kCoefficientKinds);
  int row = 0;
  for (int j : m_train) {
    if (audit) audit->log(fold_id, AccessPhase::fit, 1, j);
    x.row(row++) = extractor.extract(bd.movement.trials[static_cast<std::size_t>(j)]).rho.transpose();
  }
  for (int j : r_train) {
    if (audit) audit->log(fold_id, AccessPhase::fit, 0, j);
    x.row(row++) = extractor.extract(bd.rest.trials[static_cast<std::size_t>(j)]).rho.transpose();
  }
  const TrainedClassifier clf = train(kind, x, constant_labels(m_train.size(), r_train.size()), topts);

  const int n_test = static_cast<int>(m_test.size() + r_test.size());
  Eigen::MatrixXd xt(n_test, kCoefficientKinds);
  row = 0;
  for (int j : m_test) {
    if (audit) audit->log(fold_id, test_phase, 1, j);
    xt.row(row++) = extractor.extract(bd.movement.trials[static_cast<std::size_t>(j)]).rho.transpose();
  }
  for (int j : r_test) {
    if (audit) audit->log(fold_id, test_phase, 0, j);
    xt.row(row++) = extractor.extract(bd.rest.trials[static_cast<std::size_t>(j)]).rho.transpose();
  }
  return accuracy(predict(clf, xt), constant_labels(m_test.size(), r_test.size()));
}

BenchmarkResult run_strca(const EpochSet& movement, const EpochSet& rest, const BandSpec& band,
                          const CvConfig& cfg, AuditLog* audit) {
  cfg.validate();
  const auto data = prepare_bands(movement, rest, {band}, cfg, audit);
  const auto folds =
      stratified_folds(movement.n_trials(), rest.n_trials(), cfg.outer_folds, cfg.seed, cfg.shuffle);

  BenchmarkResult res;
  res.method = BenchMethod::strca2;
  res.strca_trainings_per_fold = 1;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const int fold_id = static_cast<int>(f);
    const auto m_tr = train_indices(movement.n_trials(), folds[f].movement_test);
    const auto r_tr = train_indices(rest.n_trials(), folds[f].rest_test);
    const double acc = eval_strca_subset(
        data[0], cfg.n_vec, m_tr, r_tr, folds[f].movement_test, folds[f].rest_test,
        folds[f].movement_test, folds[f].rest_test, ClassifierKind::lda, fold_options(cfg, fold_id),
        audit, fold_id, AccessPhase::predict, nullptr);
    res.per_fold_accuracy.push_back(acc);
    res.selected_feature_counts.push_back(kCoefficientKinds);
  }
  finalize_stats(res);
  return res;
}

BenchmarkResult run_cvt(const EpochSet& movement, const EpochSet& rest,
                        const std::vector<BandSpec>& grid, const CvConfig& cfg, AuditLog* audit) {
  cfg.validate();
  const auto data = prepare_bands(movement, rest, grid, cfg, audit);
  const auto folds =
      stratified_folds(movement.n_trials(), rest.n_trials(), cfg.outer_folds, cfg.seed, cfg.shuffle);

  BenchmarkResult res;
  res.method = BenchMethod::cvt;
  int first_fold_trainings = 0;

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const int fold_id = static_cast<int>(f);
    int* counter = (f == 0) ? &first_fold_trainings : nullptr;
    const auto m_tr = train_indices(movement.n_trials(), folds[f].movement_test);
    const auto r_tr = train_indices(rest.n_trials(), folds[f].rest_test);

    // Validation splits are taken inside the outer train split, so every
    // access below stays in the fit phase of this fold.
    const auto inner = stratified_folds(static_cast<int>(m_tr.size()), static_cast<int>(r_tr.size()),
                                        cfg.inner_folds,
                                        derive_seed(cfg.seed, 500 + static_cast<std::uint64_t>(f)),
                                        cfg.shuffle);
    struct InnerSplit {
      std::vector<int> m_train, r_train, m_test, r_test, m_held, r_held;
    };
    std::vector<InnerSplit> splits;
    splits.reserve(inner.size());
    for (const Fold& g : inner) {
      InnerSplit s;
      for (int p : g.movement_test) s.m_test.push_back(m_tr[static_cast<std::size_t>(p)]);
      for (int p : g.rest_test) s.r_test.push_back(r_tr[static_cast<std::size_t>(p)]);
      for (int p : train_indices(static_cast<int>(m_tr.size()), g.movement_test))
        s.m_train.push_back(m_tr[static_cast<std::size_t>(p)]);
      for (int p : train_indices(static_cast<int>(r_tr.size()), g.rest_test))
        s.r_train.push_back(r_tr[static_cast<std::size_t>(p)]);
      s.m_held = merge_sorted(folds[f].movement_test, s.m_test);
      s.r_held = merge_sorted(folds[f].rest_test, s.r_test);
      splits.push_back(std::move(s));
    }

    const TrainOptions topts = fold_options(cfg, fold_id);
    double best_score = -1.0;
    int best_band = 0;
    for (std::size_t b = 0; b < data.size(); ++b) {
      double sum = 0.0;
      for (const InnerSplit& s : splits)
        sum += eval_strca_subset(data[b], cfg.n_vec, s.m_train, s.r_train, s.m_held, s.r_held,
                                 s.m_test, s.r_test, ClassifierKind::lda, topts, audit, fold_id,
                                 AccessPhase::fit, counter);
      const double score = sum / static_cast<double>(splits.size());
      if (score > best_score) {  // ties keep the lower band index
        best_score = score;
        best_band = static_cast<int>(b);
      }
    }

    res.selected_bands.push_back(best_band);
    const double acc = eval_strca_subset(
        data[static_cast<std::size_t>(best_band)], cfg.n_vec, m_tr, r_tr, folds[f].movement_test,
        folds[f].rest_test, folds[f].movement_test, folds[f].rest_test, ClassifierKind::lda, topts,
        audit, fold_id, AccessPhase::predict, counter);
    res.per_fold_accuracy.push_back(acc);
    res.selected_feature_counts.push_back(kCoefficientKinds);
  }

  res.strca_trainings_per_fold = first_fold_trainings;
  finalize_stats(res);
  return res;
}

FbtrcaFeatures fbtrca_fold_features(const EpochSet& movement, const EpochSet& rest,
                                    const std::vector<BandSpec>& grid, const CvConfig& cfg,
                                    AuditLog* audit) {
  cfg.validate();
  const auto data = prepare_bands(movement, rest, grid, cfg, audit);
  const int nb = static_cast<int>(grid.size());

  std::vector<FeatureColumn> columns(static_cast<std::size_t>(nb) * kCoefficientKinds);
  for (int b = 0; b < nb; ++b)
    for (int k = 0; k < kCoefficientKinds; ++k)
      columns[static_cast<std::size_t>(b * kCoefficientKinds + k)] =
          FeatureColumn{b, static_cast<CoefficientKind>(k)};

  FbtrcaFeatures out;
  out.folds =
      stratified_folds(movement.n_trials(), rest.n_trials(), cfg.outer_folds, cfg.seed, cfg.shuffle);
  out.per_fold.reserve(out.folds.size());

  for (std::size_t f = 0; f < out.folds.size(); ++f) {
    const int fold_id = static_cast<int>(f);
    const Fold& fold = out.folds[f];
    const auto m_tr = train_indices(movement.n_trials(), fold.movement_test);
    const auto r_tr = train_indices(rest.n_trials(), fold.rest_test);

    FoldFeatureSet fs;
    fs.train.values.resize(static_cast<Eigen::Index>(m_tr.size() + r_tr.size()),
                           static_cast<Eigen::Index>(columns.size()));
    fs.train.columns = columns;
    fs.train.labels = constant_labels(m_tr.size(), r_tr.size());
    fs.test.values.resize(
        static_cast<Eigen::Index>(fold.movement_test.size() + fold.rest_test.size()),
        static_cast<Eigen::Index>(columns.size()));
    fs.test.columns = columns;
    fs.test.labels = constant_labels(fold.movement_test.size(), fold.rest_test.size());

    int trainings = 0;
    for (int b = 0; b < nb; ++b) {
      const BandData& bd = data[static_cast<std::size_t>(b)];
      const auto s1 = bd.m_stats.subset_excluding(bd.movement, fold.movement_test);
      const auto s2 = bd.r_stats.subset_excluding(bd.rest, fold.rest_test);
      const StrcaModel model =
          trca_filter_from(s1, s2, bd.movement.n_channels(), bd.movement.n_samples(), cfg.n_vec);
      ++trainings;
      const CcpExtractor extractor(model);

      const int col0 = b * kCoefficientKinds;
      int row = 0;
      for (int j : m_tr) {
        if (audit) audit->log(fold_id, AccessPhase::fit, 1, j);
        fs.train.values.block(row++, col0, 1, kCoefficientKinds) =
            extractor.extract(bd.movement.trials[static_cast<std::size_t>(j)]).rho.transpose();
      }
      for (int j : r_tr) {
        if (audit) audit->log(fold_id, AccessPhase::fit, 0, j);
        fs.train.values.block(row++, col0, 1, kCoefficientKinds) =
            extractor.extract(bd.rest.trials[static_cast<std::size_t>(j)]).rho.transpose();
      }
      row = 0;
      for (int j : fold.movement_test) {
        if (audit) audit->log(fold_id, AccessPhase::predict, 1, j);
        fs.test.values.block(row++, col0, 1, kCoefficientKinds) =
            extractor.extract(bd.movement.trials[static_cast<std::size_t>(j)]).rho.transpose();
      }
      for (int j : fold.rest_test) {
        if (audit) audit->log(fold_id, AccessPhase::predict, 0, j);
        fs.test.values.block(row++, col0, 1, kCoefficientKinds) =
            extractor.extract(bd.rest.trials[static_cast<std::size_t>(j)]).rho.transpose();
      }
    }
    out.strca_trainings_per_fold = trainings;
    out.per_fold.push_back(std::move(fs));
  }
  return out;
}

BenchmarkResult fbtrca_classify(const FbtrcaFeatures& features, Selector method,
                                const ArrangementPlan& plan, ClassifierKind kind,
                                const CvConfig& cfg) {
  BenchmarkResult res;
  switch (kind) {
    case ClassifierKind::lda: res.method = BenchMethod::fbtrca_lda; break;
    case ClassifierKind::svm_linear: res.method = BenchMethod::fbtrca_svm; break;
    case ClassifierKind::nn: res.method = BenchMethod::fbtrca_nn; break;
  }
  res.strca_trainings_per_fold = features.strca_trainings_per_fold;

  double selection_seconds = 0.0;
  for (std::size_t f = 0; f < features.per_fold.size(); ++f) {
    const FoldFeatureSet& fs = features.per_fold[f];

    const auto t0 = std::chrono::steady_clock::now();
    const SelectionResult sel = select_arrangement(fs.train, plan, method);
    const auto t1 = std::chrono::steady_clock::now();
    selection_seconds += std::chrono::duration<double>(t1 - t0).count();

    const FeatureMatrix train_sel = fs.train.select_columns(sel.selected);
    const FeatureMatrix test_sel = fs.test.select_columns(sel.selected);
    const TrainedClassifier clf = train(kind, train_sel, fold_options(cfg, static_cast<int>(f)));
    res.per_fold_accuracy.push_back(accuracy(predict(clf, test_sel.values), test_sel.labels));
    res.selected_feature_counts.push_back(static_cast<int>(sel.selected.size()));
  }
  res.feature_selection_seconds = selection_seconds;
  finalize_stats(res);
  return res;
}

BenchmarkResult run_fbtrca(const EpochSet& movement, const EpochSet& rest,
                           const std::vector<BandSpec>& grid, Selector method,
                           const ArrangementPlan& plan, ClassifierKind kind, const CvConfig& cfg,
                           AuditLog* audit) {
  const FbtrcaFeatures features = fbtrca_fold_features(movement, rest, grid, cfg, audit);
  return fbtrca_classify(features, method, plan, kind, cfg);
}

SweepResult run_sweep(const FbtrcaFeatures& features, const std::vector<Selector>& selectors,
                      const std::vector<ClassifierKind>& classifiers, int k1_max, int k2_max,
                      const CvConfig& cfg) {
  if (features.per_fold.empty()) throw ValidationError("sweep needs at least one fold");
  if (selectors.empty()) throw ValidationError("sweep needs at least one selector");
  if (classifiers.empty()) throw ValidationError("sweep needs at least one classifier");

  const FeatureMatrix& first = features.per_fold[0].train;
  const int d = first.n_features();
  const int nb = d / kCoefficientKinds;
  if (k1_max < 1 || k1_max > nb)
    throw ValidationError("per-kind sweep range must be in [1, band count]");
  if (k2_max < 1 || k2_max > d)
    throw ValidationError("pool sweep range must be in [1, total feature count]");

  std::vector<std::vector<int>> groups(kCoefficientKinds);
  for (int i = 0; i < d; ++i)
    groups[static_cast<std::size_t>(first.columns[static_cast<std::size_t>(i)].kind)].push_back(i);

  const std::size_t nf = features.per_fold.size();
  const std::size_t ns = selectors.size();

  SweepResult out;
  out.strca_trainings_per_fold = features.strca_trainings_per_fold;

  // Rankings are computed once per fold at the largest k: greedy forward
  // selection is prefix-stable (step t depends only on the steps before it)
  // and the quadratic-program ranking does not depend on k at all, so every
  // smaller k is a prefix of the same order.
  struct FoldRankings {
    std::vector<std::vector<std::vector<int>>> type1;  // [selector][kind] -> global order
    std::vector<std::vector<int>> type2;               // [selector] -> global order
  };
  std::vector<FoldRankings> ranks(nf);
  std::vector<double> rank1_seconds(ns, 0.0);
  std::vector<double> rank2_seconds(ns, 0.0);

  for (std::size_t f = 0; f < nf; ++f) {
    const FeatureMatrix& tr = features.per_fold[f].train;

    auto t0 = std::chrono::steady_clock::now();
    const MiTable pool = build_mi_table(tr.values, tr.labels, default_bins(tr.n_trials()));
    std::vector<MiTable> group_tables;
    group_tables.reserve(groups.size());
    for (const auto& g : groups) group_tables.push_back(pool.slice(g));
    auto t1 = std::chrono::steady_clock::now();
    out.mi_table_seconds += std::chrono::duration<double>(t1 - t0).count();

    ranks[f].type1.resize(ns);
    ranks[f].type2.resize(ns);
    for (std::size_t si = 0; si < ns; ++si) {
      t0 = std::chrono::steady_clock::now();
      ranks[f].type1[si].resize(groups.size());
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const SelectorRanking r = rank_features(group_tables[g], selectors[si], k1_max);
        for (int pos : r.order)
          ranks[f].type1[si][g].push_back(groups[g][static_cast<std::size_t>(pos)]);
      }
      t1 = std::chrono::steady_clock::now();
      rank1_seconds[si] += std::chrono::duration<double>(t1 - t0).count();

      t0 = std::chrono::steady_clock::now();
      ranks[f].type2[si] = rank_features(pool, selectors[si], k2_max).order;
      t1 = std::chrono::steady_clock::now();
      rank2_seconds[si] += std::chrono::duration<double>(t1 - t0).count();
    }
  }

  auto emit_rows = [&](std::size_t si, ArrangementType arr, int k, double selection_seconds) {
    // Selected columns per fold for this (selector, arrangement, k).
    std::vector<FeatureMatrix> train_sel(nf), test_sel(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      std::vector<int> selected;
      if (arr == ArrangementType::type1) {
        for (const auto& order : ranks[f].type1[si])
          selected.insert(selected.end(), order.begin(), order.begin() + k);
      } else {
        selected.assign(ranks[f].type2[si].begin(), ranks[f].type2[si].begin() + k);
      }
      std::sort(selected.begin(), selected.end());
      train_sel[f] = features.per_fold[f].train.select_columns(selected);
      test_sel[f] = features.per_fold[f].test.select_columns(selected);
    }
    for (ClassifierKind kind : classifiers) {
      SweepRow row;
      row.selector = selectors[si];
      row.arrangement = arr;
      row.k = k;
      row.classifier = kind;
      row.selection_seconds = selection_seconds;
      for (std::size_t f = 0; f < nf; ++f) {
        const TrainedClassifier clf =
            train(kind, train_sel[f], fold_options(cfg, static_cast<int>(f)));
        row.per_fold_accuracy.push_back(
            accuracy(predict(clf, test_sel[f].values), test_sel[f].labels));
      }
      BenchmarkResult stats;
      stats.per_fold_accuracy = row.per_fold_accuracy;
      finalize_stats(stats);
      row.mean = stats.mean;
      row.sd = stats.sd;
      out.rows.push_back(std::move(row));
    }
  };

  for (std::size_t si = 0; si < ns; ++si) {
    for (int k = 1; k <= k1_max; ++k) emit_rows(si, ArrangementType::type1, k, rank1_seconds[si]);
    for (int k = 1; k <= k2_max; ++k) emit_rows(si, ArrangementType::type2, k, rank2_seconds[si]);
  }
  return out;
}

FeatureMatrix full_dataset_features(const EpochSet& movement, const EpochSet& rest,
                                    const std::vector<BandSpec>& grid, const CvConfig& cfg) {
  const auto data = prepare_bands(movement, rest, grid, cfg, nullptr);
  const int nb = static_cast<int>(grid.size());

  FeatureMatrix out;
  out.values.resize(movement.n_trials() + rest.n_trials(),
                    static_cast<Eigen::Index>(nb) * kCoefficientKinds);
  out.columns.resize(static_cast<std::size_t>(nb) * kCoefficientKinds);
  for (int b = 0; b < nb; ++b)
    for (int k = 0; k < kCoefficientKinds; ++k)
      out.columns[static_cast<std::size_t>(b * kCoefficientKinds + k)] =
          FeatureColumn{b, static_cast<CoefficientKind>(k)};
  out.labels = constant_labels(static_cast<std::size_t>(movement.n_trials()),
                               static_cast<std::size_t>(rest.n_trials()));

  for (int b = 0; b < nb; ++b) {
    const BandData& bd = data[static_cast<std::size_t>(b)];
    const auto s1 = bd.m_stats.subset_excluding(bd.movement, {});
    const auto s2 = bd.r_stats.subset_excluding(bd.rest, {});
    const StrcaModel model =
        trca_filter_from(s1, s2, bd.movement.n_channels(), bd.movement.n_samples(), cfg.n_vec);
    const CcpExtractor extractor(model);
    const int col0 = b * kCoefficientKinds;
    int row = 0;
    for (const Eigen::MatrixXd& trial : bd.movement.trials)
      out.values.block(row++, col0, 1, kCoefficientKinds) = extractor.extract(trial).rho.transpose();
    for (const Eigen::MatrixXd& trial : bd.rest.trials)
      out.values.block(row++, col0, 1, kCoefficientKinds) = extractor.extract(trial).rho.transpose();
  }
  return out;
}

std::vector<SettingBandScore> compare_settings(const EpochSet& movement, const EpochSet& rest,
                                               const std::vector<RangeSetting>& settings, int m,
                                               double f_min, double f_max, const CvConfig& cfg,
                                               AuditLog* audit) {
  cfg.validate();
  const auto folds =
      stratified_folds(movement.n_trials(), rest.n_trials(), cfg.outer_folds, cfg.seed, cfg.shuffle);

  std::vector<SettingBandScore> table;
  for (RangeSetting setting : settings) {
    const auto bands = make_bands(setting, m, f_min, f_max);
    const auto data = prepare_bands(movement, rest, bands, cfg, audit);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      BenchmarkResult tmp;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const int fold_id = static_cast<int>(f);
        const auto m_tr = train_indices(movement.n_trials(), folds[f].movement_test);
        const auto r_tr = train_indices(rest.n_trials(), folds[f].rest_test);
        tmp.per_fold_accuracy.push_back(eval_strca_subset(
            data[b], cfg.n_vec, m_tr, r_tr, folds[f].movement_test, folds[f].rest_test,
            folds[f].movement_test, folds[f].rest_test, ClassifierKind::lda,
            fold_options(cfg, fold_id), audit, fold_id, AccessPhase::predict, nullptr));
      }
      finalize_stats(tmp);
      table.push_back(SettingBandScore{setting, static_cast<int>(b), bands[b].low_hz,
                                       bands[b].high_hz, tmp.mean, tmp.sd});
    }
  }
  return table;
}

namespace {

nlohmann::json result_to_json(const BenchmarkResult& r) {
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["per_fold_accuracy"] = r.per_fold_accuracy;
  j["mean_accuracy"] = r.mean;
  j["sd_accuracy"] = r.sd;
  j["feature_selection_seconds"] = r.feature_selection_seconds;
  j["strca_trainings_per_fold"] = r.strca_trainings_per_fold;
  if (!r.selected_bands.empty()) j["selected_bands"] = r.selected_bands;
  if (!r.selected_feature_counts.empty()) j["selected_feature_counts"] = r.selected_feature_counts;
  return j;
}

nlohmann::json parse_echo(const std::string& config_echo) {
  if (config_echo.empty()) return nlohmann::json::object();
  return nlohmann::json::parse(config_echo);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path);
  return out;
}

}  // namespace

std::string results_to_json(const std::vector<BenchmarkResult>& results,
                            const std::string& config_echo) {
  nlohmann::json root;
  root["config"] = parse_echo(config_echo);
  nlohmann::json arr = nlohmann::json::array();
  for (const BenchmarkResult& r : results) arr.push_back(result_to_json(r));
  root["results"] = arr;
  return root.dump(2) + "\n";
}

void write_results_csv(const std::vector<BenchmarkResult>& results, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "method,mean_accuracy,sd_accuracy,feature_selection_seconds,per_fold_accuracy\r\n";
  for (const BenchmarkResult& r : results) {
    out << to_string(r.method) << ',' << format_double(r.mean) << ',' << format_double(r.sd) << ','
        << format_double(r.feature_selection_seconds) << ',';
    for (std::size_t i = 0; i < r.per_fold_accuracy.size(); ++i) {
      if (i) out << ';';
      out << format_double(r.per_fold_accuracy[i]);
    }
    out << "\r\n";
  }
  if (!out) throw RuntimeError("cannot write " + path);
}

std::string settings_table_json(const std::vector<SettingBandScore>& table,
                                const std::string& config_echo) {
  nlohmann::json root;
  root["config"] = parse_echo(config_echo);
  nlohmann::json rows = nlohmann::json::array();
  for (const SettingBandScore& row : table) {
    nlohmann::json j;
    j["setting"] = to_string(row.setting);
    j["band_index"] = row.band_index;
    j["low_hz"] = row.low_hz;
    j["high_hz"] = row.high_hz;
    j["mean_accuracy"] = row.mean;
    j["sd_accuracy"] = row.sd;
    rows.push_back(j);
  }
  root["rows"] = rows;
  return root.dump(2) + "\n";
}

std::string sweep_to_json(const SweepResult& sweep, const std::string& config_echo) {
  nlohmann::json root;
  root["config"] = parse_echo(config_echo);
  root["mi_table_seconds"] = sweep.mi_table_seconds;
  root["strca_trainings_per_fold"] = sweep.strca_trainings_per_fold;

  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& row : sweep.rows) {
    nlohmann::json j;
    j["selector"] = to_string(row.selector);
    j["arrangement"] = to_string(row.arrangement);
    j["k"] = row.k;
    j["classifier"] = to_string(row.classifier);
    j["per_fold_accuracy"] = row.per_fold_accuracy;
    j["mean_accuracy"] = row.mean;
    j["sd_accuracy"] = row.sd;
    j["selection_seconds"] = row.selection_seconds;
    rows.push_back(j);
  }
  root["rows"] = rows;

  // Best k per (selector, arrangement, classifier), scanning rows in order so
  // ties keep the smaller k.
  nlohmann::json best = nlohmann::json::array();
  std::vector<std::size_t> seen;  // indices into sweep.rows of current bests
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const SweepRow& row = sweep.rows[i];
    bool found = false;
    for (std::size_t& bi : seen) {
      const SweepRow& b = sweep.rows[bi];
      if (b.selector == row.selector && b.arrangement == row.arrangement &&
          b.classifier == row.classifier) {
        if (row.mean > b.mean) bi = i;
        found = true;
        break;
      }
    }
    if (!found) seen.push_back(i);
  }
  for (std::size_t bi : seen) {
    const SweepRow& b = sweep.rows[bi];
    nlohmann::json j;
    j["selector"] = to_string(b.selector);
    j["arrangement"] = to_string(b.arrangement);
    j["classifier"] = to_string(b.classifier);
    j["k"] = b.k;
    j["mean_accuracy"] = b.mean;
    best.push_back(j);
  }
  root["best"] = best;
  return root.dump(2) + "\n";
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "selector,arrangement,k,classifier,mean_accuracy,sd_accuracy,selection_seconds,"
         "per_fold_accuracy\r\n";
  for (const SweepRow& row : sweep.rows) {
    out << to_string(row.selector) << ',' << to_string(row.arrangement) << ',' << row.k << ','
        << to_string(row.classifier) << ',' << format_double(row.mean) << ','
        << format_double(row.sd) << ',' << format_double(row.selection_seconds) << ',';
    for (std::size_t i = 0; i < row.per_fold_accuracy.size(); ++i) {
      if (i) out << ';';
      out << format_double(row.per_fold_accuracy[i]);
    }
    out << "\r\n";
  }
  if (!out) throw RuntimeError("cannot write " + path);
}

void write_settings_csv(const std::vector<SettingBandScore>& table, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "setting,band_index,low_hz,high_hz,mean_accuracy,sd_accuracy\r\n";
  for (const SettingBandScore& row : table) {
    out << to_string(row.setting) << ',' << row.band_index << ',' << format_double(row.low_hz)
        << ',' << format_double(row.high_hz) << ',' << format_double(row.mean) << ','
        << format_double(row.sd) << "\r\n";
  }
  if (!out) throw RuntimeError("cannot write " + path);
}

}  // namespace fbtrca
