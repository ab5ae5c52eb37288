#pragma once

#include <string>
#include <vector>

#include "classify/classifiers.hpp"
#include "core/types.hpp"
#include "featsel/selectors.hpp"
#include "filterbank/bands.hpp"
#include "pipeline/cross_validation.hpp"
#include "strca/strca.hpp"

namespace fbtrca {

enum class BenchMethod { strca1, strca2, cvt, fbtrca_lda, fbtrca_svm, fbtrca_nn };

std::string to_string(BenchMethod m);
BenchMethod bench_method_from_string(const std::string& name);

struct BenchmarkResult {
  BenchMethod method = BenchMethod::strca2;
  std::vector<double> per_fold_accuracy;
  double mean = 0.0;
  double sd = 0.0;
  double feature_selection_seconds = 0.0;
  // diagnostics
  int strca_trainings_per_fold = 0;
  std::vector<int> selected_bands;           // chosen grid index per outer fold
  std::vector<int> selected_feature_counts;  // classifier input width per fold
};

void finalize_stats(BenchmarkResult& r);

// One subband's filtered epochs plus the statistics for subset training.
struct BandData {
  EpochSet movement;
  EpochSet rest;
  ClassStats m_stats;
  ClassStats r_stats;
};

// Normalize (optional), band-pass every band, and build per-class statistics.
// Pure per-trial preprocessing, so it may touch all trials.
std::vector<BandData> prepare_bands(const EpochSet& movement, const EpochSet& rest,
                                    const std::vector<BandSpec>& bands, const CvConfig& cfg,
                                    AuditLog* audit);

// Train a spatial-filter model on the train split of one band, fit the given
// classifier on its CCP features, and score the test split. held lists are
// the trials excluded from training statistics (the test split plus, for
// nested loops, the outer held-out trials).
double eval_strca_subset(const BandData& bd, int n_vec, const std::vector<int>& m_train,
                         const std::vector<int>& r_train, const std::vector<int>& m_held,
                         const std::vector<int>& r_held, const std::vector<int>& m_test,
                         const std::vector<int>& r_test, ClassifierKind kind,
                         const TrainOptions& topts, AuditLog* audit, int fold_id,
                         AccessPhase test_phase, int* trainings = nullptr);

BenchmarkResult run_strca(const EpochSet& movement, const EpochSet& rest, const BandSpec& band,
                          const CvConfig& cfg, AuditLog* audit = nullptr);

BenchmarkResult run_cvt(const EpochSet& movement, const EpochSet& rest,
                        const std::vector<BandSpec>& grid, const CvConfig& cfg,
                        AuditLog* audit = nullptr);

// The per-fold feature pool (6 columns per band, band-major) shared by the
// filter-bank runs: extracted once, reusable across selectors, plans, and
// classifiers.
struct FoldFeatureSet {
  FeatureMatrix train;
  FeatureMatrix test;
};

struct FbtrcaFeatures {
  std::vector<Fold> folds;
  std::vector<FoldFeatureSet> per_fold;
  int strca_trainings_per_fold = 0;
};

FbtrcaFeatures fbtrca_fold_features(const EpochSet& movement, const EpochSet& rest,
                                    const std::vector<BandSpec>& grid, const CvConfig& cfg,
                                    AuditLog* audit = nullptr);

// Selection plus classification on the precomputed pool; selection wall time
// is accumulated into feature_selection_seconds.
BenchmarkResult fbtrca_classify(const FbtrcaFeatures& features, Selector method,
                                const ArrangementPlan& plan, ClassifierKind kind,
                                const CvConfig& cfg);

BenchmarkResult run_fbtrca(const EpochSet& movement, const EpochSet& rest,
                           const std::vector<BandSpec>& grid, Selector method,
                           const ArrangementPlan& plan, ClassifierKind kind,
                           const CvConfig& cfg, AuditLog* audit = nullptr);

// One sweep configuration: a selector, an arrangement size, and a classifier.
struct SweepRow {
  Selector selector = Selector::mrmr;
  ArrangementType arrangement = ArrangementType::type1;
  int k = 1;
  ClassifierKind classifier = ClassifierKind::lda;
  std::vector<double> per_fold_accuracy;
  double mean = 0.0;
  double sd = 0.0;
  // Ranking wall time of this row's (selector, arrangement) across folds;
  // shared by its k and classifier variants because greedy rankings are
  // computed once at the largest k and reused as prefixes.
  double selection_seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double mi_table_seconds = 0.0;  // relevance/redundancy tables shared by all selectors
  int strca_trainings_per_fold = 0;
};

// Accuracy-vs-K table: Type 1 with k1 = 1..k1_max and Type 2 with
// k2 = 1..k2_max for every selector and classifier requested. Row order is
// selector-major, then arrangement (Type 1 first), then k, then classifier.
SweepResult run_sweep(const FbtrcaFeatures& features, const std::vector<Selector>& selectors,
                      const std::vector<ClassifierKind>& classifiers, int k1_max, int k2_max,
                      const CvConfig& cfg);

// Per-band correlation features of every trial, with the spatial filters
// trained on the full dataset (no held-out split): the raw-feature export.
FeatureMatrix full_dataset_features(const EpochSet& movement, const EpochSet& rest,
                                    const std::vector<BandSpec>& grid, const CvConfig& cfg);

struct SettingBandScore {
  RangeSetting setting = RangeSetting::M1;
  int band_index = 0;
  double low_hz = 0.0;
  double high_hz = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

// Per-band spatial-filter accuracy for each frequency-range setting, with the
// same fold assignment everywhere.
std::vector<SettingBandScore> compare_settings(const EpochSet& movement, const EpochSet& rest,
                                               const std::vector<RangeSetting>& settings, int m,
                                               double f_min, double f_max, const CvConfig& cfg,
                                               AuditLog* audit = nullptr);

// Serialization for the CLI/reporting layer. config_echo must be a JSON
// object string; it is embedded verbatim under "config".
std::string results_to_json(const std::vector<BenchmarkResult>& results,
                            const std::string& config_echo);
void write_results_csv(const std::vector<BenchmarkResult>& results, const std::string& path);
std::string settings_table_json(const std::vector<SettingBandScore>& table,
                                const std::string& config_echo);
void write_settings_csv(const std::vector<SettingBandScore>& table, const std::string& path);
std::string sweep_to_json(const SweepResult& sweep, const std::string& config_echo);
void write_sweep_csv(const SweepResult& sweep, const std::string& path);

}  // namespace fbtrca
