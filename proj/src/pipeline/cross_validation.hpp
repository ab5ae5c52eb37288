#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace fbtrca {

struct CvConfig {
  int outer_folds = 10;
  int inner_folds = 9;
  std::uint64_t seed = 1;
  bool shuffle = true;
  bool normalize = true;  // z-score per channel per trial before filtering
  int n_vec = 3;

  void validate() const {
    if (outer_folds < 2 || inner_folds < 2)
      throw ValidationError("cross-validation needs at least 2 folds");
  }
};

// Test-trial indices per class for one fold; the train split is everything
// else.
struct Fold {
  std::vector<int> movement_test;
  std::vector<int> rest_test;
};

// Stratified fold assignment: each class is shuffled independently (seeded)
// and dealt round-robin, so every trial lands in exactly one test fold and
// the class ratio is preserved up to rounding.
std::vector<Fold> stratified_folds(int n_movement, int n_rest, int n_folds,
                                   std::uint64_t seed, bool shuffle);

enum class AccessPhase { prepare, fit, predict };

struct AccessRecord {
  int fold = 0;
  AccessPhase phase = AccessPhase::prepare;
  int class_label = 0;  // 1 movement, 0 rest
  int trial = 0;
};

// Every runner reports which trials a phase touched. Leakage shows up as a
// fit-phase record whose trial belongs to that fold's test split.
class AuditLog {
 public:
  void log(int fold, AccessPhase phase, int class_label, int trial) {
    records_.push_back({fold, phase, class_label, trial});
  }

  const std::vector<AccessRecord>& records() const { return records_; }

  // Count of fit-phase accesses to test trials of the same fold.
  int fit_reads_of_test(const std::vector<Fold>& folds) const;

  void clear() { records_.clear(); }

 private:
  std::vector<AccessRecord> records_;
};

// The complement of the fold's test indices, ascending.
std::vector<int> train_indices(int n_trials, const std::vector<int>& test);

}  // namespace fbtrca
