#include "pipeline/cross_validation.hpp"

#include <algorithm>
#include <numeric>

#include "core/rng.hpp"

namespace fbtrca {

std::vector<Fold> stratified_folds(int n_movement, int n_rest, int n_folds,
                                   std::uint64_t seed, bool shuffle) {
  if (n_folds < 2) throw ValidationError("fold count must be at least 2");
  if (n_movement < n_folds || n_rest < n_folds)
    throw ValidationError("each class needs at least one trial per fold");

  auto deal = [&](int n, std::uint64_t stream) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (shuffle) {
      Rng rng(derive_seed(seed, stream));
      rng.shuffle(order);
    }
    std::vector<std::vector<int>> folds(n_folds);
    for (int pos = 0; pos < n; ++pos) folds[pos % n_folds].push_back(order[pos]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
  };

  auto m_folds = deal(n_movement, 11);
  auto r_folds = deal(n_rest, 13);
  std::vector<Fold> out(n_folds);
  for (int f = 0; f < n_folds; ++f) {
    out[f].movement_test = std::move(m_folds[f]);
    out[f].rest_test = std::move(r_folds[f]);
  }
  return out;
}

int AuditLog::fit_reads_of_test(const std::vector<Fold>& folds) const {
  int leaks = 0;
  for (const auto& rec : records_) {
    if (rec.phase != AccessPhase::fit) continue;
    if (rec.fold < 0 || rec.fold >= static_cast<int>(folds.size())) continue;
    const auto& test =
        rec.class_label == 1 ? folds[rec.fold].movement_test : folds[rec.fold].rest_test;
    if (std::binary_search(test.begin(), test.end(), rec.trial)) ++leaks;
  }
  return leaks;
}

std::vector<int> train_indices(int n_trials, const std::vector<int>& test) {
  std::vector<int> out;
  out.reserve(n_trials - test.size());
  for (int i = 0; i < n_trials; ++i)
    if (!std::binary_search(test.begin(), test.end(), i)) out.push_back(i);
  return out;
}

}  // namespace fbtrca
