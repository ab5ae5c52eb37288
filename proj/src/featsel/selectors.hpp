#pragma once

#include <string>
#include <vector>

#include "core/types.hpp"
#include "featsel/mutual_information.hpp"

namespace fbtrca {

enum class Selector { miq, maxrel, minred, mrmr, qpfs, cife, cmim, mrmtr };

std::string to_string(Selector s);
Selector selector_from_string(const std::string& name);
const std::vector<Selector>& all_selectors();

struct SelectorRanking {
  Selector method = Selector::mrmr;
  std::vector<int> order;      // selected feature indices, selection order
  std::vector<double> scores;  // per-step selection scores (QPFS: weights)
};

// Greedy forward selection (QPFS: one quadratic program) of k features.
// Ties break toward the lowest feature index.
SelectorRanking rank_features(const MiTable& mi, Selector method, int k);

// Simplex-constrained quadratic weighting used by QPFS; exposed for the
// feasibility checks. Returns the weight vector alpha (>= 0, sums to 1).
Eigen::VectorXd qpfs_weights(const MiTable& mi);

enum class ArrangementType { type1, type2 };

struct ArrangementPlan {
  ArrangementType type = ArrangementType::type2;
  int k1 = 3;   // per coefficient kind, used by Type 1
  int k2 = 13;  // over the whole pool, used by Type 2
};

std::string to_string(ArrangementType t);
ArrangementType arrangement_from_string(const std::string& name);

struct SelectionResult {
  std::vector<int> selected;                // column indices, sorted ascending
  std::vector<SelectorRanking> rankings;    // one (Type 2) or six (Type 1)
  std::vector<std::vector<int>> groups;     // global indices behind each ranking
};

// Runs the selector over the training feature matrix: Type 1 ranks each of
// the six coefficient-kind column groups independently and takes k1 from
// each; Type 2 ranks the whole pool once and takes k2.
SelectionResult select_arrangement(const FeatureMatrix& features, const ArrangementPlan& plan,
                                   Selector method);

// Report with method, plan, per-step scores, and (band, kind) provenance of
// every selected column, serialized as a JSON object string.
std::string selection_report_json(const SelectionResult& result, const FeatureMatrix& features,
                                  const ArrangementPlan& plan, Selector method);

}  // namespace fbtrca
