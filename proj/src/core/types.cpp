#include "core/types.hpp"

#include <algorithm>
#include <set>

namespace fbtrca {

void EpochSet::validate() const {
  if (trials.size() < 2) throw ValidationError("epoch set needs n_trials >= 2");
  if (!(fs > 0.0)) throw ValidationError("epoch set sampling rate must be positive");
  const int nc = n_channels();
  const int ns = n_samples();
  if (nc < 2) throw ValidationError("epoch set needs n_channels >= 2");
  if (ns < 2) throw ValidationError("epoch set needs n_samples >= 2");
  for (std::size_t j = 0; j < trials.size(); ++j) {
    if (trials[j].rows() != nc || trials[j].cols() != ns)
      throw ValidationError("trial " + std::to_string(j) + " has inconsistent shape");
    if (!trials[j].allFinite())
      throw ValidationError("trial " + std::to_string(j) + " contains non-finite samples");
  }
  if (!channel_names.empty() && static_cast<int>(channel_names.size()) != nc)
    throw ValidationError("channel name count does not match n_channels");
  if (window.second <= window.first)
    throw ValidationError("epoch window must satisfy start < end");
  const double expected = std::round((window.second - window.first) * fs);
  if (std::abs(expected - ns) > 0.5)
    throw ValidationError("n_samples inconsistent with window and sampling rate");
}

const char* to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::rho1_1: return "rho1_1";
    case CoefficientKind::rho1_2: return "rho1_2";
    case CoefficientKind::rho2_1: return "rho2_1";
    case CoefficientKind::rho2_2: return "rho2_2";
    case CoefficientKind::rho3_1: return "rho3_1";
    case CoefficientKind::rho3_2: return "rho3_2";
  }
  return "rho?";
}

CoefficientKind coefficient_kind_from_string(const std::string& name) {
  for (int i = 0; i < kCoefficientKinds; ++i) {
    const auto kind = static_cast<CoefficientKind>(i);
    if (name == to_string(kind)) return kind;
  }
  throw ValidationError("unknown coefficient kind: " + name);
}

void FeatureMatrix::validate() const {
  if (values.rows() < 1) throw ValidationError("feature matrix has no trials");
  if (values.cols() < 1) throw ValidationError("feature matrix has no columns");
  if (static_cast<int>(columns.size()) != values.cols())
    throw ValidationError("column provenance count does not match feature count");
  if (static_cast<int>(labels.size()) != values.rows())
    throw ValidationError("label count does not match trial count");
  if (!values.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  for (int y : labels)
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  std::set<std::pair<int, int>> seen;
  for (const auto& col : columns) {
    if (!seen.insert({col.band_index, static_cast<int>(col.kind)}).second)
      throw ValidationError("duplicate (band, kind) column provenance");
  }
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<int>& indices) const {
  FeatureMatrix out;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(indices.size()));
  out.columns.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const int idx = indices[k];
    if (idx < 0 || idx >= n_features())
      throw ValidationError("column index out of range: " + std::to_string(idx));
    out.values.col(static_cast<Eigen::Index>(k)) = values.col(idx);
    out.columns.push_back(columns[idx]);
  }
  out.labels = labels;
  return out;
}

}  // namespace fbtrca
