#include "core/zscore.hpp"

#include "core/stats.hpp"

namespace fbtrca {

EpochSet zscore_normalize(const EpochSet& epochs) {
  epochs.validate();
  EpochSet out = epochs;
  const int ns = epochs.n_samples();
  for (int j = 0; j < epochs.n_trials(); ++j) {
    Eigen::MatrixXd& trial = out.trials[static_cast<std::size_t>(j)];
    for (int c = 0; c < epochs.n_channels(); ++c) {
      Eigen::VectorXd series = trial.row(c).transpose();
      const double mean = series.mean();
      const double var = (series.array() - mean).square().sum() / static_cast<double>(ns - 1);
      if (!(var > 0.0))
        throw ValidationError("degenerate channel: zero variance in channel " +
                              std::to_string(c) + ", trial " + std::to_string(j));
      trial.row(c) = ((series.array() - mean) / std::sqrt(var)).transpose();
    }
  }
  return out;
}

}  // namespace fbtrca
