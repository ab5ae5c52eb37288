#pragma once

#include "core/types.hpp"

namespace fbtrca {

// Z-score normalization per channel per trial over the time axis, using the
// sample (n-1) standard deviation. A zero-variance series is a degenerate
// channel and raises ValidationError naming the channel and trial.
EpochSet zscore_normalize(const EpochSet& epochs);

}  // namespace fbtrca
