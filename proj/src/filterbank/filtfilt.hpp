#pragma once

#include "core/types.hpp"
#include "filterbank/butterworth.hpp"

#include <vector>

namespace fbtrca {

// Single-pass cascaded-SOS filtering (direct form II transposed) with zero
// initial state.
Eigen::VectorXd sosfilt(const SosDesign& design, const Eigen::Ref<const Eigen::VectorXd>& x);

// Zero-phase forward-backward filtering. The signal is extended on both ends
// by odd reflection of min(3*fs, len-1) samples, filtered in both directions
// with steady-state initial conditions scaled to the first sample of each
// pass, then trimmed back.
Eigen::VectorXd filtfilt(const SosDesign& design, const Eigen::Ref<const Eigen::VectorXd>& x);

// All subband filters of one frequency-range configuration, designed for a
// fixed sampling rate.
struct FilterBank {
  std::vector<BandSpec> bands;
  std::vector<SosDesign> designs;
  double fs = 0.0;
  int order = 8;

  int size() const { return static_cast<int>(bands.size()); }
};

FilterBank make_filter_bank(const std::vector<BandSpec>& bands, double fs, int order = 8);

// Decomposes the epochs into one filtered EpochSet per subband (zero-phase,
// same shape, ordered as the bank's bands).
std::vector<EpochSet> apply_bank(const FilterBank& bank, const EpochSet& epochs);

// Single-band convenience used by the per-band pipelines.
EpochSet apply_band(const SosDesign& design, const EpochSet& epochs);

}  // namespace fbtrca
