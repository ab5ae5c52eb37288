#pragma once

#include "core/types.hpp"

#include <string>
#include <vector>

namespace fbtrca {

enum class RangeSetting : std::uint8_t { M1, M2, M3, custom };

const char* to_string(RangeSetting setting);
RangeSetting range_setting_from_string(const std::string& name);

// One band-pass subband. Cut-offs live in the MRCP low-frequency domain: the
// upper edge never exceeds 10 Hz.
struct BandSpec {
  double low_hz = 0.0;
  double high_hz = 0.0;
  RangeSetting setting = RangeSetting::custom;
  int index = 0;

  void validate() const;
};

// The three frequency-range settings, each producing m subbands on
// [f_min, f_max]:
//   M1: equally spaced 1 Hz widths, [f_min,1], [1,2], ..., [m-1, f_max];
//       requires f_max == m.
//   M2: low edges in arithmetic progression of step 0.09*f_max starting at
//       f_min, each high edge twice the low edge, clipped to f_max
//       (0.05~0.9, 0.9~1.8, 1.8~3.6, ..., 8.1~10 for m=10, f_max=10).
//   M3: nested bands from the fixed low edge, [f_min, k*f_max/m] for k=1..m.
std::vector<BandSpec> make_bands(RangeSetting setting, int m, double f_min = 0.05,
                                 double f_max = 10.0);

// The 10x10 subband grid: low edges 0.05..0.50 step 0.05, high edges 1..10
// step 1, ordered lexicographically by (low, high). 100 bands.
std::vector<BandSpec> make_shifted_grid();

// JSON config round-trip for band lists: either
//   {"setting": "M1"|"M2"|"M3", "m": int, "f_min": x, "f_max": y}
// or {"bands": [{"low_hz": x, "high_hz": y}, ...]}.
std::vector<BandSpec> bands_from_json(const std::string& text);
std::string bands_to_json(const std::vector<BandSpec>& bands);

}  // namespace fbtrca
