#pragma once

#include "core/types.hpp"
#include "filterbank/bands.hpp"

#include <complex>
#include <vector>

namespace fbtrca {

// One second-order section of
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::pair<std::complex<double>, std::complex<double>> poles() const;
};

// Cascaded-SOS realization of one subband's band-pass filter. The order is
// that of the analog low-pass prototype; the band-pass transformation doubles
// the pole count, so an order-8 design carries 8 biquad sections.
struct SosDesign {
  std::vector<Biquad> sections;
  BandSpec band;
  double fs = 0.0;
  int order = 8;

  // Complex frequency response at f Hz.
  std::complex<double> response(double freq_hz) const;
  double magnitude(double freq_hz) const { return std::abs(response(freq_hz)); }

  // Largest pole magnitude across sections; < 1 for a stable design.
  double max_pole_magnitude() const;
};

// Butterworth band-pass design: analog prototype of the given order,
// low-pass to band-pass transformation with pre-warped edges, bilinear
// transform, conjugate-pair grouping into sections. Each section is
// individually normalized to unit gain at the band's geometric center, which
// puts the -3 dB points at the requested edges.
SosDesign design_butterworth(const BandSpec& band, double fs, int order = 8);

}  // namespace fbtrca
