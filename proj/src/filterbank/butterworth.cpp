#include "filterbank/butterworth.hpp"

#include <algorithm>
#include <cmath>

namespace fbtrca {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::pair<std::complex<double>, std::complex<double>> Biquad::poles() const {
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2, 0.0));
  return {(-a1 + disc) / 2.0, (-a1 - disc) / 2.0};
}

std::complex<double> SosDesign::response(double freq_hz) const {
  const double w = 2.0 * kPi * freq_hz / fs;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const auto& s : sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

double SosDesign::max_pole_magnitude() const {
  double worst = 0.0;
  for (const auto& s : sections) {
    const auto [p1, p2] = s.poles();
    worst = std::max({worst, std::abs(p1), std::abs(p2)});
  }
  return worst;
}

SosDesign design_butterworth(const BandSpec& band, double fs, int order) {
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (!(band.low_hz > 0.0 && band.low_hz < band.high_hz))
    throw ValidationError("band needs 0 < low < high");
  if (!(band.high_hz < fs / 2.0))
    throw ValidationError("band high edge at or above Nyquist: " + std::to_string(band.high_hz) +
                          " Hz at fs " + std::to_string(fs));
  if (order < 1 || order % 2 != 0)
    throw ValidationError("prototype order must be a positive even integer");

  // Pre-warped analog edges so the bilinear transform lands the -3 dB points
  // exactly on the requested digital frequencies.
  const double wl = 2.0 * fs * std::tan(kPi * band.low_hz / fs);
  const double wh = 2.0 * fs * std::tan(kPi * band.high_hz / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // Analog low-pass prototype poles on the unit circle, upper half plane
  // only; the lower half follows by conjugation.
  std::vector<std::complex<double>> proto;
  for (int k = 1; k <= order / 2; ++k) {
    const double theta = kPi * (2.0 * k + order - 1.0) / (2.0 * order);
    proto.emplace_back(std::cos(theta), std::sin(theta));
  }

  // Low-pass to band-pass: each prototype pole p maps to the two roots of
  // s^2 - (p*bw)*s + w0^2 = 0. Together with the conjugate family this gives
  // 2*order poles; the transformation adds `order` zeros at s = 0.
  std::vector<std::complex<double>> analog_poles;
  for (const auto& p : proto) {
    const std::complex<double> pb = p * bw;
    const std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    analog_poles.push_back((pb + disc) / 2.0);
    analog_poles.push_back((pb - disc) / 2.0);
  }

  // Bilinear transform. Zeros at s=0 land on z=+1 and the zeros at infinity
  // land on z=-1, one pair (z^2 - 1) per section.
  std::vector<std::complex<double>> digital_poles;
  const double k2 = 2.0 * fs;
  for (const auto& s : analog_poles) digital_poles.push_back((k2 + s) / (k2 - s));

  std::sort(digital_poles.begin(), digital_poles.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
              return a.real() < b.real();
            });

  SosDesign design;
  design.band = band;
  design.fs = fs;
  design.order = order;
  for (const auto& zp : digital_poles) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -2.0 * zp.real();
    s.a2 = std::norm(zp);
    design.sections.push_back(s);
  }

  // Normalize each section to unit gain at the band's geometric center,
  // mapped back through the bilinear warp.
  const double f_center = fs / kPi * std::atan(w0 / (2.0 * fs));
  const double w = 2.0 * kPi * f_center / fs;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  for (auto& s : design.sections) {
    const double g =
        std::abs((s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2));
    if (!(g > 0.0)) throw RuntimeError("degenerate section gain during design");
    s.b0 /= g;
    s.b1 /= g;
    s.b2 /= g;
  }

  if (design.max_pole_magnitude() >= 1.0)
    throw RuntimeError("unstable filter design for band " + std::to_string(band.low_hz) + "-" +
                       std::to_string(band.high_hz) + " Hz");
  return design;
}

}  // namespace fbtrca
