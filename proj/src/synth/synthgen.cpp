#include "synth/synthgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include "core/rng.hpp"

namespace fbtrca {

void SynthSpec::validate() const {
  if (n_channels < 2) throw ValidationError("synthesis needs at least 2 channels");
  if (n_samples < 8) throw ValidationError("synthesis needs at least 8 samples");
  if (n_trials < 2) throw ValidationError("synthesis needs at least 2 trials per class");
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (!(snr > 0.0)) throw ValidationError("snr must be positive");
  if (!(template_low_hz > 0.0) || !(template_low_hz < template_high_hz) ||
      !(template_high_hz < fs / 2.0))
    throw ValidationError("template band must satisfy 0 < low < high < fs/2");
  if (!a1.empty() && static_cast<int>(a1.size()) != n_channels)
    throw ValidationError("a1 mixing length must equal the channel count");
  if (!a2.empty() && static_cast<int>(a2.size()) != n_channels)
    throw ValidationError("a2 mixing length must equal the channel count");
}

namespace {

// Keep only the DFT bins inside [low, high] Hz (and their conjugate mirrors).
Eigen::VectorXd bandlimit(const Eigen::VectorXd& x, double fs, double low, double high) {
  const int n = static_cast<int>(x.size());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  std::vector<double> time(x.data(), x.data() + n);
  fft.fwd(spectrum, time);
  for (int k = 0; k < n; ++k) {
    const double f = (k <= n / 2 ? k : n - k) * fs / n;
    if (f < low || f > high) spectrum[k] = 0.0;
  }
  std::vector<double> out;
  fft.inv(out, spectrum);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

Eigen::VectorXd to_unit_rms(Eigen::VectorXd v) {
  const double rms = std::sqrt(v.squaredNorm() / v.size());
  if (rms > 0.0) v /= rms;
  return v;
}

// White Gaussian noise shaped toward a 1/f amplitude spectrum.
Eigen::VectorXd pink_noise(int n, double fs, Rng& rng) {
  Eigen::VectorXd white(n);
  for (int i = 0; i < n; ++i) white[i] = rng.normal();

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  std::vector<double> time(white.data(), white.data() + n);
  fft.fwd(spectrum, time);
  const double floor_hz = 0.5 * fs / n;
  for (int k = 0; k < n; ++k) {
    const double f = (k <= n / 2 ? k : n - k) * fs / n;
    spectrum[k] *= k == 0 ? 0.0 : 1.0 / std::sqrt(std::max(f, floor_hz));
  }
  std::vector<double> out;
  fft.inv(out, spectrum);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

Eigen::VectorXd noise_series(int n, double fs, Rng& rng) {
  Eigen::VectorXd pink = to_unit_rms(pink_noise(n, fs, rng));
  Eigen::VectorXd white(n);
  for (int i = 0; i < n; ++i) white[i] = rng.normal();
  return to_unit_rms(pink + to_unit_rms(std::move(white)));
}

}  // namespace

Eigen::VectorXd make_component(int n_samples, double fs, double low_hz, double high_hz) {
  // Integrated Gaussian: a smooth monotone ramp reaching its extreme at the
  // epoch end, as a negative deflection.
  const double center = 0.72 * n_samples;
  const double width = 0.10 * n_samples;
  Eigen::VectorXd ramp(n_samples);
  for (int i = 0; i < n_samples; ++i)
    ramp[i] = -0.5 * (1.0 + std::erf((i - center) / (width * std::sqrt(2.0))));
  return to_unit_rms(bandlimit(ramp, fs, low_hz, high_hz));
}

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const int nc = spec.n_channels;
  const int ns = spec.n_samples;
  const int nt = spec.n_trials;

  SynthResult out;
  out.truth.s = make_component(ns, spec.fs, spec.template_low_hz, spec.template_high_hz);
  out.truth.template_low_hz = spec.template_low_hz;
  out.truth.template_high_hz = spec.template_high_hz;
  out.truth.snr = spec.snr;
  out.truth.seed = spec.seed;

  out.truth.a1 = spec.a1;
  out.truth.a2 = spec.a2;
  if (out.truth.a1.empty()) {
    out.truth.a1.resize(nc);
    for (int i = 0; i < nc; ++i)
      out.truth.a1[i] = 0.4 + 0.6 * std::sin(M_PI * (i + 1) / (nc + 1.0));
  }
  if (out.truth.a2.empty()) out.truth.a2.assign(nc, 1.0);

  auto fill_class = [&](EpochSet& e, ClassLabel label, int class_tag) {
    e.fs = spec.fs;
    e.label = label;
    e.window = {-static_cast<double>(ns) / spec.fs, 0.0};
    e.channel_names.resize(nc);
    for (int i = 0; i < nc; ++i) e.channel_names[i] = "ch" + std::to_string(i + 1);
    e.trials.assign(nt, Eigen::MatrixXd(nc, ns));

    Rng gain_rng(derive_seed(spec.seed, 900 + class_tag));
    for (int j = 0; j < nt; ++j) {
      const double gain = 1.0 + 0.1 * gain_rng.uniform(-1.0, 1.0);
      if (class_tag == 0) out.truth.trial_gains.push_back(gain);
      Rng trial_rng(derive_seed(derive_seed(spec.seed, class_tag), j));
      for (int c = 0; c < nc; ++c) {
        Eigen::VectorXd n_ct = noise_series(ns, spec.fs, trial_rng);
        e.trials[j].row(c) = out.truth.a2[c] * n_ct.transpose();
        if (class_tag == 0)
          e.trials[j].row(c) +=
              spec.snr * gain * out.truth.a1[c] * out.truth.s.transpose();
      }
    }
  };

  fill_class(out.movement, ClassLabel::movement, 0);
  fill_class(out.rest, ClassLabel::rest, 1);
  out.movement.validate();
  out.rest.validate();
  return out;
}

std::string SynthTruth::to_json() const {
  nlohmann::json j{
      {"template_band", {template_low_hz, template_high_hz}},
      {"snr", snr},
      {"seed", seed},
      {"a1", a1},
      {"a2", a2},
      {"trial_gains", trial_gains},
      {"component", std::vector<double>(s.data(), s.data() + s.size())},
  };
  return j.dump(2);
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "limb") return TrajectoryKind::limb;
  if (s == "hand") return TrajectoryKind::hand;
  if (s == "rest") return TrajectoryKind::rest;
  throw ValidationError("unknown trajectory kind: " + name);
}

Trajectory generate_trajectory(TrajectoryKind kind, double onset_s, double fs,
                               double noise_sd, std::uint64_t seed, double duration_s) {
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (!(duration_s > 0.0)) throw ValidationError("duration must be positive");
  if (kind != TrajectoryKind::rest && !(onset_s > 0.0 && onset_s < duration_s))
    throw ValidationError("onset must lie inside the trajectory duration");
  const int n = static_cast<int>(std::lround(duration_s * fs));
  if (n < 2) throw ValidationError("trajectory too short");

  Trajectory t;
  t.fs = fs;
  t.samples.resize(n);
  Rng rng(seed);

  switch (kind) {
    case TrajectoryKind::limb: {
      // Sigmoid rise of amplitude 100 whose value is exactly 20% of the
      // plateau at onset_s, so the default threshold crossing lands there.
      const double tau = 0.02;
      const double shift = std::log(4.0);
      for (int i = 0; i < n; ++i) {
        const double u = (i / fs - onset_s) / tau - shift;
        t.samples[i] = 100.0 / (1.0 + std::exp(-u)) + noise_sd * rng.normal();
      }
      break;
    }
    case TrajectoryKind::hand: {
      const double b = onset_s * fs;
      const double c = 40.0;
      for (int i = 0; i < n; ++i) {
        const double u = (i - b) / c;
        t.samples[i] = 0.5 * std::exp(-u * u) + noise_sd * rng.normal();
      }
      break;
    }
    case TrajectoryKind::rest: {
      for (int i = 0; i < n; ++i) t.samples[i] = noise_sd * rng.normal();
      break;
    }
  }
  t.validate();
  return t;
}

}  // namespace fbtrca
