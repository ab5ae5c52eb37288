#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/types.hpp"

namespace fbtrca {

struct SynthSpec {
  int n_channels = 11;
  int n_samples = 512;
  int n_trials = 60;  // per class
  double fs = 256.0;
  double snr = 1.0;
  std::uint64_t seed = 1;
  double template_low_hz = 0.2;
  double template_high_hz = 0.9;
  // Per-channel mixing of the shared component and of the noise. Empty means
  // the built-in smooth spatial pattern (a1) and flat unit gains (a2).
  std::vector<double> a1;
  std::vector<double> a2;

  void validate() const;
};

struct SynthTruth {
  Eigen::VectorXd s;  // the shared component, unit RMS, band-limited
  std::vector<double> a1;
  std::vector<double> a2;
  std::vector<double> trial_gains;  // per movement trial
  double template_low_hz = 0.0;
  double template_high_hz = 0.0;
  double snr = 0.0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

struct SynthResult {
  EpochSet movement;
  EpochSet rest;
  SynthTruth truth;
};

// Movement trials carry a shared band-limited pre-movement deflection mixed
// per channel on top of pink-plus-white noise; rest trials are noise only.
// Fully determined by the seed.
SynthResult generate(const SynthSpec& spec);

// The deterministic shared component alone: an integrated-Gaussian downward
// ramp peaking at the epoch end, band-limited by Fourier truncation, unit RMS.
Eigen::VectorXd make_component(int n_samples, double fs, double low_hz, double high_hz);

enum class TrajectoryKind { limb, hand, rest };

TrajectoryKind trajectory_kind_from_string(const std::string& name);

// Trajectories with known ground truth for the onset procedures: limb rises
// through a sigmoid whose 0.2-of-maximum crossing sits at onset_s, hand is a
// Gaussian bump with amplitude 0.5 and width 40 samples at onset_s, rest is
// flat. Additive white noise of the given standard deviation throughout.
Trajectory generate_trajectory(TrajectoryKind kind, double onset_s, double fs,
                               double noise_sd, std::uint64_t seed,
                               double duration_s = 5.0);

}  // namespace fbtrca
