#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/types.hpp"

namespace fbtrca {

enum class OnsetStatus {
  accepted,
  rejected_variance,
  rejected_fit,
  rejected_manual,
};

std::string to_string(OnsetStatus s);

struct GaussianFitParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

struct OnsetResult {
  int trial_id = 0;
  OnsetStatus status = OnsetStatus::rejected_manual;
  std::optional<int> onset_index;
  std::optional<GaussianFitParams> fit_params;
};

// Savitzky-Golay smoothing (polynomial order 1) of a raw vector. Windows are
// clamped at the edges and the local linear fit is evaluated at the sample
// itself, so edge samples are smoothed over their one-sided neighborhoods.
Eigen::VectorXd sg_smooth(const Eigen::VectorXd& x, int window_length);

// First-order difference followed by order-1 Savitzky-Golay smoothing.
// Output length is one less than the trajectory length.
Eigen::VectorXd smooth_diff(const Trajectory& t, int window_length);

struct LimbOnsetConfig {
  double var_threshold = 0.05;
  double onset_threshold = 0.2;
  int window_length = 31;
  // The variance gate runs on the smoothed velocity by default; set false to
  // gate on the raw trajectory instead.
  bool variance_on_smoothed_diff = true;
};

OnsetResult locate_onset_limb(const Trajectory& t, const LimbOnsetConfig& cfg = {});

struct FitOnsetConfig {
  double onset_threshold = 0.2;
  int window_length = 31;
  double reject_a_below = 0.05;
  double reject_c_above = 100.0;  // samples
  double reject_d_above = 10.0;   // normalized amplitude
  int max_iterations = 200;
  double rel_cost_tol = 1e-8;
};

// Normalizes the trajectory by its maximum, fits
// f(x) = a*exp(-((x-b)/c)^2) + d by damped least squares, rejects on the
// parameter gates, then thresholds the smoothed normalized trajectory.
OnsetResult locate_onset_fit(const Trajectory& t, const FitOnsetConfig& cfg = {});

// Rest trials carry no movement; the onset anchor is placed a fixed delay
// after the cue beep, provided the trajectory stayed quiet.
OnsetResult fake_onset_rest(const Trajectory& t, double beep_time_s,
                            double var_threshold = 0.02,
                            double delay_s = 2.5);

// Report CSV: trial_id, status, onset_index, a, b, c, d (blank where absent).
void write_onset_report(const std::string& path, const std::vector<OnsetResult>& results);

}  // namespace fbtrca
