#include "onset/onset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "core/epoch_io.hpp"
#include "core/stats.hpp"

namespace fbtrca {

std::string to_string(OnsetStatus s) {
  switch (s) {
    case OnsetStatus::accepted: return "accepted";
    case OnsetStatus::rejected_variance: return "rejected-variance";
    case OnsetStatus::rejected_fit: return "rejected-fit";
    case OnsetStatus::rejected_manual: return "rejected-manual";
  }
  return "unknown";
}

Eigen::VectorXd sg_smooth(const Eigen::VectorXd& x, int window_length) {
  const int n = static_cast<int>(x.size());
  if (window_length < 3 || window_length % 2 == 0)
    throw ValidationError("smoothing window must be odd and at least 3");
  if (window_length > n)
    throw ValidationError("smoothing window longer than signal");

  const int half = window_length / 2;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    const int m = hi - lo + 1;
    // Linear least squares y = b0 + b1*(j - i) over the clamped window,
    // evaluated at j = i. Centered symmetric windows reduce to the mean.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double dx = j - i;
      sx += dx;
      sy += x[j];
      sxx += dx * dx;
      sxy += dx * x[j];
    }
    const double det = m * sxx - sx * sx;
    if (std::abs(det) < 1e-30) {
      out[i] = sy / m;
    } else {
      out[i] = (sxx * sy - sx * sxy) / det;
    }
  }
  return out;
}

Eigen::VectorXd smooth_diff(const Trajectory& t, int window_length) {
  t.validate();
  const int n = static_cast<int>(t.samples.size());
  if (n < 2) throw ValidationError("trajectory too short for differencing");
  Eigen::VectorXd d = t.samples.tail(n - 1) - t.samples.head(n - 1);
  return sg_smooth(d, window_length);
}

namespace {

// Largest odd window that fits the signal, capped at the configured length.
int clamp_window(int requested, int n) {
  int w = std::min(requested, n);
  if (w % 2 == 0) --w;
  return std::max(w, 3);
}

}  // namespace

OnsetResult locate_onset_limb(const Trajectory& t, const LimbOnsetConfig& cfg) {
  t.validate();
  OnsetResult r;
  r.trial_id = t.trial_id;

  const int n = static_cast<int>(t.samples.size());
  double gate_var;
  if (cfg.variance_on_smoothed_diff) {
    if (n < 4) {
      r.status = OnsetStatus::rejected_variance;
      return r;
    }
    Eigen::VectorXd sd = smooth_diff(t, clamp_window(cfg.window_length, n - 1));
    gate_var = sample_variance(sd);
  } else {
    gate_var = sample_variance(t.samples);
  }
  if (gate_var < cfg.var_threshold) {
    r.status = OnsetStatus::rejected_variance;
    return r;
  }

  const double peak = t.samples.maxCoeff();
  if (peak > 0.0) {
    for (int i = 0; i < n; ++i) {
      if (t.samples[i] / peak > cfg.onset_threshold) {
        r.status = OnsetStatus::accepted;
        r.onset_index = i;
        return r;
      }
    }
  }
  r.status = OnsetStatus::rejected_manual;
  return r;
}

namespace {

struct FitOutcome {
  GaussianFitParams p;
  bool converged = false;
};

double fit_cost(const Eigen::VectorXd& y, const GaussianFitParams& p) {
  double cost = 0.0;
  const int n = static_cast<int>(y.size());
  for (int i = 0; i < n; ++i) {
    const double u = (i - p.b) / p.c;
    const double r = p.a * std::exp(-u * u) + p.d - y[i];
    cost += r * r;
  }
  return 0.5 * cost;
}

// Levenberg-Marquardt on f(x) = a*exp(-((x-b)/c)^2) + d with analytic Jacobian.
FitOutcome fit_gaussian(const Eigen::VectorXd& y, int max_iterations, double rel_cost_tol) {
  const int n = static_cast<int>(y.size());
  GaussianFitParams p;
  int argmax = 0;
  y.maxCoeff(&argmax);
  p.a = y.maxCoeff() - y.minCoeff();
  p.b = argmax;
  p.c = n / 10.0;
  p.d = y.minCoeff();
  if (p.c <= 0.0) p.c = 1.0;

  double cost = fit_cost(y, p);
  double lambda = 1e-3;
  bool converged = false;

  for (int it = 0; it < max_iterations; ++it) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (int i = 0; i < n; ++i) {
      const double u = (i - p.b) / p.c;
      const double e = std::exp(-u * u);
      const double r = p.a * e + p.d - y[i];
      Eigen::Vector4d j;
      j << e, p.a * e * 2.0 * u / p.c, p.a * e * 2.0 * u * u / p.c, 1.0;
      jtj += j * j.transpose();
      jtr += j * r;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::Matrix4d damped = jtj;
      for (int k = 0; k < 4; ++k)
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      Eigen::Vector4d delta = damped.ldlt().solve(-jtr);
      GaussianFitParams q = p;
      q.a += delta[0];
      q.b += delta[1];
      q.c += delta[2];
      q.d += delta[3];
      if (std::abs(q.c) < 1e-9) q.c = q.c < 0 ? -1e-9 : 1e-9;
      const double new_cost = fit_cost(y, q);
      if (std::isfinite(new_cost) && new_cost < cost) {
        const double rel = (cost - new_cost) / std::max(cost, 1e-300);
        p = q;
        cost = new_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        stepped = true;
        if (rel < rel_cost_tol) converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (converged) break;
    if (!stepped) {
      // No descent direction at any damping: stationary, treat as converged
      // unless the parameters went non-finite.
      converged = std::isfinite(cost) && std::isfinite(p.a) && std::isfinite(p.b) &&
                  std::isfinite(p.c) && std::isfinite(p.d);
      break;
    }
  }
  FitOutcome out;
  out.p = p;
  out.converged = converged && std::isfinite(cost);
  return out;
}

}  // namespace

OnsetResult locate_onset_fit(const Trajectory& t, const FitOnsetConfig& cfg) {
  t.validate();
  OnsetResult r;
  r.trial_id = t.trial_id;

  const int n = static_cast<int>(t.samples.size());
  const double peak = t.samples.maxCoeff();
  if (!(peak > 0.0)) {
    // Nothing to normalize against; the amplitude gate could never pass.
    r.status = OnsetStatus::rejected_fit;
    return r;
  }
  Eigen::VectorXd y = t.samples / peak;

  FitOutcome fit = fit_gaussian(y, cfg.max_iterations, cfg.rel_cost_tol);
  // The fit runs on the normalized trajectory for conditioning; amplitude and
  // offset are reported back in the trajectory's own units. The amplitude
  // gate works in those raw units, the width gate in samples, and the offset
  // gate on the normalized baseline.
  GaussianFitParams reported = fit.p;
  reported.a *= peak;
  reported.d *= peak;
  r.fit_params = reported;
  if (!fit.converged) {
    r.status = OnsetStatus::rejected_fit;
    return r;
  }
  if (reported.a < cfg.reject_a_below || std::abs(fit.p.c) > cfg.reject_c_above ||
      fit.p.d > cfg.reject_d_above) {
    r.status = OnsetStatus::rejected_fit;
    return r;
  }

  Eigen::VectorXd smooth = sg_smooth(y, clamp_window(cfg.window_length, n));
  for (int i = 0; i < n; ++i) {
    if (smooth[i] > cfg.onset_threshold) {
      r.status = OnsetStatus::accepted;
      r.onset_index = i;
      return r;
    }
  }
  r.status = OnsetStatus::rejected_manual;
  return r;
}

OnsetResult fake_onset_rest(const Trajectory& t, double beep_time_s,
                            double var_threshold, double delay_s) {
  t.validate();
  OnsetResult r;
  r.trial_id = t.trial_id;

  const int onset = static_cast<int>(std::lround((beep_time_s + delay_s) * t.fs));
  if (onset < 0 || onset >= t.samples.size())
    throw ValidationError("trajectory window too short for the fake onset anchor");

  // Strict inequality: variance exactly at the threshold is accepted.
  if (sample_variance(t.samples) > var_threshold) {
    r.status = OnsetStatus::rejected_variance;
    return r;
  }
  r.status = OnsetStatus::accepted;
  r.onset_index = onset;
  return r;
}

void write_onset_report(const std::string& path, const std::vector<OnsetResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open onset report for writing: " + path);
  out << "trial_id,status,onset_index,a,b,c,d\r\n";
  for (const auto& r : results) {
    out << r.trial_id << ',' << to_string(r.status) << ',';
    if (r.onset_index) out << *r.onset_index;
    out << ',';
    if (r.fit_params) {
      out << format_double(r.fit_params->a) << ',' << format_double(r.fit_params->b) << ','
          << format_double(r.fit_params->c) << ',' << format_double(r.fit_params->d);
    } else {
      out << ",,,";
    }
    out << "\r\n";
  }
  if (!out) throw RuntimeError("failed writing onset report: " + path);
}

}  // namespace fbtrca
