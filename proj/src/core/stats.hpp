#pragma once

#include <Eigen/Core>

#include <cmath>

namespace fbtrca {

// Sample variance with the n-1 denominator, the convention used throughout.
inline double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  if (n < 2) return 0.0;
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(n - 1);
}

inline double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return std::sqrt(sample_variance(x));
}

// Pearson correlation of two equal-length vectors. Returns 0 when either side
// has zero variance; never returns a non-finite value for finite input. For
// identical inputs the result is exactly 1: the denominator is computed as
// sqrt(vx * vy), and IEEE-754 guarantees sqrt(v * v) == v.
inline double pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index n = x.size();
  if (n != y.size() || n < 2) return 0.0;
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx;
  const Eigen::ArrayXd dy = y.array() - my;
  const double vx = dx.square().sum();
  const double vy = dy.square().sum();
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  const double c = (dx * dy).sum();
  return c / std::sqrt(vx * vy);
}

// Pearson correlation over two same-shape matrices flattened to vectors.
inline double pearson_flat(const Eigen::Ref<const Eigen::MatrixXd>& a,
                           const Eigen::Ref<const Eigen::MatrixXd>& b) {
  const Eigen::Map<const Eigen::VectorXd> va(a.data(), a.size());
  const Eigen::Map<const Eigen::VectorXd> vb(b.data(), b.size());
  return pearson(va, vb);
}

inline double clamp_correlation(double r) {
  if (r > 1.0) return 1.0;
  if (r < -1.0) return -1.0;
  return r;
}

}  // namespace fbtrca
