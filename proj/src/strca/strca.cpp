#include "strca/strca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <json.hpp>

#include "core/epoch_io.hpp"
#include "core/stats.hpp"

namespace fbtrca {

namespace {

Eigen::MatrixXd center_rows(const Eigen::MatrixXd& trial) {
  return trial.colwise() - trial.rowwise().mean();
}

}  // namespace

ClassStats::ClassStats(const EpochSet& e) {
  e.validate();
  const int nc = e.n_channels();
  n_samples = e.n_samples();
  n_trials = e.n_trials();
  centered_sum = Eigen::MatrixXd::Zero(nc, n_samples);
  gram_sum = Eigen::MatrixXd::Zero(nc, nc);
  raw_sum = Eigen::MatrixXd::Zero(nc, n_samples);
  gram.reserve(e.trials.size());
  for (const auto& trial : e.trials) {
    Eigen::MatrixXd z = center_rows(trial);
    centered_sum += z;
    raw_sum += trial;
    gram.push_back(z * z.transpose());
    gram_sum += gram.back();
  }
}

ClassStats::Subset ClassStats::subset_excluding(const EpochSet& e,
                                                const std::vector<int>& held_out) const {
  if (static_cast<int>(e.trials.size()) != n_trials || e.n_samples() != n_samples)
    throw ValidationError("epoch set does not match the statistics it was built from");

  Eigen::MatrixXd z_sum = centered_sum;
  Eigen::MatrixXd g_sum = gram_sum;
  Eigen::MatrixXd r_sum = raw_sum;
  for (int j : held_out) {
    if (j < 0 || j >= n_trials) throw ValidationError("held-out trial index out of range");
    z_sum -= center_rows(e.trials[j]);
    g_sum -= gram[j];
    r_sum -= e.trials[j];
  }

  Subset out;
  out.n_trials = n_trials - static_cast<int>(held_out.size());
  if (out.n_trials < 2) throw ValidationError("training statistics need at least 2 trials");
  const double norm = 1.0 / (n_samples - 1);
  out.Q = (z_sum * z_sum.transpose()) * norm;
  out.S = out.Q - g_sum * norm;
  // Symmetrize to absorb accumulation roundoff.
  out.Q = ((out.Q + out.Q.transpose()) * 0.5).eval();
  out.S = ((out.S + out.S.transpose()) * 0.5).eval();
  out.mean = r_sum / out.n_trials;
  return out;
}

TrcaMatrices trca_matrices(const EpochSet& x) {
  x.validate();
  if (x.n_trials() < 2) throw ValidationError("covariance sums need at least 2 trials");
  ClassStats stats(x);
  auto full = stats.subset_excluding(x, {});
  return {std::move(full.S), std::move(full.Q)};
}

Eigen::MatrixXd regularized(const Eigen::MatrixXd& q) {
  const double eps = 1e-10 * q.trace() / q.rows();
  return q + eps * Eigen::MatrixXd::Identity(q.rows(), q.cols());
}

namespace {

// Largest-magnitude entry made positive so eigenvector signs are reproducible.
void fix_sign(Eigen::Ref<Eigen::VectorXd> w) {
  int idx = 0;
  w.cwiseAbs().maxCoeff(&idx);
  if (w[idx] < 0.0) w = -w;
}

// Top n_vec generalized eigenpairs of S w = lambda Q w, unit Q-norm columns.
void solve_class(const Eigen::MatrixXd& s, const Eigen::MatrixXd& q, int n_vec,
                 Eigen::Ref<Eigen::MatrixXd> w_out, Eigen::Ref<Eigen::VectorXd> lambda_out) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, regularized(q));
  if (solver.info() != Eigen::Success)
    throw RuntimeError("generalized eigensolver failed on the trial-covariance problem");
  const int nc = static_cast<int>(s.rows());
  for (int i = 0; i < n_vec; ++i) {
    const int src = nc - 1 - i;  // eigenvalues come back ascending
    w_out.col(i) = solver.eigenvectors().col(src);
    lambda_out[i] = solver.eigenvalues()[src];
    fix_sign(w_out.col(i));
  }
}

}  // namespace

StrcaModel trca_filter_from(const ClassStats::Subset& class1, const ClassStats::Subset& class2,
                            int n_channels, int n_samples, int n_vec) {
  if (n_vec < 1) throw ValidationError("need at least one eigenvector per class");
  if (n_vec > n_channels)
    throw ValidationError("cannot extract more eigenvectors than channels");

  StrcaModel model;
  model.n_channels = n_channels;
  model.n_samples = n_samples;
  model.n_vec = n_vec;
  model.W.resize(n_channels, 2 * n_vec);
  model.eigenvalues.resize(2 * n_vec);
  solve_class(class1.S, class1.Q, n_vec, model.W.leftCols(n_vec),
              model.eigenvalues.head(n_vec));
  solve_class(class2.S, class2.Q, n_vec, model.W.rightCols(n_vec),
              model.eigenvalues.tail(n_vec));
  model.template1 = class1.mean;
  model.template2 = class2.mean;
  return model;
}

StrcaModel trca_filter(const EpochSet& movement, const EpochSet& rest, int n_vec) {
  movement.validate();
  rest.validate();
  if (movement.n_channels() != rest.n_channels() || movement.n_samples() != rest.n_samples())
    throw ValidationError("movement and rest epochs must share channel and sample counts");

  ClassStats m_stats(movement), r_stats(rest);
  return trca_filter_from(m_stats.subset_excluding(movement, {}),
                          r_stats.subset_excluding(rest, {}), movement.n_channels(),
                          movement.n_samples(), n_vec);
}

void save_strca_model(const StrcaModel& model, const std::string& path_prefix) {
  nlohmann::json meta{
      {"n_channels", model.n_channels},
      {"n_samples", model.n_samples},
      {"n_vec", model.n_vec},
      {"eigenvalues", std::vector<double>(model.eigenvalues.data(),
                                          model.eigenvalues.data() + model.eigenvalues.size())},
  };
  std::ofstream jout(path_prefix + ".json", std::ios::binary);
  if (!jout) throw RuntimeError("cannot write model metadata: " + path_prefix + ".json");
  jout << meta.dump(2) << '\n';

  std::ofstream bout(path_prefix + ".bin", std::ios::binary);
  if (!bout) throw RuntimeError("cannot write model payload: " + path_prefix + ".bin");
  write_f64_le(bout, model.W.data(), static_cast<std::size_t>(model.W.size()));
  write_f64_le(bout, model.template1.data(), static_cast<std::size_t>(model.template1.size()));
  write_f64_le(bout, model.template2.data(), static_cast<std::size_t>(model.template2.size()));
}

StrcaModel load_strca_model(const std::string& path_prefix) {
  std::ifstream jin(path_prefix + ".json", std::ios::binary);
  if (!jin) throw ValidationError("model metadata not found: " + path_prefix + ".json");
  nlohmann::json meta = nlohmann::json::parse(jin, nullptr, true);

  StrcaModel model;
  model.n_channels = meta.at("n_channels").get<int>();
  model.n_samples = meta.at("n_samples").get<int>();
  model.n_vec = meta.at("n_vec").get<int>();
  auto eig = meta.at("eigenvalues").get<std::vector<double>>();
  if (model.n_channels < 2 || model.n_samples < 2 || model.n_vec < 1 ||
      static_cast<int>(eig.size()) != 2 * model.n_vec)
    throw ValidationError("model metadata inconsistent: " + path_prefix + ".json");
  model.eigenvalues = Eigen::Map<Eigen::VectorXd>(eig.data(), eig.size());

  std::ifstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) throw ValidationError("model payload not found: " + path_prefix + ".bin");
  model.W.resize(model.n_channels, 2 * model.n_vec);
  model.template1.resize(model.n_channels, model.n_samples);
  model.template2.resize(model.n_channels, model.n_samples);
  read_f64_le(bin, model.W.data(), static_cast<std::size_t>(model.W.size()));
  read_f64_le(bin, model.template1.data(), static_cast<std::size_t>(model.template1.size()));
  read_f64_le(bin, model.template2.data(), static_cast<std::size_t>(model.template2.size()));
  return model;
}

CcaSide cca_side(const Eigen::MatrixXd& data) {
  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  // The plain Householder preconditioner is measurably faster than the
  // column-pivoting default on these tall thin inputs; the Jacobi sweeps on
  // the reduced factor still deliver full-accuracy singular values, which the
  // relative rank cutoff below depends on.
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::HouseholderQRPreconditioner> svd(
      centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-10 * sv[0] : 0.0;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff && sv[rank] > 0.0) ++rank;

  CcaSide side;
  side.u = svd.matrixU().leftCols(rank);
  side.basis = svd.matrixV().leftCols(rank) * sv.head(rank).cwiseInverse().asDiagonal();
  return side;
}

CcaProjection cca_between(const CcaSide& a, const CcaSide& b) {
  CcaProjection out;
  const int ra = static_cast<int>(a.u.cols());
  const int rb = static_cast<int>(b.u.cols());
  if (ra == 0 || rb == 0) {
    out.left.resize(a.basis.rows(), 0);
    out.right.resize(b.basis.rows(), 0);
    out.correlations.resize(0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.u.transpose() * b.u,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int r = std::min(ra, rb);
  out.left = a.basis * svd.matrixU().leftCols(r);
  out.right = b.basis * svd.matrixV().leftCols(r);
  out.correlations = svd.singularValues().head(r).cwiseMax(0.0).cwiseMin(1.0);
  // Each canonical pair is only defined up to a joint sign, and the sign the
  // solver lands on depends on the input layout. Pin it to the data: the
  // largest-magnitude entry of every right-basis column is made positive,
  // with the left partner flipped along, so identical subspaces presented in
  // any column order yield identical projections.
  for (int i = 0; i < r; ++i) {
    int idx = 0;
    out.right.col(i).cwiseAbs().maxCoeff(&idx);
    if (out.right(idx, i) < 0.0) {
      out.right.col(i) = -out.right.col(i);
      out.left.col(i) = -out.left.col(i);
    }
  }
  return out;
}

CcpExtractor::CcpExtractor(const StrcaModel& model)
    : w_(model.W), n_channels_(model.n_channels), n_samples_(model.n_samples) {
  if (model.template1.rows() != n_channels_ || model.template1.cols() != n_samples_ ||
      model.template2.rows() != n_channels_ || model.template2.cols() != n_samples_)
    throw ValidationError("model templates do not match the declared dimensions");

  t1w_ = model.template1.transpose() * w_;
  t2w_ = model.template2.transpose() * w_;
  d1w_ = t1w_ - t2w_;  // (template1 - template2) filtered
  d2w_ = t2w_ - t1w_;
  t1_side_ = cca_side(t1w_);
  t2_side_ = cca_side(t2w_);
  d1_side_ = cca_side(d1w_);
  d2_side_ = cca_side(d2w_);
}

namespace {

// Correlation of two matrices after projecting both through the template-side
// canonical directions. Zero-rank projections correlate nothing and score 0.
double projected_corr(const CcaSide& x_side, const Eigen::MatrixXd& x,
                      const Eigen::MatrixXd& t, const CcaSide& t_side) {
  CcaProjection proj = cca_between(x_side, t_side);
  if (proj.right.cols() == 0) return 0.0;
  return clamp_correlation(pearson_flat(x * proj.right, t * proj.right));
}

}  // namespace

CcpFeatures CcpExtractor::extract(const Eigen::MatrixXd& trial) const {
  if (trial.rows() != n_channels_ || trial.cols() != n_samples_)
    throw ValidationError("trial shape does not match the trained model");

  const Eigen::MatrixXd xw = trial.transpose() * w_;
  const Eigen::MatrixXd x_minus_t2 = xw - t2w_;  // trial with the rest template removed
  const Eigen::MatrixXd x_minus_t1 = xw - t1w_;
  const CcaSide x_side = cca_side(xw);

  CcpFeatures f;
  f.rho[0] = clamp_correlation(pearson_flat(xw, t1w_));
  f.rho[1] = clamp_correlation(pearson_flat(xw, t2w_));
  f.rho[2] = projected_corr(x_side, xw, t1w_, t1_side_);
  f.rho[3] = projected_corr(x_side, xw, t2w_, t2_side_);
  f.rho[4] = projected_corr(cca_side(x_minus_t2), x_minus_t2, d1w_, d1_side_);
  f.rho[5] = projected_corr(cca_side(x_minus_t1), x_minus_t1, d2w_, d2_side_);
  return f;
}

CcpFeatures ccp_extract(const StrcaModel& model, const Eigen::MatrixXd& trial) {
  return CcpExtractor(model).extract(trial);
}

namespace {

FeatureMatrix make_feature_matrix(int band_index, int n_trials) {
  FeatureMatrix fm;
  fm.values.resize(n_trials, kCoefficientKinds);
  fm.columns.reserve(kCoefficientKinds);
  for (int k = 0; k < kCoefficientKinds; ++k)
    fm.columns.push_back({band_index, static_cast<CoefficientKind>(k)});
  fm.labels.assign(static_cast<std::size_t>(n_trials), 0);
  return fm;
}

}  // namespace

StrcaFeatureSets strca_features(const EpochSet& movement, const EpochSet& rest,
                                const EpochSet& test, int band_index) {
  test.validate();
  if (test.n_channels() != movement.n_channels() || test.n_samples() != movement.n_samples())
    throw ValidationError("test epochs must match the training shape");

  StrcaModel model = trca_filter(movement, rest);
  CcpExtractor extractor(model);

  StrcaFeatureSets out;
  const int n_train = movement.n_trials() + rest.n_trials();
  out.train = make_feature_matrix(band_index, n_train);
  int row = 0;
  for (const auto& trial : movement.trials) {
    out.train.values.row(row) = extractor.extract(trial).rho.transpose();
    out.train.labels[row++] = static_cast<int>(ClassLabel::movement);
  }
  for (const auto& trial : rest.trials) {
    out.train.values.row(row) = extractor.extract(trial).rho.transpose();
    out.train.labels[row++] = static_cast<int>(ClassLabel::rest);
  }

  out.test = make_feature_matrix(band_index, test.n_trials());
  for (int j = 0; j < test.n_trials(); ++j) {
    out.test.values.row(j) = extractor.extract(test.trials[j]).rho.transpose();
    out.test.labels[j] = static_cast<int>(test.label);
  }
  return out;
}

}  // namespace fbtrca
