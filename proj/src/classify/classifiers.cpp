#include "classify/classifiers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "core/epoch_io.hpp"
#include "core/rng.hpp"

namespace fbtrca {

std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::lda: return "lda";
    case ClassifierKind::svm_linear: return "svm";
    case ClassifierKind::nn: return "nn";
  }
  return "unknown";
}

ClassifierKind classifier_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "lda") return ClassifierKind::lda;
  if (s == "svm" || s == "svm-linear") return ClassifierKind::svm_linear;
  if (s == "nn") return ClassifierKind::nn;
  throw ValidationError("unknown classifier: " + name);
}

namespace {

void check_training_input(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  if (x.rows() < 2) throw ValidationError("training needs at least 2 trials");
  if (static_cast<int>(y.size()) != x.rows())
    throw ValidationError("label count does not match trial count");
  if (!x.allFinite()) throw ValidationError("training features contain non-finite values");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw ValidationError("labels must be 0 or 1");
  }
  if (!has0 || !has1) throw ValidationError("training needs both classes present");
}

void fit_standardization(const Eigen::MatrixXd& x, TrainedClassifier& c) {
  const int n = static_cast<int>(x.rows());
  c.feat_mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - c.feat_mean.transpose();
  c.feat_scale = (centered.array().square().colwise().sum() / (n - 1)).sqrt();
  for (int j = 0; j < c.feat_scale.size(); ++j)
    if (!(c.feat_scale[j] > 0.0)) c.feat_scale[j] = 1.0;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& x, const TrainedClassifier& c) {
  return (x.rowwise() - c.feat_mean.transpose()).array().rowwise() /
         c.feat_scale.transpose().array();
}

TrainedClassifier train_lda(const Eigen::MatrixXd& x, const std::vector<int>& y,
                            const TrainOptions& opts) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d), mu1 = Eigen::VectorXd::Zero(d);
  int n0 = 0, n1 = 0;
  for (int i = 0; i < n; ++i) {
    if (y[i] == 1) {
      mu1 += x.row(i).transpose();
      ++n1;
    } else {
      mu0 += x.row(i).transpose();
      ++n0;
    }
  }
  mu0 /= n0;
  mu1 /= n1;

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd r = x.row(i).transpose() - (y[i] == 1 ? mu1 : mu0);
    pooled += r * r.transpose();
  }
  pooled /= std::max(n - 2, 1);

  const double gamma = opts.lda_shrinkage;
  const double scale = pooled.trace() / d;
  Eigen::MatrixXd sigma =
      (1.0 - gamma) * pooled + gamma * scale * Eigen::MatrixXd::Identity(d, d);

  TrainedClassifier c;
  c.kind = ClassifierKind::lda;
  c.n_features = d;
  c.w = sigma.ldlt().solve(mu1 - mu0);
  c.b = -0.5 * c.w.dot(mu0 + mu1) + std::log(static_cast<double>(n1) / n0);
  c.feat_mean = Eigen::VectorXd::Zero(d);
  c.feat_scale = Eigen::VectorXd::Ones(d);
  c.training_meta = {{"shrinkage", gamma}};
  return c;
}

// Dual coordinate descent for the L1-loss linear SVM; the bias rides along as
// an extra always-one feature.
TrainedClassifier train_svm(const Eigen::MatrixXd& x_raw, const std::vector<int>& y,
                            const TrainOptions& opts) {
  const int n = static_cast<int>(x_raw.rows());
  const int d = static_cast<int>(x_raw.cols());

  TrainedClassifier c;
  c.kind = ClassifierKind::svm_linear;
  c.n_features = d;
  fit_standardization(x_raw, c);
  Eigen::MatrixXd x(n, d + 1);
  x.leftCols(d) = standardize(x_raw, c);
  x.col(d).setOnes();

  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) ys[i] = y[i] == 1 ? 1.0 : -1.0;

  const double cbox = opts.svm_c;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd qdiag(n);
  for (int i = 0; i < n; ++i) qdiag[i] = x.row(i).squaredNorm();

  for (int pass = 0; pass < opts.svm_max_passes; ++pass) {
    double max_violation = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = ys[i] * w.dot(x.row(i).transpose()) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] >= cbox) pg = std::max(g, 0.0);
      max_violation = std::max(max_violation, std::abs(pg));
      if (pg != 0.0 && qdiag[i] > 0.0) {
        const double old = alpha[i];
        alpha[i] = std::min(std::max(old - g / qdiag[i], 0.0), cbox);
        w += (alpha[i] - old) * ys[i] * x.row(i).transpose();
      }
    }
    if (max_violation < opts.svm_tol) break;
  }

  c.w = w.head(d);
  c.b = w[d];
  c.alpha = alpha;
  c.training_meta = {{"C", cbox}, {"tol", opts.svm_tol}};
  return c;
}

int nn_param_count(int d, int hidden) { return hidden * d + hidden + hidden + 1; }

}  // namespace

double nn_loss(const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
               const Eigen::VectorXd& y01, int hidden, Eigen::VectorXd* grad) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (params.size() != nn_param_count(d, hidden))
    throw ValidationError("network parameter vector has the wrong length");

  Eigen::Map<const Eigen::MatrixXd> w1(params.data(), hidden, d);
  Eigen::Map<const Eigen::VectorXd> b1(params.data() + hidden * d, hidden);
  Eigen::Map<const Eigen::VectorXd> w2(params.data() + hidden * d + hidden, hidden);
  const double b2 = params[params.size() - 1];

  // Forward: h = tanh(W1 x + b1), z = w2.h + b2, loss = mean BCE on sigmoid(z).
  Eigen::MatrixXd a1 = (w1 * x.transpose()).colwise() + b1;  // hidden x n
  Eigen::MatrixXd h = a1.array().tanh();
  Eigen::VectorXd z = (h.transpose() * w2).array() + b2;

  double loss = 0.0;
  Eigen::VectorXd dz(n);
  for (int i = 0; i < n; ++i) {
    // Stable softplus form of -[y ln p + (1-y) ln(1-p)].
    loss += std::max(z[i], 0.0) - y01[i] * z[i] + std::log1p(std::exp(-std::abs(z[i])));
    dz[i] = 1.0 / (1.0 + std::exp(-z[i])) - y01[i];
  }
  loss /= n;

  if (grad) {
    dz /= n;
    grad->resize(params.size());
    Eigen::Map<Eigen::MatrixXd> gw1(grad->data(), hidden, d);
    Eigen::Map<Eigen::VectorXd> gb1(grad->data() + hidden * d, hidden);
    Eigen::Map<Eigen::VectorXd> gw2(grad->data() + hidden * d + hidden, hidden);

    gw2 = h * dz;
    (*grad)[grad->size() - 1] = dz.sum();
    Eigen::MatrixXd dh = (w2 * dz.transpose()).array() * (1.0 - h.array().square());
    gw1 = dh * x;
    gb1 = dh.rowwise().sum();
  }
  return loss;
}

namespace {

TrainedClassifier train_nn(const Eigen::MatrixXd& x_raw, const std::vector<int>& y,
                           const TrainOptions& opts) {
  const int n = static_cast<int>(x_raw.rows());
  const int d = static_cast<int>(x_raw.cols());
  const int hidden = opts.nn_hidden;

  TrainedClassifier c;
  c.kind = ClassifierKind::nn;
  c.n_features = d;
  fit_standardization(x_raw, c);
  Eigen::MatrixXd x = standardize(x_raw, c);

  Eigen::VectorXd y01(n);
  for (int i = 0; i < n; ++i) y01[i] = y[i];

  Rng rng(opts.seed);
  Eigen::VectorXd params(nn_param_count(d, hidden));
  const double scale1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double scale2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int i = 0; i < hidden * d; ++i) params[i] = scale1 * rng.normal();
  for (int i = hidden * d; i < hidden * d + hidden; ++i) params[i] = 0.0;
  for (int i = hidden * d + hidden; i < hidden * d + 2 * hidden; ++i)
    params[i] = scale2 * rng.normal();
  params[params.size() - 1] = 0.0;

  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < opts.nn_epochs; ++epoch) {
    nn_loss(params, x, y01, hidden, &grad);
    params -= opts.nn_learning_rate * grad;
  }

  c.nn_w1 = Eigen::Map<Eigen::MatrixXd>(params.data(), hidden, d);
  c.nn_b1 = params.segment(hidden * d, hidden);
  c.nn_w2 = params.segment(hidden * d + hidden, hidden);
  c.nn_b2 = params[params.size() - 1];
  c.training_meta = {{"hidden", static_cast<double>(hidden)},
                     {"epochs", static_cast<double>(opts.nn_epochs)},
                     {"learning_rate", opts.nn_learning_rate},
                     {"seed", static_cast<double>(opts.seed)}};
  return c;
}

}  // namespace

TrainedClassifier train(ClassifierKind kind, const Eigen::MatrixXd& x,
                        const std::vector<int>& y, const TrainOptions& opts) {
  check_training_input(x, y);
  switch (kind) {
    case ClassifierKind::lda: return train_lda(x, y, opts);
    case ClassifierKind::svm_linear: return train_svm(x, y, opts);
    case ClassifierKind::nn: return train_nn(x, y, opts);
  }
  throw ValidationError("unknown classifier kind");
}

TrainedClassifier train(ClassifierKind kind, const FeatureMatrix& features,
                        const TrainOptions& opts) {
  features.validate();
  return train(kind, features.values, features.labels, opts);
}

Predictions predict(const TrainedClassifier& c, const Eigen::MatrixXd& x) {
  if (static_cast<int>(x.cols()) != c.n_features)
    throw ValidationError("feature count does not match the trained classifier");
  if (!x.allFinite()) throw ValidationError("prediction features contain non-finite values");

  const int n = static_cast<int>(x.rows());
  Predictions p;
  p.decision_values.resize(n);

  if (c.kind == ClassifierKind::nn) {
    Eigen::MatrixXd xs = standardize(x, c);
    Eigen::MatrixXd h =
        (((c.nn_w1 * xs.transpose()).colwise() + c.nn_b1).array().tanh()).matrix();
    Eigen::VectorXd z = (h.transpose() * c.nn_w2).array() + c.nn_b2;
    for (int i = 0; i < n; ++i)
      p.decision_values[i] = 1.0 / (1.0 + std::exp(-z[i]));
    p.labels.resize(n);
    for (int i = 0; i < n; ++i) p.labels[i] = p.decision_values[i] > 0.5 ? 1 : 0;
    return p;
  }

  Eigen::MatrixXd xs = standardize(x, c);
  p.decision_values = (xs * c.w).array() + c.b;
  p.labels.resize(n);
  for (int i = 0; i < n; ++i) p.labels[i] = p.decision_values[i] > 0.0 ? 1 : 0;
  return p;
}

double accuracy(const Predictions& p, const std::vector<int>& truth) {
  if (p.labels.size() != truth.size() || truth.empty())
    throw ValidationError("prediction and truth sizes disagree");
  int hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (p.labels[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / truth.size();
}

void save_classifier(const TrainedClassifier& c, const std::string& path_prefix) {
  nlohmann::json meta{{"kind", to_string(c.kind)},
                      {"n_features", c.n_features},
                      {"training_meta", c.training_meta}};
  std::ofstream jout(path_prefix + ".json", std::ios::binary);
  if (!jout) throw RuntimeError("cannot write classifier metadata: " + path_prefix + ".json");
  jout << meta.dump(2) << '\n';

  std::ofstream bout(path_prefix + ".bin", std::ios::binary);
  if (!bout) throw RuntimeError("cannot write classifier weights: " + path_prefix + ".bin");
  auto put = [&bout](const Eigen::VectorXd& v) {
    write_f64_le(bout, v.data(), static_cast<std::size_t>(v.size()));
  };
  put(c.feat_mean);
  put(c.feat_scale);
  if (c.kind == ClassifierKind::nn) {
    write_f64_le(bout, c.nn_w1.data(), static_cast<std::size_t>(c.nn_w1.size()));
    put(c.nn_b1);
    put(c.nn_w2);
    write_f64_le(bout, &c.nn_b2, 1);
  } else {
    put(c.w);
    write_f64_le(bout, &c.b, 1);
  }
}

TrainedClassifier load_classifier(const std::string& path_prefix) {
  std::ifstream jin(path_prefix + ".json", std::ios::binary);
  if (!jin) throw ValidationError("classifier metadata not found: " + path_prefix + ".json");
  nlohmann::json meta = nlohmann::json::parse(jin, nullptr, true);

  TrainedClassifier c;
  c.kind = classifier_from_string(meta.at("kind").get<std::string>());
  c.n_features = meta.at("n_features").get<int>();
  if (c.n_features < 1) throw ValidationError("classifier metadata declares no features");
  c.training_meta = meta.value("training_meta", std::map<std::string, double>{});

  std::ifstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) throw ValidationError("classifier weights not found: " + path_prefix + ".bin");
  auto get = [&bin](Eigen::VectorXd& v, int size) {
    v.resize(size);
    read_f64_le(bin, v.data(), static_cast<std::size_t>(size));
  };
  get(c.feat_mean, c.n_features);
  get(c.feat_scale, c.n_features);
  if (c.kind == ClassifierKind::nn) {
    const int hidden = static_cast<int>(c.training_meta.at("hidden"));
    c.nn_w1.resize(hidden, c.n_features);
    read_f64_le(bin, c.nn_w1.data(), static_cast<std::size_t>(c.nn_w1.size()));
    get(c.nn_b1, hidden);
    get(c.nn_w2, hidden);
    read_f64_le(bin, &c.nn_b2, 1);
  } else {
    get(c.w, c.n_features);
    read_f64_le(bin, &c.b, 1);
  }
  return c;
}

}  // namespace fbtrca
