#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/types.hpp"

namespace fbtrca {

enum class ClassifierKind { lda, svm_linear, nn };

std::string to_string(ClassifierKind k);
ClassifierKind classifier_from_string(const std::string& name);

struct TrainedClassifier {
  ClassifierKind kind = ClassifierKind::lda;
  int n_features = 0;

  // Linear decision (LDA and SVM): w^T x + b in the model's feature space.
  Eigen::VectorXd w;
  double b = 0.0;

  // Network weights (hidden tanh layer, logistic output).
  Eigen::MatrixXd nn_w1;
  Eigen::VectorXd nn_b1;
  Eigen::VectorXd nn_w2;
  double nn_b2 = 0.0;

  // Standardization constants fitted on training data (SVM and NN only;
  // identity for LDA).
  Eigen::VectorXd feat_mean;
  Eigen::VectorXd feat_scale;

  // Dual variables at the SVM solution, kept for feasibility diagnostics.
  Eigen::VectorXd alpha;

  std::map<std::string, double> training_meta;
};

struct TrainOptions {
  unsigned long long seed = 1;
  double lda_shrinkage = 1e-4;
  double svm_c = 1.0;
  double svm_tol = 1e-4;
  int svm_max_passes = 1000;
  int nn_hidden = 10;
  int nn_epochs = 200;
  double nn_learning_rate = 0.01;
};

TrainedClassifier train(ClassifierKind kind, const Eigen::MatrixXd& x,
                        const std::vector<int>& y, const TrainOptions& opts = {});
TrainedClassifier train(ClassifierKind kind, const FeatureMatrix& features,
                        const TrainOptions& opts = {});

struct Predictions {
  std::vector<int> labels;
  Eigen::VectorXd decision_values;  // monotone in class-1 probability
};

Predictions predict(const TrainedClassifier& c, const Eigen::MatrixXd& x);

double accuracy(const Predictions& p, const std::vector<int>& truth);

// Network loss (mean binary cross-entropy) and gradient for a flat parameter
// vector packed as [W1 column-major | b1 | w2 | b2]; used by training and by
// the finite-difference checks.
double nn_loss(const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
               const Eigen::VectorXd& y01, int hidden, Eigen::VectorXd* grad);

void save_classifier(const TrainedClassifier& c, const std::string& path_prefix);
TrainedClassifier load_classifier(const std::string& path_prefix);

}  // namespace fbtrca
