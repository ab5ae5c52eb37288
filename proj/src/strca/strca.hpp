#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/types.hpp"

namespace fbtrca {

struct TrcaMatrices {
  Eigen::MatrixXd S;  // sum of cross-trial channel covariances, j1 != j2
  Eigen::MatrixXd Q;  // sum over all trial pairs including j1 == j2
};

TrcaMatrices trca_matrices(const EpochSet& x);

// Regularization applied to Q before the generalized solve; exposed so the
// residual checks test exactly the problem that was solved.
Eigen::MatrixXd regularized(const Eigen::MatrixXd& q);

// Per-class sufficient statistics for repeated subset training. Holding the
// per-trial Grams and running totals lets a cross-validation loop form S, Q,
// and the class template for any train split by subtracting the held-out
// trials from the totals instead of re-summing.
struct ClassStats {
  std::vector<Eigen::MatrixXd> gram;  // centered_j * centered_j^T per trial
  Eigen::MatrixXd centered_sum;
  Eigen::MatrixXd gram_sum;
  Eigen::MatrixXd raw_sum;
  int n_samples = 0;
  int n_trials = 0;

  explicit ClassStats(const EpochSet& e);

  struct Subset {
    Eigen::MatrixXd S;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd mean;  // class template over the subset
    int n_trials = 0;
  };

  // Statistics over all trials of e except the listed ones (empty = full
  // set). e must be the EpochSet this ClassStats was built from.
  Subset subset_excluding(const EpochSet& e, const std::vector<int>& held_out) const;
};

struct StrcaModel {
  // Three eigenvectors per class, class-1 block first: n_channels x 2*n_vec.
  Eigen::MatrixXd W;
  Eigen::MatrixXd template1;  // class-1 (movement) trial mean
  Eigen::MatrixXd template2;  // class-2 (rest) trial mean
  // Generalized eigenvalues matching W's columns, descending within each block.
  Eigen::VectorXd eigenvalues;
  int n_channels = 0;
  int n_samples = 0;
  int n_vec = 0;
};

StrcaModel trca_filter(const EpochSet& movement, const EpochSet& rest, int n_vec = 3);

// Same training path fed from precomputed subset statistics.
StrcaModel trca_filter_from(const ClassStats::Subset& class1, const ClassStats::Subset& class2,
                            int n_channels, int n_samples, int n_vec = 3);

void save_strca_model(const StrcaModel& model, const std::string& path_prefix);
StrcaModel load_strca_model(const std::string& path_prefix);

struct CcpFeatures {
  // Ordered rho1_1, rho1_2, rho2_1, rho2_2, rho3_1, rho3_2; each in [-1, 1].
  Eigen::Matrix<double, 6, 1> rho;
};

// One side of a canonical correlation problem: orthonormal basis of the
// column-centered data plus the variable-space map into whitened coordinates.
struct CcaSide {
  Eigen::MatrixXd u;      // n x r
  Eigen::MatrixXd basis;  // p x r
};

CcaSide cca_side(const Eigen::MatrixXd& data);

struct CcaProjection {
  Eigen::MatrixXd left;           // p x r
  Eigen::MatrixXd right;          // q x r
  Eigen::VectorXd correlations;   // descending, each in [0, 1]
};

CcaProjection cca_between(const CcaSide& a, const CcaSide& b);

// Caches the template-side CCA factorizations so per-trial extraction only
// decomposes the trial side.
class CcpExtractor {
 public:
  explicit CcpExtractor(const StrcaModel& model);
  CcpFeatures extract(const Eigen::MatrixXd& trial) const;

 private:
  Eigen::MatrixXd w_;
  Eigen::MatrixXd t1w_, t2w_;  // filtered templates, n_samples x 2*n_vec
  Eigen::MatrixXd d1w_, d2w_;  // filtered template differences
  CcaSide t1_side_, t2_side_, d1_side_, d2_side_;
  int n_channels_ = 0;
  int n_samples_ = 0;
};

CcpFeatures ccp_extract(const StrcaModel& model, const Eigen::MatrixXd& trial);

struct StrcaFeatureSets {
  FeatureMatrix train;
  FeatureMatrix test;
};

// Trains on the two labeled classes only, then extracts CCP features for all
// training trials and for the test trials.
StrcaFeatureSets strca_features(const EpochSet& movement, const EpochSet& rest,
                                const EpochSet& test, int band_index = 0);

}  // namespace fbtrca
