#pragma once

#include <vector>

#include <Eigen/Dense>

#include "core/types.hpp"

namespace fbtrca {

// Discretize into equal-frequency bins by rank, with index-stable tie
// ordering. When the variable has no more distinct values than bins (labels,
// already-discrete data), the distinct values become the categories so ties
// are never split.
std::vector<int> equal_frequency_bins(const Eigen::VectorXd& x, int bins);

// Histogram plug-in estimate in nats from the joint bin counts.
double mutual_information(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int bins);

// Default bin count for n observations.
int default_bins(int n);

struct MiTable {
  Eigen::VectorXd relevance;         // I(f_i ; y)
  Eigen::MatrixXd redundancy;        // I(f_i ; f_j), symmetric
  Eigen::MatrixXd cond_redundancy;   // I(f_i ; f_j | y), symmetric

  int size() const { return static_cast<int>(relevance.size()); }

  // Table restricted to a subset of feature indices.
  MiTable slice(const std::vector<int>& indices) const;
};

// x: trials x features, labels one class tag per trial. The conditional
// entries re-bin within each class and average the class-conditional
// estimates weighted by the class priors.
MiTable build_mi_table(const Eigen::MatrixXd& x, const std::vector<int>& labels, int bins);

}  // namespace fbtrca
