#include "featsel/mutual_information.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace fbtrca {

int default_bins(int n) {
  return std::max(2, static_cast<int>(std::floor(std::sqrt(n / 5.0))));
}

std::vector<int> equal_frequency_bins(const Eigen::VectorXd& x, int bins) {
  const int n = static_cast<int>(x.size());
  if (bins < 2) throw ValidationError("binning needs at least 2 bins");
  if (n < 1) throw ValidationError("cannot bin an empty vector");

  std::map<double, int> distinct;
  for (int i = 0; i < n; ++i) {
    distinct.emplace(x[i], 0);
    if (static_cast<int>(distinct.size()) > bins) break;
  }
  std::vector<int> assignment(n);
  if (static_cast<int>(distinct.size()) <= bins) {
    int next = 0;
    for (auto& kv : distinct) kv.second = next++;
    for (int i = 0; i < n; ++i) assignment[i] = distinct.at(x[i]);
    return assignment;
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&x](int a, int b) { return x[a] < x[b]; });
  for (int rank = 0; rank < n; ++rank) {
    assignment[order[rank]] =
        static_cast<int>((static_cast<long long>(rank) * bins) / n);
  }
  return assignment;
}

namespace {

double mi_from_assignments(const std::vector<int>& bx, const std::vector<int>& by,
                           int nbx, int nby) {
  const int n = static_cast<int>(bx.size());
  std::vector<double> joint(static_cast<std::size_t>(nbx) * nby, 0.0);
  std::vector<double> px(nbx, 0.0), py(nby, 0.0);
  const double w = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(bx[i]) * nby + by[i]] += w;
    px[bx[i]] += w;
    py[by[i]] += w;
  }
  double mi = 0.0;
  for (int a = 0; a < nbx; ++a) {
    for (int b = 0; b < nby; ++b) {
      const double p = joint[static_cast<std::size_t>(a) * nby + b];
      if (p > 0.0) mi += p * std::log(p / (px[a] * py[b]));
    }
  }
  return std::max(mi, 0.0);
}

int bin_count(const std::vector<int>& assignment) {
  int hi = 0;
  for (int b : assignment) hi = std::max(hi, b);
  return hi + 1;
}

}  // namespace

double mutual_information(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int bins) {
  if (x.size() != y.size()) throw ValidationError("mutual information needs equal lengths");
  if (x.size() < 4) throw ValidationError("mutual information needs at least 4 observations");
  auto bx = equal_frequency_bins(x, bins);
  auto by = equal_frequency_bins(y, bins);
  return mi_from_assignments(bx, by, bin_count(bx), bin_count(by));
}

MiTable MiTable::slice(const std::vector<int>& indices) const {
  const int d = static_cast<int>(indices.size());
  MiTable out;
  out.relevance.resize(d);
  out.redundancy.resize(d, d);
  out.cond_redundancy.resize(d, d);
  for (int i = 0; i < d; ++i) {
    out.relevance[i] = relevance[indices[i]];
    for (int j = 0; j < d; ++j) {
      out.redundancy(i, j) = redundancy(indices[i], indices[j]);
      out.cond_redundancy(i, j) = cond_redundancy(indices[i], indices[j]);
    }
  }
  return out;
}

MiTable build_mi_table(const Eigen::MatrixXd& x, const std::vector<int>& labels, int bins) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (static_cast<int>(labels.size()) != n)
    throw ValidationError("label count does not match trial count");
  if (n < 4) throw ValidationError("mutual information needs at least 4 observations");

  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = labels[i];
  auto by = equal_frequency_bins(y, bins);
  const int nby = bin_count(by);

  // Global bin assignments once per feature.
  std::vector<std::vector<int>> bx(d);
  std::vector<int> nbx(d);
  for (int i = 0; i < d; ++i) {
    bx[i] = equal_frequency_bins(x.col(i), bins);
    nbx[i] = bin_count(bx[i]);
  }

  // Class-conditional assignments: features re-binned within each class.
  std::vector<std::vector<int>> class_rows(nby);
  for (int i = 0; i < n; ++i) class_rows[by[i]].push_back(i);
  std::vector<double> prior(nby);
  for (int c = 0; c < nby; ++c) prior[c] = static_cast<double>(class_rows[c].size()) / n;

  std::vector<std::vector<std::vector<int>>> cx(nby);  // [class][feature] assignments
  std::vector<std::vector<int>> cnbx(nby);
  for (int c = 0; c < nby; ++c) {
    cx[c].resize(d);
    cnbx[c].resize(d);
    const auto& rows = class_rows[c];
    if (rows.empty()) continue;
    Eigen::VectorXd sub(rows.size());
    for (int i = 0; i < d; ++i) {
      for (std::size_t r = 0; r < rows.size(); ++r) sub[r] = x(rows[r], i);
      cx[c][i] = equal_frequency_bins(sub, bins);
      cnbx[c][i] = bin_count(cx[c][i]);
    }
  }

  MiTable table;
  table.relevance.resize(d);
  table.redundancy.resize(d, d);
  table.cond_redundancy.resize(d, d);
  for (int i = 0; i < d; ++i)
    table.relevance[i] = mi_from_assignments(bx[i], by, nbx[i], nby);

  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double red = mi_from_assignments(bx[i], bx[j], nbx[i], nbx[j]);
      double cond = 0.0;
      for (int c = 0; c < nby; ++c) {
        if (class_rows[c].size() < 2) continue;
        cond += prior[c] * mi_from_assignments(cx[c][i], cx[c][j], cnbx[c][i], cnbx[c][j]);
      }
      table.redundancy(i, j) = table.redundancy(j, i) = red;
      table.cond_redundancy(i, j) = table.cond_redundancy(j, i) = cond;
    }
  }
  return table;
}

}  // namespace fbtrca
