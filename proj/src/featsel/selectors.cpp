#include "featsel/selectors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace fbtrca {

std::string to_string(Selector s) {
  switch (s) {
    case Selector::miq: return "miq";
    case Selector::maxrel: return "maxrel";
    case Selector::minred: return "minred";
    case Selector::mrmr: return "mrmr";
    case Selector::qpfs: return "qpfs";
    case Selector::cife: return "cife";
    case Selector::cmim: return "cmim";
    case Selector::mrmtr: return "mrmtr";
  }
  return "unknown";
}

Selector selector_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (Selector m : all_selectors())
    if (to_string(m) == s) return m;
  throw ValidationError("unknown selector: " + name);
}

const std::vector<Selector>& all_selectors() {
  static const std::vector<Selector> methods{
      Selector::miq,  Selector::maxrel, Selector::minred, Selector::mrmr,
      Selector::qpfs, Selector::cife,   Selector::cmim,   Selector::mrmtr};
  return methods;
}

namespace {

// Projection onto the probability simplex (sort-based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const int d = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  int rho = 0;
  for (int j = 0; j < d; ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / (j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      tau = t;
    }
  }
  (void)rho;
  return (v.array() - tau).max(0.0);
}

double spectral_norm_estimate(const Eigen::MatrixXd& h) {
  const int d = static_cast<int>(h.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(double(d)));
  double norm = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd hv = h * v;
    const double n = hv.norm();
    if (n < 1e-300) return 0.0;
    v = hv / n;
    norm = n;
  }
  return norm;
}

}  // namespace

Eigen::VectorXd qpfs_weights(const MiTable& mi) {
  const int d = mi.size();
  Eigen::MatrixXd h = 0.5 * (mi.redundancy + mi.redundancy.transpose());
  const Eigen::VectorXd& q = mi.relevance;

  const double mean_q = q.mean();
  const double mean_h = h.mean();
  const double denom = mean_q + mean_h;
  const double theta = denom > 0.0 ? mean_q / denom : 0.5;

  double lipschitz = spectral_norm_estimate(h);
  if (!(lipschitz > 1e-12)) lipschitz = 1.0;
  const double step = 1.0 / lipschitz;

  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(d, 1.0 / d);
  bool converged = false;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd next = project_simplex(alpha - step * (h * alpha - theta * q));
    const double change = (next - alpha).cwiseAbs().maxCoeff();
    alpha = next;
    if (change <= 1e-9) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw RuntimeError("quadratic-program feature weighting did not converge");
  return alpha;
}

namespace {

SelectorRanking rank_qpfs(const MiTable& mi, int k) {
  Eigen::VectorXd alpha = qpfs_weights(mi);
  const int d = mi.size();
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&alpha](int a, int b) {
    if (alpha[a] != alpha[b]) return alpha[a] > alpha[b];
    return a < b;
  });
  SelectorRanking r;
  r.method = Selector::qpfs;
  r.order.assign(order.begin(), order.begin() + k);
  for (int idx : r.order) r.scores.push_back(alpha[idx]);
  return r;
}

// Step criterion for candidate i given the already-selected set.
double step_score(const MiTable& mi, Selector method, int i, const std::vector<int>& selected) {
  const double rel = mi.relevance[i];
  const int s = static_cast<int>(selected.size());
  if (s == 0) return rel;  // every greedy criterion reduces to relevance

  double red_sum = 0.0, penalty_sum = 0.0, min_cmim = std::numeric_limits<double>::infinity();
  for (int j : selected) {
    const double red = mi.redundancy(i, j);
    const double cond = mi.cond_redundancy(i, j);
    red_sum += red;
    penalty_sum += red - cond;
    min_cmim = std::min(min_cmim, rel - (red - cond));
  }
  const double red_mean = red_sum / s;

  switch (method) {
    case Selector::maxrel: return rel;
    case Selector::minred: return -red_mean;
    case Selector::mrmr: return rel - red_mean;
    case Selector::miq: return rel / std::max(red_mean, 1e-12);
    case Selector::cife: return rel - penalty_sum;
    case Selector::cmim: return min_cmim;
    case Selector::mrmtr: return rel - (2.0 / s) * red_sum;
    case Selector::qpfs: break;
  }
  throw RuntimeError("selector has no greedy step criterion");
}

}  // namespace

SelectorRanking rank_features(const MiTable& mi, Selector method, int k) {
  const int d = mi.size();
  if (d < 1) throw ValidationError("empty candidate pool");
  if (k < 1 || k > d) throw ValidationError("selection size must be in [1, feature count]");
  if (mi.redundancy.rows() != d || mi.redundancy.cols() != d ||
      mi.cond_redundancy.rows() != d || mi.cond_redundancy.cols() != d)
    throw ValidationError("mutual-information table dimensions disagree");

  if (method == Selector::qpfs) return rank_qpfs(mi, k);

  SelectorRanking r;
  r.method = method;
  std::vector<bool> taken(d, false);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_score = 0.0;
    for (int i = 0; i < d; ++i) {
      if (taken[i]) continue;
      const double score = step_score(mi, method, i, r.order);
      if (best < 0 || score > best_score) {  // strict: ties keep the lowest index
        best = i;
        best_score = score;
      }
    }
    taken[best] = true;
    r.order.push_back(best);
    r.scores.push_back(best_score);
  }
  return r;
}

std::string to_string(ArrangementType t) {
  return t == ArrangementType::type1 ? "type1" : "type2";
}

ArrangementType arrangement_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "type1" || s == "1") return ArrangementType::type1;
  if (s == "type2" || s == "2") return ArrangementType::type2;
  throw ValidationError("unknown arrangement type: " + name);
}

SelectionResult select_arrangement(const FeatureMatrix& features, const ArrangementPlan& plan,
                                   Selector method) {
  features.validate();
  const int d = static_cast<int>(features.columns.size());
  if (d % kCoefficientKinds != 0)
    throw ValidationError("feature pool must hold six columns per band");
  const int m = d / kCoefficientKinds;

  const int n = static_cast<int>(features.values.rows());
  const int bins = default_bins(n);
  MiTable table = build_mi_table(features.values, features.labels, bins);

  SelectionResult result;
  if (plan.type == ArrangementType::type1) {
    if (plan.k1 < 1 || plan.k1 > m)
      throw ValidationError("per-kind selection size must be in [1, band count]");
    for (int kind = 0; kind < kCoefficientKinds; ++kind) {
      std::vector<int> group;
      for (int c = 0; c < d; ++c)
        if (static_cast<int>(features.columns[c].kind) == kind) group.push_back(c);
      SelectorRanking ranking = rank_features(table.slice(group), method, plan.k1);
      for (int& idx : ranking.order) idx = group[idx];
      for (int idx : ranking.order) result.selected.push_back(idx);
      result.rankings.push_back(std::move(ranking));
      result.groups.push_back(std::move(group));
    }
  } else {
    if (plan.k2 < 1 || plan.k2 > d)
      throw ValidationError("pool selection size must be in [1, total feature count]");
    std::vector<int> group(d);
    std::iota(group.begin(), group.end(), 0);
    SelectorRanking ranking = rank_features(table, method, plan.k2);
    result.selected = ranking.order;
    result.rankings.push_back(std::move(ranking));
    result.groups.push_back(std::move(group));
  }
  std::sort(result.selected.begin(), result.selected.end());
  return result;
}

std::string selection_report_json(const SelectionResult& result, const FeatureMatrix& features,
                                  const ArrangementPlan& plan, Selector method) {
  nlohmann::json report;
  report["method"] = to_string(method);
  report["arrangement"] = to_string(plan.type);
  if (plan.type == ArrangementType::type1)
    report["k1"] = plan.k1;
  else
    report["k2"] = plan.k2;

  nlohmann::json cols = nlohmann::json::array();
  for (int idx : result.selected) {
    const auto& col = features.columns[idx];
    cols.push_back({{"column", idx},
                    {"band_index", col.band_index},
                    {"kind", to_string(col.kind)}});
  }
  report["selected_columns"] = cols;

  nlohmann::json rankings = nlohmann::json::array();
  for (const auto& r : result.rankings) {
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t i = 0; i < r.order.size(); ++i)
      steps.push_back({{"column", r.order[i]}, {"score", r.scores[i]}});
    rankings.push_back({{"steps", steps}});
  }
  report["rankings"] = rankings;
  return report.dump(2);
}

}  // namespace fbtrca
