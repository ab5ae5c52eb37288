#include "filterbank/filtfilt.hpp"

#include <algorithm>
#include <cmath>

namespace fbtrca {

namespace {

struct SectionState {
  double s1 = 0.0;
  double s2 = 0.0;
};

// Steady-state DF2T state per section for a constant input of 1, propagating
// each section's DC gain into the next. Scaling this by the first sample of
// the padded signal suppresses the start-up transient.
std::vector<SectionState> steady_state(const SosDesign& design) {
  std::vector<SectionState> zi(design.sections.size());
  double level = 1.0;  // DC level entering the current section
  for (std::size_t i = 0; i < design.sections.size(); ++i) {
    const Biquad& s = design.sections[i];
    const double denom = 1.0 + s.a1 + s.a2;
    const double gain = std::abs(denom) > 1e-300 ? (s.b0 + s.b1 + s.b2) / denom : 0.0;
    const double y = gain * level;
    zi[i].s2 = s.b2 * level - s.a2 * y;
    zi[i].s1 = s.b1 * level - s.a1 * y + zi[i].s2;
    level = y;
  }
  return zi;
}

void run_sections(const SosDesign& design, std::vector<SectionState>& state, double* data,
                  Eigen::Index n) {
  for (std::size_t i = 0; i < design.sections.size(); ++i) {
    const Biquad& s = design.sections[i];
    double s1 = state[i].s1;
    double s2 = state[i].s2;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double x = data[k];
      const double y = s.b0 * x + s1;
      s1 = s.b1 * x - s.a1 * y + s2;
      s2 = s.b2 * x - s.a2 * y;
      data[k] = y;
    }
    state[i].s1 = s1;
    state[i].s2 = s2;
  }
}

}  // namespace

Eigen::VectorXd sosfilt(const SosDesign& design, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd y = x;
  std::vector<SectionState> state(design.sections.size());
  run_sections(design, state, y.data(), y.size());
  return y;
}

Eigen::VectorXd filtfilt(const SosDesign& design, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw ValidationError("filtfilt needs at least 2 samples");

  // Odd reflection keeps the extension continuous in value at both ends.
  // 3*fs samples of padding where the signal allows it, else len-1.
  const Eigen::Index pad =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(std::lround(3.0 * design.fs)), n - 1);
  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  ext.segment(pad, n) = x;
  for (Eigen::Index i = 0; i < pad; ++i) ext[n + pad + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  const std::vector<SectionState> zi = steady_state(design);

  auto pass = [&](Eigen::VectorXd& v) {
    std::vector<SectionState> state = zi;
    for (auto& st : state) {
      st.s1 *= v[0];
      st.s2 *= v[0];
    }
    run_sections(design, state, v.data(), v.size());
  };

  pass(ext);
  ext.reverseInPlace();
  pass(ext);
  ext.reverseInPlace();
  return ext.segment(pad, n);
}

FilterBank make_filter_bank(const std::vector<BandSpec>& bands, double fs, int order) {
  if (bands.empty()) throw ValidationError("filter bank needs at least one band");
  FilterBank bank;
  bank.bands = bands;
  bank.fs = fs;
  bank.order = order;
  bank.designs.reserve(bands.size());
  for (const auto& b : bands) bank.designs.push_back(design_butterworth(b, fs, order));
  return bank;
}

EpochSet apply_band(const SosDesign& design, const EpochSet& epochs) {
  if (std::abs(design.fs - epochs.fs) > 1e-9)
    throw ValidationError("filter design and epochs disagree on sampling rate");
  EpochSet out = epochs;
  for (auto& trial : out.trials)
    for (Eigen::Index c = 0; c < trial.rows(); ++c)
      trial.row(c) = filtfilt(design, trial.row(c).transpose()).transpose();
  return out;
}

std::vector<EpochSet> apply_bank(const FilterBank& bank, const EpochSet& epochs) {
  epochs.validate();
  std::vector<EpochSet> out;
  out.reserve(bank.designs.size());
  for (const auto& design : bank.designs) out.push_back(apply_band(design, epochs));
  return out;
}

}  // namespace fbtrca
