#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fbtrca {

// Error taxonomy used across the library. ValidationError covers bad
// arguments, malformed files and violated preconditions; RuntimeError covers
// failures that occur on valid inputs (numerical breakdown, unwritable
// paths).
class Error : public std::runtime_error {
public:
  enum class Kind { validation, runtime };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(Kind::validation, msg) {}
};

class RuntimeError : public Error {
public:
  explicit RuntimeError(const std::string& msg) : Error(Kind::runtime, msg) {}
};

enum class ClassLabel : std::uint8_t { movement = 1, rest = 0 };

inline const char* to_string(ClassLabel label) {
  return label == ClassLabel::movement ? "movement" : "rest";
}

// A set of same-shape EEG trials of one class. Trials are stored as
// channels x samples matrices; the logical tensor is
// [n_channels x n_samples x n_trials]. Immutable by convention once built:
// all operations return new sets.
struct EpochSet {
  std::vector<Eigen::MatrixXd> trials;  // each n_channels x n_samples
  double fs = 0.0;                      // Hz
  std::vector<std::string> channel_names;
  ClassLabel label = ClassLabel::rest;
  std::pair<double, double> window{0.0, 0.0};  // seconds relative to onset

  int n_channels() const { return trials.empty() ? 0 : static_cast<int>(trials[0].rows()); }
  int n_samples() const { return trials.empty() ? 0 : static_cast<int>(trials[0].cols()); }
  int n_trials() const { return static_cast<int>(trials.size()); }

  // Checks the container invariants and throws ValidationError on the first
  // violation found.
  void validate() const;
};

// Single-trial movement trajectory from the glove/limb sensor.
struct Trajectory {
  Eigen::VectorXd samples;
  double fs = 0.0;
  int trial_id = 0;

  int length() const { return static_cast<int>(samples.size()); }

  void validate() const {
    if (samples.size() < 2) throw ValidationError("trajectory must have length >= 2");
    if (!(fs > 0.0)) throw ValidationError("trajectory sampling rate must be positive");
    if (!samples.allFinite()) throw ValidationError("trajectory contains non-finite samples");
  }
};

// The six correlation-coefficient kinds extracted per subband, in the fixed
// column order used everywhere downstream.
enum class CoefficientKind : std::uint8_t {
  rho1_1 = 0,
  rho1_2 = 1,
  rho2_1 = 2,
  rho2_2 = 3,
  rho3_1 = 4,
  rho3_2 = 5,
};

inline constexpr int kCoefficientKinds = 6;

const char* to_string(CoefficientKind kind);
CoefficientKind coefficient_kind_from_string(const std::string& name);

struct FeatureColumn {
  int band_index = 0;
  CoefficientKind kind = CoefficientKind::rho1_1;

  friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

// Trials x features table with per-column provenance and one {0,1} label per
// trial (1 = movement).
struct FeatureMatrix {
  Eigen::MatrixXd values;             // n_trials x n_features
  std::vector<FeatureColumn> columns; // size n_features
  std::vector<int> labels;            // size n_trials, each 0 or 1

  int n_trials() const { return static_cast<int>(values.rows()); }
  int n_features() const { return static_cast<int>(values.cols()); }

  void validate() const;

  // New matrix keeping only the given columns, in the given order.
  FeatureMatrix select_columns(const std::vector<int>& indices) const;
};

}  // namespace fbtrca
