#pragma once

#include "core/types.hpp"

#include <string>

namespace fbtrca {

enum class EpochFormat { packed_binary, csv_dir, autodetect };

// On-disk epoch directory: meta.json sidecar (dims, fs, channels, label,
// window) next to either epochs.f64le (little-endian float64 payload in
// channel-major order, i.e. offset(c,s,t) = (c*n_samples + s)*n_trials + t)
// or one trial_NNNN.csv per trial with n_channels rows of n_samples values.
EpochSet load_epochs(const std::string& dir, EpochFormat format = EpochFormat::autodetect);
void save_epochs(const EpochSet& epochs, const std::string& dir,
                 EpochFormat format = EpochFormat::packed_binary);

// A dataset directory holds one epoch directory per class: <dir>/movement and
// <dir>/rest.
struct Dataset {
  EpochSet movement;
  EpochSet rest;
};

Dataset load_dataset(const std::string& dir);
void save_dataset(const Dataset& dataset, const std::string& dir,
                  EpochFormat format = EpochFormat::packed_binary);

// Feature CSV (RFC-4180, '.' decimal separator, 17 significant digits).
// Header names one (band, kind) pair per column, e.g. b12_rho2_1, plus a
// final label column.
void export_features(const FeatureMatrix& features, const std::string& path);
FeatureMatrix load_features(const std::string& path);

// Canonical float formatting used by every CSV writer: shortest form that is
// still bit-exact on reparse.
std::string format_double(double value);

// Little-endian float64 array IO shared by every binary payload writer.
void write_f64_le(std::ostream& out, const double* values, std::size_t count);
void read_f64_le(std::istream& in, double* values, std::size_t count);

}  // namespace fbtrca
