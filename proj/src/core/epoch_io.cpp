#include "core/epoch_io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace fbtrca {

namespace {

constexpr const char* kMetaName = "meta.json";
constexpr const char* kPayloadName = "epochs.f64le";

std::string trial_csv_name(int j) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial_%04d.csv", j);
  return buf;
}

json read_meta(const fs::path& dir) {
  const fs::path meta_path = dir / kMetaName;
  std::ifstream in(meta_path);
  if (!in) throw ValidationError("cannot open " + meta_path.string());
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw ValidationError("malformed meta.json in " + dir.string() + ": " + e.what());
  }
  return meta;
}

void apply_meta(const json& meta, EpochSet& out, int& nc, int& ns, int& nt) {
  try {
    nc = meta.at("n_channels").get<int>();
    ns = meta.at("n_samples").get<int>();
    nt = meta.at("n_trials").get<int>();
    out.fs = meta.at("fs").get<double>();
    out.label = meta.at("label").get<std::string>() == "movement" ? ClassLabel::movement
                                                                  : ClassLabel::rest;
    out.window = {meta.at("window").at(0).get<double>(), meta.at("window").at(1).get<double>()};
    out.channel_names = meta.value("channels", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("incomplete meta.json: ") + e.what());
  }
  if (nc < 1 || ns < 1 || nt < 1) throw ValidationError("meta.json declares empty dimensions");
}

void write_u64_le(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(const unsigned char* b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double bits_to_double(std::uint64_t bits) {
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

std::uint64_t double_to_bits(double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  return bits;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_f64_le(std::ostream& out, const double* values, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t bits = double_to_bits(values[i]);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!out) throw RuntimeError("failed writing float64 payload");
}

void read_f64_le(std::istream& in, double* values, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ValidationError("float64 payload truncated");
    values[i] = bits_to_double(read_u64_le(b));
  }
}

EpochSet load_epochs(const std::string& dir_in, EpochFormat format) {
  const fs::path dir(dir_in);
  if (!fs::is_directory(dir)) throw ValidationError("epoch directory not found: " + dir_in);

  if (format == EpochFormat::autodetect)
    format = fs::exists(dir / kPayloadName) ? EpochFormat::packed_binary : EpochFormat::csv_dir;

  EpochSet out;
  int nc = 0, ns = 0, nt = 0;
  apply_meta(read_meta(dir), out, nc, ns, nt);
  out.trials.assign(static_cast<std::size_t>(nt), Eigen::MatrixXd(nc, ns));

  if (format == EpochFormat::packed_binary) {
    const fs::path payload = dir / kPayloadName;
    std::ifstream in(payload, std::ios::binary);
    if (!in) throw ValidationError("missing payload file: " + payload.string());
    in.seekg(0, std::ios::end);
    const std::uint64_t bytes = static_cast<std::uint64_t>(in.tellg());
    const std::uint64_t expected = 8ull * nc * ns * nt;
    if (bytes != expected)
      throw ValidationError("payload size mismatch in " + dir_in + ": declared dims need " +
                            std::to_string(expected) + " bytes, file has " + std::to_string(bytes));
    in.seekg(0);
    std::vector<unsigned char> raw(bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw RuntimeError("short read from " + payload.string());
    std::size_t off = 0;
    for (int c = 0; c < nc; ++c)
      for (int s = 0; s < ns; ++s)
        for (int t = 0; t < nt; ++t) {
          out.trials[static_cast<std::size_t>(t)](c, s) =
              bits_to_double(read_u64_le(raw.data() + off));
          off += 8;
        }
  } else {
    for (int t = 0; t < nt; ++t) {
      const fs::path p = dir / trial_csv_name(t);
      std::ifstream in(p);
      if (!in) throw ValidationError("missing trial file: " + p.string());
      std::string line;
      for (int c = 0; c < nc; ++c) {
        if (!std::getline(in, line))
          throw ValidationError("dimension mismatch: " + p.string() + " has fewer than " +
                                std::to_string(nc) + " rows");
        std::stringstream row(line);
        std::string cell;
        for (int s = 0; s < ns; ++s) {
          if (!std::getline(row, cell, ','))
            throw ValidationError("dimension mismatch: short row in " + p.string());
          char* end = nullptr;
          out.trials[static_cast<std::size_t>(t)](c, s) = std::strtod(cell.c_str(), &end);
          if (end == cell.c_str())
            throw ValidationError("unparsable value '" + cell + "' in " + p.string());
        }
        if (std::getline(row, cell, ','))
          throw ValidationError("dimension mismatch: long row in " + p.string());
      }
    }
  }

  for (int t = 0; t < nt; ++t)
    if (!out.trials[static_cast<std::size_t>(t)].allFinite())
      throw ValidationError("non-finite samples in trial " + std::to_string(t) + " of " + dir_in);
  out.validate();
  return out;
}

void save_epochs(const EpochSet& epochs, const std::string& dir_in, EpochFormat format) {
  epochs.validate();
  const fs::path dir(dir_in);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeError("cannot create directory " + dir_in + ": " + ec.message());

  json meta;
  meta["n_channels"] = epochs.n_channels();
  meta["n_samples"] = epochs.n_samples();
  meta["n_trials"] = epochs.n_trials();
  meta["fs"] = epochs.fs;
  meta["channels"] = epochs.channel_names;
  meta["label"] = to_string(epochs.label);
  meta["window"] = {epochs.window.first, epochs.window.second};
  {
    std::ofstream out(dir / kMetaName);
    if (!out) throw RuntimeError("cannot write " + (dir / kMetaName).string());
    out << meta.dump(2) << "\n";
  }

  if (format == EpochFormat::csv_dir) {
    for (int t = 0; t < epochs.n_trials(); ++t) {
      std::ofstream out(dir / trial_csv_name(t));
      if (!out) throw RuntimeError("cannot write trial csv in " + dir_in);
      const Eigen::MatrixXd& trial = epochs.trials[static_cast<std::size_t>(t)];
      for (int c = 0; c < epochs.n_channels(); ++c) {
        for (int s = 0; s < epochs.n_samples(); ++s) {
          if (s) out << ',';
          out << format_double(trial(c, s));
        }
        out << "\r\n";
      }
    }
    return;
  }

  std::ofstream out(dir / kPayloadName, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + (dir / kPayloadName).string());
  for (int c = 0; c < epochs.n_channels(); ++c)
    for (int s = 0; s < epochs.n_samples(); ++s)
      for (int t = 0; t < epochs.n_trials(); ++t)
        write_u64_le(out, double_to_bits(epochs.trials[static_cast<std::size_t>(t)](c, s)));
  if (!out) throw RuntimeError("short write to " + (dir / kPayloadName).string());
}

Dataset load_dataset(const std::string& dir) {
  Dataset d;
  d.movement = load_epochs((fs::path(dir) / "movement").string());
  d.rest = load_epochs((fs::path(dir) / "rest").string());
  if (d.movement.label != ClassLabel::movement)
    throw ValidationError("movement directory declares label " + std::string(to_string(d.movement.label)));
  if (d.rest.label != ClassLabel::rest)
    throw ValidationError("rest directory declares label " + std::string(to_string(d.rest.label)));
  if (d.movement.n_channels() != d.rest.n_channels() ||
      d.movement.n_samples() != d.rest.n_samples() || d.movement.fs != d.rest.fs)
    throw ValidationError("movement and rest classes disagree on shape or sampling rate");
  return d;
}

void save_dataset(const Dataset& dataset, const std::string& dir, EpochFormat format) {
  save_epochs(dataset.movement, (fs::path(dir) / "movement").string(), format);
  save_epochs(dataset.rest, (fs::path(dir) / "rest").string(), format);
}

void export_features(const FeatureMatrix& features, const std::string& path) {
  features.validate();
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write feature csv: " + path);
  for (int k = 0; k < features.n_features(); ++k) {
    if (k) out << ',';
    out << 'b' << features.columns[static_cast<std::size_t>(k)].band_index << '_'
        << to_string(features.columns[static_cast<std::size_t>(k)].kind);
  }
  out << ",label\r\n";
  for (int j = 0; j < features.n_trials(); ++j) {
    for (int k = 0; k < features.n_features(); ++k) {
      if (k) out << ',';
      out << format_double(features.values(j, k));
    }
    out << ',' << features.labels[static_cast<std::size_t>(j)] << "\r\n";
  }
  if (!out) throw RuntimeError("short write to feature csv: " + path);
}

FeatureMatrix load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open feature csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty feature csv: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  FeatureMatrix out;
  std::stringstream header(line);
  std::string name;
  while (std::getline(header, name, ',')) {
    if (name == "label") break;
    if (name.size() < 3 || name[0] != 'b')
      throw ValidationError("malformed feature column name: " + name);
    const std::size_t us = name.find('_');
    if (us == std::string::npos) throw ValidationError("malformed feature column name: " + name);
    FeatureColumn col;
    col.band_index = std::stoi(name.substr(1, us - 1));
    col.kind = coefficient_kind_from_string(name.substr(us + 1));
    out.columns.push_back(col);
  }
  const int d = static_cast<int>(out.columns.size());
  if (d == 0) throw ValidationError("feature csv has no feature columns: " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::strtod(cell.c_str(), nullptr));
    if (static_cast<int>(values.size()) != d + 1)
      throw ValidationError("feature csv row has wrong column count: " + path);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ValidationError("feature csv has no data rows: " + path);

  out.values.resize(static_cast<Eigen::Index>(rows.size()), d);
  out.labels.resize(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int k = 0; k < d; ++k) out.values(static_cast<Eigen::Index>(j), k) = rows[j][static_cast<std::size_t>(k)];
    out.labels[j] = static_cast<int>(rows[j][static_cast<std::size_t>(d)]);
  }
  out.validate();
  return out;
}

}  // namespace fbtrca
