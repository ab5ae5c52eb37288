#include "fbtrca/fbtrca.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/epoch_io.hpp"
#include "core/rng.hpp"
#include "core/types.hpp"
#include "filterbank/bands.hpp"
#include "onset/onset.hpp"
#include "pipeline/benchmark.hpp"
#include "synth/synthgen.hpp"

using nlohmann::json;

struct fbt_dataset {
  fbtrca::Dataset data;
  std::string dir;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw fbtrca::RuntimeError("out of memory");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return FBT_OK;
  } catch (const fbtrca::Error& e) {
    g_last_error = e.what();
    return e.kind() == fbtrca::Error::Kind::validation ? FBT_ERR_VALIDATION : FBT_ERR_RUNTIME;
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed config JSON: ") + e.what();
    return FBT_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FBT_ERR_RUNTIME;
  }
}

// Typed access to a JSON config object with defaults and strict unknown-key
// rejection, so a typo in a config file fails loudly instead of silently
// running with defaults.
class ConfigReader {
 public:
  explicit ConfigReader(const char* text) {
    if (text && *text) {
      cfg_ = json::parse(text);
      if (!cfg_.is_object()) throw fbtrca::ValidationError("config must be a JSON object");
    } else {
      cfg_ = json::object();
    }
  }

  bool has(const std::string& key) const { return cfg_.contains(key); }

  double number(const std::string& key, double def) {
    const json* v = take(key);
    if (!v) return def;
    if (!v->is_number()) throw type_error(key, "a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int def) {
    const json* v = take(key);
    if (!v) return def;
    if (!v->is_number_integer() && !v->is_number_unsigned()) throw type_error(key, "an integer");
    return v->get<int>();
  }

  std::uint64_t seed(const std::string& key, std::uint64_t def) {
    const json* v = take(key);
    if (!v) return def;
    if (!v->is_number_integer() && !v->is_number_unsigned()) throw type_error(key, "an integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = take(key);
    if (!v) return def;
    if (!v->is_boolean()) throw type_error(key, "a boolean");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& def) {
    const json* v = take(key);
    if (!v) return def;
    if (!v->is_string()) throw type_error(key, "a string");
    return v->get<std::string>();
  }

  std::vector<std::string> texts(const std::string& key, std::vector<std::string> def) {
    const json* v = take(key);
    if (!v) return def;
    if (!v->is_array()) throw type_error(key, "an array of strings");
    std::vector<std::string> out;
    for (const json& item : *v) {
      if (!item.is_string()) throw type_error(key, "an array of strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    const json* v = take(key);
    if (!v) return {};
    if (!v->is_array()) throw type_error(key, "an array of numbers");
    std::vector<double> out;
    for (const json& item : *v) {
      if (!item.is_number()) throw type_error(key, "an array of numbers");
      out.push_back(item.get<double>());
    }
    return out;
  }

  // Raw subobject (null if absent), for nested configs with their own parser.
  json raw(const std::string& key) {
    const json* v = take(key);
    return v ? *v : json();
  }

  // Throws on any key that no getter consumed.
  void finish() const {
    for (const auto& item : cfg_.items())
      if (!consumed_.count(item.key()))
        throw fbtrca::ValidationError("unknown config key: " + item.key());
  }

 private:
  const json* take(const std::string& key) {
    consumed_.insert(key);
    auto it = cfg_.find(key);
    return it == cfg_.end() || it->is_null() ? nullptr : &*it;
  }

  static fbtrca::ValidationError type_error(const std::string& key, const char* want) {
    return fbtrca::ValidationError("config key \"" + key + "\" must be " + want);
  }

  json cfg_;
  std::set<std::string> consumed_;
};

fbtrca::CvConfig parse_cv(ConfigReader& r) {
  fbtrca::CvConfig cfg;
  cfg.outer_folds = r.integer("folds", cfg.outer_folds);
  cfg.inner_folds = r.integer("inner_folds", cfg.inner_folds);
  cfg.seed = r.seed("seed", cfg.seed);
  cfg.shuffle = r.boolean("shuffle", cfg.shuffle);
  cfg.normalize = r.boolean("normalize", cfg.normalize);
  cfg.n_vec = r.integer("n_vec", cfg.n_vec);
  cfg.validate();
  // Accepted for interface stability; execution is serial, and results are
  // independent of the value by construction, so it is validated and then
  // kept out of the config echo.
  const int jobs = r.integer("jobs", 1);
  if (jobs < 1) throw fbtrca::ValidationError("jobs must be >= 1");
  return cfg;
}

json cv_echo(const fbtrca::CvConfig& cfg) {
  json j;
  j["folds"] = cfg.outer_folds;
  j["inner_folds"] = cfg.inner_folds;
  j["seed"] = cfg.seed;
  j["shuffle"] = cfg.shuffle;
  j["normalize"] = cfg.normalize;
  j["n_vec"] = cfg.n_vec;
  return j;
}

std::vector<fbtrca::BandSpec> parse_grid(ConfigReader& r) {
  const json g = r.raw("grid");
  if (g.is_null()) return fbtrca::make_shifted_grid();
  return fbtrca::bands_from_json(g.dump());
}

json grid_echo(const std::vector<fbtrca::BandSpec>& bands) {
  return json::parse(fbtrca::bands_to_json(bands));
}

const fbt_dataset* require(const fbt_dataset* d) {
  if (!d) throw fbtrca::ValidationError("dataset handle is null");
  return d;
}

const char* require(const char* s, const char* what) {
  if (!s || !*s) throw fbtrca::ValidationError(std::string(what) + " must not be empty");
  return s;
}

json fit_params_json(const fbtrca::GaussianFitParams& p) {
  json j;
  j["a"] = p.a;
  j["b"] = p.b;
  j["c"] = p.c;
  j["d"] = p.d;
  return j;
}

}  // namespace

extern "C" {

const char* fbt_version(void) { return "0.1.0"; }

const char* fbt_last_error(void) { return g_last_error.c_str(); }

void fbt_string_free(char* s) { std::free(s); }

int fbt_synth(const char* config_json, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "output directory");
    ConfigReader r(config_json);
    fbtrca::SynthSpec spec;
    spec.n_channels = r.integer("channels", spec.n_channels);
    spec.n_samples = r.integer("samples", spec.n_samples);
    spec.n_trials = r.integer("trials", spec.n_trials);
    spec.fs = r.number("fs", spec.fs);
    spec.snr = r.number("snr", spec.snr);
    spec.seed = r.seed("seed", spec.seed);
    spec.template_low_hz = r.number("template_low_hz", spec.template_low_hz);
    spec.template_high_hz = r.number("template_high_hz", spec.template_high_hz);
    spec.a1 = r.numbers("a1");
    spec.a2 = r.numbers("a2");
    const std::string format = r.text("format", "binary");
    r.finish();

    fbtrca::EpochFormat fmt;
    if (format == "binary") {
      fmt = fbtrca::EpochFormat::packed_binary;
    } else if (format == "csv") {
      fmt = fbtrca::EpochFormat::csv_dir;
    } else {
      throw fbtrca::ValidationError("format must be \"binary\" or \"csv\"");
    }

    const fbtrca::SynthResult result = fbtrca::generate(spec);
    fbtrca::save_dataset(fbtrca::Dataset{result.movement, result.rest}, out_dir, fmt);

    std::ofstream truth(std::string(out_dir) + "/truth.json", std::ios::binary);
    if (!truth) throw fbtrca::RuntimeError(std::string("cannot write ") + out_dir + "/truth.json");
    truth << result.truth.to_json();
  });
}

int fbt_dataset_open(const char* dir, fbt_dataset** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(dir, "dataset directory");
    if (!out) throw fbtrca::ValidationError("output handle is null");
    auto handle = std::make_unique<fbt_dataset>();
    handle->data = fbtrca::load_dataset(dir);
    handle->dir = dir;
    *out = handle.release();
  });
}

void fbt_dataset_close(fbt_dataset* d) { delete d; }

int fbt_dataset_info(const fbt_dataset* d, char** json_out) {
  if (json_out) *json_out = nullptr;
  return guarded([&] {
    require(d);
    if (!json_out) throw fbtrca::ValidationError("output pointer is null");
    const fbtrca::EpochSet& m = d->data.movement;
    json j;
    j["dir"] = d->dir;
    j["fs"] = m.fs;
    j["n_channels"] = m.n_channels();
    j["n_samples"] = m.n_samples();
    j["movement_trials"] = m.n_trials();
    j["rest_trials"] = d->data.rest.n_trials();
    j["window"] = {m.window.first, m.window.second};
    j["channel_names"] = m.channel_names;
    *json_out = dup_string(j.dump(2) + "\n");
  });
}

int fbt_bench(const fbt_dataset* d, const char* config_json, char** json_out) {
  if (json_out) *json_out = nullptr;
  return guarded([&] {
    require(d);
    if (!json_out) throw fbtrca::ValidationError("output pointer is null");
    ConfigReader r(config_json);
    const std::vector<std::string> method_names =
        r.texts("methods", {"strca2", "cvt", "fbtrca-svm"});
    if (method_names.empty()) throw fbtrca::ValidationError("methods list is empty");
    const fbtrca::Selector selector =
        fbtrca::selector_from_string(r.text("selector", "mrmr"));
    fbtrca::ArrangementPlan plan;
    plan.type = fbtrca::arrangement_from_string(r.text("arrangement", "type2"));
    plan.k1 = r.integer("k1", plan.k1);
    plan.k2 = r.integer("k2", plan.k2);
    const std::vector<fbtrca::BandSpec> grid = parse_grid(r);
    const fbtrca::CvConfig cfg = parse_cv(r);
    const std::string csv_path = r.text("csv_path", "");
    r.finish();

    std::vector<fbtrca::BenchMethod> methods;
    for (const std::string& name : method_names)
      methods.push_back(fbtrca::bench_method_from_string(name));

    const fbtrca::BandSpec strca1_band{0.5, 10.0, fbtrca::RangeSetting::custom, 0};
    const fbtrca::BandSpec strca2_band{0.05, 10.0, fbtrca::RangeSetting::custom, 0};

    std::optional<fbtrca::FbtrcaFeatures> features;  // shared by the fbtrca variants
    std::vector<fbtrca::BenchmarkResult> results;
    for (fbtrca::BenchMethod method : methods) {
      switch (method) {
        case fbtrca::BenchMethod::strca1: {
          fbtrca::BenchmarkResult res =
              fbtrca::run_strca(d->data.movement, d->data.rest, strca1_band, cfg, nullptr);
          res.method = fbtrca::BenchMethod::strca1;
          results.push_back(std::move(res));
          break;
        }
        case fbtrca::BenchMethod::strca2: {
          fbtrca::BenchmarkResult res =
              fbtrca::run_strca(d->data.movement, d->data.rest, strca2_band, cfg, nullptr);
          res.method = fbtrca::BenchMethod::strca2;
          results.push_back(std::move(res));
          break;
        }
        case fbtrca::BenchMethod::cvt:
          results.push_back(fbtrca::run_cvt(d->data.movement, d->data.rest, grid, cfg, nullptr));
          break;
        default: {
          if (!features)
            features = fbtrca::fbtrca_fold_features(d->data.movement, d->data.rest, grid, cfg,
                                                    nullptr);
          fbtrca::ClassifierKind kind = fbtrca::ClassifierKind::svm_linear;
          if (method == fbtrca::BenchMethod::fbtrca_lda) kind = fbtrca::ClassifierKind::lda;
          if (method == fbtrca::BenchMethod::fbtrca_nn) kind = fbtrca::ClassifierKind::nn;
          results.push_back(fbtrca::fbtrca_classify(*features, selector, plan, kind, cfg));
          break;
        }
      }
    }

    json echo = cv_echo(cfg);
    echo["command"] = "bench";
    echo["version"] = fbt_version();
    echo["dataset"] = d->dir;
    echo["methods"] = method_names;
    echo["selector"] = fbtrca::to_string(selector);
    echo["arrangement"] = fbtrca::to_string(plan.type);
    echo["k1"] = plan.k1;
    echo["k2"] = plan.k2;
    echo["grid"] = grid_echo(grid);
    if (!csv_path.empty()) fbtrca::write_results_csv(results, csv_path);
    *json_out = dup_string(fbtrca::results_to_json(results, echo.dump()));
  });
}

int fbt_sweep(const fbt_dataset* d, const char* config_json, char** json_out) {
  if (json_out) *json_out = nullptr;
  return guarded([&] {
    require(d);
    if (!json_out) throw fbtrca::ValidationError("output pointer is null");
    ConfigReader r(config_json);
    std::vector<std::string> selector_names = r.texts("selectors", {});
    if (selector_names.empty())
      for (fbtrca::Selector s : fbtrca::all_selectors()) selector_names.push_back(to_string(s));
    const std::vector<std::string> classifier_names =
        r.texts("classifiers", {"lda", "svm", "nn"});
    const int k1_max = r.integer("k1_max", 5);
    const int k2_max = r.integer("k2_max", 30);
    const std::vector<fbtrca::BandSpec> grid = parse_grid(r);
    const fbtrca::CvConfig cfg = parse_cv(r);
    const std::string csv_path = r.text("csv_path", "");
    r.finish();

    std::vector<fbtrca::Selector> selectors;
    for (const std::string& name : selector_names)
      selectors.push_back(fbtrca::selector_from_string(name));
    std::vector<fbtrca::ClassifierKind> classifiers;
    for (const std::string& name : classifier_names)
      classifiers.push_back(fbtrca::classifier_from_string(name));

    const fbtrca::FbtrcaFeatures features =
        fbtrca::fbtrca_fold_features(d->data.movement, d->data.rest, grid, cfg, nullptr);
    const fbtrca::SweepResult sweep =
        fbtrca::run_sweep(features, selectors, classifiers, k1_max, k2_max, cfg);

    json echo = cv_echo(cfg);
    echo["command"] = "sweep";
    echo["version"] = fbt_version();
    echo["dataset"] = d->dir;
    echo["selectors"] = selector_names;
    echo["classifiers"] = classifier_names;
    echo["k1_max"] = k1_max;
    echo["k2_max"] = k2_max;
    echo["grid"] = grid_echo(grid);
    if (!csv_path.empty()) fbtrca::write_sweep_csv(sweep, csv_path);
    *json_out = dup_string(fbtrca::sweep_to_json(sweep, echo.dump()));
  });
}

int fbt_compare_settings(const fbt_dataset* d, const char* config_json, char** json_out) {
  if (json_out) *json_out = nullptr;
  return guarded([&] {
    require(d);
    if (!json_out) throw fbtrca::ValidationError("output pointer is null");
    ConfigReader r(config_json);
    const std::vector<std::string> setting_names = r.texts("settings", {"M1", "M2", "M3"});
    if (setting_names.empty()) throw fbtrca::ValidationError("settings list is empty");
    const int m = r.integer("m", 10);
    const double f_min = r.number("f_min", 0.05);
    const double f_max = r.number("f_max", 10.0);
    const fbtrca::CvConfig cfg = parse_cv(r);
    const std::string csv_path = r.text("csv_path", "");
    r.finish();

    std::vector<fbtrca::RangeSetting> settings;
    for (const std::string& name : setting_names)
      settings.push_back(fbtrca::range_setting_from_string(name));

    const auto table = fbtrca::compare_settings(d->data.movement, d->data.rest, settings, m,
                                                f_min, f_max, cfg, nullptr);

    json echo = cv_echo(cfg);
    echo["command"] = "compare-settings";
    echo["version"] = fbt_version();
    echo["dataset"] = d->dir;
    echo["settings"] = setting_names;
    echo["m"] = m;
    echo["f_min"] = f_min;
    echo["f_max"] = f_max;
    if (!csv_path.empty()) fbtrca::write_settings_csv(table, csv_path);
    *json_out = dup_string(fbtrca::settings_table_json(table, echo.dump()));
  });
}

int fbt_export_features(const fbt_dataset* d, const char* config_json, const char* out_csv) {
  return guarded([&] {
    require(d);
    require(out_csv, "output path");
    ConfigReader r(config_json);
    const std::vector<fbtrca::BandSpec> grid = parse_grid(r);
    fbtrca::CvConfig cfg;
    cfg.normalize = r.boolean("normalize", cfg.normalize);
    cfg.n_vec = r.integer("n_vec", cfg.n_vec);
    r.finish();

    const fbtrca::FeatureMatrix features =
        fbtrca::full_dataset_features(d->data.movement, d->data.rest, grid, cfg);
    fbtrca::export_features(features, out_csv);
  });
}

int fbt_onset(const char* config_json, char** json_out) {
  if (json_out) *json_out = nullptr;
  return guarded([&] {
    if (!json_out) throw fbtrca::ValidationError("output pointer is null");
    ConfigReader r(config_json);
    const std::string kind_name = r.text("kind", "limb");
    const int n_trials = r.integer("trials", 10);
    const double onset_s = r.number("onset_s", 2.0);
    const double fs = r.number("fs", 256.0);
    const double duration_s = r.number("duration_s", 5.0);
    const double noise_sd = r.number("noise_sd", 0.01);
    const std::uint64_t seed = r.seed("seed", 1);
    const double beep_time_s = r.number("beep_time_s", 0.5);
    const std::string csv_path = r.text("csv_path", "");
    r.finish();

    if (n_trials < 1) throw fbtrca::ValidationError("trials must be >= 1");
    const fbtrca::TrajectoryKind kind = fbtrca::trajectory_kind_from_string(kind_name);

    std::vector<fbtrca::OnsetResult> results;
    json rows = json::array();
    for (int j = 0; j < n_trials; ++j) {
      fbtrca::Trajectory t = fbtrca::generate_trajectory(kind, onset_s, fs, noise_sd,
                                                         fbtrca::derive_seed(seed, j), duration_s);
      t.trial_id = j;
      fbtrca::OnsetResult res;
      switch (kind) {
        case fbtrca::TrajectoryKind::limb: res = fbtrca::locate_onset_limb(t); break;
        case fbtrca::TrajectoryKind::hand: res = fbtrca::locate_onset_fit(t); break;
        case fbtrca::TrajectoryKind::rest: res = fbtrca::fake_onset_rest(t, beep_time_s); break;
      }
      results.push_back(res);

      json row;
      row["trial_id"] = res.trial_id;
      row["status"] = fbtrca::to_string(res.status);
      if (res.onset_index) {
        row["onset_index"] = *res.onset_index;
        row["onset_seconds"] = static_cast<double>(*res.onset_index) / fs;
      } else {
        row["onset_index"] = nullptr;
        row["onset_seconds"] = nullptr;
      }
      row["fit"] = res.fit_params ? fit_params_json(*res.fit_params) : json();
      rows.push_back(row);
    }

    if (!csv_path.empty()) fbtrca::write_onset_report(csv_path, results);

    json echo;
    echo["command"] = "onset";
    echo["version"] = fbt_version();
    echo["kind"] = kind_name;
    echo["trials"] = n_trials;
    echo["onset_s"] = onset_s;
    echo["fs"] = fs;
    echo["duration_s"] = duration_s;
    echo["noise_sd"] = noise_sd;
    echo["seed"] = seed;
    echo["beep_time_s"] = beep_time_s;

    json root;
    root["config"] = echo;
    root["results"] = rows;
    *json_out = dup_string(root.dump(2) + "\n");
  });
}

}  // extern "C"
