// Command-line front end. Everything computational lives behind the C API in
// fbtrca/fbtrca.h; this file only assembles JSON configs (precedence: flags
// over config file over defaults), calls the library, and writes the returned
// documents into the user's output directory.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbtrca/fbtrca.h"

using nlohmann::json;

namespace {

constexpr int kExitValidation = FBT_ERR_VALIDATION;
constexpr int kExitRuntime = FBT_ERR_RUNTIME;

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitValidation, "cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CliError(kExitValidation, "malformed config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw CliError(kExitValidation, "config file must hold a JSON object");
  return j;
}

void check(int status) {
  if (status != FBT_OK) throw CliError(status, fbt_last_error());
}

struct StringOut {
  char* value = nullptr;
  ~StringOut() { fbt_string_free(value); }
};

struct DatasetHandle {
  fbt_dataset* value = nullptr;
  ~DatasetHandle() { fbt_dataset_close(value); }
};

std::string prepare_out_dir(const std::string& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw CliError(kExitRuntime, "cannot create output directory " + out);
  return out;
}

void write_text(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kExitRuntime, "cannot write " + path);
  out << text;
  if (!out) throw CliError(kExitRuntime, "cannot write " + path);
  std::cout << "wrote " << path << "\n";
}

// Options shared by the dataset-consuming subcommands. Each flag only lands
// in the config when the user actually passed it, so config-file values are
// preserved underneath.
struct CvOptions {
  int folds = 10;
  int inner_folds = 9;
  std::uint64_t seed = 1;
  bool no_shuffle = false;
  bool no_normalize = false;
  int n_vec = 3;
  int jobs = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--folds", folds, "Outer cross-validation folds");
    cmd->add_option("--inner-folds", inner_folds, "Inner folds for the subband search");
    cmd->add_option("--seed", seed, "Master seed; all randomness derives from it");
    cmd->add_flag("--no-shuffle", no_shuffle, "Deal folds without shuffling");
    cmd->add_flag("--no-normalize", no_normalize, "Skip per-trial z-score normalization");
    cmd->add_option("--n-vec", n_vec, "Eigenvectors kept per class");
    cmd->add_option("--jobs", jobs, "Worker bound; results do not depend on it");
  }

  void merge(const CLI::App* cmd, json& cfg) const {
    if (cmd->count("--folds")) cfg["folds"] = folds;
    if (cmd->count("--inner-folds")) cfg["inner_folds"] = inner_folds;
    if (cmd->count("--seed")) cfg["seed"] = seed;
    if (cmd->count("--no-shuffle")) cfg["shuffle"] = false;
    if (cmd->count("--no-normalize")) cfg["normalize"] = false;
    if (cmd->count("--n-vec")) cfg["n_vec"] = n_vec;
    if (cmd->count("--jobs")) cfg["jobs"] = jobs;
  }
};

int dispatch(int argc, char** argv) {
  CLI::App app{"Pre-movement EEG decoding: filter-bank TRCA benchmarks on epoch datasets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fbt_version());

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  std::string synth_out, synth_config, synth_format;
  int channels = 11, samples = 512, trials = 60;
  double fs = 256.0, snr = 1.0, template_low = 0.2, template_high = 0.9;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--config", synth_config, "JSON config file");
  synth->add_option("--channels", channels, "EEG channels");
  synth->add_option("--samples", samples, "Samples per trial");
  synth->add_option("--trials", trials, "Trials per class");
  synth->add_option("--fs", fs, "Sampling rate in Hz");
  synth->add_option("--snr", snr, "Component-to-noise amplitude ratio");
  synth->add_option("--seed", synth_seed, "Master seed");
  synth->add_option("--template-low", template_low, "Component band low edge in Hz");
  synth->add_option("--template-high", template_high, "Component band high edge in Hz");
  synth->add_option("--format", synth_format, "Payload format: binary or csv");

  // onset
  auto* onset = app.add_subcommand("onset", "Locate onsets on synthetic trajectories");
  std::string onset_out, onset_config, onset_kind;
  int onset_trials = 10;
  double onset_s = 2.0, onset_fs = 256.0, onset_duration = 5.0, onset_noise = 0.01, beep = 0.5;
  std::uint64_t onset_seed = 1;
  onset->add_option("--out", onset_out, "Output directory")->required();
  onset->add_option("--config", onset_config, "JSON config file");
  onset->add_option("--kind", onset_kind, "Trajectory kind: limb, hand, or rest");
  onset->add_option("--trials", onset_trials, "Number of trajectories");
  onset->add_option("--onset", onset_s, "True onset time in seconds");
  onset->add_option("--fs", onset_fs, "Sampling rate in Hz");
  onset->add_option("--duration", onset_duration, "Trajectory length in seconds");
  onset->add_option("--noise-sd", onset_noise, "Additive noise standard deviation");
  onset->add_option("--seed", onset_seed, "Master seed");
  onset->add_option("--beep", beep, "Cue beep time for rest trials, seconds");

  // bench
  auto* bench = app.add_subcommand("bench", "Cross-validated accuracy benchmark");
  std::string bench_data, bench_out, bench_config, bench_selector, bench_arrangement;
  std::vector<std::string> bench_methods;
  int bench_k1 = 3, bench_k2 = 13;
  CvOptions bench_cv;
  bench->add_option("--data", bench_data, "Dataset directory")->required();
  bench->add_option("--out", bench_out, "Output directory")->required();
  bench->add_option("--config", bench_config, "JSON config file");
  bench->add_option("--methods", bench_methods, "Comma-separated method list")->delimiter(',');
  bench->add_option("--selector", bench_selector, "Feature selector");
  bench->add_option("--arrangement", bench_arrangement, "Feature arrangement: type1 or type2");
  bench->add_option("--k1", bench_k1, "Features kept per coefficient kind (Type 1)");
  bench->add_option("--k2", bench_k2, "Features kept from the whole pool (Type 2)");
  bench_cv.attach(bench);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Accuracy-vs-K sweep over selectors and classifiers");
  std::string sweep_data, sweep_out, sweep_config;
  std::vector<std::string> sweep_selectors, sweep_classifiers;
  int k1_max = 5, k2_max = 30;
  CvOptions sweep_cv;
  sweep->add_option("--data", sweep_data, "Dataset directory")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--config", sweep_config, "JSON config file");
  sweep->add_option("--selectors", sweep_selectors, "Comma-separated selector list")
      ->delimiter(',');
  sweep->add_option("--classifiers", sweep_classifiers, "Comma-separated classifier list")
      ->delimiter(',');
  sweep->add_option("--k1-max", k1_max, "Largest per-kind selection size");
  sweep->add_option("--k2-max", k2_max, "Largest pool selection size");
  sweep_cv.attach(sweep);

  // compare-settings
  auto* settings = app.add_subcommand("compare-settings",
                                      "Per-band accuracy for the frequency-range settings");
  std::string set_data, set_out, set_config;
  std::vector<std::string> set_names;
  int set_m = 10;
  double f_min = 0.05, f_max = 10.0;
  CvOptions set_cv;
  settings->add_option("--data", set_data, "Dataset directory")->required();
  settings->add_option("--out", set_out, "Output directory")->required();
  settings->add_option("--config", set_config, "JSON config file");
  settings->add_option("--settings", set_names, "Comma-separated settings (M1,M2,M3)")
      ->delimiter(',');
  settings->add_option("--m", set_m, "Subbands per setting");
  settings->add_option("--f-min", f_min, "Lowest band edge in Hz");
  settings->add_option("--f-max", f_max, "Highest band edge in Hz");
  set_cv.attach(settings);

  // export-features
  auto* exportf = app.add_subcommand("export-features",
                                     "Write every trial's per-band correlation features as CSV");
  std::string exp_data, exp_out, exp_config;
  bool exp_no_normalize = false;
  int exp_n_vec = 3;
  exportf->add_option("--data", exp_data, "Dataset directory")->required();
  exportf->add_option("--out", exp_out, "Output directory")->required();
  exportf->add_option("--config", exp_config, "JSON config file");
  exportf->add_flag("--no-normalize", exp_no_normalize, "Skip per-trial z-score normalization");
  exportf->add_option("--n-vec", exp_n_vec, "Eigenvectors kept per class");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the parse error
    return rc == 0 ? 0 : kExitValidation;
  }

  if (synth->parsed()) {
    json cfg = load_config_file(synth_config);
    if (synth->count("--channels")) cfg["channels"] = channels;
    if (synth->count("--samples")) cfg["samples"] = samples;
    if (synth->count("--trials")) cfg["trials"] = trials;
    if (synth->count("--fs")) cfg["fs"] = fs;
    if (synth->count("--snr")) cfg["snr"] = snr;
    if (synth->count("--seed")) cfg["seed"] = synth_seed;
    if (synth->count("--template-low")) cfg["template_low_hz"] = template_low;
    if (synth->count("--template-high")) cfg["template_high_hz"] = template_high;
    if (synth->count("--format")) cfg["format"] = synth_format;
    check(fbt_synth(cfg.dump().c_str(), prepare_out_dir(synth_out).c_str()));
    std::cout << "wrote " << synth_out << "\n";
    return 0;
  }

  if (onset->parsed()) {
    const std::string dir = prepare_out_dir(onset_out);
    json cfg = load_config_file(onset_config);
    if (onset->count("--kind")) cfg["kind"] = onset_kind;
    if (onset->count("--trials")) cfg["trials"] = onset_trials;
    if (onset->count("--onset")) cfg["onset_s"] = onset_s;
    if (onset->count("--fs")) cfg["fs"] = onset_fs;
    if (onset->count("--duration")) cfg["duration_s"] = onset_duration;
    if (onset->count("--noise-sd")) cfg["noise_sd"] = onset_noise;
    if (onset->count("--seed")) cfg["seed"] = onset_seed;
    if (onset->count("--beep")) cfg["beep_time_s"] = beep;
    cfg["csv_path"] = dir + "/onset.csv";
    StringOut out;
    check(fbt_onset(cfg.dump().c_str(), &out.value));
    write_text(dir + "/onset.json", out.value);
    std::cout << "wrote " << dir << "/onset.csv\n";
    return 0;
  }

  // Everything below consumes a dataset.
  DatasetHandle data;
  auto open_dataset = [&](const std::string& path) {
    check(fbt_dataset_open(path.c_str(), &data.value));
  };

  if (bench->parsed()) {
    const std::string dir = prepare_out_dir(bench_out);
    open_dataset(bench_data);
    json cfg = load_config_file(bench_config);
    if (bench->count("--methods")) cfg["methods"] = bench_methods;
    if (bench->count("--selector")) cfg["selector"] = bench_selector;
    if (bench->count("--arrangement")) cfg["arrangement"] = bench_arrangement;
    if (bench->count("--k1")) cfg["k1"] = bench_k1;
    if (bench->count("--k2")) cfg["k2"] = bench_k2;
    bench_cv.merge(bench, cfg);
    cfg["csv_path"] = dir + "/results.csv";
    StringOut out;
    check(fbt_bench(data.value, cfg.dump().c_str(), &out.value));
    write_text(dir + "/results.json", out.value);
    std::cout << "wrote " << dir << "/results.csv\n";
    return 0;
  }

  if (sweep->parsed()) {
    const std::string dir = prepare_out_dir(sweep_out);
    open_dataset(sweep_data);
    json cfg = load_config_file(sweep_config);
    if (sweep->count("--selectors")) cfg["selectors"] = sweep_selectors;
    if (sweep->count("--classifiers")) cfg["classifiers"] = sweep_classifiers;
    if (sweep->count("--k1-max")) cfg["k1_max"] = k1_max;
    if (sweep->count("--k2-max")) cfg["k2_max"] = k2_max;
    sweep_cv.merge(sweep, cfg);
    cfg["csv_path"] = dir + "/sweep.csv";
    StringOut out;
    check(fbt_sweep(data.value, cfg.dump().c_str(), &out.value));
    write_text(dir + "/sweep.json", out.value);
    std::cout << "wrote " << dir << "/sweep.csv\n";
    return 0;
  }

  if (settings->parsed()) {
    const std::string dir = prepare_out_dir(set_out);
    open_dataset(set_data);
    json cfg = load_config_file(set_config);
    if (settings->count("--settings")) cfg["settings"] = set_names;
    if (settings->count("--m")) cfg["m"] = set_m;
    if (settings->count("--f-min")) cfg["f_min"] = f_min;
    if (settings->count("--f-max")) cfg["f_max"] = f_max;
    set_cv.merge(settings, cfg);
    cfg["csv_path"] = dir + "/settings.csv";
    StringOut out;
    check(fbt_compare_settings(data.value, cfg.dump().c_str(), &out.value));
    write_text(dir + "/settings.json", out.value);
    std::cout << "wrote " << dir << "/settings.csv\n";
    return 0;
  }

  if (exportf->parsed()) {
    const std::string dir = prepare_out_dir(exp_out);
    open_dataset(exp_data);
    json cfg = load_config_file(exp_config);
    if (exportf->count("--no-normalize")) cfg["normalize"] = false;
    if (exportf->count("--n-vec")) cfg["n_vec"] = exp_n_vec;
    const std::string path = dir + "/features.csv";
    check(fbt_export_features(data.value, cfg.dump().c_str(), path.c_str()));
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
