#ifndef FBTRCA_H
#define FBTRCA_H

/* C interface to the pre-movement EEG decoding library. Every fallible call
 * returns a status code and leaves a message for fbt_last_error() on failure;
 * strings handed out through out-parameters are heap copies released with
 * fbt_string_free(). Configuration goes in as JSON object text (NULL or "{}"
 * for defaults); results come back as JSON documents that embed the
 * effective configuration. */

#ifdef __cplusplus
extern "C" {
#endif

#define FBT_OK 0
#define FBT_ERR_VALIDATION 2
#define FBT_ERR_RUNTIME 3

/* An opened dataset: one movement and one rest epoch set. */
typedef struct fbt_dataset fbt_dataset;

const char* fbt_version(void);

/* Message of the most recent failing call on this thread, or "" when the
 * most recent call succeeded. Owned by the library. */
const char* fbt_last_error(void);

/* Releases a string returned through an out-parameter. NULL is a no-op. */
void fbt_string_free(char* s);

/* Generates a synthetic dataset into out_dir: movement/ and rest/ epoch
 * directories plus truth.json with the planted ground truth. Config keys:
 * channels, samples, trials, fs, snr, seed, template_low_hz,
 * template_high_hz, a1, a2, format ("binary"|"csv"). */
int fbt_synth(const char* config_json, const char* out_dir);

int fbt_dataset_open(const char* dir, fbt_dataset** out);
void fbt_dataset_close(fbt_dataset* d);

/* Shape and metadata of the dataset as a JSON object. */
int fbt_dataset_info(const fbt_dataset* d, char** json_out);

/* Cross-validated benchmark. Config keys: methods (array drawn from
 * "strca1", "strca2", "cvt", "fbtrca-lda", "fbtrca-svm", "fbtrca-nn"),
 * selector, arrangement, k1, k2, grid, folds, inner_folds, seed, shuffle,
 * normalize, n_vec, jobs, csv_path (optional summary file). */
int fbt_bench(const fbt_dataset* d, const char* config_json, char** json_out);

/* Accuracy-vs-K sweep over selection sizes, selectors, and classifiers.
 * Config keys: selectors, classifiers, k1_max, k2_max, grid, folds, seed,
 * shuffle, normalize, n_vec, jobs, csv_path. */
int fbt_sweep(const fbt_dataset* d, const char* config_json, char** json_out);

/* Per-band accuracy for the frequency-range settings. Config keys: settings
 * (array drawn from "M1", "M2", "M3"), m, f_min, f_max, folds, seed,
 * shuffle, normalize, n_vec, jobs, csv_path. */
int fbt_compare_settings(const fbt_dataset* d, const char* config_json, char** json_out);

/* Trains the spatial filters on the full dataset and writes every trial's
 * per-band correlation features to out_csv. Config keys: grid, normalize,
 * n_vec. */
int fbt_export_features(const fbt_dataset* d, const char* config_json, const char* out_csv);

/* Generates labeled synthetic trajectories and runs the matching onset
 * locator. Config keys: kind ("limb"|"hand"|"rest"), trials, onset_s, fs,
 * duration_s, noise_sd, seed, beep_time_s, csv_path (optional report file).
 * Returns a JSON report with one record per trajectory. */
int fbt_onset(const char* config_json, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* FBTRCA_H */
