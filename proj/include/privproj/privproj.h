/*
 * privproj: privacy-aware linear projections (PCA, DCA, MDR, RUCA, random)
 * and utility/privacy trade-off evaluation.
 *
 * C interface. Objects are opaque handles created by the library and released
 * with the matching *_free function. Every fallible call returns a
 * pp_status; on failure a human-readable message for the calling thread is
 * available from pp_last_error().
 */
#ifndef PRIVPROJ_PRIVPROJ_H
#define PRIVPROJ_PRIVPROJ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PRIVPROJ_BUILDING_LIBRARY)
#    define PP_API __declspec(dllexport)
#  else
#    define PP_API __declspec(dllimport)
#  endif
#else
#  define PP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pp_status {
  PP_OK = 0,
  PP_ERR_INVALID_ARGUMENT = 1,
  PP_ERR_NOT_POSITIVE_DEFINITE = 2,
  PP_ERR_NO_CONVERGENCE = 3,
  PP_ERR_INVALID_K = 4,
  PP_ERR_LENGTH_MISMATCH = 5,
  PP_ERR_EMPTY_CLASS = 6,
  PP_ERR_WEIGHT_MISMATCH = 7,
  PP_ERR_RANK_DEFICIENT = 8,
  PP_ERR_DIMENSION_MISMATCH = 9,
  PP_ERR_EMPTY_TRAIN_CLASS = 10,
  PP_ERR_PARSE = 11,
  PP_ERR_UNKNOWN_CATEGORY = 12,
  PP_ERR_IO = 13,
  PP_ERR_CONFIG = 14,
  PP_ERR_INTERNAL = 15
} pp_status;

/* Numerical failures (as opposed to bad input): NOT_POSITIVE_DEFINITE,
 * NO_CONVERGENCE, RANK_DEFICIENT, INTERNAL. */
PP_API int pp_status_is_numerical(pp_status status);
PP_API const char* pp_status_name(pp_status status);
/* Message of the last failure on this thread; empty string if none. */
PP_API const char* pp_last_error(void);
PP_API const char* pp_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
PP_API void pp_string_free(char* s);

/* ------------------------------------------------------------ datasets */

/* Feature matrix plus named label sets. */
typedef struct pp_dataset pp_dataset;

typedef struct pp_load_options {
  /* Group Adult marital-status values into three classes in this column
   * (NULL: leave the schema as written). */
  const char* census_marital_column;
} pp_load_options;

/* Loads a headered CSV according to a JSON column schema. `options` may be
 * NULL. rows_read / rows_dropped may be NULL. */
PP_API pp_status pp_dataset_load_csv(const char* csv_path, const char* schema_path,
                                     const pp_load_options* options, pp_dataset** out,
                                     size_t* rows_read, size_t* rows_dropped);

/* Reads a bundle written by pp_dataset_save (PREFIX.features.csv,
 * PREFIX.label.<name>.csv, PREFIX.meta.json). */
PP_API pp_status pp_dataset_open(const char* prefix, pp_dataset** out);
PP_API pp_status pp_dataset_save(const pp_dataset* ds, const char* prefix);
PP_API void pp_dataset_free(pp_dataset* ds);

PP_API size_t pp_dataset_features(const pp_dataset* ds);
PP_API size_t pp_dataset_samples(const pp_dataset* ds);
PP_API size_t pp_dataset_label_count(const pp_dataset* ds);
/* NULL when index is out of range. Valid until the dataset is freed. */
PP_API const char* pp_dataset_label_name(const pp_dataset* ds, size_t index);
/* Writes per-class sample counts for a label into counts[0..capacity). The
 * number of classes is returned through n_classes. */
PP_API pp_status pp_dataset_class_counts(const pp_dataset* ds, const char* label, size_t* counts,
                                         size_t capacity, size_t* n_classes);

/* Undersamples in place so every class of the named labels has equal size.
 * joint != 0 balances on the cross product of the labels, otherwise one
 * label after another in the given order. */
PP_API pp_status pp_dataset_balance(pp_dataset* ds, const char* const* labels, size_t n_labels,
                                    int joint, uint64_t seed);

/* Per-class holdout on a label: floor(fraction * N_c) samples of every class
 * go to *held_out, the rest to *kept. Sample order is preserved in both. */
PP_API pp_status pp_dataset_holdout(const pp_dataset* ds, const char* label, double fraction, uint64_t seed,
                                    pp_dataset** kept, pp_dataset** held_out);

/* ------------------------------------------------------------ models */

typedef struct pp_model pp_model;

typedef enum pp_method { PP_PCA = 0, PP_DCA = 1, PP_MDR = 2, PP_RUCA = 3, PP_RANDOM = 4 } pp_method;

typedef struct pp_fit_params {
  pp_method method;
  size_t k;
  /* NaN selects the scale-relative defaults. */
  double rho;
  double rho_prime;
  const char* utility_label;
  const char* const* privacy_labels;
  size_t n_privacy;
  /* One weight per privacy label (RUCA); NULL means all zero. */
  const double* privacy_weights;
  uint64_t seed;
} pp_fit_params;

/* Fills defaults: DCA, k = 1, rho = rho_prime = NaN, no labels, seed 0. */
PP_API void pp_fit_params_init(pp_fit_params* params);
PP_API pp_status pp_method_parse(const char* name, pp_method* out);

PP_API pp_status pp_fit(const pp_dataset* ds, const pp_fit_params* params, pp_model** out);
PP_API void pp_model_free(pp_model* model);
PP_API size_t pp_model_input_dim(const pp_model* model);
PP_API size_t pp_model_output_dim(const pp_model* model);
/* Eigenvalues in descending order; capacity must be >= output dim. */
PP_API pp_status pp_model_eigenvalues(const pp_model* model, double* out, size_t capacity);
/* Row-major M x K copy of W; capacity must be >= M * K. */
PP_API pp_status pp_model_weights(const pp_model* model, double* out, size_t capacity);
PP_API pp_status pp_model_save(const pp_model* model, const char* path);
PP_API pp_status pp_model_load(const char* path, pp_model** out);
PP_API pp_status pp_model_to_json(const pp_model* model, char** json_out);

/* Z = W^T (X - training mean); labels are carried over. */
PP_API pp_status pp_project(const pp_model* model, const pp_dataset* ds, pp_dataset** out);

/* Largest principal angle (radians) between the spans of two models' W. */
PP_API pp_status pp_model_subspace_angle(const pp_model* a, const pp_model* b, double* radians);

/* ------------------------------------------------------------ evaluation */

typedef enum pp_classifier { PP_KNN = 0, PP_NEAREST_CENTROID = 1 } pp_classifier;

/* Trains on `train`, scores `test` on the named label. Writes accuracy and,
 * if report_json is non-NULL, a JSON report {accuracy, n_test, confusion}. */
PP_API pp_status pp_evaluate(const pp_dataset* train, const pp_dataset* test, const char* label,
                             pp_classifier kind, int k_neighbors, double* accuracy, char** report_json);

PP_API double pp_performance(double acc_u, double acc_p, double beta);

/* ------------------------------------------------------------ sweeps */

typedef struct pp_sweep_summary {
  size_t cells;
  size_t failed_cells;
} pp_sweep_summary;

/* Runs the sweep described by the JSON config at config_path. The seed
 * overrides any seed in the file. privacy_test may be NULL (use test).
 * threads = 0 picks the hardware concurrency. Writes tradeoff.csv,
 * tradeoff.svg and manifest.json into out_dir (created if missing). */
PP_API pp_status pp_sweep_run(const char* config_path, const pp_dataset* train, const pp_dataset* test,
                              const pp_dataset* privacy_test, uint64_t seed, unsigned threads,
                              const char* out_dir, pp_sweep_summary* summary);

/* Renders a trade-off CSV as SVG. priced_max != 0 plots against the worst
 * privacy task instead of the first one. */
PP_API pp_status pp_plot(const char* tradeoff_csv, const char* svg_path, int priced_max);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PRIVPROJ_PRIVPROJ_H */
