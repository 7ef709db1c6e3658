#include "privproj/privproj.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "privproj/classify.hpp"
#include "privproj/dataio.hpp"
#include "privproj/error.hpp"
#include "privproj/experiment.hpp"
#include "privproj/model_json.hpp"
#include "privproj/projections.hpp"
#include "privproj/rng.hpp"

struct pp_dataset {
  privproj::LabeledData data;
};

struct pp_model {
  privproj::ProjectionModel model;
};

namespace {

using privproj::ErrorCode;

thread_local std::string g_last_error;

pp_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return PP_ERR_INVALID_ARGUMENT;
    case ErrorCode::NotPositiveDefinite: return PP_ERR_NOT_POSITIVE_DEFINITE;
    case ErrorCode::NoConvergence: return PP_ERR_NO_CONVERGENCE;
    case ErrorCode::InvalidK: return PP_ERR_INVALID_K;
    case ErrorCode::LengthMismatch: return PP_ERR_LENGTH_MISMATCH;
    case ErrorCode::EmptyClass: return PP_ERR_EMPTY_CLASS;
    case ErrorCode::WeightMismatch: return PP_ERR_WEIGHT_MISMATCH;
    case ErrorCode::RankDeficient: return PP_ERR_RANK_DEFICIENT;
    case ErrorCode::DimensionMismatch: return PP_ERR_DIMENSION_MISMATCH;
    case ErrorCode::EmptyTrainClass: return PP_ERR_EMPTY_TRAIN_CLASS;
    case ErrorCode::ParseError: return PP_ERR_PARSE;
    case ErrorCode::UnknownCategory: return PP_ERR_UNKNOWN_CATEGORY;
    case ErrorCode::IoError: return PP_ERR_IO;
    case ErrorCode::ConfigError: return PP_ERR_CONFIG;
  }
  return PP_ERR_INTERNAL;
}

// Runs `fn`, translating exceptions into a status and the thread's message.
template <class Fn>
pp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PP_OK;
  } catch (const privproj::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PP_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) privproj::fail(ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

privproj::Method to_method(pp_method m) {
  switch (m) {
    case PP_PCA: return privproj::Method::PCA;
    case PP_DCA: return privproj::Method::DCA;
    case PP_MDR: return privproj::Method::MDR;
    case PP_RUCA: return privproj::Method::RUCA;
    case PP_RANDOM: return privproj::Method::RANDOM;
  }
  privproj::fail(ErrorCode::InvalidArgument, fmt::format("unknown method id {}", static_cast<int>(m)));
}

}  // namespace

extern "C" {

int pp_status_is_numerical(pp_status status) {
  return status == PP_ERR_NOT_POSITIVE_DEFINITE || status == PP_ERR_NO_CONVERGENCE ||
         status == PP_ERR_RANK_DEFICIENT || status == PP_ERR_INTERNAL;
}

const char* pp_status_name(pp_status status) {
  switch (status) {
    case PP_OK: return "OK";
    case PP_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case PP_ERR_NOT_POSITIVE_DEFINITE: return "NotPositiveDefinite";
    case PP_ERR_NO_CONVERGENCE: return "NoConvergence";
    case PP_ERR_INVALID_K: return "InvalidK";
    case PP_ERR_LENGTH_MISMATCH: return "LengthMismatch";
    case PP_ERR_EMPTY_CLASS: return "EmptyClass";
    case PP_ERR_WEIGHT_MISMATCH: return "WeightMismatch";
    case PP_ERR_RANK_DEFICIENT: return "RankDeficient";
    case PP_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case PP_ERR_EMPTY_TRAIN_CLASS: return "EmptyTrainClass";
    case PP_ERR_PARSE: return "ParseError";
    case PP_ERR_UNKNOWN_CATEGORY: return "UnknownCategory";
    case PP_ERR_IO: return "IoError";
    case PP_ERR_CONFIG: return "ConfigError";
    case PP_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* pp_last_error(void) { return g_last_error.c_str(); }

const char* pp_version(void) { return PRIVPROJ_VERSION_STRING; }

void pp_string_free(char* s) { std::free(s); }

// ------------------------------------------------------------ datasets

pp_status pp_dataset_load_csv(const char* csv_path, const char* schema_path, const pp_load_options* options,
                              pp_dataset** out, size_t* rows_read, size_t* rows_dropped) {
  return guarded([&] {
    require(csv_path && schema_path && out, "null argument");
    *out = nullptr;
    auto schema = privproj::ColumnSchema::from_json_file(schema_path);
    if (options && options->census_marital_column) {
      auto* col = schema.find(options->census_marital_column);
      if (!col)
        privproj::fail(ErrorCode::ConfigError,
                       fmt::format("schema has no column '{}' to recode", options->census_marital_column));
      col->recode = "census_marital";
      col->categories = privproj::census_marital_groups();
      col->aliases.clear();
    }
    privproj::LoadReport report;
    auto ds = std::make_unique<pp_dataset>();
    ds->data = privproj::load_csv(std::string(csv_path), schema, &report);
    if (rows_read) *rows_read = report.rows_read;
    if (rows_dropped) *rows_dropped = report.rows_dropped;
    *out = ds.release();
  });
}

pp_status pp_dataset_open(const char* prefix, pp_dataset** out) {
  return guarded([&] {
    require(prefix && out, "null argument");
    *out = nullptr;
    auto ds = std::make_unique<pp_dataset>();
    ds->data = privproj::read_bundle(prefix);
    *out = ds.release();
  });
}

pp_status pp_dataset_save(const pp_dataset* ds, const char* prefix) {
  return guarded([&] {
    require(ds && prefix, "null argument");
    privproj::write_bundle(prefix, ds->data);
  });
}

void pp_dataset_free(pp_dataset* ds) { delete ds; }

size_t pp_dataset_features(const pp_dataset* ds) { return ds ? ds->data.dataset.features() : 0; }
size_t pp_dataset_samples(const pp_dataset* ds) { return ds ? ds->data.dataset.samples() : 0; }
size_t pp_dataset_label_count(const pp_dataset* ds) { return ds ? ds->data.labels.size() : 0; }

const char* pp_dataset_label_name(const pp_dataset* ds, size_t index) {
  if (!ds || index >= ds->data.labels.size()) return nullptr;
  return ds->data.labels[index].name.c_str();
}

pp_status pp_dataset_class_counts(const pp_dataset* ds, const char* label, size_t* counts, size_t capacity,
                                  size_t* n_classes) {
  return guarded([&] {
    require(ds && label, "null argument");
    const auto c = ds->data.label(label).labels.counts();
    if (n_classes) *n_classes = c.size();
    for (size_t i = 0; i < c.size() && i < capacity && counts; ++i) counts[i] = c[i];
  });
}

pp_status pp_dataset_balance(pp_dataset* ds, const char* const* labels, size_t n_labels, int joint, uint64_t seed) {
  return guarded([&] {
    require(ds && (labels || n_labels == 0), "null argument");
    std::vector<std::string> names(labels, labels + n_labels);
    ds->data = privproj::balance_on(ds->data, names, seed, joint != 0);
  });
}

pp_status pp_dataset_holdout(const pp_dataset* ds, const char* label, double fraction, uint64_t seed,
                             pp_dataset** kept, pp_dataset** held_out) {
  return guarded([&] {
    require(ds && label && kept && held_out, "null argument");
    *kept = nullptr;
    *held_out = nullptr;
    const auto [keep_idx, held_idx] = privproj::stratified_holdout(ds->data.label(label).labels, fraction, seed);
    auto k = std::make_unique<pp_dataset>();
    auto h = std::make_unique<pp_dataset>();
    k->data = ds->data.select(keep_idx);
    h->data = ds->data.select(held_idx);
    *kept = k.release();
    *held_out = h.release();
  });
}

// ------------------------------------------------------------ models

void pp_fit_params_init(pp_fit_params* params) {
  if (!params) return;
  *params = pp_fit_params{};
  params->method = PP_DCA;
  params->k = 1;
  params->rho = std::nan("");
  params->rho_prime = std::nan("");
}

pp_status pp_method_parse(const char* name, pp_method* out) {
  return guarded([&] {
    require(name && out, "null argument");
    *out = static_cast<pp_method>(static_cast<int>(privproj::parse_method(name)));
  });
}

pp_status pp_fit(const pp_dataset* ds, const pp_fit_params* params, pp_model** out) {
  return guarded([&] {
    require(ds && params && out, "null argument");
    *out = nullptr;
    privproj::ProjectionConfig cfg;
    cfg.method = to_method(params->method);
    cfg.k = params->k;
    if (!std::isnan(params->rho)) cfg.rho = params->rho;
    if (!std::isnan(params->rho_prime)) cfg.rho_prime = params->rho_prime;
    cfg.seed = params->seed;

    privproj::LabelSet utility;
    const bool needs_utility = cfg.method != privproj::Method::PCA && cfg.method != privproj::Method::RANDOM;
    if (needs_utility) {
      require(params->utility_label != nullptr, "utility_label is required for DCA/MDR/RUCA");
      utility = ds->data.label(params->utility_label).labels;
    }
    std::vector<privproj::LabelSet> privacy;
    for (size_t i = 0; i < params->n_privacy; ++i) {
      require(params->privacy_labels && params->privacy_labels[i], "null privacy label name");
      privacy.push_back(ds->data.label(params->privacy_labels[i]).labels);
    }
    if (cfg.method == privproj::Method::RUCA) {
      if (params->privacy_weights)
        cfg.privacy_weights.assign(params->privacy_weights, params->privacy_weights + params->n_privacy);
      else
        cfg.privacy_weights.assign(params->n_privacy, 0.0);
    }
    auto model = std::make_unique<pp_model>();
    model->model = privproj::fit(ds->data.dataset, utility, privacy, cfg);
    *out = model.release();
  });
}

void pp_model_free(pp_model* model) { delete model; }
size_t pp_model_input_dim(const pp_model* model) { return model ? model->model.input_dim() : 0; }
size_t pp_model_output_dim(const pp_model* model) { return model ? model->model.output_dim() : 0; }

pp_status pp_model_eigenvalues(const pp_model* model, double* out, size_t capacity) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto& ev = model->model.eigenvalues;
    require(capacity >= ev.size(), "buffer too small");
    std::copy(ev.begin(), ev.end(), out);
  });
}

pp_status pp_model_weights(const pp_model* model, double* out, size_t capacity) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto& w = model->model.w;
    require(capacity >= w.rows() * w.cols(), "buffer too small");
    for (size_t i = 0; i < w.rows(); ++i)
      for (size_t c = 0; c < w.cols(); ++c) out[i * w.cols() + c] = w(i, c);
  });
}

pp_status pp_model_save(const pp_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    privproj::save_model(model->model, path);
  });
}

pp_status pp_model_load(const char* path, pp_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    auto model = std::make_unique<pp_model>();
    model->model = privproj::load_model(path);
    *out = model.release();
  });
}

pp_status pp_model_to_json(const pp_model* model, char** json_out) {
  return guarded([&] {
    require(model && json_out, "null argument");
    *json_out = dup_string(privproj::model_to_json(model->model).dump(2));
  });
}

pp_status pp_project(const pp_model* model, const pp_dataset* ds, pp_dataset** out) {
  return guarded([&] {
    require(model && ds && out, "null argument");
    *out = nullptr;
    auto projected = std::make_unique<pp_dataset>();
    projected->data.dataset = privproj::project(model->model, ds->data.dataset);
    projected->data.labels = ds->data.labels;
    *out = projected.release();
  });
}

pp_status pp_model_subspace_angle(const pp_model* a, const pp_model* b, double* radians) {
  return guarded([&] {
    require(a && b && radians, "null argument");
    *radians = privproj::subspace_angle(a->model.w, b->model.w);
  });
}

// ------------------------------------------------------------ evaluation

pp_status pp_evaluate(const pp_dataset* train, const pp_dataset* test, const char* label, pp_classifier kind,
                      int k_neighbors, double* accuracy, char** report_json) {
  return guarded([&] {
    require(train && test && label, "null argument");
    privproj::ClassifierSpec spec;
    spec.kind = kind == PP_NEAREST_CENTROID ? privproj::ClassifierKind::NEAREST_CENTROID
                                            : privproj::ClassifierKind::KNN;
    spec.k_neighbors = k_neighbors;
    const auto report = privproj::train_eval(train->data.dataset, train->data.label(label).labels,
                                             test->data.dataset, test->data.label(label).labels, spec);
    if (accuracy) *accuracy = report.accuracy;
    if (report_json) {
      nlohmann::json j;
      j["label"] = label;
      j["classifier"] = std::string(privproj::to_string(spec.kind));
      if (spec.kind == privproj::ClassifierKind::KNN) j["k_neighbors"] = spec.k_neighbors;
      j["accuracy"] = report.accuracy;
      j["n_test"] = report.n_test;
      j["confusion"] = report.confusion;
      *report_json = dup_string(j.dump(2));
    }
  });
}

double pp_performance(double acc_u, double acc_p, double beta) { return privproj::performance(acc_u, acc_p, beta); }

// ------------------------------------------------------------ sweeps

pp_status pp_sweep_run(const char* config_path, const pp_dataset* train, const pp_dataset* test,
                       const pp_dataset* privacy_test, uint64_t seed, unsigned threads, const char* out_dir,
                       pp_sweep_summary* summary) {
  return guarded([&] {
    require(config_path && train && test && out_dir, "null argument");
    std::ifstream in(config_path);
    if (!in) privproj::fail(ErrorCode::IoError, fmt::format("cannot read '{}'", config_path));
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      privproj::fail(ErrorCode::ConfigError, fmt::format("{}: {}", config_path, e.what()));
    }
    j["seed"] = seed;
    const auto cfg = privproj::ExperimentConfig::from_json(j);

    privproj::DataBundle bundle{train->data, test->data, std::nullopt};
    if (privacy_test) bundle.privacy_test = privacy_test->data;
    const auto points = privproj::run_sweep(cfg, bundle, threads);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    privproj::emit_tradeoff_curve(points, (dir / "tradeoff").string(), cfg.priced_privacy);

    size_t failed = 0;
    for (const auto& p : points) failed += p.ok() ? 0 : 1;

    nlohmann::json manifest;
    manifest["library_version"] = PRIVPROJ_VERSION_STRING;
    const std::string canonical = cfg.to_json().dump();
    manifest["config_hash"] = fmt::format("fnv1a64:{:016x}", privproj::fnv1a64(canonical));
    manifest["config"] = cfg.to_json();
    manifest["seed"] = cfg.seed;
    nlohmann::json seeds = nlohmann::json::array();
    for (size_t it = 0; it < cfg.iterations; ++it) seeds.push_back(privproj::derive_seed(cfg.seed, it));
    manifest["iteration_seeds"] = seeds;
    manifest["train_samples"] = train->data.dataset.samples();
    manifest["test_samples"] = test->data.dataset.samples();
    manifest["features"] = train->data.dataset.features();
    manifest["cells"] = points.size();
    manifest["failed_cells"] = failed;
    manifest["outputs"] = {"tradeoff.csv", "tradeoff.svg", "manifest.json"};
    std::ofstream mout(dir / "manifest.json");
    if (!mout) privproj::fail(ErrorCode::IoError, "cannot write manifest.json");
    mout << manifest.dump(2) << '\n';

    if (summary) *summary = {points.size(), failed};
  });
}

pp_status pp_plot(const char* tradeoff_csv, const char* svg_path, int priced_max) {
  return guarded([&] {
    require(tradeoff_csv && svg_path, "null argument");
    const auto points = privproj::read_tradeoff_csv(tradeoff_csv);
    if (points.empty()) privproj::fail(ErrorCode::ParseError, fmt::format("{}: no rows", tradeoff_csv));
    std::ofstream out(svg_path, std::ios::binary);
    if (!out) privproj::fail(ErrorCode::IoError, fmt::format("cannot write '{}'", svg_path));
    out << privproj::render_tradeoff_svg(points, priced_max ? privproj::PricedPrivacy::Max
                                                            : privproj::PricedPrivacy::First);
  });
}

}  // extern "C"
