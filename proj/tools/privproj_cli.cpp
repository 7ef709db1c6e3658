// privproj command-line front end. Talks to the library only through the C API.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "privproj/privproj.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

struct DatasetDeleter {
  void operator()(pp_dataset* d) const { pp_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(pp_model* m) const { pp_model_free(m); }
};
struct StringDeleter {
  void operator()(char* s) const { pp_string_free(s); }
};
using DatasetPtr = std::unique_ptr<pp_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<pp_model, ModelDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Reports a failed library call and maps it to an exit code.
int report(const char* stage, pp_status st) {
  std::fprintf(stderr, "privproj: %s failed: %s\n", stage, pp_last_error());
  return pp_status_is_numerical(st) ? kExitRuntime : kExitInput;
}

unsigned thread_budget() {
  const char* env = std::getenv("PRIVPROJ_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0') {
    std::fprintf(stderr, "privproj: ignoring malformed PRIVPROJ_THREADS='%s'\n", env);
    return 0;
  }
  return static_cast<unsigned>(v);
}

int open_bundle(const std::string& prefix, const char* stage, DatasetPtr& out) {
  pp_dataset* raw = nullptr;
  if (pp_status st = pp_dataset_open(prefix.c_str(), &raw); st != PP_OK) return report(stage, st);
  out.reset(raw);
  return kExitOk;
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

// ------------------------------------------------------------ preprocess

struct PreprocessArgs {
  std::string input, schema, output;
  bool recode_marital = false;
  std::string marital_column = "marital-status";
  std::vector<std::string> balance_on;
  bool balance_joint = false;
  std::string holdout_on, holdout_output;
  double holdout_fraction = 90.0 / 281.0;
  std::uint64_t seed = 0;
};

void print_summary(const pp_dataset* ds) {
  std::printf("rows kept: %zu\nfeatures: M=%zu\n", pp_dataset_samples(ds), pp_dataset_features(ds));
  for (size_t i = 0; i < pp_dataset_label_count(ds); ++i) {
    const char* name = pp_dataset_label_name(ds, i);
    size_t n = 0;
    pp_dataset_class_counts(ds, name, nullptr, 0, &n);
    std::vector<size_t> counts(n);
    pp_dataset_class_counts(ds, name, counts.data(), counts.size(), &n);
    std::printf("label %s:", name);
    for (size_t c : counts) std::printf(" %zu", c);
    std::printf("\n");
  }
}

int cmd_preprocess(const PreprocessArgs& a) {
  pp_load_options opts{a.recode_marital ? a.marital_column.c_str() : nullptr};
  pp_dataset* raw = nullptr;
  size_t read = 0, dropped = 0;
  if (pp_status st = pp_dataset_load_csv(a.input.c_str(), a.schema.c_str(), &opts, &raw, &read, &dropped);
      st != PP_OK)
    return report("preprocess (load)", st);
  DatasetPtr ds(raw);
  std::printf("rows read: %zu\nrows dropped (missing values): %zu\n", read, dropped);

  if (!a.balance_on.empty()) {
    const size_t before = pp_dataset_samples(ds.get());
    auto names = c_strings(a.balance_on);
    if (pp_status st = pp_dataset_balance(ds.get(), names.data(), names.size(), a.balance_joint, a.seed);
        st != PP_OK)
      return report("preprocess (balance)", st);
    std::printf("rows dropped (balancing): %zu\n", before - pp_dataset_samples(ds.get()));
  }
  if (a.holdout_on.empty()) {
    print_summary(ds.get());
    if (pp_status st = pp_dataset_save(ds.get(), a.output.c_str()); st != PP_OK)
      return report("preprocess (write)", st);
    return kExitOk;
  }

  pp_dataset *kept_raw = nullptr, *held_raw = nullptr;
  if (pp_status st = pp_dataset_holdout(ds.get(), a.holdout_on.c_str(), a.holdout_fraction, a.seed, &kept_raw,
                                        &held_raw);
      st != PP_OK)
    return report("preprocess (holdout)", st);
  DatasetPtr kept(kept_raw), held(held_raw);
  print_summary(kept.get());
  std::printf("held out: %zu rows\n", pp_dataset_samples(held.get()));
  if (pp_status st = pp_dataset_save(kept.get(), a.output.c_str()); st != PP_OK)
    return report("preprocess (write)", st);
  if (pp_status st = pp_dataset_save(held.get(), a.holdout_output.c_str()); st != PP_OK)
    return report("preprocess (write holdout)", st);
  return kExitOk;
}

// ------------------------------------------------------------ fit

struct FitArgs {
  std::string data, method = "DCA", utility, output;
  std::vector<std::string> privacy;
  std::vector<double> weights;
  size_t k = 1;
  double rho = std::nan(""), rho_prime = std::nan("");
  std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a) {
  DatasetPtr ds;
  if (int rc = open_bundle(a.data, "fit (read data)", ds)) return rc;
  pp_fit_params p;
  pp_fit_params_init(&p);
  if (pp_status st = pp_method_parse(a.method.c_str(), &p.method); st != PP_OK) return report("fit (method)", st);
  if (!a.weights.empty() && a.weights.size() != a.privacy.size()) {
    std::fprintf(stderr, "privproj: fit failed: %zu --weight values for %zu --privacy labels\n", a.weights.size(),
                 a.privacy.size());
    return kExitInput;
  }
  auto privacy = c_strings(a.privacy);
  p.k = a.k;
  p.rho = a.rho;
  p.rho_prime = a.rho_prime;
  p.utility_label = a.utility.empty() ? nullptr : a.utility.c_str();
  p.privacy_labels = privacy.data();
  p.n_privacy = privacy.size();
  p.privacy_weights = a.weights.empty() ? nullptr : a.weights.data();
  p.seed = a.seed;

  pp_model* raw = nullptr;
  if (pp_status st = pp_fit(ds.get(), &p, &raw); st != PP_OK) return report("fit", st);
  ModelPtr model(raw);
  if (pp_status st = pp_model_save(model.get(), a.output.c_str()); st != PP_OK) return report("fit (write model)", st);
  std::printf("fitted %s: M=%zu K=%zu -> %s\n", a.method.c_str(), pp_model_input_dim(model.get()),
              pp_model_output_dim(model.get()), a.output.c_str());
  return kExitOk;
}

// ------------------------------------------------------------ project

struct ProjectArgs {
  std::string model, data, output;
};

int cmd_project(const ProjectArgs& a) {
  pp_model* raw_model = nullptr;
  if (pp_status st = pp_model_load(a.model.c_str(), &raw_model); st != PP_OK) return report("project (read model)", st);
  ModelPtr model(raw_model);
  DatasetPtr ds;
  if (int rc = open_bundle(a.data, "project (read data)", ds)) return rc;
  pp_dataset* raw = nullptr;
  if (pp_status st = pp_project(model.get(), ds.get(), &raw); st != PP_OK) return report("project", st);
  DatasetPtr out(raw);
  if (pp_status st = pp_dataset_save(out.get(), a.output.c_str()); st != PP_OK) return report("project (write)", st);
  return kExitOk;
}

// ------------------------------------------------------------ evaluate

struct EvaluateArgs {
  std::string train, test, label, classifier = "knn";
  int k_neighbors = 5;
};

int cmd_evaluate(const EvaluateArgs& a) {
  DatasetPtr train, test;
  if (int rc = open_bundle(a.train, "evaluate (read train)", train)) return rc;
  if (int rc = open_bundle(a.test, "evaluate (read test)", test)) return rc;
  const pp_classifier kind = a.classifier == "knn" ? PP_KNN : PP_NEAREST_CENTROID;
  char* json = nullptr;
  double acc = 0.0;
  if (pp_status st = pp_evaluate(train.get(), test.get(), a.label.c_str(), kind, a.k_neighbors, &acc, &json);
      st != PP_OK)
    return report("evaluate", st);
  StringPtr owned(json);
  std::printf("%s\n", owned.get());
  return kExitOk;
}

// ------------------------------------------------------------ sweep

struct SweepArgs {
  std::string config, train, test, privacy_test, out_dir;
  std::uint64_t seed = 0;
};

int cmd_sweep(const SweepArgs& a) {
  DatasetPtr train, test, privacy_test;
  if (int rc = open_bundle(a.train, "sweep (read train)", train)) return rc;
  if (int rc = open_bundle(a.test, "sweep (read test)", test)) return rc;
  if (!a.privacy_test.empty())
    if (int rc = open_bundle(a.privacy_test, "sweep (read privacy test)", privacy_test)) return rc;

  pp_sweep_summary summary{};
  if (pp_status st = pp_sweep_run(a.config.c_str(), train.get(), test.get(), privacy_test.get(), a.seed,
                                  thread_budget(), a.out_dir.c_str(), &summary);
      st != PP_OK)
    return report("sweep", st);
  std::printf("cells: %zu, failed: %zu, outputs in %s\n", summary.cells, summary.failed_cells, a.out_dir.c_str());
  if (summary.cells > 0 && summary.failed_cells == summary.cells) {
    std::fprintf(stderr, "privproj: sweep failed: every cell failed, see the status column\n");
    return kExitRuntime;
  }
  return kExitOk;
}

// ------------------------------------------------------------ plot

struct PlotArgs {
  std::string input, output, priced = "first";
};

int cmd_plot(const PlotArgs& a) {
  if (pp_status st = pp_plot(a.input.c_str(), a.output.c_str(), a.priced == "max"); st != PP_OK)
    return report("plot", st);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware linear projections and utility/privacy trade-off sweeps"};
  app.set_version_flag("--version", std::string(pp_version()));
  app.require_subcommand(1, 1);

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Clean, encode and balance a raw CSV into a dataset bundle");
  pre_cmd->add_option("--input", pre.input, "Raw headered CSV")->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("--schema", pre.schema, "JSON column schema")->required()->check(CLI::ExistingFile);
  pre_cmd->add_flag("--recode-census-marital", pre.recode_marital,
                    "Group marital status into Married / Used to be Married / Never Married");
  pre_cmd->add_option("--marital-column", pre.marital_column, "Column recoded by --recode-census-marital")
      ->capture_default_str();
  pre_cmd->add_option("--balance-on", pre.balance_on, "Label to balance by undersampling (repeatable)");
  pre_cmd->add_flag("--balance-joint", pre.balance_joint,
                    "Balance the cross product of the --balance-on labels instead of one after another");
  auto* holdout_on = pre_cmd->add_option("--holdout-on", pre.holdout_on,
                                         "Hold out a fixed fraction of every class of this label (after balancing)");
  pre_cmd->add_option("--holdout-fraction", pre.holdout_fraction, "Fraction held out per class")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  auto* holdout_out = pre_cmd->add_option("--holdout-output", pre.holdout_output, "Bundle prefix for held-out rows");
  holdout_on->needs(holdout_out);
  holdout_out->needs(holdout_on);
  pre_cmd->add_option("--seed", pre.seed, "Sampling seed")->capture_default_str();
  pre_cmd->add_option("--output", pre.output, "Output bundle prefix")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a projection and write it as JSON");
  fit_cmd->add_option("--data", fit.data, "Training bundle prefix")->required();
  fit_cmd->add_option("--method", fit.method, "PCA, DCA, MDR, RUCA or RANDOM")->capture_default_str();
  fit_cmd->add_option("--k", fit.k, "Output dimension K")->capture_default_str();
  fit_cmd->add_option("--utility", fit.utility, "Utility label (DCA, MDR, RUCA)");
  fit_cmd->add_option("--privacy", fit.privacy, "Privacy label (repeatable)");
  fit_cmd->add_option("--weight", fit.weights, "RUCA weight per --privacy label (repeatable)");
  fit_cmd->add_option("--rho", fit.rho, "Denominator ridge (default: scale-relative)");
  fit_cmd->add_option("--rho-prime", fit.rho_prime, "Numerator ridge (default: scale-relative)");
  fit_cmd->add_option("--seed", fit.seed, "Seed for RANDOM")->capture_default_str();
  fit_cmd->add_option("--output", fit.output, "Model JSON path")->required();

  ProjectArgs proj;
  auto* proj_cmd = app.add_subcommand("project", "Apply a fitted model to a dataset bundle");
  proj_cmd->add_option("--model", proj.model, "Model JSON")->required()->check(CLI::ExistingFile);
  proj_cmd->add_option("--data", proj.data, "Input bundle prefix")->required();
  proj_cmd->add_option("--output", proj.output, "Output bundle prefix")->required();

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Train a classifier and print its accuracy report as JSON");
  ev_cmd->add_option("--train", ev.train, "Training bundle prefix")->required();
  ev_cmd->add_option("--test", ev.test, "Test bundle prefix")->required();
  ev_cmd->add_option("--label", ev.label, "Label to classify")->required();
  ev_cmd->add_option("--classifier", ev.classifier, "knn or nearest_centroid")
      ->check(CLI::IsMember({"knn", "nearest_centroid"}))
      ->capture_default_str();
  ev_cmd->add_option("--k-neighbors", ev.k_neighbors, "Neighbors for knn (odd)")->capture_default_str();

  SweepArgs sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Run a utility/privacy sweep from a JSON config");
  sw_cmd->add_option("--config", sw.config, "Sweep config JSON")->required()->check(CLI::ExistingFile);
  sw_cmd->add_option("--train", sw.train, "Training bundle prefix")->required();
  sw_cmd->add_option("--test", sw.test, "Test bundle prefix")->required();
  sw_cmd->add_option("--privacy-test", sw.privacy_test, "Separate test bundle for the privacy labels");
  sw_cmd->add_option("--seed", sw.seed, "Master seed (overrides the config)")->required();
  sw_cmd->add_option("--out-dir", sw.out_dir, "Directory for tradeoff.csv, tradeoff.svg, manifest.json")
      ->required();
  sw_cmd->footer("PRIVPROJ_THREADS caps the worker threads (0 or unset: hardware concurrency).");

  PlotArgs pl;
  auto* pl_cmd = app.add_subcommand("plot", "Render a trade-off CSV as SVG");
  pl_cmd->add_option("--input", pl.input, "tradeoff.csv")->required()->check(CLI::ExistingFile);
  pl_cmd->add_option("--output", pl.output, "SVG path")->required();
  pl_cmd->add_option("--priced", pl.priced, "Privacy task on the x axis: first or max")
      ->check(CLI::IsMember({"first", "max"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  if (*pre_cmd) return cmd_preprocess(pre);
  if (*fit_cmd) return cmd_fit(fit);
  if (*proj_cmd) return cmd_project(proj);
  if (*ev_cmd) return cmd_evaluate(ev);
  if (*sw_cmd) return cmd_sweep(sw);
  if (*pl_cmd) return cmd_plot(pl);
  return kExitInput;
}
