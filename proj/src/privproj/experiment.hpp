#pragma once

// Utility/privacy sweeps over projection methods, K and privacy weights.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "privproj/classify.hpp"
#include "privproj/dataio.hpp"
#include "privproj/projections.hpp"

namespace privproj {

/// Acc_U + beta * (1 - Acc_P), accuracies as fractions.
double performance(double acc_u, double acc_p, double beta);

enum class PricedPrivacy { First, Max };

struct MethodGrid {
  Method method = Method::DCA;
  std::vector<std::size_t> ks{1};
  /// RUCA only: one weight vector per grid cell.
  std::vector<std::vector<double>> privacy_weights;
  std::optional<double> rho;
  std::optional<double> rho_prime;
  /// RANDOM only: base seed; defaults to the experiment seed.
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  std::vector<MethodGrid> methods;
  ClassifierSpec classifier;
  std::size_t iterations = 1;
  double subsample_fraction = 1.0;
  std::vector<double> betas{0.0, 1.0};
  std::uint64_t seed = 0;
  std::string utility_label;
  std::vector<std::string> privacy_labels;
  PricedPrivacy priced_privacy = PricedPrivacy::First;
  /// z-score features with statistics of each iteration's training subsample.
  bool standardize = false;
  /// Emit the unprojected baseline row.
  bool full_dimensional = true;

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct DataBundle {
  LabeledData train;
  LabeledData test;
  /// Evaluation set for the privacy tasks when it differs from `test`.
  std::optional<LabeledData> privacy_test;
};

struct TradeoffPoint {
  std::string method;  ///< PCA/DCA/MDR/RUCA/RANDOM or FULL
  std::size_t k = 0;
  std::vector<double> privacy_weights;
  double acc_u_mean = 0.0;
  double acc_u_std = 0.0;
  std::vector<double> acc_p_mean;
  std::vector<double> acc_p_std;
  std::vector<std::pair<double, double>> performance;  ///< (beta, value)
  std::string status = "ok";
  /// Per-iteration accuracies backing the aggregates.
  std::vector<double> acc_u_runs;
  std::vector<std::vector<double>> acc_p_runs;  ///< [task][iteration]

  bool ok() const noexcept { return status == "ok"; }
  /// Privacy accuracy used in the performance score.
  double priced_acc_p(PricedPrivacy mode) const;
};

/// Sample mean and (N-1) standard deviation; std is 0 for a single value.
std::pair<double, double> mean_and_std(const std::vector<double>& v);

/// Deterministic for a fixed config regardless of `threads` (0 = hardware).
std::vector<TradeoffPoint> run_sweep(const ExperimentConfig& cfg, const DataBundle& data,
                                     unsigned threads = 1);

/// Columns: method, k, privacy_weights, acc_u_mean, acc_u_std,
/// acc_p{i}_mean, acc_p{i}_std per task, perf@{beta} per beta, status.
void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffPoint>& points);
std::vector<TradeoffPoint> read_tradeoff_csv(const std::string& path);

/// Writes `<base>.csv` and `<base>.svg`.
void emit_tradeoff_curve(const std::vector<TradeoffPoint>& points, const std::string& base,
                         PricedPrivacy priced = PricedPrivacy::First);

/// Self-contained SVG: y = Acc_U, x = 1 - Acc_P, one polyline per method
/// (and weight vector), dashed line at the full-dimensional utility accuracy.
std::string render_tradeoff_svg(const std::vector<TradeoffPoint>& points, PricedPrivacy priced);

/// 64-bit FNV-1a, used for run manifests.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace privproj
