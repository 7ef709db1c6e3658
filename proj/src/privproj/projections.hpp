#pragma once

// Privacy-aware linear projections.
//
// DCA, MDR and RUCA all reduce to the pencil (S_BU + rho' I, D + rho I) where
// S_BU is the utility between-class scatter and the denominator D is
//
//   DCA   S_bar
//   MDR   S_BP                          (first privacy labeling)
//   RUCA  S_bar + sum_i rho_p[i] S_BP[i]
//
// The projection W holds the top-K generalized eigenvectors, normalized so
// that W^T (D + rho I) W = I.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privproj/dataset.hpp"
#include "privproj/linalg.hpp"

namespace privproj {

enum class Method { PCA, DCA, MDR, RUCA, RANDOM };

std::string_view to_string(Method m) noexcept;
/// Case-insensitive; throws InvalidArgument on unknown names.
Method parse_method(std::string_view name);

struct ProjectionConfig {
  Method method = Method::DCA;
  std::size_t k = 1;
  /// Denominator regularizer. Unset: 1e-6 * trace(S_bar) / M.
  std::optional<double> rho;
  /// Numerator regularizer. Unset: 1e-8 * (trace(S_BU) / M + rho).
  std::optional<double> rho_prime;
  /// One non-negative weight per privacy labeling (RUCA).
  std::vector<double> privacy_weights;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument / InvalidK on violated invariants.
  void validate() const;
};

struct ProjectionModel {
  Matrix w;  ///< M x K
  std::vector<double> eigenvalues;
  /// Config with rho and rho_prime resolved to the values actually used.
  ProjectionConfig config;
  std::vector<double> feature_mean;

  std::size_t input_dim() const noexcept { return w.rows(); }
  std::size_t output_dim() const noexcept { return w.cols(); }
};

ProjectionModel fit_ruca(const Dataset& d, const LabelSet& utility,
                         std::span<const LabelSet> privacy, const ProjectionConfig& cfg);
ProjectionModel fit_dca(const Dataset& d, const LabelSet& utility, const ProjectionConfig& cfg);
ProjectionModel fit_mdr(const Dataset& d, const LabelSet& utility, const LabelSet& privacy,
                        const ProjectionConfig& cfg);
ProjectionModel fit_pca(const Dataset& d, const ProjectionConfig& cfg);
/// Orthonormalized Gaussian matrix; feature_mean is zero.
ProjectionModel fit_random(std::size_t m, const ProjectionConfig& cfg);

/// Dispatches on cfg.method. MDR uses privacy.front().
ProjectionModel fit(const Dataset& d, const LabelSet& utility, std::span<const LabelSet> privacy,
                    const ProjectionConfig& cfg);

/// Z = W^T (X - mean 1^T), using the model's stored training mean.
Dataset project(const ProjectionModel& model, const Dataset& d);

/// Largest principal angle (radians) between the column spans.
double subspace_angle(const Matrix& w1, const Matrix& w2);

/// Default regularizers for a given scatter; exposed for tests and reports.
double default_rho(const SymMatrix& s_bar);
double default_rho_prime(const SymMatrix& s_bu, double rho);

}  // namespace privproj
