#pragma once

// Scatter matrices of a labeled dataset. All three are raw sums over samples
// (no division by N), so regularizers such as rho and rho_p are expressed in
// the same units as the data's summed squared deviations.

#include <cstddef>
#include <vector>

#include "privproj/dataset.hpp"
#include "privproj/linalg.hpp"

namespace privproj {

struct ScatterSet {
  SymMatrix s_bar;  ///< sum_i (x_i - mu)(x_i - mu)^T
  SymMatrix s_b;    ///< sum_c N_c (mu - mu_c)(mu - mu_c)^T
  SymMatrix s_w;    ///< sum_c sum_{i in c} (x_i - mu_c)(x_i - mu_c)^T
  std::vector<double> mean;
  std::vector<std::vector<double>> class_means;
  std::vector<std::size_t> class_counts;
};

/// Throws LengthMismatch if label count != sample count, EmptyClass if a
/// class has no samples.
ScatterSet compute_scatter(const Dataset& d, const LabelSet& l);

/// Center-adjusted scatter only (no labels needed).
SymMatrix total_scatter(const Dataset& d, const std::vector<double>& mean);

/// Numerical rank of s_b: eigenvalues above M * 1e-12 * max|s_b|.
std::size_t rank_bound_check(const ScatterSet& s);

}  // namespace privproj
