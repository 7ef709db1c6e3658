#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "privproj/error.hpp"
#include "privproj/linalg.hpp"

namespace privproj {

/// Samples stored as columns of an M x N matrix (features x samples).
struct Dataset {
  Matrix x;
  std::vector<std::string> feature_names;

  std::size_t features() const noexcept { return x.rows(); }
  std::size_t samples() const noexcept { return x.cols(); }

  /// Checks N >= 1, M >= 1, finite entries and name count.
  void validate() const;

  /// Default names "f0".."f{M-1}".
  static Dataset from_matrix(Matrix x);
};

/// Integer class ids in 0..class_count-1, one per sample.
class LabelSet {
 public:
  LabelSet() = default;
  /// Throws InvalidArgument if class_count < 2 or an id is out of range.
  LabelSet(std::vector<int> labels, int class_count);

  const std::vector<int>& labels() const noexcept { return labels_; }
  int class_count() const noexcept { return class_count_; }
  std::size_t size() const noexcept { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }

  std::vector<std::size_t> counts() const;
  /// Throws `code` naming the first class with no samples.
  void require_all_classes(ErrorCode code) const;

 private:
  std::vector<int> labels_;
  int class_count_ = 0;
};

Dataset select_samples(const Dataset& d, std::span<const std::size_t> idx);
LabelSet select_samples(const LabelSet& l, std::span<const std::size_t> idx);

/// Per-feature mean over samples.
std::vector<double> feature_means(const Dataset& d);

}  // namespace privproj
