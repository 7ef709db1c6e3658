#include "privproj/dataset.hpp"

#include <cmath>

#include <fmt/format.h>

namespace privproj {

void Dataset::validate() const {
  if (features() == 0 || samples() == 0)
    fail(ErrorCode::InvalidArgument, fmt::format("dataset is {}x{}", features(), samples()));
  if (feature_names.size() != features())
    fail(ErrorCode::LengthMismatch,
         fmt::format("{} feature names for {} features", feature_names.size(), features()));
  for (std::size_t j = 0; j < samples(); ++j)
    for (std::size_t i = 0; i < features(); ++i)
      if (!std::isfinite(x(i, j)))
        fail(ErrorCode::InvalidArgument, fmt::format("non-finite value at feature {}, sample {}", i, j));
}

Dataset Dataset::from_matrix(Matrix x) {
  Dataset d;
  d.feature_names.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) d.feature_names.push_back(fmt::format("f{}", i));
  d.x = std::move(x);
  return d;
}

LabelSet::LabelSet(std::vector<int> labels, int class_count)
    : labels_(std::move(labels)), class_count_(class_count) {
  if (class_count_ < 2)
    fail(ErrorCode::InvalidArgument, fmt::format("need at least 2 classes, got {}", class_count_));
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] < 0 || labels_[i] >= class_count_)
      fail(ErrorCode::InvalidArgument,
           fmt::format("label {} at sample {} outside 0..{}", labels_[i], i, class_count_ - 1));
}

std::vector<std::size_t> LabelSet::counts() const {
  std::vector<std::size_t> c(static_cast<std::size_t>(class_count_), 0);
  for (int l : labels_) ++c[static_cast<std::size_t>(l)];
  return c;
}

void LabelSet::require_all_classes(ErrorCode code) const {
  const auto c = counts();
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c[k] == 0) fail(code, fmt::format("class {} has no samples", k));
}

Dataset select_samples(const Dataset& d, std::span<const std::size_t> idx) {
  Dataset out;
  out.feature_names = d.feature_names;
  out.x = Matrix(d.features(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    auto src = d.x.col(idx[j]);
    std::copy(src.begin(), src.end(), out.x.col(j).begin());
  }
  return out;
}

LabelSet select_samples(const LabelSet& l, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(l[i]);
  return LabelSet(std::move(out), l.class_count());
}

std::vector<double> feature_means(const Dataset& d) {
  std::vector<double> mean(d.features(), 0.0);
  for (std::size_t j = 0; j < d.samples(); ++j) {
    auto c = d.x.col(j);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += c[i];
  }
  for (double& m : mean) m /= static_cast<double>(d.samples());
  return mean;
}

}  // namespace privproj
