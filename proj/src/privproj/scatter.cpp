#include "privproj/scatter.hpp"

#include <fmt/format.h>

#include "privproj/error.hpp"

namespace privproj {

SymMatrix total_scatter(const Dataset& d, const std::vector<double>& mean) {
  const std::size_t m = d.features();
  SymMatrix s(m);
  std::vector<double> dev(m);
  for (std::size_t j = 0; j < d.samples(); ++j) {
    auto xj = d.x.col(j);
    for (std::size_t i = 0; i < m; ++i) dev[i] = xj[i] - mean[i];
    s.add_outer(dev);
  }
  return s;
}

ScatterSet compute_scatter(const Dataset& d, const LabelSet& l) {
  if (l.size() != d.samples())
    fail(ErrorCode::LengthMismatch,
         fmt::format("{} labels for {} samples", l.size(), d.samples()));
  if (d.samples() == 0 || d.features() == 0)
    fail(ErrorCode::InvalidArgument, "empty dataset");
  l.require_all_classes(ErrorCode::EmptyClass);

  const std::size_t m = d.features();
  const auto classes = static_cast<std::size_t>(l.class_count());

  ScatterSet out;
  out.mean = feature_means(d);
  out.class_counts = l.counts();
  out.class_means.assign(classes, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < d.samples(); ++j) {
    auto xj = d.x.col(j);
    auto& mu = out.class_means[static_cast<std::size_t>(l[j])];
    for (std::size_t i = 0; i < m; ++i) mu[i] += xj[i];
  }
  for (std::size_t c = 0; c < classes; ++c)
    for (double& v : out.class_means[c]) v /= static_cast<double>(out.class_counts[c]);

  out.s_bar = total_scatter(d, out.mean);

  out.s_b = SymMatrix(m);
  std::vector<double> dev(m);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < m; ++i) dev[i] = out.mean[i] - out.class_means[c][i];
    out.s_b.add_outer(dev, static_cast<double>(out.class_counts[c]));
  }

  out.s_w = SymMatrix(m);
  for (std::size_t j = 0; j < d.samples(); ++j) {
    auto xj = d.x.col(j);
    const auto& mu = out.class_means[static_cast<std::size_t>(l[j])];
    for (std::size_t i = 0; i < m; ++i) dev[i] = xj[i] - mu[i];
    out.s_w.add_outer(dev);
  }
  return out;
}

std::size_t rank_bound_check(const ScatterSet& s) {
  const double norm = s.s_b.max_abs();
  if (norm == 0.0) return 0;
  const double tol = static_cast<double>(s.s_b.dim()) * 1e-12 * norm;
  std::size_t rank = 0;
  for (double v : sym_eig(s.s_b).values)
    if (v > tol) ++rank;
  return rank;
}

}  // namespace privproj
