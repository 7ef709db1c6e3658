#include "privproj/classify.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <fmt/format.h>

#include "privproj/error.hpp"

namespace privproj {

std::string_view to_string(ClassifierKind k) noexcept {
  return k == ClassifierKind::KNN ? "knn" : "nearest_centroid";
}

ClassifierKind parse_classifier(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "knn") return ClassifierKind::KNN;
  if (lower == "nearest_centroid" || lower == "centroid") return ClassifierKind::NEAREST_CENTROID;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown classifier '{}'", name));
}

void ClassifierSpec::validate() const {
  if (kind == ClassifierKind::KNN && (k_neighbors < 1 || k_neighbors % 2 == 0))
    fail(ErrorCode::InvalidArgument, fmt::format("k_neighbors must be odd and >= 1, got {}", k_neighbors));
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int vote(const std::vector<std::size_t>& counts) {
  // max_element returns the first maximum, i.e. the smallest class id.
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::vector<int> predict_knn(const Dataset& train, const LabelSet& labels, const Dataset& test, int k) {
  const std::size_t n = train.samples();
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<std::size_t> counts(static_cast<std::size_t>(labels.class_count()));
  std::vector<int> out(test.samples());
  for (std::size_t t = 0; t < test.samples(); ++t) {
    auto xt = test.x.col(t);
    for (std::size_t i = 0; i < n; ++i) dist[i] = {squared_distance(xt, train.x.col(i)), i};
    // Lexicographic (distance, index) order resolves distance ties by index.
    std::nth_element(dist.begin(), dist.begin() + static_cast<long>(kk - 1), dist.end());
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < kk; ++i) ++counts[static_cast<std::size_t>(labels[dist[i].second])];
    out[t] = vote(counts);
  }
  return out;
}

std::vector<int> predict_centroid(const Dataset& train, const LabelSet& labels, const Dataset& test) {
  const std::size_t m = train.features();
  const auto classes = static_cast<std::size_t>(labels.class_count());
  const auto counts = labels.counts();
  std::vector<std::vector<double>> centroids(classes, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < train.samples(); ++j) {
    auto xj = train.x.col(j);
    auto& c = centroids[static_cast<std::size_t>(labels[j])];
    for (std::size_t i = 0; i < m; ++i) c[i] += xj[i];
  }
  for (std::size_t c = 0; c < classes; ++c)
    for (double& v : centroids[c]) v /= static_cast<double>(counts[c]);

  std::vector<int> out(test.samples());
  for (std::size_t t = 0; t < test.samples(); ++t) {
    auto xt = test.x.col(t);
    std::size_t best = 0;
    double best_d = squared_distance(xt, centroids[0]);
    for (std::size_t c = 1; c < classes; ++c) {
      const double d = squared_distance(xt, centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out[t] = static_cast<int>(best);
  }
  return out;
}

}  // namespace

std::vector<int> predict(const Dataset& train, const LabelSet& train_labels, const Dataset& test,
                         const ClassifierSpec& spec) {
  spec.validate();
  if (train.features() != test.features())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("train has {} features, test has {}", train.features(), test.features()));
  if (train_labels.size() != train.samples())
    fail(ErrorCode::LengthMismatch,
         fmt::format("{} training labels for {} samples", train_labels.size(), train.samples()));
  train_labels.require_all_classes(ErrorCode::EmptyTrainClass);
  return spec.kind == ClassifierKind::KNN ? predict_knn(train, train_labels, test, spec.k_neighbors)
                                          : predict_centroid(train, train_labels, test);
}

AccuracyReport train_eval(const Dataset& train, const LabelSet& train_labels, const Dataset& test,
                          const LabelSet& test_labels, const ClassifierSpec& spec) {
  if (test_labels.size() != test.samples())
    fail(ErrorCode::LengthMismatch,
         fmt::format("{} test labels for {} samples", test_labels.size(), test.samples()));
  if (train_labels.class_count() != test_labels.class_count())
    fail(ErrorCode::DimensionMismatch, fmt::format("train labels have {} classes, test labels {}",
                                                   train_labels.class_count(), test_labels.class_count()));
  if (test.samples() == 0) fail(ErrorCode::InvalidArgument, "empty test set");

  const auto predicted = predict(train, train_labels, test, spec);
  const auto classes = static_cast<std::size_t>(test_labels.class_count());
  AccuracyReport report;
  report.n_test = test.samples();
  report.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    const auto truth = static_cast<std::size_t>(test_labels[t]);
    const auto guess = static_cast<std::size_t>(predicted[t]);
    ++report.confusion[truth][guess];
    if (truth == guess) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n_test);
  return report;
}

double random_guess_baseline(const LabelSet& labels) {
  if (labels.size() == 0) fail(ErrorCode::InvalidArgument, "empty label set");
  const auto counts = labels.counts();
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(labels.size());
}

}  // namespace privproj
