#pragma once

// Deterministic distance-based classifiers used to score projected data.

#include <cstddef>
#include <string_view>
#include <vector>

#include "privproj/dataset.hpp"

namespace privproj {

enum class ClassifierKind { KNN, NEAREST_CENTROID };

std::string_view to_string(ClassifierKind k) noexcept;
ClassifierKind parse_classifier(std::string_view name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::KNN;
  int k_neighbors = 5;  ///< odd, KNN only

  void validate() const;
};

struct AccuracyReport {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted]
  std::size_t n_test = 0;
};

/// KNN: Euclidean distance, distance ties to the lower training index, vote
/// ties to the smallest class id. NEAREST_CENTROID: closest class mean, ties
/// to the smallest class id.
AccuracyReport train_eval(const Dataset& train, const LabelSet& train_labels, const Dataset& test,
                          const LabelSet& test_labels, const ClassifierSpec& spec);

/// Predicted class per test sample.
std::vector<int> predict(const Dataset& train, const LabelSet& train_labels, const Dataset& test,
                         const ClassifierSpec& spec);

/// Majority-class rate max_c N_c / N.
double random_guess_baseline(const LabelSet& labels);

}  // namespace privproj
