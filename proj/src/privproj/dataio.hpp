#pragma once

// Dataset ingestion and the preprocessing recipes used by the experiments.
//
// A "bundle" on disk is a path prefix P with
//   P.features.csv        header = feature names, one sample per row
//   P.label.<name>.csv    header = <name>, one integer class id per row
//   P.meta.json           feature names, label names and class names

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "privproj/dataset.hpp"

namespace privproj {

enum class ColumnKind { Numeric, Categorical, Label, Drop };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  /// Ordered category list; index = encoded value (categorical) or class id (label).
  std::vector<std::string> categories;
  /// Raw value -> category, applied before lookup.
  std::map<std::string, std::string> aliases;
  /// Named value transform applied before aliases ("census_marital").
  std::optional<std::string> recode;
};

struct ColumnSchema {
  std::vector<ColumnSpec> columns;
  /// Field values treated as missing (after optional trimming).
  std::vector<std::string> na_values{""};
  bool trim_whitespace = false;

  /// Parses {columns: [{name, kind, categories?, aliases?, recode?, missing_policy?}],
  ///         na_values?, trim_whitespace?}.
  static ColumnSchema from_json_file(const std::string& path);
  static ColumnSchema from_json_text(std::string_view text);
  ColumnSpec* find(std::string_view name);
};

struct NamedLabels {
  std::string name;
  LabelSet labels;
  std::vector<std::string> class_names;
};

struct LabeledData {
  Dataset dataset;
  std::vector<NamedLabels> labels;

  const NamedLabels& label(std::string_view name) const;
  /// Keeps samples `idx` (in the given order) in features and every label.
  LabeledData select(std::span<const std::size_t> idx) const;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

/// Bits needed to binary-encode `n` categories: ceil(log2(n)).
std::size_t binary_width(std::size_t n);

/// Loads a headered CSV. Rows with a missing value in any non-drop column are
/// dropped. Categorical index c becomes binary_width(#categories) features
/// holding the bits of c, most significant first.
LabeledData load_csv(const std::string& path, const ColumnSchema& schema, LoadReport* report = nullptr);
LabeledData load_csv(std::istream& in, const ColumnSchema& schema, LoadReport* report = nullptr);

/// Groups the Adult marital-status values into Married / Used to be Married /
/// Never Married. Throws UnknownCategory for anything else.
std::string recode_census_marital(std::string_view raw);
inline const std::vector<std::string>& census_marital_groups() {
  static const std::vector<std::string> groups{"Married", "Used to be Married", "Never Married"};
  return groups;
}

/// Uniform undersampling of every class down to the smallest class count.
/// Returned indices are ascending (original order preserved).
std::vector<std::size_t> balanced_indices(const LabelSet& l, std::uint64_t seed);
std::pair<Dataset, LabelSet> balance_classes(const Dataset& d, const LabelSet& l, std::uint64_t seed);

/// Balances on several labelings: jointly on their cross product, or one
/// after another in the listed order.
LabeledData balance_on(const LabeledData& data, const std::vector<std::string>& label_names,
                       std::uint64_t seed, bool joint);

struct SplitSpec {
  std::uint64_t seed = 0;
  double fraction = 1.0;
  std::vector<std::string> balance_on;

  void validate() const;
};

/// floor(fraction * n) indices (at least one) drawn without replacement with
/// seed derive_seed(spec.seed, iteration); ascending.
std::vector<std::size_t> subsample_indices(std::size_t n, const SplitSpec& spec, std::uint64_t iteration);
LabeledData subsample(const LabeledData& data, const SplitSpec& spec, std::uint64_t iteration);

/// Per-class holdout of floor(fraction * N_c) samples. Returns {kept, held out}.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(
    const LabelSet& l, double fraction, std::uint64_t seed);

void write_dataset_csv(const std::string& path, const Dataset& d);
Dataset read_dataset_csv(const std::string& path);
void write_labels_csv(const std::string& path, const std::string& name, const LabelSet& l);
/// class_count < 0 infers max id + 1 (at least 2).
LabelSet read_labels_csv(const std::string& path, int class_count = -1);

void write_bundle(const std::string& prefix, const LabeledData& data);
LabeledData read_bundle(const std::string& prefix);

}  // namespace privproj
