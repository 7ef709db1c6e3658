#include "privproj/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "privproj/csv.hpp"
#include "privproj/error.hpp"
#include "privproj/rng.hpp"

namespace privproj {

using nlohmann::json;

namespace {

ColumnKind parse_kind(const std::string& s) {
  if (s == "numeric") return ColumnKind::Numeric;
  if (s == "categorical") return ColumnKind::Categorical;
  if (s == "label") return ColumnKind::Label;
  if (s == "drop") return ColumnKind::Drop;
  fail(ErrorCode::ConfigError, fmt::format("unknown column kind '{}'", s));
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

// ---------------------------------------------------------------- schema

ColumnSchema ColumnSchema::from_json_text(std::string_view text) {
  ColumnSchema schema;
  try {
    const json j = json::parse(text);
    if (j.contains("na_values")) schema.na_values = j["na_values"].get<std::vector<std::string>>();
    schema.trim_whitespace = j.value("trim_whitespace", false);
    for (const auto& c : j.at("columns")) {
      ColumnSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.kind = parse_kind(c.at("kind").get<std::string>());
      if (c.contains("categories")) spec.categories = c["categories"].get<std::vector<std::string>>();
      if (c.contains("aliases")) spec.aliases = c["aliases"].get<std::map<std::string, std::string>>();
      if (c.contains("recode")) spec.recode = c["recode"].get<std::string>();
      const std::string policy = c.value("missing_policy", std::string("drop_row"));
      if (policy != "drop_row")
        fail(ErrorCode::ConfigError, fmt::format("column '{}': unsupported missing_policy '{}'", spec.name, policy));
      if ((spec.kind == ColumnKind::Categorical || spec.kind == ColumnKind::Label) && spec.categories.empty())
        fail(ErrorCode::ConfigError, fmt::format("column '{}' needs a categories list", spec.name));
      if (spec.kind == ColumnKind::Label && spec.categories.size() < 2)
        fail(ErrorCode::ConfigError, fmt::format("label column '{}' needs at least 2 classes", spec.name));
      if (spec.recode && *spec.recode != "census_marital")
        fail(ErrorCode::ConfigError, fmt::format("column '{}': unknown recode '{}'", spec.name, *spec.recode));
      schema.columns.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, fmt::format("malformed schema: {}", e.what()));
  }
  for (std::size_t i = 0; i < schema.columns.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (schema.columns[i].name == schema.columns[j].name)
        fail(ErrorCode::ConfigError, fmt::format("duplicate column '{}'", schema.columns[i].name));
  return schema;
}

ColumnSchema ColumnSchema::from_json_file(const std::string& path) {
  return from_json_text(read_file(path));
}

ColumnSpec* ColumnSchema::find(std::string_view name) {
  for (auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

const NamedLabels& LabeledData::label(std::string_view name) const {
  for (const auto& l : labels)
    if (l.name == name) return l;
  fail(ErrorCode::InvalidArgument, fmt::format("no label named '{}'", name));
}

LabeledData LabeledData::select(std::span<const std::size_t> idx) const {
  LabeledData out;
  out.dataset = select_samples(dataset, idx);
  for (const auto& l : labels) out.labels.push_back({l.name, select_samples(l.labels, idx), l.class_names});
  return out;
}

// ---------------------------------------------------------------- loading

std::size_t binary_width(std::size_t n) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

std::string recode_census_marital(std::string_view raw) {
  if (raw == "Married-civ-spouse" || raw == "Married-spouse-absent" || raw == "Married-AF-spouse")
    return "Married";
  if (raw == "Divorced" || raw == "Separated" || raw == "Widowed") return "Used to be Married";
  if (raw == "Never-married" || raw == "Never Married") return "Never Married";
  fail(ErrorCode::UnknownCategory, fmt::format("unknown marital status '{}'", raw));
}

namespace {

struct BoundColumn {
  const ColumnSpec* spec;
  std::size_t file_index;
  std::size_t width;  // output features (numeric 1, categorical bits, else 0)
};

std::size_t category_index(const ColumnSpec& spec, std::string value, std::size_t line) {
  if (spec.recode) {
    try {
      value = recode_census_marital(value);
    } catch (const Error&) {
      fail(ErrorCode::UnknownCategory,
           fmt::format("line {}, column '{}': unknown value '{}'", line, spec.name, value));
    }
  }
  if (auto a = spec.aliases.find(value); a != spec.aliases.end()) value = a->second;
  const auto it = std::find(spec.categories.begin(), spec.categories.end(), value);
  if (it == spec.categories.end())
    fail(ErrorCode::UnknownCategory,
         fmt::format("line {}, column '{}': unknown value '{}'", line, spec.name, value));
  return static_cast<std::size_t>(it - spec.categories.begin());
}

}  // namespace

LabeledData load_csv(std::istream& in, const ColumnSchema& schema, LoadReport* report) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) fail(ErrorCode::ParseError, "empty file (no header row)");

  std::vector<std::string> names;
  for (const auto& h : *header) names.emplace_back(schema.trim_whitespace ? trim(h) : std::string_view(h));
  for (const auto& n : names)
    if (std::none_of(schema.columns.begin(), schema.columns.end(), [&](const ColumnSpec& c) { return c.name == n; }))
      fail(ErrorCode::ParseError, fmt::format("header column '{}' is not in the schema", n));

  std::vector<BoundColumn> bound;
  std::vector<std::string> feature_names;
  std::vector<const ColumnSpec*> label_specs;
  std::vector<std::size_t> label_file_index;
  for (const auto& spec : schema.columns) {
    const auto it = std::find(names.begin(), names.end(), spec.name);
    if (it == names.end()) fail(ErrorCode::ParseError, fmt::format("schema column '{}' missing from header", spec.name));
    const auto idx = static_cast<std::size_t>(it - names.begin());
    std::size_t width = 0;
    if (spec.kind == ColumnKind::Numeric) {
      width = 1;
      feature_names.push_back(spec.name);
    } else if (spec.kind == ColumnKind::Categorical) {
      width = binary_width(spec.categories.size());
      for (std::size_t b = 0; b < width; ++b) feature_names.push_back(fmt::format("{}.b{}", spec.name, b));
    } else if (spec.kind == ColumnKind::Label) {
      label_specs.push_back(&spec);
      label_file_index.push_back(idx);
    }
    bound.push_back({&spec, idx, width});
  }
  if (feature_names.empty()) fail(ErrorCode::ConfigError, "schema defines no feature columns");

  std::vector<double> values;
  std::vector<std::vector<int>> label_values(label_specs.size());
  LoadReport local;
  std::vector<double> row_values;
  while (auto rec = reader.next()) {
    const std::size_t line = reader.line();
    if (rec->size() == 1 && rec->front().empty()) continue;  // blank line
    if (rec->size() != names.size())
      fail(ErrorCode::ParseError,
           fmt::format("line {}: {} fields, header has {}", line, rec->size(), names.size()));
    ++local.rows_read;

    std::vector<std::string> fields;
    fields.reserve(rec->size());
    for (auto& f : *rec) fields.emplace_back(schema.trim_whitespace ? std::string(trim(f)) : std::move(f));

    const bool missing = std::any_of(bound.begin(), bound.end(), [&](const BoundColumn& b) {
      if (b.spec->kind == ColumnKind::Drop) return false;
      const auto& v = fields[b.file_index];
      return std::find(schema.na_values.begin(), schema.na_values.end(), v) != schema.na_values.end();
    });
    if (missing) {
      ++local.rows_dropped;
      continue;
    }

    row_values.clear();
    for (const auto& b : bound) {
      const auto& v = fields[b.file_index];
      if (b.spec->kind == ColumnKind::Numeric) {
        const auto d = parse_double(v);
        if (!d)
          fail(ErrorCode::ParseError,
               fmt::format("line {}, column '{}': '{}' is not a number", line, b.spec->name, v));
        row_values.push_back(*d);
      } else if (b.spec->kind == ColumnKind::Categorical) {
        const std::size_t c = category_index(*b.spec, v, line);
        for (std::size_t bit = b.width; bit-- > 0;) row_values.push_back(static_cast<double>((c >> bit) & 1U));
      }
    }
    values.insert(values.end(), row_values.begin(), row_values.end());
    for (std::size_t l = 0; l < label_specs.size(); ++l)
      label_values[l].push_back(static_cast<int>(category_index(*label_specs[l], fields[label_file_index[l]], line)));
  }

  const std::size_t m = feature_names.size();
  const std::size_t n = values.size() / m;
  if (n == 0) fail(ErrorCode::ParseError, "no complete rows remain after dropping missing values");

  LabeledData out;
  out.dataset.feature_names = std::move(feature_names);
  out.dataset.x = Matrix(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) out.dataset.x(i, j) = values[j * m + i];
  for (std::size_t l = 0; l < label_specs.size(); ++l)
    out.labels.push_back({label_specs[l]->name,
                          LabelSet(std::move(label_values[l]), static_cast<int>(label_specs[l]->categories.size())),
                          label_specs[l]->categories});
  if (report) *report = local;
  return out;
}

LabeledData load_csv(const std::string& path, const ColumnSchema& schema, LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  try {
    return load_csv(in, schema, report);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path, e.what()));
  }
}

// ---------------------------------------------------------------- sampling

std::vector<std::size_t> balanced_indices(const LabelSet& l, std::uint64_t seed) {
  l.require_all_classes(ErrorCode::EmptyClass);
  const auto counts = l.counts();
  const std::size_t target = *std::min_element(counts.begin(), counts.end());
  std::vector<std::vector<std::size_t>> members(counts.size());
  for (std::size_t i = 0; i < l.size(); ++i) members[static_cast<std::size_t>(l[i])].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> keep;
  keep.reserve(target * counts.size());
  for (const auto& m : members)
    for (std::size_t pick : sample_without_replacement(m.size(), target, rng)) keep.push_back(m[pick]);
  std::sort(keep.begin(), keep.end());
  return keep;
}

std::pair<Dataset, LabelSet> balance_classes(const Dataset& d, const LabelSet& l, std::uint64_t seed) {
  if (l.size() != d.samples())
    fail(ErrorCode::LengthMismatch, fmt::format("{} labels for {} samples", l.size(), d.samples()));
  const auto idx = balanced_indices(l, seed);
  return {select_samples(d, idx), select_samples(l, idx)};
}

LabeledData balance_on(const LabeledData& data, const std::vector<std::string>& label_names,
                       std::uint64_t seed, bool joint) {
  if (label_names.empty()) return data;
  if (joint) {
    std::vector<int> combined(data.dataset.samples(), 0);
    int classes = 1;
    for (const auto& name : label_names) {
      const auto& l = data.label(name).labels;
      for (std::size_t i = 0; i < combined.size(); ++i) combined[i] = combined[i] * l.class_count() + l[i];
      classes *= l.class_count();
    }
    return data.select(balanced_indices(LabelSet(std::move(combined), classes), seed));
  }
  LabeledData current = data;
  for (std::size_t k = 0; k < label_names.size(); ++k)
    current = current.select(balanced_indices(current.label(label_names[k]).labels, derive_seed(seed, k)));
  return current;
}

void SplitSpec::validate() const {
  if (!(fraction > 0.0 && fraction <= 1.0))
    fail(ErrorCode::InvalidArgument, fmt::format("subsample fraction {} outside (0, 1]", fraction));
}

std::vector<std::size_t> subsample_indices(std::size_t n, const SplitSpec& spec, std::uint64_t iteration) {
  spec.validate();
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(n))), std::size_t{1}, n);
  Rng rng(derive_seed(spec.seed, iteration));
  return sample_without_replacement(n, count, rng);
}

LabeledData subsample(const LabeledData& data, const SplitSpec& spec, std::uint64_t iteration) {
  LabeledData picked = data.select(subsample_indices(data.dataset.samples(), spec, iteration));
  if (!spec.balance_on.empty()) return balance_on(picked, spec.balance_on, derive_seed(spec.seed, ~iteration), false);
  return picked;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(
    const LabelSet& l, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    fail(ErrorCode::InvalidArgument, fmt::format("holdout fraction {} outside [0, 1]", fraction));
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(l.class_count()));
  for (std::size_t i = 0; i < l.size(); ++i) members[static_cast<std::size_t>(l[i])].push_back(i);
  Rng rng(seed);
  std::vector<bool> held(l.size(), false);
  for (const auto& m : members) {
    const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m.size())));
    for (std::size_t pick : sample_without_replacement(m.size(), count, rng)) held[m[pick]] = true;
  }
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < l.size(); ++i) (held[i] ? out.second : out.first).push_back(i);
  return out;
}

// ---------------------------------------------------------------- persistence

void write_dataset_csv(const std::string& path, const Dataset& d) {
  auto out = open_out(path);
  out << csv::join(d.feature_names) << '\n';
  std::string line;
  for (std::size_t j = 0; j < d.samples(); ++j) {
    line.clear();
    for (std::size_t i = 0; i < d.features(); ++i) {
      if (i) line += ',';
      line += fmt::format("{}", d.x(i, j));
    }
    out << line << '\n';
  }
  if (!out) fail(ErrorCode::IoError, fmt::format("write to '{}' failed", path));
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) fail(ErrorCode::ParseError, fmt::format("{}: empty file", path));
  const std::size_t m = header->size();
  std::vector<double> values;
  while (auto rec = reader.next()) {
    if (rec->size() == 1 && rec->front().empty()) continue;
    if (rec->size() != m)
      fail(ErrorCode::ParseError, fmt::format("{}: line {}: {} fields, header has {}", path, reader.line(), rec->size(), m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto v = parse_double((*rec)[i]);
      if (!v)
        fail(ErrorCode::ParseError,
             fmt::format("{}: line {}, column '{}': '{}' is not a number", path, reader.line(), (*header)[i], (*rec)[i]));
      values.push_back(*v);
    }
  }
  Dataset d;
  d.feature_names = *header;
  const std::size_t n = values.size() / m;
  d.x = Matrix(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) d.x(i, j) = values[j * m + i];
  return d;
}

void write_labels_csv(const std::string& path, const std::string& name, const LabelSet& l) {
  auto out = open_out(path);
  out << csv::quote_if_needed(name) << '\n';
  for (int v : l.labels()) out << v << '\n';
  if (!out) fail(ErrorCode::IoError, fmt::format("write to '{}' failed", path));
}

LabelSet read_labels_csv(const std::string& path, int class_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  csv::Reader reader(in);
  if (!reader.next()) fail(ErrorCode::ParseError, fmt::format("{}: empty file", path));
  std::vector<int> labels;
  while (auto rec = reader.next()) {
    if (rec->size() == 1 && rec->front().empty()) continue;
    int v = 0;
    const auto& f = rec->front();
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (rec->size() != 1 || ec != std::errc() || ptr != f.data() + f.size() || v < 0)
      fail(ErrorCode::ParseError, fmt::format("{}: line {}: expected one non-negative integer", path, reader.line()));
    labels.push_back(v);
  }
  if (class_count < 0) {
    const int top = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
    class_count = std::max(2, top + 1);
  }
  return LabelSet(std::move(labels), class_count);
}

namespace {

std::string label_path(const std::string& prefix, const std::string& name) {
  return fmt::format("{}.label.{}.csv", prefix, name);
}

}  // namespace

void write_bundle(const std::string& prefix, const LabeledData& data) {
  write_dataset_csv(prefix + ".features.csv", data.dataset);
  json meta;
  meta["samples"] = data.dataset.samples();
  meta["feature_names"] = data.dataset.feature_names;
  meta["labels"] = json::array();
  for (const auto& l : data.labels) {
    write_labels_csv(label_path(prefix, l.name), l.name, l.labels);
    meta["labels"].push_back({{"name", l.name}, {"classes", l.class_names}});
  }
  auto out = open_out(prefix + ".meta.json");
  out << meta.dump(2) << '\n';
}

LabeledData read_bundle(const std::string& prefix) {
  LabeledData data;
  data.dataset = read_dataset_csv(prefix + ".features.csv");
  const std::string meta_path = prefix + ".meta.json";
  if (std::filesystem::exists(meta_path)) {
    try {
      const json meta = json::parse(read_file(meta_path));
      for (const auto& l : meta.at("labels")) {
        NamedLabels nl;
        nl.name = l.at("name").get<std::string>();
        nl.class_names = l.at("classes").get<std::vector<std::string>>();
        nl.labels = read_labels_csv(label_path(prefix, nl.name), static_cast<int>(nl.class_names.size()));
        data.labels.push_back(std::move(nl));
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, fmt::format("{}: {}", meta_path, e.what()));
    }
  } else {
    // No metadata: discover P.label.*.csv next to the features file.
    const std::filesystem::path p(prefix);
    const auto dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
    const std::string stem = p.filename().string() + ".label.";
    std::vector<std::string> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const std::string f = entry.path().filename().string();
      if (f.starts_with(stem) && f.ends_with(".csv"))
        found.push_back(f.substr(stem.size(), f.size() - stem.size() - 4));
    }
    std::sort(found.begin(), found.end());
    for (const auto& name : found) {
      NamedLabels nl{name, read_labels_csv(label_path(prefix, name)), {}};
      for (int c = 0; c < nl.labels.class_count(); ++c) nl.class_names.push_back(std::to_string(c));
      data.labels.push_back(std::move(nl));
    }
  }
  for (const auto& l : data.labels)
    if (l.labels.size() != data.dataset.samples())
      fail(ErrorCode::LengthMismatch, fmt::format("label '{}' has {} rows, features have {}", l.name,
                                                  l.labels.size(), data.dataset.samples()));
  return data;
}

}  // namespace privproj
