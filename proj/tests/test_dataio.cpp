#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "privproj/csv.hpp"
#include "privproj/dataio.hpp"
#include "privproj/error.hpp"

using namespace privproj;

namespace {

const char* kToySchema = R"({
  "trim_whitespace": true,
  "na_values": ["", "?"],
  "columns": [
    {"name": "x", "kind": "numeric"},
    {"name": "color", "kind": "categorical", "categories": ["a", "b", "c"]},
    {"name": "flag", "kind": "categorical", "categories": ["no", "yes"]},
    {"name": "id", "kind": "drop"},
    {"name": "group", "kind": "label", "categories": ["g0", "g1"], "aliases": {"G1": "g1"}}
  ]
})";

LabeledData load_text(const std::string& text, const ColumnSchema& schema, LoadReport* report = nullptr) {
  std::istringstream in(text);
  return load_csv(in, schema, report);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

std::string error_text(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("privproj_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Csv, QuotedFieldsAndLineNumbers) {
  std::istringstream in("a,b\r\n\"x,1\",\"he said \"\"hi\"\"\"\n\"multi\nline\",z\n");
  csv::Reader r(in);
  EXPECT_EQ(*r.next(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(*r.next(), (std::vector<std::string>{"x,1", "he said \"hi\""}));
  EXPECT_EQ(r.line(), 2u);
  EXPECT_EQ(*r.next(), (std::vector<std::string>{"multi\nline", "z"}));
  EXPECT_EQ(r.line(), 3u);
  EXPECT_FALSE(r.next());
  EXPECT_EQ(csv::join({"plain", "has,comma", "has\"quote"}), "plain,\"has,comma\",\"has\"\"quote\"");
}

TEST(Csv, UnterminatedQuote) {
  std::istringstream in("a\n\"open\n");
  csv::Reader r(in);
  r.next();
  EXPECT_EQ(code_of([&] { r.next(); }), ErrorCode::ParseError);
}

TEST(BinaryEncoding, Widths) {
  EXPECT_EQ(binary_width(2), 1u);
  EXPECT_EQ(binary_width(3), 2u);
  EXPECT_EQ(binary_width(4), 2u);
  EXPECT_EQ(binary_width(5), 3u);
  EXPECT_EQ(binary_width(16), 4u);
  EXPECT_EQ(binary_width(41), 6u);
}

TEST(LoadCsv, EncodesCategoriesMsbFirst) {
  const auto schema = ColumnSchema::from_json_text(kToySchema);
  const auto data = load_text("x,color,flag,id,group\n1.5, c, yes, 7, g0\n-2, a, no, 8, G1\n", schema);
  ASSERT_EQ(data.dataset.features(), 4u);
  EXPECT_EQ(data.dataset.feature_names, (std::vector<std::string>{"x", "color.b0", "color.b1", "flag.b0"}));
  // "c" is index 2 -> bits (1, 0); "yes" -> 1.
  EXPECT_EQ(data.dataset.x, Matrix::from_rows({{1.5, -2}, {1, 0}, {0, 0}, {1, 0}}));
  ASSERT_EQ(data.labels.size(), 1u);
  EXPECT_EQ(data.label("group").labels.labels(), (std::vector<int>{0, 1}));
  EXPECT_EQ(data.label("group").class_names, (std::vector<std::string>{"g0", "g1"}));
}

TEST(LoadCsv, EncodingIsInjective) {
  ColumnSpec spec{"c", ColumnKind::Categorical, {}, {}, std::nullopt};
  for (int i = 0; i < 41; ++i) spec.categories.push_back("v" + std::to_string(i));
  ColumnSchema schema;
  schema.columns = {spec, {"y", ColumnKind::Label, {"0", "1"}, {}, std::nullopt}};
  std::string text = "c,y\n";
  for (int i = 0; i < 41; ++i) text += "v" + std::to_string(i) + "," + std::to_string(i % 2) + "\n";
  const auto data = load_text(text, schema);
  std::set<std::vector<double>> patterns;
  for (std::size_t j = 0; j < data.dataset.samples(); ++j) {
    auto col = data.dataset.x.col(j);
    patterns.emplace(col.begin(), col.end());
  }
  EXPECT_EQ(patterns.size(), 41u);
}

TEST(LoadCsv, DropsRowsWithMissingValues) {
  const auto schema = ColumnSchema::from_json_text(kToySchema);
  LoadReport report;
  const auto data = load_text("x,color,flag,id,group\n1,a,no,?,g0\n,b,no,1,g1\n2,?,yes,1,g1\n3,b,yes,1,?\n4,b,yes,1,g1\n",
                              schema, &report);
  EXPECT_EQ(report.rows_read, 5u);
  EXPECT_EQ(report.rows_dropped, 3u);  // the dropped column may be missing
  EXPECT_EQ(data.dataset.samples(), 2u);
}

TEST(LoadCsv, UnknownCategoryNamesColumnAndValue) {
  const auto schema = ColumnSchema::from_json_text(kToySchema);
  const std::string text = "x,color,flag,id,group\n1,purple,no,1,g0\n";
  EXPECT_EQ(code_of([&] { load_text(text, schema); }), ErrorCode::UnknownCategory);
  const auto msg = error_text([&] { load_text(text, schema); });
  EXPECT_NE(msg.find("color"), std::string::npos);
  EXPECT_NE(msg.find("purple"), std::string::npos);
  EXPECT_NE(msg.find("line 2"), std::string::npos);
}

TEST(LoadCsv, StructuralErrors) {
  const auto schema = ColumnSchema::from_json_text(kToySchema);
  EXPECT_EQ(code_of([&] { load_text("", schema); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { load_text("x,color,flag,id\n", schema); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { load_text("x,color,flag,id,group,extra\n", schema); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { load_text("x,color,flag,id,group\n1,a,no\n", schema); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { load_text("x,color,flag,id,group\nabc,a,no,1,g0\n", schema); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { load_csv(std::string("/nonexistent.csv"), ColumnSchema::from_json_text(kToySchema)); }),
            ErrorCode::IoError);
}

TEST(Schema, RejectsBadDefinitions) {
  EXPECT_EQ(code_of([] { ColumnSchema::from_json_text("{"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { ColumnSchema::from_json_text(R"({"columns":[{"name":"a","kind":"weird"}]})"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              ColumnSchema::from_json_text(R"({"columns":[{"name":"a","kind":"numeric","missing_policy":"impute"}]})");
            }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              ColumnSchema::from_json_text(R"({"columns":[{"name":"a","kind":"numeric"},{"name":"a","kind":"numeric"}]})");
            }),
            ErrorCode::ConfigError);
}

TEST(LoadCsv, IsPure) {
  const auto schema = ColumnSchema::from_json_text(kToySchema);
  const std::string text = "x,color,flag,id,group\n1,a,no,1,g0\n2,b,yes,2,g1\n";
  const auto a = load_text(text, schema);
  const auto b = load_text(text, schema);
  EXPECT_EQ(a.dataset.x, b.dataset.x);
  EXPECT_EQ(a.label("group").labels.labels(), b.label("group").labels.labels());
}

TEST(CensusMarital, Groups) {
  EXPECT_EQ(recode_census_marital("Married-AF-spouse"), "Married");
  EXPECT_EQ(recode_census_marital("Married-civ-spouse"), "Married");
  EXPECT_EQ(recode_census_marital("Married-spouse-absent"), "Married");
  EXPECT_EQ(recode_census_marital("Widowed"), "Used to be Married");
  EXPECT_EQ(recode_census_marital("Divorced"), "Used to be Married");
  EXPECT_EQ(recode_census_marital("Separated"), "Used to be Married");
  EXPECT_EQ(recode_census_marital("Never-married"), "Never Married");
  EXPECT_EQ(code_of([] { recode_census_marital("Engaged"); }), ErrorCode::UnknownCategory);
}

TEST(Balance, UndersamplesToTheSmallestClass) {
  std::vector<int> ids(14, 0);
  std::fill(ids.begin() + 10, ids.end(), 1);
  const LabelSet l(ids, 2);
  const auto idx = balanced_indices(l, 3);
  const auto picked = select_samples(l, idx);
  EXPECT_EQ(picked.counts(), (std::vector<std::size_t>{4, 4}));
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  for (std::size_t i : idx) EXPECT_LT(i, 14u);
  EXPECT_EQ(balanced_indices(l, 3), idx);
  // All four class-1 rows survive.
  for (std::size_t i = 10; i < 14; ++i) EXPECT_NE(std::find(idx.begin(), idx.end(), i), idx.end());
}

TEST(Balance, AlreadyBalancedKeepsEverything) {
  const LabelSet l({0, 1, 1, 0, 2, 2}, 3);
  const auto idx = balanced_indices(l, 99);
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Balance, JointBalancingEqualizesEveryLabel) {
  LabeledData data;
  const std::size_t n = 300;
  Matrix x(1, n);
  std::vector<int> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(0, i) = static_cast<double>(i);
    a[i] = static_cast<int>((i * 7) % 3);
    b[i] = (i % 5 == 0) ? 1 : 0;
  }
  data.dataset = Dataset::from_matrix(x);
  data.labels.push_back({"a", LabelSet(a, 3), {"0", "1", "2"}});
  data.labels.push_back({"b", LabelSet(b, 2), {"0", "1"}});
  const auto joint = balance_on(data, {"a", "b"}, 5, true);
  const auto ca = joint.label("a").labels.counts();
  const auto cb = joint.label("b").labels.counts();
  EXPECT_EQ(ca[0], ca[1]);
  EXPECT_EQ(ca[1], ca[2]);
  EXPECT_EQ(cb[0], cb[1]);
  const auto seq = balance_on(data, {"a", "b"}, 5, false);
  const auto sb = seq.label("b").labels.counts();
  EXPECT_EQ(sb[0], sb[1]);
  // Samples keep their original feature values (subset of input rows).
  for (std::size_t j = 0; j < joint.dataset.samples(); ++j) {
    const auto i = static_cast<std::size_t>(joint.dataset.x(0, j));
    EXPECT_EQ(joint.label("a").labels[j], a[i]);
  }
}

TEST(Subsample, Sizes) {
  SplitSpec spec{11, 0.1, {}};
  EXPECT_EQ(subsample_indices(10086, spec, 0).size(), 1008u);
  spec.fraction = 1.0;
  for (std::uint64_t it = 0; it < 3; ++it) EXPECT_EQ(subsample_indices(50, spec, it).size(), 50u);
  spec.fraction = 0.001;
  EXPECT_EQ(subsample_indices(50, spec, 0).size(), 1u);
  spec.fraction = 0.0;
  EXPECT_EQ(code_of([&] { subsample_indices(50, spec, 0); }), ErrorCode::InvalidArgument);
}

TEST(Subsample, IterationsDifferAndReproduce) {
  const SplitSpec spec{11, 0.1, {}};
  const auto a = subsample_indices(10086, spec, 0);
  const auto b = subsample_indices(10086, spec, 1);
  EXPECT_NE(a, b);
  EXPECT_EQ(a, subsample_indices(10086, spec, 0));
}

TEST(Holdout, PerClassFraction) {
  std::vector<int> ids;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 10 * (c + 1); ++i) ids.push_back(c);
  const LabelSet l(ids, 3);
  const auto [kept, held] = stratified_holdout(l, 0.3, 4);
  EXPECT_EQ(kept.size() + held.size(), ids.size());
  const auto hc = select_samples(l, held).counts();
  EXPECT_EQ(hc, (std::vector<std::size_t>{3, 6, 9}));
}

TEST(Bundle, RoundTripIsExact) {
  const auto dir = temp_dir("bundle");
  LabeledData data;
  data.dataset.x = Matrix::from_rows({{0.1, 1e-300, -3.25}, {1.0 / 3.0, 2.0, 1e17}});
  data.dataset.feature_names = {"first", "second,quoted"};
  data.labels.push_back({"task", LabelSet({0, 2, 1}, 3), {"a", "b", "c"}});
  data.labels.push_back({"other", LabelSet({1, 0, 1}, 2), {"n", "y"}});
  write_bundle((dir / "set").string(), data);
  const auto back = read_bundle((dir / "set").string());
  EXPECT_EQ(back.dataset.x, data.dataset.x);
  EXPECT_EQ(back.dataset.feature_names, data.dataset.feature_names);
  ASSERT_EQ(back.labels.size(), 2u);
  EXPECT_EQ(back.label("task").labels.labels(), data.label("task").labels.labels());
  EXPECT_EQ(back.label("task").class_names, data.label("task").class_names);
  EXPECT_EQ(back.label("other").labels.class_count(), 2);
}

TEST(Bundle, WithoutMetadataDiscoversLabels) {
  const auto dir = temp_dir("bundle_nometa");
  LabeledData data;
  data.dataset = Dataset::from_matrix(Matrix::from_rows({{1, 2, 3, 4}}));
  data.labels.push_back({"y", LabelSet({0, 1, 2, 1}, 3), {"0", "1", "2"}});
  write_bundle((dir / "p").string(), data);
  std::filesystem::remove(dir / "p.meta.json");
  const auto back = read_bundle((dir / "p").string());
  EXPECT_EQ(back.label("y").labels.labels(), (std::vector<int>{0, 1, 2, 1}));
  EXPECT_EQ(back.label("y").labels.class_count(), 3);
}

TEST(Census, ShippedSchemaGives29Features) {
  const std::string root = PRIVPROJ_DATA_DIR;
  auto schema = ColumnSchema::from_json_file(root + "/schemas/census.json");
  schema.find("marital-status")->recode = "census_marital";
  schema.find("marital-status")->categories = census_marital_groups();
  LoadReport report;
  const auto data = load_csv(root + "/adult/adult_test.csv", schema, &report);
  EXPECT_EQ(data.dataset.features(), 29u);
  EXPECT_EQ(report.rows_read, 16281u);
  EXPECT_EQ(data.dataset.samples(), 15060u);
  EXPECT_EQ(data.label("marital-status").labels.class_count(), 3);
  EXPECT_EQ(data.label("income").labels.class_count(), 2);
}
