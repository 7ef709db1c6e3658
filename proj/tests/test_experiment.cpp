#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "privproj/error.hpp"
#include "privproj/experiment.hpp"
#include "support/generators.hpp"

using namespace privproj;
using nlohmann::json;
using privproj::testing::correlated_two_gaussian;

namespace {

DataBundle synthetic_bundle(std::uint64_t seed, std::size_t n, std::size_t m = 10) {
  Rng rng(seed);
  DataBundle b;
  b.train = correlated_two_gaussian(rng, n, m);
  b.test = correlated_two_gaussian(rng, n, m);
  return b;
}

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.utility_label = "utility";
  cfg.privacy_labels = {"privacy"};
  cfg.classifier = {ClassifierKind::KNN, 5};
  cfg.iterations = 3;
  cfg.subsample_fraction = 0.5;
  cfg.seed = 11;
  return cfg;
}

MethodGrid grid(Method m, std::vector<std::size_t> ks, std::vector<std::vector<double>> w = {}) {
  MethodGrid g;
  g.method = m;
  g.ks = std::move(ks);
  g.privacy_weights = std::move(w);
  return g;
}

const TradeoffPoint& find_point(const std::vector<TradeoffPoint>& pts, const std::string& method,
                                std::vector<double> weights = {}) {
  for (const auto& p : pts)
    if (p.method == method && (weights.empty() || p.privacy_weights == weights)) return p;
  throw std::runtime_error("no point for " + method);
}

std::string csv_of(const std::vector<TradeoffPoint>& pts) {
  std::ostringstream out;
  write_tradeoff_csv(out, pts);
  return out.str();
}

std::size_t count_of(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

TradeoffPoint make_point(std::string method, std::size_t k, double acc_u, double acc_p) {
  TradeoffPoint p;
  p.method = std::move(method);
  p.k = k;
  p.acc_u_mean = acc_u;
  p.acc_p_mean = {acc_p};
  p.acc_p_std = {0.0};
  for (double b : {0.5, 1.0}) p.performance.emplace_back(b, performance(acc_u, acc_p, b));
  return p;
}

}  // namespace

TEST(Performance, TableValue) { EXPECT_NEAR(performance(0.8624, 0.5841, 1.0), 1.2783, 1e-12); }

TEST(Performance, EdgeCases) {
  for (double a : {0.0, 0.3, 1.0})
    for (double p : {0.0, 0.7, 1.0}) EXPECT_EQ(performance(a, p, 0.0), a);
  EXPECT_EQ(performance(0.5, 1.0, 7.3), 0.5);
}

TEST(Performance, LinearInBetaAndDecreasingInPrivacyAccuracy) {
  for (double a = 0.0; a <= 1.0; a += 0.125)
    for (double p = 0.0; p <= 1.0; p += 0.125) {
      const double f0 = performance(a, p, 0.0), f1 = performance(a, p, 1.0);
      for (double b = 0.0; b <= 4.0; b += 0.5) EXPECT_NEAR(performance(a, p, b), f0 + b * (f1 - f0), 1e-14);
      for (double b : {0.0, 0.5, 2.0}) EXPECT_LE(performance(a, p + 0.125, b), performance(a, p, b));
    }
}

TEST(Aggregation, MeanAndSampleStd) {
  const auto [m, s] = mean_and_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(s, std::sqrt(5.0 / 3.0), 1e-15);
  const auto [m1, s1] = mean_and_std({0.7});
  EXPECT_EQ(m1, 0.7);
  EXPECT_EQ(s1, 0.0);
  EXPECT_TRUE(std::isnan(mean_and_std({}).first));
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg = base_config();
  cfg.privacy_labels = {"a", "b"};
  cfg.betas = {0.0, 0.5, 1.0};
  cfg.standardize = true;
  cfg.priced_privacy = PricedPrivacy::Max;
  cfg.methods = {grid(Method::PCA, {1, 2}), grid(Method::RUCA, {1}, {{1.0, 0.0}, {4.0, 2.0}})};
  cfg.methods[1].rho = 1e-3;
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(back.methods[1].privacy_weights[1], (std::vector<double>{4.0, 2.0}));
  EXPECT_EQ(*back.methods[1].rho, 1e-3);
  EXPECT_FALSE(back.methods[0].rho.has_value());
}

TEST(Config, BareWeightsWeighFirstTask) {
  const json j = json::parse(R"({"utility_label":"u","privacy_labels":["p","q"],
    "methods":[{"method":"RUCA","k":2,"privacy_weights":[0,3]}]})");
  const auto cfg = ExperimentConfig::from_json(j);
  ASSERT_EQ(cfg.methods[0].privacy_weights.size(), 2u);
  EXPECT_EQ(cfg.methods[0].privacy_weights[1], (std::vector<double>{3.0, 0.0}));
  EXPECT_EQ(cfg.methods[0].ks, std::vector<std::size_t>{2});
}

TEST(Config, Rejections) {
  const auto rejects = [](const char* text) {
    try {
      ExperimentConfig::from_json(json::parse(text));
    } catch (const Error& e) {
      return e.code() == ErrorCode::ConfigError;
    }
    return false;
  };
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":[{"method":"DCA"}],"iterations":0})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":[{"method":"DCA"}],"betas":[-1]})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":[{"method":"DCA"}],
    "subsample_fraction":1.5})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":[{"method":"LDA"}]})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":[{"method":"DCA","k":0}]})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],
    "methods":[{"method":"RUCA","privacy_weights":[[1,2]]}]})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],
    "methods":[{"method":"RUCA","privacy_weights":[-1]}]})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":[],"methods":[{"method":"RUCA","privacy_weights":[1]}]})"));
  EXPECT_TRUE(rejects(R"({"privacy_labels":["p"],"methods":[{"method":"DCA"}]})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":[{"method":"DCA"}],
    "classifier":{"kind":"knn","k_neighbors":4}})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":[{"method":"DCA"}],
    "priced_privacy":"mean"})"));
  EXPECT_TRUE(rejects(R"({"utility_label":"u","privacy_labels":["p"],"methods":"DCA"})"));
}

TEST(Config, ShippedConfigsParse) {
  const auto dir = std::filesystem::path(PRIVPROJ_DATA_DIR).parent_path() / "configs";
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    EXPECT_NO_THROW(ExperimentConfig::from_json(json::parse(in))) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 3u);
}

TEST(Sweep, FullRankPcaMatchesFullDimensionalRow) {
  auto cfg = base_config();
  cfg.iterations = 1;
  cfg.subsample_fraction = 1.0;
  cfg.methods = {grid(Method::PCA, {10})};
  const auto pts = run_sweep(cfg, synthetic_bundle(1, 300));
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].method, "FULL");
  EXPECT_EQ(pts[0].k, 10u);
  EXPECT_EQ(pts[1].acc_u_mean, pts[0].acc_u_mean);
  EXPECT_EQ(pts[1].acc_p_mean, pts[0].acc_p_mean);
}

TEST(Sweep, ZeroWeightRucaRowEqualsDcaRow) {
  auto cfg = base_config();
  cfg.methods = {grid(Method::DCA, {1, 2}), grid(Method::RUCA, {1, 2}, {{0.0}})};
  const auto pts = run_sweep(cfg, synthetic_bundle(2, 400));
  for (std::size_t k : {1u, 2u}) {
    const TradeoffPoint *dca = nullptr, *ruca = nullptr;
    for (const auto& p : pts) {
      if (p.k != k) continue;
      if (p.method == "DCA") dca = &p;
      if (p.method == "RUCA") ruca = &p;
    }
    ASSERT_TRUE(dca && ruca);
    EXPECT_EQ(dca->acc_u_runs, ruca->acc_u_runs);
    EXPECT_EQ(dca->acc_p_runs, ruca->acc_p_runs);
    EXPECT_EQ(dca->performance, ruca->performance);
  }
}

TEST(Sweep, DeterministicAcrossRunsAndThreadCounts) {
  auto cfg = base_config();
  cfg.iterations = 4;
  cfg.methods = {grid(Method::PCA, {1, 3}), grid(Method::RANDOM, {2}), grid(Method::MDR, {1}),
                 grid(Method::RUCA, {1}, {{1.0}, {16.0}})};
  const auto bundle = synthetic_bundle(3, 300);
  const std::string a = csv_of(run_sweep(cfg, bundle, 1));
  EXPECT_EQ(a, csv_of(run_sweep(cfg, bundle, 1)));
  EXPECT_EQ(a, csv_of(run_sweep(cfg, bundle, 3)));
  cfg.seed = 12;
  EXPECT_NE(a, csv_of(run_sweep(cfg, bundle, 1)));
}

TEST(Sweep, AggregatesMatchStoredRuns) {
  auto cfg = base_config();
  cfg.iterations = 5;
  cfg.betas = {0.0, 0.5, 2.0};
  cfg.methods = {grid(Method::DCA, {1}), grid(Method::RUCA, {1, 2}, {{4.0}})};
  for (const auto& p : run_sweep(cfg, synthetic_bundle(4, 300))) {
    ASSERT_TRUE(p.ok());
    ASSERT_EQ(p.acc_u_runs.size(), 5u);
    double mean = 0.0;
    for (double v : p.acc_u_runs) mean += v;
    mean /= 5.0;
    double ss = 0.0;
    for (double v : p.acc_u_runs) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(p.acc_u_mean, mean, 1e-15);
    EXPECT_NEAR(p.acc_u_std, std::sqrt(ss / 4.0), 1e-15);
    double pmean = 0.0;
    for (double v : p.acc_p_runs[0]) pmean += v;
    EXPECT_NEAR(p.acc_p_mean[0], pmean / 5.0, 1e-15);
    for (const auto& [beta, value] : p.performance)
      EXPECT_EQ(value, p.acc_u_mean + beta * (1.0 - p.acc_p_mean[0]));
  }
}

TEST(Sweep, PricedPrivacyModes) {
  DataBundle b = synthetic_bundle(5, 300);
  // A second privacy task that copies the utility label is maximally leaky.
  for (LabeledData* d : {&b.train, &b.test}) d->labels.push_back({"leaky", d->labels[0].labels, {"a", "b"}});
  auto cfg = base_config();
  cfg.privacy_labels = {"privacy", "leaky"};
  cfg.methods = {grid(Method::DCA, {1})};
  const auto first = run_sweep(cfg, b);
  cfg.priced_privacy = PricedPrivacy::Max;
  const auto max = run_sweep(cfg, b);
  const auto& p = first[1];
  const auto& q = max[1];
  ASSERT_EQ(p.acc_p_mean.size(), 2u);
  EXPECT_EQ(p.performance[1].second, performance(p.acc_u_mean, p.acc_p_mean[0], 1.0));
  EXPECT_EQ(q.performance[1].second,
            performance(q.acc_u_mean, std::max(q.acc_p_mean[0], q.acc_p_mean[1]), 1.0));
}

TEST(Sweep, FailedCellIsRecordedNotFatal) {
  auto cfg = base_config();
  cfg.methods = {grid(Method::DCA, {1, 50})};
  const auto pts = run_sweep(cfg, synthetic_bundle(6, 200));
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_TRUE(pts[0].ok());
  EXPECT_TRUE(pts[1].ok());
  EXPECT_FALSE(pts[2].ok());
  EXPECT_TRUE(pts[2].status.starts_with("failed: iteration 0:")) << pts[2].status;
  EXPECT_TRUE(std::isnan(pts[2].acc_u_mean));
  const std::string text = csv_of(pts);
  EXPECT_NE(text.find(",nan,"), std::string::npos);
}

TEST(Sweep, MissingLabelAndShapeErrorsPropagate) {
  auto cfg = base_config();
  cfg.methods = {grid(Method::DCA, {1})};
  auto b = synthetic_bundle(7, 100);
  cfg.privacy_labels = {"nope"};
  EXPECT_THROW(run_sweep(cfg, b), Error);
  cfg.privacy_labels = {"privacy"};
  Rng rng(1);
  b.test = correlated_two_gaussian(rng, 50, 9);
  try {
    run_sweep(cfg, b);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Sweep, PrivacyAccuracyFallsAsWeightGrows) {
  auto cfg = base_config();
  cfg.iterations = 5;
  cfg.methods = {grid(Method::RUCA, {1}, {{0.0}, {1.0}, {10.0}, {100.0}, {1000.0}})};
  const auto pts = run_sweep(cfg, synthetic_bundle(8, 1000));
  std::vector<const TradeoffPoint*> ruca;
  for (const auto& p : pts)
    if (p.method == "RUCA") ruca.push_back(&p);
  ASSERT_EQ(ruca.size(), 5u);
  for (std::size_t i = 1; i < ruca.size(); ++i) {
    const double slack = 2.0 * std::hypot(ruca[i]->acc_p_std[0], ruca[i - 1]->acc_p_std[0]);
    EXPECT_LE(ruca[i]->acc_p_mean[0], ruca[i - 1]->acc_p_mean[0] + slack) << "step " << i;
  }
  // Large weights push the privacy task down to the two-class chance rate.
  EXPECT_LT(ruca.back()->acc_p_mean[0], ruca.front()->acc_p_mean[0] - 0.05);
  EXPECT_NEAR(ruca.back()->acc_p_mean[0], 0.5, 0.05);
}

TEST(Sweep, RucaDominatesOnSyntheticBundle) {
  int wins = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    auto cfg = base_config();
    cfg.seed = 100 + s;
    cfg.iterations = 2;
    cfg.betas = {1.0};
    cfg.full_dimensional = false;
    cfg.methods = {grid(Method::DCA, {1}), grid(Method::MDR, {1}),
                   grid(Method::RUCA, {1}, {{0.0}, {1.0}, {4.0}, {16.0}, {64.0}})};
    const auto pts = run_sweep(cfg, synthetic_bundle(200 + s, 400));
    double best = -1.0;
    for (const auto& p : pts)
      if (p.method == "RUCA") best = std::max(best, p.performance[0].second);
    const double dca = find_point(pts, "DCA").performance[0].second;
    const double mdr = find_point(pts, "MDR").performance[0].second;
    if (best >= dca && best >= mdr) ++wins;
  }
  EXPECT_GE(wins, (seeds * 4 + 4) / 5) << wins << " of " << seeds;
}

TEST(TradeoffCsv, ColumnContract) {
  std::vector<TradeoffPoint> pts{make_point("DCA", 1, 0.8, 0.6)};
  const std::string text = csv_of(pts);
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_EQ(header, "method,k,privacy_weights,acc_u_mean,acc_u_std,acc_p0_mean,acc_p0_std,perf@0.5,perf@1,status");
  EXPECT_EQ(count_of(text, "\n"), 2u);
}

TEST(TradeoffCsv, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "privproj_test_experiment";
  std::filesystem::create_directories(dir);
  auto cfg = base_config();
  cfg.betas = {0.0, 0.5, 1.0};
  cfg.methods = {grid(Method::PCA, {1, 2}), grid(Method::RUCA, {1}, {{2.5}})};
  const auto pts = run_sweep(cfg, synthetic_bundle(9, 200));
  const std::string base = (dir / "curve").string();
  emit_tradeoff_curve(pts, base);
  const auto back = read_tradeoff_csv(base + ".csv");
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].method, pts[i].method);
    EXPECT_EQ(back[i].k, pts[i].k);
    EXPECT_EQ(back[i].privacy_weights, pts[i].privacy_weights);
    EXPECT_EQ(back[i].acc_u_mean, pts[i].acc_u_mean);
    EXPECT_EQ(back[i].acc_p_std, pts[i].acc_p_std);
    EXPECT_EQ(back[i].performance, pts[i].performance);
    EXPECT_EQ(back[i].status, pts[i].status);
  }
  EXPECT_TRUE(std::filesystem::exists(base + ".svg"));
  std::filesystem::remove_all(dir);
}

TEST(TradeoffCsv, Errors) {
  std::ostringstream out;
  EXPECT_THROW(write_tradeoff_csv(out, {}), Error);
  EXPECT_THROW(emit_tradeoff_curve({}, "/nonexistent/x"), Error);
  try {
    read_tradeoff_csv("/nonexistent/curve.csv");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  try {
    emit_tradeoff_curve({make_point("DCA", 1, 0.5, 0.5)}, "/nonexistent/dir/x");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(TradeoffSvg, SinglePointWithBaseline) {
  std::vector<TradeoffPoint> pts{make_point("FULL", 10, 0.9, 0.7), make_point("DCA", 1, 0.8, 0.6)};
  const std::string svg = render_tradeoff_svg(pts, PricedPrivacy::First);
  EXPECT_EQ(count_of(svg, "<circle"), 1u);
  EXPECT_EQ(count_of(svg, "<polyline"), 1u);
  EXPECT_EQ(count_of(svg, "class=\"baseline\""), 1u);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_TRUE(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
  EXPECT_EQ(svg.find("href"), std::string::npos);
  EXPECT_EQ(svg.find("<image"), std::string::npos);
}

TEST(TradeoffSvg, OnePolylinePerMethodWithLegend) {
  std::vector<TradeoffPoint> pts{make_point("DCA", 2, 0.85, 0.6), make_point("DCA", 1, 0.8, 0.5),
                                 make_point("MDR", 1, 0.7, 0.4)};
  const std::string svg = render_tradeoff_svg(pts, PricedPrivacy::First);
  EXPECT_EQ(count_of(svg, "<polyline"), 2u);
  EXPECT_EQ(count_of(svg, "<circle"), 3u);
  EXPECT_EQ(count_of(svg, "class=\"baseline\""), 0u);
  std::vector<std::string> legend;
  const std::regex re("<text class=\"legend\"[^>]*>([^<]*)</text>");
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) legend.push_back((*it)[1]);
  EXPECT_EQ(legend, (std::vector<std::string>{"DCA", "MDR"}));
  // Points are drawn in order of K: DCA K=1 (x = 0.5) comes before K=2 (x = 0.4), so x decreases.
  const std::regex poly("<polyline points=\"([0-9.]+),[0-9.]+ ([0-9.]+),");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, poly));
  EXPECT_GT(std::stod(m[1]), std::stod(m[2]));
}

TEST(TradeoffSvg, RucaWeightsGetSeparateSeries) {
  auto a = make_point("RUCA", 1, 0.8, 0.5);
  a.privacy_weights = {1.0};
  auto b = make_point("RUCA", 1, 0.7, 0.4);
  b.privacy_weights = {16.0};
  const std::string svg = render_tradeoff_svg({a, b}, PricedPrivacy::First);
  EXPECT_EQ(count_of(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("RUCA (rho_p=16)"), std::string::npos);
}
