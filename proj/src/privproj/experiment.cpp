#include "privproj/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "privproj/csv.hpp"
#include "privproj/error.hpp"
#include "privproj/rng.hpp"
#include "privproj/svg_chart.hpp"

namespace privproj {

using nlohmann::json;

double performance(double acc_u, double acc_p, double beta) { return acc_u + beta * (1.0 - acc_p); }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::pair<double, double> mean_and_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

double TradeoffPoint::priced_acc_p(PricedPrivacy mode) const {
  if (acc_p_mean.empty()) return std::nan("");
  if (mode == PricedPrivacy::First) return acc_p_mean.front();
  return *std::max_element(acc_p_mean.begin(), acc_p_mean.end());
}

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  if (iterations < 1) fail(ErrorCode::ConfigError, "iterations must be >= 1");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    fail(ErrorCode::ConfigError, fmt::format("subsample_fraction {} outside (0, 1]", subsample_fraction));
  for (double b : betas)
    if (!(b >= 0.0)) fail(ErrorCode::ConfigError, fmt::format("beta {} is negative", b));
  if (utility_label.empty()) fail(ErrorCode::ConfigError, "utility_label is required");
  if (privacy_labels.empty()) fail(ErrorCode::ConfigError, "at least one privacy label is required");
  if (methods.empty() && !full_dimensional) fail(ErrorCode::ConfigError, "no methods to run");
  try {
    classifier.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  for (const auto& m : methods) {
    if (m.ks.empty()) fail(ErrorCode::ConfigError, fmt::format("{}: empty k list", to_string(m.method)));
    for (std::size_t k : m.ks)
      if (k < 1) fail(ErrorCode::ConfigError, fmt::format("{}: k must be >= 1", to_string(m.method)));
    for (const auto& w : m.privacy_weights) {
      if (w.size() != privacy_labels.size())
        fail(ErrorCode::ConfigError, fmt::format("{}: weight vector of length {} for {} privacy labels",
                                                 to_string(m.method), w.size(), privacy_labels.size()));
      for (double x : w)
        if (!(x >= 0.0)) fail(ErrorCode::ConfigError, fmt::format("negative privacy weight {}", x));
    }
  }
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.iterations = j.value("iterations", std::size_t{1});
    cfg.subsample_fraction = j.value("subsample_fraction", 1.0);
    if (j.contains("betas")) cfg.betas = j["betas"].get<std::vector<double>>();
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.utility_label = j.at("utility_label").get<std::string>();
    cfg.privacy_labels = j.at("privacy_labels").get<std::vector<std::string>>();
    cfg.standardize = j.value("standardize", false);
    cfg.full_dimensional = j.value("full_dimensional", true);
    const std::string priced = j.value("priced_privacy", std::string("first"));
    if (priced == "first") cfg.priced_privacy = PricedPrivacy::First;
    else if (priced == "max") cfg.priced_privacy = PricedPrivacy::Max;
    else fail(ErrorCode::ConfigError, fmt::format("priced_privacy must be 'first' or 'max', got '{}'", priced));
    if (j.contains("classifier")) {
      const auto& c = j["classifier"];
      cfg.classifier.kind = parse_classifier(c.value("kind", std::string("knn")));
      cfg.classifier.k_neighbors = c.value("k_neighbors", 5);
    }
    for (const auto& m : j.at("methods")) {
      MethodGrid g;
      g.method = parse_method(m.at("method").get<std::string>());
      if (m.contains("k")) {
        g.ks = m["k"].is_array() ? m["k"].get<std::vector<std::size_t>>()
                                 : std::vector<std::size_t>{m["k"].get<std::size_t>()};
      }
      if (m.contains("privacy_weights")) {
        // A bare number w means (w, 0, ..., 0): weight on the first privacy task only.
        for (const auto& w : m["privacy_weights"]) {
          if (w.is_number()) {
            if (cfg.privacy_labels.empty()) fail(ErrorCode::ConfigError, "privacy_weights given without privacy_labels");
            std::vector<double> v(cfg.privacy_labels.size(), 0.0);
            v.at(0) = w.get<double>();
            g.privacy_weights.push_back(std::move(v));
          } else {
            g.privacy_weights.push_back(w.get<std::vector<double>>());
          }
        }
      }
      if (m.contains("rho") && !m["rho"].is_null()) g.rho = m["rho"].get<double>();
      if (m.contains("rho_prime") && !m["rho_prime"].is_null()) g.rho_prime = m["rho_prime"].get<double>();
      if (m.contains("seed") && !m["seed"].is_null()) g.seed = m["seed"].get<std::uint64_t>();
      cfg.methods.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, fmt::format("malformed experiment config: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, e.what());
  }
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  j["iterations"] = iterations;
  j["subsample_fraction"] = subsample_fraction;
  j["betas"] = betas;
  j["seed"] = seed;
  j["utility_label"] = utility_label;
  j["privacy_labels"] = privacy_labels;
  j["priced_privacy"] = priced_privacy == PricedPrivacy::First ? "first" : "max";
  j["standardize"] = standardize;
  j["full_dimensional"] = full_dimensional;
  j["classifier"] = {{"kind", std::string(to_string(classifier.kind))}, {"k_neighbors", classifier.k_neighbors}};
  j["methods"] = json::array();
  for (const auto& m : methods) {
    json g;
    g["method"] = std::string(to_string(m.method));
    g["k"] = m.ks;
    if (!m.privacy_weights.empty()) g["privacy_weights"] = m.privacy_weights;
    g["rho"] = m.rho ? json(*m.rho) : json(nullptr);
    g["rho_prime"] = m.rho_prime ? json(*m.rho_prime) : json(nullptr);
    g["seed"] = m.seed ? json(*m.seed) : json(nullptr);
    j["methods"].push_back(std::move(g));
  }
  return j;
}

// ---------------------------------------------------------------- sweep

namespace {

struct Cell {
  bool full = false;
  Method method = Method::DCA;
  std::size_t k = 0;
  std::vector<double> weights;
  const MethodGrid* grid = nullptr;
};

struct CellResult {
  double acc_u = std::nan("");
  std::vector<double> acc_p;
  std::optional<std::string> error;
};

struct Prepared {
  Dataset train;
  Dataset test;
  Dataset privacy_test;
  LabelSet utility;
  std::vector<LabelSet> privacy;
};

void standardize_with(const Dataset& reference, std::initializer_list<Dataset*> targets) {
  const std::vector<double> mean = feature_means(reference);
  std::vector<double> scale(reference.features(), 0.0);
  for (std::size_t j = 0; j < reference.samples(); ++j)
    for (std::size_t i = 0; i < scale.size(); ++i) {
      const double d = reference.x(i, j) - mean[i];
      scale[i] += d * d;
    }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(reference.samples()));
    if (!(s > 0.0)) s = 1.0;
  }
  for (Dataset* t : targets)
    for (std::size_t j = 0; j < t->samples(); ++j)
      for (std::size_t i = 0; i < scale.size(); ++i) t->x(i, j) = (t->x(i, j) - mean[i]) / scale[i];
}

std::uint64_t cell_key(const Cell& c) {
  std::string key = fmt::format("{}|{}", to_string(c.method), c.k);
  for (double w : c.weights) key += fmt::format("|{}", w);
  return fnv1a64(key);
}

}  // namespace

std::vector<TradeoffPoint> run_sweep(const ExperimentConfig& cfg, const DataBundle& data, unsigned threads) {
  cfg.validate();
  const LabeledData& ptest_data = data.privacy_test ? *data.privacy_test : data.test;
  if (data.train.dataset.features() != data.test.dataset.features() ||
      data.train.dataset.features() != ptest_data.dataset.features())
    fail(ErrorCode::DimensionMismatch, "train and test feature counts differ");

  const LabelSet test_utility = data.test.label(cfg.utility_label).labels;
  std::vector<LabelSet> test_privacy;
  for (const auto& name : cfg.privacy_labels) test_privacy.push_back(ptest_data.label(name).labels);

  std::vector<Cell> cells;
  if (cfg.full_dimensional) cells.push_back({true, Method::PCA, data.train.dataset.features(), {}, nullptr});
  for (const auto& g : cfg.methods) {
    for (std::size_t k : g.ks) {
      if (g.method == Method::RUCA && !g.privacy_weights.empty()) {
        for (const auto& w : g.privacy_weights) cells.push_back({false, g.method, k, w, &g});
      } else if (g.method == Method::RUCA) {
        cells.push_back({false, g.method, k, std::vector<double>(cfg.privacy_labels.size(), 0.0), &g});
      } else {
        cells.push_back({false, g.method, k, {}, &g});
      }
    }
  }

  const std::size_t iters = cfg.iterations;
  std::vector<std::vector<CellResult>> results(cells.size(), std::vector<CellResult>(iters));
  std::vector<std::optional<std::string>> iteration_errors(iters);

  auto run_iteration = [&](std::size_t it) {
    const std::uint64_t iteration_seed = derive_seed(cfg.seed, it);
    Prepared p;
    try {
      SplitSpec split{cfg.seed, cfg.subsample_fraction, {}};
      const LabeledData sub = subsample(data.train, split, it);
      p.train = sub.dataset;
      p.test = data.test.dataset;
      p.privacy_test = ptest_data.dataset;
      if (cfg.standardize) standardize_with(sub.dataset, {&p.train, &p.test, &p.privacy_test});
      p.utility = sub.label(cfg.utility_label).labels;
      for (const auto& name : cfg.privacy_labels) p.privacy.push_back(sub.label(name).labels);
    } catch (const Error& e) {
      iteration_errors[it] = e.what();
      return;
    }

    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      CellResult& r = results[c][it];
      try {
        Dataset ztrain, ztest, zptest;
        const Dataset* train = &p.train;
        const Dataset* test = &p.test;
        const Dataset* ptest = &p.privacy_test;
        if (!cell.full) {
          ProjectionConfig pc;
          pc.method = cell.method;
          pc.k = cell.k;
          pc.rho = cell.grid->rho;
          pc.rho_prime = cell.grid->rho_prime;
          pc.privacy_weights = cell.weights;
          const std::uint64_t base = cell.grid->seed ? derive_seed(*cell.grid->seed, it) : iteration_seed;
          pc.seed = derive_seed(base, cell_key(cell));
          const ProjectionModel model = fit(p.train, p.utility, p.privacy, pc);
          ztrain = project(model, p.train);
          ztest = project(model, p.test);
          zptest = project(model, p.privacy_test);
          train = &ztrain;
          test = &ztest;
          ptest = &zptest;
        }
        r.acc_u = train_eval(*train, p.utility, *test, test_utility, cfg.classifier).accuracy;
        for (std::size_t t = 0; t < p.privacy.size(); ++t)
          r.acc_p.push_back(train_eval(*train, p.privacy[t], *ptest, test_privacy[t], cfg.classifier).accuracy);
      } catch (const Error& e) {
        r.error = e.what();
      }
    }
  };

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, iters));
  if (threads <= 1) {
    for (std::size_t it = 0; it < iters; ++it) run_iteration(it);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t it = next++; it < iters; it = next++) run_iteration(it);
      });
  }

  std::vector<TradeoffPoint> points;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    TradeoffPoint pt;
    pt.method = cell.full ? "FULL" : std::string(to_string(cell.method));
    pt.k = cell.k;
    pt.privacy_weights = cell.weights;
    pt.acc_p_runs.assign(cfg.privacy_labels.size(), {});

    // Lowest failing iteration names the failure, independent of scheduling.
    for (std::size_t it = 0; it < iters && pt.ok(); ++it) {
      if (iteration_errors[it]) pt.status = fmt::format("failed: iteration {}: {}", it, *iteration_errors[it]);
      else if (results[c][it].error) pt.status = fmt::format("failed: iteration {}: {}", it, *results[c][it].error);
    }
    if (pt.ok()) {
      for (std::size_t it = 0; it < iters; ++it) {
        pt.acc_u_runs.push_back(results[c][it].acc_u);
        for (std::size_t t = 0; t < pt.acc_p_runs.size(); ++t) pt.acc_p_runs[t].push_back(results[c][it].acc_p[t]);
      }
    }
    std::tie(pt.acc_u_mean, pt.acc_u_std) = mean_and_std(pt.acc_u_runs);
    for (const auto& runs : pt.acc_p_runs) {
      const auto [m, s] = mean_and_std(runs);
      pt.acc_p_mean.push_back(m);
      pt.acc_p_std.push_back(s);
    }
    const double priced = pt.priced_acc_p(cfg.priced_privacy);
    for (double b : cfg.betas) pt.performance.emplace_back(b, performance(pt.acc_u_mean, priced, b));
    points.push_back(std::move(pt));
  }
  return points;
}

// ---------------------------------------------------------------- output

namespace {

std::string num(double v) { return std::isfinite(v) ? fmt::format("{}", v) : std::string("nan"); }

std::string join_weights(const std::vector<double>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ';';
    s += fmt::format("{}", w[i]);
  }
  return s;
}

std::string series_name(const TradeoffPoint& p) {
  if (p.method == "RUCA" && !p.privacy_weights.empty())
    return fmt::format("RUCA (rho_p={})", join_weights(p.privacy_weights));
  return p.method;
}

}  // namespace

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffPoint>& points) {
  if (points.empty()) fail(ErrorCode::InvalidArgument, "no trade-off points to write");
  const auto& first = points.front();
  std::vector<std::string> header{"method", "k", "privacy_weights", "acc_u_mean", "acc_u_std"};
  for (std::size_t t = 0; t < first.acc_p_mean.size(); ++t) {
    header.push_back(fmt::format("acc_p{}_mean", t));
    header.push_back(fmt::format("acc_p{}_std", t));
  }
  for (const auto& [beta, value] : first.performance) header.push_back(fmt::format("perf@{}", beta));
  header.push_back("status");
  out << csv::join(header) << '\n';

  for (const auto& p : points) {
    if (p.acc_p_mean.size() != first.acc_p_mean.size() || p.performance.size() != first.performance.size())
      fail(ErrorCode::InvalidArgument, "trade-off points have inconsistent shapes");
    std::vector<std::string> row{p.method, std::to_string(p.k), join_weights(p.privacy_weights), num(p.acc_u_mean),
                                 num(p.acc_u_std)};
    for (std::size_t t = 0; t < p.acc_p_mean.size(); ++t) {
      row.push_back(num(p.acc_p_mean[t]));
      row.push_back(num(p.acc_p_std[t]));
    }
    for (const auto& perf : p.performance) row.push_back(num(perf.second));
    row.push_back(p.status);
    out << csv::join(row) << '\n';
  }
}

std::vector<TradeoffPoint> read_tradeoff_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || header->size() < 6 || (*header)[0] != "method" || header->back() != "status")
    fail(ErrorCode::ParseError, fmt::format("{}: not a trade-off CSV", path));

  std::size_t tasks = 0;
  std::vector<double> betas;
  for (const auto& h : *header) {
    if (h.starts_with("acc_p") && h.ends_with("_mean")) ++tasks;
    if (h.starts_with("perf@")) betas.push_back(std::stod(h.substr(5)));
  }
  auto to_num = [&](const std::string& s) {
    if (s == "nan") return std::nan("");
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, fmt::format("{}: line {}: bad number '{}'", path, reader.line(), s));
    }
  };

  std::vector<TradeoffPoint> points;
  while (auto rec = reader.next()) {
    if (rec->size() == 1 && rec->front().empty()) continue;
    const auto& r = *rec;
    if (r.size() != header->size())
      fail(ErrorCode::ParseError, fmt::format("{}: line {}: {} fields, header has {}", path, reader.line(), r.size(),
                                              header->size()));
    TradeoffPoint p;
    p.method = r[0];
    p.k = static_cast<std::size_t>(to_num(r[1]));
    if (!r[2].empty()) {
      std::stringstream ss(r[2]);
      for (std::string w; std::getline(ss, w, ';');) p.privacy_weights.push_back(to_num(w));
    }
    p.acc_u_mean = to_num(r[3]);
    p.acc_u_std = to_num(r[4]);
    std::size_t col = 5;
    for (std::size_t t = 0; t < tasks; ++t) {
      p.acc_p_mean.push_back(to_num(r[col++]));
      p.acc_p_std.push_back(to_num(r[col++]));
    }
    for (double b : betas) p.performance.emplace_back(b, to_num(r[col++]));
    p.status = r[col];
    points.push_back(std::move(p));
  }
  return points;
}

std::string render_tradeoff_svg(const std::vector<TradeoffPoint>& points, PricedPrivacy priced) {
  svg::LineChart chart;
  chart.title = "Utility-privacy trade-off";
  chart.x_label = "1 - mean privacy accuracy";
  chart.y_label = "mean utility accuracy";
  chart.baseline_label = "full-dimensional utility";

  std::vector<std::string> order;
  std::map<std::string, std::vector<const TradeoffPoint*>> groups;
  for (const auto& p : points) {
    if (p.method == "FULL") {
      if (p.ok() && std::isfinite(p.acc_u_mean)) chart.baseline_y = p.acc_u_mean;
      continue;
    }
    const std::string name = series_name(p);
    if (!groups.count(name)) order.push_back(name);
    groups[name].push_back(&p);
  }
  for (const auto& name : order) {
    auto& members = groups[name];
    std::stable_sort(members.begin(), members.end(),
                     [](const TradeoffPoint* a, const TradeoffPoint* b) { return a->k < b->k; });
    svg::Series s{name, {}};
    for (const TradeoffPoint* p : members)
      if (p->ok()) s.points.emplace_back(1.0 - p->priced_acc_p(priced), p->acc_u_mean);
    chart.series.push_back(std::move(s));
  }
  return svg::render(chart);
}

void emit_tradeoff_curve(const std::vector<TradeoffPoint>& points, const std::string& base, PricedPrivacy priced) {
  if (points.empty()) fail(ErrorCode::InvalidArgument, "no trade-off points to emit");
  {
    std::ofstream csv_out(base + ".csv", std::ios::binary);
    if (!csv_out) fail(ErrorCode::IoError, fmt::format("cannot write '{}.csv'", base));
    write_tradeoff_csv(csv_out, points);
  }
  std::ofstream svg_out(base + ".svg", std::ios::binary);
  if (!svg_out) fail(ErrorCode::IoError, fmt::format("cannot write '{}.svg'", base));
  svg_out << render_tradeoff_svg(points, priced);
}

}  // namespace privproj
