#include "privproj/projections.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "privproj/error.hpp"
#include "privproj/rng.hpp"
#include "privproj/scatter.hpp"

namespace privproj {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::PCA: return "PCA";
    case Method::DCA: return "DCA";
    case Method::MDR: return "MDR";
    case Method::RUCA: return "RUCA";
    case Method::RANDOM: return "RANDOM";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : {Method::PCA, Method::DCA, Method::MDR, Method::RUCA, Method::RANDOM})
    if (upper == to_string(m)) return m;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown projection method '{}'", name));
}

void ProjectionConfig::validate() const {
  if (k < 1) fail(ErrorCode::InvalidK, "k must be at least 1");
  if (rho && !(*rho > 0.0)) fail(ErrorCode::InvalidArgument, fmt::format("rho must be > 0, got {}", *rho));
  if (rho_prime && !(*rho_prime >= 0.0))
    fail(ErrorCode::InvalidArgument, fmt::format("rho_prime must be >= 0, got {}", *rho_prime));
  for (double w : privacy_weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      fail(ErrorCode::InvalidArgument, fmt::format("privacy weight {} is not a non-negative number", w));
}

double default_rho(const SymMatrix& s_bar) {
  const double r = 1e-6 * s_bar.trace() / static_cast<double>(s_bar.dim());
  // Degenerate data (all samples identical) still needs a positive rho.
  return r > 0.0 ? r : 1e-6;
}

double default_rho_prime(const SymMatrix& s_bu, double rho) {
  return 1e-8 * (s_bu.trace() / static_cast<double>(s_bu.dim()) + rho);
}

namespace {

void check_fit_inputs(const Dataset& d, const ProjectionConfig& cfg) {
  cfg.validate();
  if (d.samples() == 0 || d.features() == 0) fail(ErrorCode::InvalidArgument, "empty dataset");
  if (cfg.k > d.features())
    fail(ErrorCode::InvalidK, fmt::format("k = {} exceeds feature count {}", cfg.k, d.features()));
}

// Shared tail of DCA/MDR/RUCA: solve (S_BU + rho' I, denominator + rho I).
ProjectionModel solve_pencil(const ScatterSet& utility, SymMatrix denominator,
                             const ProjectionConfig& cfg) {
  ProjectionModel model;
  model.config = cfg;
  const double rho = cfg.rho.value_or(default_rho(utility.s_bar));
  const double rho_prime = cfg.rho_prime.value_or(default_rho_prime(utility.s_b, rho));
  model.config.rho = rho;
  model.config.rho_prime = rho_prime;

  SymMatrix numerator = utility.s_b;
  numerator.add_identity(rho_prime);
  denominator.add_identity(rho);

  EigenPairs pairs = generalized_eig(numerator, denominator, cfg.k);
  model.w = std::move(pairs.vectors);
  model.eigenvalues = std::move(pairs.values);
  model.feature_mean = utility.mean;
  return model;
}

}  // namespace

ProjectionModel fit_ruca(const Dataset& d, const LabelSet& utility,
                         std::span<const LabelSet> privacy, const ProjectionConfig& cfg) {
  check_fit_inputs(d, cfg);
  if (cfg.privacy_weights.size() != privacy.size())
    fail(ErrorCode::WeightMismatch, fmt::format("{} privacy weights for {} privacy labelings",
                                                cfg.privacy_weights.size(), privacy.size()));
  const ScatterSet su = compute_scatter(d, utility);
  SymMatrix denominator = su.s_bar;
  for (std::size_t i = 0; i < privacy.size(); ++i) {
    const double weight = cfg.privacy_weights[i];
    if (weight == 0.0) continue;
    SymMatrix s_bp = compute_scatter(d, privacy[i]).s_b;
    s_bp *= weight;
    denominator += s_bp;
  }
  return solve_pencil(su, std::move(denominator), cfg);
}

ProjectionModel fit_dca(const Dataset& d, const LabelSet& utility, const ProjectionConfig& cfg) {
  ProjectionConfig dca = cfg;
  dca.privacy_weights.clear();
  ProjectionModel model = fit_ruca(d, utility, {}, dca);
  model.config.method = cfg.method;
  return model;
}

ProjectionModel fit_mdr(const Dataset& d, const LabelSet& utility, const LabelSet& privacy,
                        const ProjectionConfig& cfg) {
  check_fit_inputs(d, cfg);
  const ScatterSet su = compute_scatter(d, utility);
  SymMatrix s_bp = compute_scatter(d, privacy).s_b;
  return solve_pencil(su, std::move(s_bp), cfg);
}

ProjectionModel fit_pca(const Dataset& d, const ProjectionConfig& cfg) {
  check_fit_inputs(d, cfg);
  ProjectionModel model;
  model.config = cfg;
  model.feature_mean = feature_means(d);
  EigenPairs pairs = sym_eig(total_scatter(d, model.feature_mean));
  model.eigenvalues.assign(pairs.values.begin(), pairs.values.begin() + static_cast<long>(cfg.k));
  model.w = Matrix(d.features(), cfg.k);
  for (std::size_t c = 0; c < cfg.k; ++c) {
    auto src = pairs.vectors.col(c);
    std::copy(src.begin(), src.end(), model.w.col(c).begin());
  }
  return model;
}

ProjectionModel fit_random(std::size_t m, const ProjectionConfig& cfg) {
  cfg.validate();
  if (cfg.k > m) fail(ErrorCode::InvalidK, fmt::format("k = {} exceeds feature count {}", cfg.k, m));

  constexpr int kAttempts = 4;  // initial draw + 3 reseeds
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng(attempt == 0 ? cfg.seed : derive_seed(cfg.seed, static_cast<std::uint64_t>(attempt)));
    Matrix g(m, cfg.k);
    for (std::size_t c = 0; c < cfg.k; ++c)
      for (double& v : g.col(c)) v = rng.normal();
    try {
      ProjectionModel model;
      model.w = orthonormalize_columns(g, 1e-10);
      model.eigenvalues.assign(cfg.k, 0.0);
      model.config = cfg;
      model.feature_mean.assign(m, 0.0);
      return model;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient || attempt + 1 == kAttempts) throw;
    }
  }
  fail(ErrorCode::RankDeficient, "random projection draw failed");
}

ProjectionModel fit(const Dataset& d, const LabelSet& utility, std::span<const LabelSet> privacy,
                    const ProjectionConfig& cfg) {
  switch (cfg.method) {
    case Method::PCA: return fit_pca(d, cfg);
    case Method::DCA: return fit_dca(d, utility, cfg);
    case Method::MDR:
      if (privacy.empty()) fail(ErrorCode::InvalidArgument, "MDR needs a privacy labeling");
      return fit_mdr(d, utility, privacy.front(), cfg);
    case Method::RUCA: {
      if (cfg.privacy_weights.empty() && !privacy.empty()) {
        ProjectionConfig zero = cfg;
        zero.privacy_weights.assign(privacy.size(), 0.0);
        return fit_ruca(d, utility, privacy, zero);
      }
      return fit_ruca(d, utility, privacy, cfg);
    }
    case Method::RANDOM: return fit_random(d.features(), cfg);
  }
  fail(ErrorCode::InvalidArgument, "unknown method");
}

Dataset project(const ProjectionModel& model, const Dataset& d) {
  if (d.features() != model.input_dim())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("model expects {} features, dataset has {}", model.input_dim(), d.features()));
  const std::size_t m = model.input_dim();
  const std::size_t k = model.output_dim();
  Dataset out;
  out.x = Matrix(k, d.samples());
  for (std::size_t c = 0; c < k; ++c) out.feature_names.push_back(fmt::format("z{}", c));
  std::vector<double> centered(m);
  for (std::size_t j = 0; j < d.samples(); ++j) {
    auto xj = d.x.col(j);
    for (std::size_t i = 0; i < m; ++i) centered[i] = xj[i] - model.feature_mean[i];
    auto zj = out.x.col(j);
    for (std::size_t c = 0; c < k; ++c) {
      auto wc = model.w.col(c);
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += wc[i] * centered[i];
      zj[c] = s;
    }
  }
  return out;
}

double subspace_angle(const Matrix& w1, const Matrix& w2) {
  if (w1.rows() != w2.rows() || w1.cols() != w2.cols())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("comparing {}x{} with {}x{}", w1.rows(), w1.cols(), w2.rows(), w2.cols()));
  const Matrix q1 = orthonormalize_columns(w1);
  const Matrix q2 = orthonormalize_columns(w2);
  const Matrix c = transpose_times(q1, q2);
  const EigenPairs cos2 = sym_eig(SymMatrix::from_dense(transpose_times(c, c)));
  const double smallest = std::clamp(cos2.values.back(), 0.0, 1.0);
  if (smallest < 0.5) return std::acos(std::sqrt(smallest));

  // acos loses half the digits near 1; use the sine of the residual
  // R = (I - Q1 Q1^T) Q2 instead, whose largest singular value is sin(theta).
  Matrix residual = q2;
  const Matrix back = q1 * c;
  for (std::size_t j = 0; j < residual.cols(); ++j)
    for (std::size_t i = 0; i < residual.rows(); ++i) residual(i, j) -= back(i, j);
  const EigenPairs sin2 = sym_eig(SymMatrix::from_dense(transpose_times(residual, residual)));
  return std::asin(std::sqrt(std::clamp(sin2.values.front(), 0.0, 1.0)));
}

}  // namespace privproj
