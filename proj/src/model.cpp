#include "teamviab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "teamviab/parallel.hpp"
#include "teamviab/random.hpp"
#include "teamviab/transcript.hpp"

namespace teamviab {

using json = nlohmann::json;

std::vector<double> Standardizer::transform(std::span<const double> x) const {
  if (x.size() != means.size()) throw RegistryMismatchError("feature count does not match the standardizer");
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = stds[j] > 0.0 ? (x[j] - means[j]) / stds[j] : 0.0;
  return z;
}

DenseMatrix Standardizer::transform(const FeatureMatrix& m) const {
  if (m.columns != names) throw RegistryMismatchError("feature columns do not match the standardizer registry");
  DenseMatrix out(m.size(), names.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto z = transform(m.rows[i]);
    std::copy(z.begin(), z.end(), out.row(i).begin());
  }
  return out;
}

Standardizer fit_standardizer(const FeatureMatrix& training) {
  if (training.size() < 2) throw DegenerateError("standardizer needs at least two rows");
  const std::size_t d = training.columns.size();
  const double n = static_cast<double>(training.size());
  Standardizer s;
  s.names = training.columns;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  for (const auto& r : training.rows) {
    for (std::size_t j = 0; j < d; ++j) s.means[j] += r[j];
  }
  for (auto& m : s.means) m /= n;
  for (const auto& r : training.rows) {
    for (std::size_t j = 0; j < d; ++j) s.stds[j] += (r[j] - s.means[j]) * (r[j] - s.means[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    s.stds[j] = std::sqrt(s.stds[j] / n);
    // Columns that are constant up to rounding carry no signal.
    if (s.stds[j] <= 1e-12 * std::max(1.0, std::abs(s.means[j]))) s.stds[j] = 0.0;
  }
  return s;
}

namespace {

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

// 1 / (1 + exp(u)) without overflow.
double logistic_tail(double u) {
  if (u >= 0.0) {
    const double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

void margins(const DenseMatrix& x, std::span<const double> w, double b, std::vector<double>& out) {
  out.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto r = x.row(i);
    double m = b;
    for (std::size_t j = 0; j < x.cols; ++j) m += r[j] * w[j];
    out[i] = m;
  }
}

double loss_from_margins(std::span<const int> y, const std::vector<double>& m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) sum += softplus(-y[i] * m[i]);
  return sum / static_cast<double>(m.size());
}

void gradient_from_margins(const DenseMatrix& x, std::span<const int> y, const std::vector<double>& m,
                           std::span<double> grad_w, double& grad_b) {
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double r = -y[i] * logistic_tail(y[i] * m[i]) * inv_n;
    grad_b += r;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) grad_w[j] += r * row[j];
  }
}

double l1(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

void check_inputs(const DenseMatrix& x, std::span<const int> y) {
  if (y.size() != x.rows) throw std::invalid_argument("label count does not match row count");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw std::invalid_argument("labels must be +1 or -1");
  }
  if (!pos || !neg) throw DegenerateError("training labels contain a single class");
  for (double v : x.data) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value in training matrix");
  }
}

double prior_log_odds(std::span<const int> y) {
  const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  return std::log(pos / (static_cast<double>(y.size()) - pos));
}

}  // namespace

double logistic_loss(const DenseMatrix& x, std::span<const int> y, std::span<const double> w, double b) {
  std::vector<double> m;
  margins(x, w, b, m);
  return loss_from_margins(y, m);
}

void logistic_gradient(const DenseMatrix& x, std::span<const int> y, std::span<const double> w, double b,
                       std::span<double> grad_w, double& grad_b) {
  std::vector<double> m;
  margins(x, w, b, m);
  gradient_from_margins(x, y, m, grad_w, grad_b);
}

double lambda_max(const DenseMatrix& x, std::span<const int> y) {
  check_inputs(x, y);
  const std::vector<double> w(x.cols, 0.0);
  std::vector<double> g(x.cols);
  double gb = 0.0;
  logistic_gradient(x, y, w, prior_log_odds(y), g, gb);
  double mx = 0.0;
  for (double v : g) mx = std::max(mx, std::abs(v));
  return mx;
}

LassoFit fit_lasso_logistic(const DenseMatrix& x, std::span<const int> y, const SolverOptions& options) {
  check_inputs(x, y);
  if (!(options.lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  const std::size_t d = x.cols;
  const double lambda = options.lambda;

  LassoFit fit;
  fit.weights.assign(d, 0.0);
  fit.intercept = prior_log_odds(y);
  auto& diag = fit.diagnostics;
  diag.tol = options.tol;

  std::vector<double> m;
  std::vector<double> gw(d);
  double gb = 0.0;
  margins(x, fit.weights, fit.intercept, m);
  double objective = loss_from_margins(y, m);
  diag.objective_trace.push_back(objective);

  // At or above lambda_max the all-zero weights with the prior intercept
  // satisfy the optimality conditions exactly.
  gradient_from_margins(x, y, m, gw, gb);
  if (std::all_of(gw.begin(), gw.end(), [&](double g) { return std::abs(g) <= lambda; })) {
    diag.converged = true;
    diag.objective = objective;
    return fit;
  }

  std::vector<double> w = fit.weights, w_prev = w;
  double b = fit.intercept, b_prev = b;
  std::vector<double> yw = w;
  double yb = b;
  std::vector<double> zw(d);
  double momentum = 1.0;
  double step = 1.0;

  for (int it = 1; it <= options.max_iter; ++it) {
    margins(x, yw, yb, m);
    const double f_y = loss_from_margins(y, m);
    gradient_from_margins(x, y, m, gw, gb);

    double zb = 0.0;
    double f_z = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t j = 0; j < d; ++j) {
        const double v = yw[j] - step * gw[j];
        const double t = step * lambda;
        zw[j] = v > t ? v - t : (v < -t ? v + t : 0.0);
      }
      zb = yb - step * gb;
      margins(x, zw, zb, m);
      f_z = loss_from_margins(y, m);
      double lin = gb * (zb - yb);
      double quad = (zb - yb) * (zb - yb);
      for (std::size_t j = 0; j < d; ++j) {
        lin += gw[j] * (zw[j] - yw[j]);
        quad += (zw[j] - yw[j]) * (zw[j] - yw[j]);
      }
      if (f_z <= f_y + lin + quad / (2.0 * step)) break;
      step *= 0.5;
    }

    const double obj_z = f_z + lambda * l1(zw);
    const double next_momentum = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
    const bool accepted = obj_z <= objective;
    const double previous = objective;
    w_prev = w;
    b_prev = b;
    if (accepted) {
      w = zw;
      b = zb;
      objective = obj_z;
      const double a = (momentum - 1.0) / next_momentum;
      for (std::size_t j = 0; j < d; ++j) yw[j] = w[j] + a * (w[j] - w_prev[j]);
      yb = b + a * (b - b_prev);
      momentum = next_momentum;
    } else {
      yw = w;
      yb = b;
      momentum = 1.0;
    }
    diag.objective_trace.push_back(objective);
    diag.iterations = it;
    if (accepted) {
      const double rel = (previous - objective) / std::max(std::abs(previous), 1e-300);
      if (rel < options.tol) {
        diag.converged = true;
        break;
      }
      step *= 1.2;
    }
  }

  fit.weights = w;
  fit.intercept = b;
  diag.objective = objective;
  return fit;
}

TrainedModel train(const FeatureMatrix& training, std::span<const int> labels, const SolverOptions& options) {
  TrainedModel model;
  model.standardizer = fit_standardizer(training);
  const auto x = model.standardizer.transform(training);
  auto fit = fit_lasso_logistic(x, labels, options);
  model.weights = std::move(fit.weights);
  model.intercept = fit.intercept;
  model.lambda = options.lambda;
  model.seed = options.seed;
  model.solver = std::move(fit.diagnostics);
  return model;
}

double predict_proba(const TrainedModel& model, const FeatureVector& features) {
  if (features.names != model.standardizer.names) {
    throw RegistryMismatchError("feature names or order differ from the model registry");
  }
  const auto z = model.standardizer.transform(features.values);
  double s = model.intercept;
  for (std::size_t j = 0; j < z.size(); ++j) s += model.weights[j] * z[j];
  return 1.0 / (1.0 + std::exp(-s));
}

std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& features) {
  std::vector<double> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out.push_back(predict_proba(model, features.vector(i)));
  return out;
}

CoefficientReport coefficients_with_ci(const FeatureMatrix& features, std::span<const int> labels,
                                       const SolverOptions& options, int replicates, unsigned threads) {
  if (replicates < 50) throw std::invalid_argument("bootstrap needs at least 50 replicates");
  const auto full = train(features, labels, options);
  const std::size_t n = features.size();
  const std::size_t d = features.columns.size();

  std::vector<std::vector<double>> draws(static_cast<std::size_t>(replicates));
  parallel_for(draws.size(), threads, [&](std::size_t r) {
    Rng rng(mix_seed(options.seed, r));
    std::vector<std::size_t> idx(n);
    std::vector<int> y(n);
    constexpr int kMaxRedraws = 100;
    for (int attempt = 0;; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        idx[i] = static_cast<std::size_t>(uniform_index(rng, n));
        y[i] = labels[idx[i]];
      }
      const bool both = std::find(y.begin(), y.end(), 1) != y.end() && std::find(y.begin(), y.end(), -1) != y.end();
      if (both) break;
      if (attempt + 1 >= kMaxRedraws) throw DegenerateError("bootstrap resamples keep drawing a single class");
    }
    draws[r] = train(features.select_rows(idx), y, options).weights;
  });

  CoefficientReport report;
  report.lambda = options.lambda;
  report.replicates = replicates;
  report.seed = options.seed;
  report.intercept = full.intercept;
  std::vector<double> column(draws.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t r = 0; r < draws.size(); ++r) column[r] = draws[r][j];
    CoefficientEstimate e;
    e.feature = features.columns[j];
    e.coefficient = full.weights[j];
    e.ci_low = percentile_cutoff(column, 2.5);
    e.bootstrap_median = percentile_cutoff(column, 50.0);
    e.ci_high = percentile_cutoff(column, 97.5);
    e.significant = e.ci_low > 0.0 || e.ci_high < 0.0;
    report.coefficients.push_back(std::move(e));
  }
  return report;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["feature_names"] = model.standardizer.names;
  j["means"] = model.standardizer.means;
  j["stds"] = model.standardizer.stds;
  j["weights"] = model.weights;
  j["intercept"] = model.intercept;
  j["lambda"] = model.lambda;
  j["seed"] = model.seed;
  j["solver"] = {{"iterations", model.solver.iterations},
                 {"objective", model.solver.objective},
                 {"tol", model.solver.tol}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  const std::string file = path.string();
  if (!in) throw ValidationError("cannot open model " + file);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(file + ": corrupt model file: " + e.what());
  }
  if (!j.is_object() || !j.contains("format_version")) throw ValidationError(file + ": corrupt model file");
  if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kModelFormatVersion) {
    throw VersionMismatchError(file + ": unsupported model format_version " + j["format_version"].dump() +
                               " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  TrainedModel m;
  try {
    m.standardizer.names = j.at("feature_names").get<std::vector<std::string>>();
    m.standardizer.means = j.at("means").get<std::vector<double>>();
    m.standardizer.stds = j.at("stds").get<std::vector<double>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& s = j.at("solver");
    m.solver.iterations = s.at("iterations").get<int>();
    m.solver.objective = s.at("objective").get<double>();
    m.solver.tol = s.at("tol").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(file + ": corrupt model file: " + e.what());
  }
  const auto& names = m.standardizer.names;
  const bool known = names == feature_registry(FeatureSubset::computational) ||
                     names == feature_registry(FeatureSubset::human) || names == feature_registry(FeatureSubset::all);
  if (!known) throw RegistryMismatchError(file + ": feature_names do not match a known feature registry");
  const auto d = names.size();
  if (m.standardizer.means.size() != d || m.standardizer.stds.size() != d || m.weights.size() != d) {
    throw ValidationError(file + ": corrupt model file: array lengths differ from feature_names");
  }
  for (double v : m.weights) {
    if (!std::isfinite(v)) throw ValidationError(file + ": corrupt model file: non-finite weight");
  }
  return m;
}

}  // namespace teamviab
