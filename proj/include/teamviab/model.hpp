#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "teamviab/error.hpp"
#include "teamviab/feature_matrix.hpp"

namespace teamviab {

inline constexpr int kModelFormatVersion = 1;

class VersionMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RegistryMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// z = (x - mean) / std per column, from population statistics of the
// training rows. Constant columns (std 0) map to 0.
struct Standardizer {
  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<double> stds;

  std::vector<double> transform(std::span<const double> x) const;
  DenseMatrix transform(const FeatureMatrix& m) const;
};

Standardizer fit_standardizer(const FeatureMatrix& training);

struct SolverOptions {
  double lambda = 0.01;
  double tol = 1e-8;  // relative objective change
  int max_iter = 10000;
  std::uint64_t seed = 0;  // recorded with the model
};

struct SolverDiagnostics {
  int iterations = 0;
  double objective = 0.0;
  double tol = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after each iteration
};

struct LassoFit {
  std::vector<double> weights;
  double intercept = 0.0;
  SolverDiagnostics diagnostics;
};

// Mean logistic loss (1/n) sum log(1 + exp(-y (w.x + b))) and its gradient.
// Labels are +1 / -1.
double logistic_loss(const DenseMatrix& x, std::span<const int> y, std::span<const double> w, double b);
void logistic_gradient(const DenseMatrix& x, std::span<const int> y, std::span<const double> w, double b,
                       std::span<double> grad_w, double& grad_b);

// Smallest penalty at which every weight is zero: the largest weight-gradient
// magnitude at w = 0 with the intercept at its optimum.
double lambda_max(const DenseMatrix& x, std::span<const int> y);

// Minimizes the mean logistic loss plus lambda * |w|_1 (intercept not
// penalized) by accelerated proximal gradient with backtracking. Iterates are
// kept monotone: a step that would raise the objective is rejected and the
// momentum restarted.
LassoFit fit_lasso_logistic(const DenseMatrix& x, std::span<const int> y, const SolverOptions& options);

struct TrainedModel {
  Standardizer standardizer;
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  SolverDiagnostics solver;
};

// Standardizes the raw training matrix and fits the penalized model.
TrainedModel train(const FeatureMatrix& training, std::span<const int> labels, const SolverOptions& options);

double predict_proba(const TrainedModel& model, const FeatureVector& features);
std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& features);

struct CoefficientEstimate {
  std::string feature;
  double coefficient = 0.0;  // fit on the full data
  double bootstrap_median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;  // interval excludes zero
};

struct CoefficientReport {
  double lambda = 0.0;
  int replicates = 0;
  std::uint64_t seed = 0;
  double intercept = 0.0;
  std::vector<CoefficientEstimate> coefficients;
};

// Percentile bootstrap (2.5 / 97.5) over teams resampled with replacement.
// Replicate r draws from a seed derived from (seed, r), so the report does
// not depend on the thread count.
CoefficientReport coefficients_with_ci(const FeatureMatrix& features, std::span<const int> labels,
                                       const SolverOptions& options, int replicates, unsigned threads = 0);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace teamviab
