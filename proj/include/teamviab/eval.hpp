#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamviab/feature_matrix.hpp"
#include "teamviab/features.hpp"
#include "teamviab/model.hpp"
#include "teamviab/transcript.hpp"

namespace teamviab {

// Probability that a random positive outranks a random negative, ties
// counting one half. Labels are +1 / -1; both classes must be present.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct ThresholdMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // no predicted positives
  bool f1_undefined = false;         // precision + recall == 0

  bool operator==(const ThresholdMetrics&) const = default;
};

// Predicted positive iff score >= cut.
ThresholdMetrics threshold_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double cut = 0.5);

enum class SplitKind { stratified_kfold, round_holdout, condition_grouped, fixed_counts };

struct SplitPlan {
  SplitKind kind = SplitKind::stratified_kfold;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold_of;  // per team, in input order

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
  bool operator==(const SplitPlan&) const = default;
};

// Seeded shuffle within each class, then round-robin fold assignment that
// continues across classes so fold sizes stay within one of each other.
SplitPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const Interval&) const = default;
};

// Mean with a two-sided 95% Student-t interval over the values (sample
// standard deviation), clamped to [0, 1].
Interval t_interval95(std::span<const double> values);

struct FoldMetrics {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double auc = 0.0;
  ThresholdMetrics metrics;

  bool operator==(const FoldMetrics&) const = default;
};

struct ThresholdReport {
  double percentile = 0.0;
  double cutoff = 0.0;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  std::vector<FoldMetrics> folds;
  double mean_auc = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  std::optional<Interval> auc_ci;  // only for cross-validated results
  std::optional<Interval> precision_ci;
  std::optional<Interval> recall_ci;
  std::optional<Interval> f1_ci;

  bool operator==(const ThresholdReport&) const = default;
};

// Everything needed to regenerate a report.
struct EvalConfig {
  std::string protocol;
  SolverOptions solver;
  FeatureSubset subset = FeatureSubset::computational;
  std::vector<double> percentiles;
  int folds = 0;
  std::optional<Window> window;
  std::optional<int> round;
  std::optional<std::size_t> train_n;
  std::optional<std::size_t> test_n;
  std::optional<Condition> train_condition;
  std::optional<Condition> test_condition;
};

struct EvalReport {
  EvalConfig config;
  std::size_t n_teams = 0;
  std::size_t dropped = 0;  // teams excluded before evaluation (empty windows)
  std::vector<ThresholdReport> thresholds;
};

struct CvOptions {
  std::vector<double> percentiles = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  int k = 5;
  SolverOptions solver;
  FeatureSubset subset = FeatureSubset::computational;
  unsigned threads = 0;
};

// Labels every team at each percentile of `scores` (the cutoff is computed
// over every entry of the map) and runs stratified k-fold CV. The
// standardizer and model are fit on training folds only.
EvalReport cv_sweep(const FeatureMatrix& features, const std::map<std::string, double>& scores,
                    const CvOptions& options);

struct HoldoutOptions {
  int round = 1;
  std::size_t train_n = 300;  // 0: use every available team
  std::size_t test_n = 60;
  double percentile = 50.0;
  SolverOptions solver;
  FeatureSubset subset = FeatureSubset::computational;
};

// Trains on rounds other than `round` and tests on `round`, after seeded
// subsampling without replacement to the requested counts.
EvalReport round_holdout(const FeatureMatrix& features, const std::map<std::string, double>& scores,
                         const std::map<std::string, int>& rounds, const HoldoutOptions& options);

struct ConditionOptions {
  Condition train_condition = Condition::masked;
  std::vector<Condition> test_conditions = {Condition::initial_visible, Condition::reconvened};
  double percentile = 50.0;
  SolverOptions solver;
  FeatureSubset subset = FeatureSubset::computational;
};

// One report per test condition, from a single model fit on the training
// condition.
std::vector<EvalReport> condition_split_eval(const FeatureMatrix& features,
                                             const std::map<std::string, double>& scores,
                                             const std::map<std::string, Condition>& conditions,
                                             const ConditionOptions& options);

enum class SliceMode { cumulative, disjoint };

std::string_view to_string(SliceMode m);
std::optional<SliceMode> parse_slice_mode(std::string_view s);

struct SliceOptions {
  SliceMode mode = SliceMode::cumulative;
  double increment = 10.0;
  double window = 200.0;
  CvOptions cv;
  FeatureOptions features;
};

struct WindowResult {
  Window window;
  std::size_t n_teams = 0;
  std::size_t n_dropped = 0;
  std::optional<EvalReport> report;
  std::string skipped;  // reason when the window could not be evaluated
};

struct SliceReport {
  SliceMode mode = SliceMode::cumulative;
  double increment = 0.0;
  double window = 0.0;
  double duration = 0.0;
  std::vector<WindowResult> windows;
};

std::vector<Window> slice_windows(SliceMode mode, double duration, double increment, double window);

// Re-extracts computational features per window and cross-validates each.
// Teams with no message in a window are dropped from that trial; labels use
// cutoffs over the whole score map.
SliceReport thin_slice_sweep(const std::vector<PreparedTranscript>& corpus,
                             const std::map<std::string, double>& scores, const SliceOptions& options);

struct Correlation {
  double r = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

Correlation performance_correlation(std::span<const double> viability, std::span<const double> performance);

nlohmann::ordered_json to_json(const EvalConfig& config);
nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const SliceReport& report);
nlohmann::ordered_json to_json(const CoefficientReport& report);

// Aligned-column summaries for terminals.
std::string to_text(const EvalReport& report);
std::string to_text(const SliceReport& report);
std::string to_text(const CoefficientReport& report);

// Plot-ready CSV: one row per threshold (and window for slices).
std::string auc_csv(const EvalReport& report);
std::string auc_csv(const SliceReport& report);

}  // namespace teamviab
