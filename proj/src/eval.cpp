#include "teamviab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "teamviab/error.hpp"
#include "teamviab/parallel.hpp"
#include "teamviab/random.hpp"

namespace teamviab {

using ojson = nlohmann::ordered_json;

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("score and label counts differ");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pairs = 0.0;
  double neg_below = 0.0;
  double pos_total = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      const int y = labels[order[j]];
      if (y == 1) pos += 1.0;
      else if (y == -1) neg += 1.0;
      else throw std::invalid_argument("labels must be +1 or -1");
      ++j;
    }
    pairs += pos * neg_below + 0.5 * pos * neg;
    neg_below += neg;
    pos_total += pos;
    i = j;
  }
  if (pos_total == 0.0 || neg_below == 0.0) throw DegenerateError("AUC needs both classes");
  return pairs / (pos_total * neg_below);
}

ThresholdMetrics threshold_metrics(std::span<const double> scores, std::span<const int> labels, double cut) {
  if (scores.size() != labels.size()) throw std::invalid_argument("score and label counts differ");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= cut;
    if (labels[i] == 1) {
      if (predicted) ++tp;
      else ++fn;
    } else if (predicted) {
      ++fp;
    }
  }
  ThresholdMetrics m;
  if (tp + fp == 0) m.precision_undefined = true;
  else m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision + m.recall == 0.0) m.f1_undefined = true;
  else m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

std::vector<std::size_t> SplitPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

SplitPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  const auto uk = static_cast<std::size_t>(k);
  if (pos.size() < uk || neg.size() < uk) {
    throw DegenerateError("each class needs at least " + std::to_string(k) + " teams for " + std::to_string(k) +
                          "-fold CV (high " + std::to_string(pos.size()) + ", low " + std::to_string(neg.size()) +
                          ")");
  }
  Rng rng(seed);
  shuffle_in_place(pos, rng);
  shuffle_in_place(neg, rng);
  SplitPlan plan;
  plan.kind = SplitKind::stratified_kfold;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(labels.size(), -1);
  std::size_t next = 0;
  for (const auto* cls : {&pos, &neg}) {
    for (std::size_t i : *cls) plan.fold_of[i] = static_cast<int>(next++ % uk);
  }
  return plan;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

Interval t_interval95(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("interval of no values");
  const double m = mean_of(values);
  if (values.size() < 2) return {std::clamp(m, 0.0, 1.0), std::clamp(m, 0.0, 1.0)};
  double ss = 0.0;
  for (double x : values) ss += (x - m) * (x - m);
  const double n = static_cast<double>(values.size());
  const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  const boost::math::students_t dist(n - 1.0);
  const double half = boost::math::quantile(dist, 0.975) * se;
  return {std::clamp(m - half, 0.0, 1.0), std::clamp(m + half, 0.0, 1.0)};
}

namespace {

FeatureMatrix subset_columns(const FeatureMatrix& features, FeatureSubset subset) {
  return features.select_columns(feature_registry(subset));
}

double score_of(const std::map<std::string, double>& scores, const std::string& team) {
  const auto it = scores.find(team);
  if (it == scores.end()) throw ValidationError("no viability score for team " + team);
  return it->second;
}

std::vector<int> labels_for(const FeatureMatrix& m, const std::map<std::string, double>& scores, double cutoff) {
  std::vector<int> y;
  y.reserve(m.size());
  for (const auto& id : m.team_ids) y.push_back(score_of(scores, id) > cutoff ? 1 : -1);
  return y;
}

std::vector<double> score_values(const std::map<std::string, double>& scores) {
  std::vector<double> v;
  v.reserve(scores.size());
  for (const auto& [_, s] : scores) v.push_back(s);
  return v;
}

FoldMetrics fit_and_score(const FeatureMatrix& x, std::span<const int> y, const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& test_idx, const SolverOptions& solver, int fold) {
  std::vector<int> y_train, y_test;
  for (auto i : train_idx) y_train.push_back(y[i]);
  for (auto i : test_idx) y_test.push_back(y[i]);
  const auto model = train(x.select_rows(train_idx), y_train, solver);
  const auto p = predict_proba(model, x.select_rows(test_idx));
  FoldMetrics f;
  f.fold = fold;
  f.n_train = train_idx.size();
  f.n_test = test_idx.size();
  f.auc = auc_roc(p, y_test);
  f.metrics = threshold_metrics(p, y_test);
  return f;
}

void summarize(ThresholdReport& r, bool with_ci) {
  std::vector<double> auc, prec, rec, f1;
  for (const auto& f : r.folds) {
    auc.push_back(f.auc);
    prec.push_back(f.metrics.precision);
    rec.push_back(f.metrics.recall);
    f1.push_back(f.metrics.f1);
  }
  r.mean_auc = mean_of(auc);
  r.mean_precision = mean_of(prec);
  r.mean_recall = mean_of(rec);
  r.mean_f1 = mean_of(f1);
  if (with_ci) {
    r.auc_ci = t_interval95(auc);
    r.precision_ci = t_interval95(prec);
    r.recall_ci = t_interval95(rec);
    r.f1_ci = t_interval95(f1);
  }
}

void count_classes(ThresholdReport& r, std::span<const int> y) {
  r.n_high = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  r.n_low = y.size() - r.n_high;
}

}  // namespace

EvalReport cv_sweep(const FeatureMatrix& features, const std::map<std::string, double>& scores,
                    const CvOptions& options) {
  const auto x = subset_columns(features, options.subset);
  const auto all_scores = score_values(scores);
  const std::size_t np = options.percentiles.size();
  const auto k = static_cast<std::size_t>(options.k);

  EvalReport report;
  report.config.protocol = "cv";
  report.config.solver = options.solver;
  report.config.subset = options.subset;
  report.config.percentiles = options.percentiles;
  report.config.folds = options.k;
  report.n_teams = x.size();

  std::vector<std::vector<int>> labels(np);
  std::vector<SplitPlan> plans(np);
  report.thresholds.resize(np);
  for (std::size_t pi = 0; pi < np; ++pi) {
    const double p = options.percentiles[pi];
    auto& t = report.thresholds[pi];
    t.percentile = p;
    t.cutoff = percentile_cutoff(all_scores, p);
    labels[pi] = labels_for(x, scores, t.cutoff);
    count_classes(t, labels[pi]);
    const auto stream = static_cast<std::uint64_t>(std::llround(p * 1000.0));
    plans[pi] = stratified_kfold(labels[pi], options.k, mix_seed(options.solver.seed, stream));
    t.folds.resize(k);
  }

  parallel_for(np * k, options.threads, [&](std::size_t job) {
    const std::size_t pi = job / k;
    const int fold = static_cast<int>(job % k);
    report.thresholds[pi].folds[job % k] =
        fit_and_score(x, labels[pi], plans[pi].train_indices(fold), plans[pi].test_indices(fold), options.solver, fold);
  });
  for (auto& t : report.thresholds) summarize(t, true);
  return report;
}

namespace {

std::vector<std::size_t> subsample(std::vector<std::size_t> pool, std::size_t n, std::uint64_t seed,
                                   const std::string& what) {
  if (n == 0) return pool;
  if (n > pool.size()) {
    throw DegenerateError(what + " pool has " + std::to_string(pool.size()) + " teams, " + std::to_string(n) +
                          " requested");
  }
  Rng rng(seed);
  shuffle_in_place(pool, rng);
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void require_both(std::span<const int> y, std::span<const std::size_t> idx, const std::string& what) {
  bool pos = false, neg = false;
  for (auto i : idx) (y[i] == 1 ? pos : neg) = true;
  if (!pos || !neg) throw DegenerateError(what + " set contains a single viability class");
}

}  // namespace

EvalReport round_holdout(const FeatureMatrix& features, const std::map<std::string, double>& scores,
                         const std::map<std::string, int>& rounds, const HoldoutOptions& options) {
  if (options.round < 1) throw std::invalid_argument("held-out round must be positive");
  const auto x = subset_columns(features, options.subset);
  std::vector<std::size_t> train_pool, test_pool;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto it = rounds.find(x.team_ids[i]);
    const int r = it == rounds.end() ? 0 : it->second;
    if (r == 0) continue;
    (r == options.round ? test_pool : train_pool).push_back(i);
  }
  if (test_pool.empty()) throw DegenerateError("no teams in round " + std::to_string(options.round));
  const auto train_idx = subsample(train_pool, options.train_n, mix_seed(options.solver.seed, 0), "training");
  const auto test_idx = subsample(test_pool, options.test_n, mix_seed(options.solver.seed, 1), "test");

  ThresholdReport t;
  t.percentile = options.percentile;
  t.cutoff = percentile_cutoff(score_values(scores), options.percentile);
  const auto y = labels_for(x, scores, t.cutoff);
  require_both(y, train_idx, "training");
  require_both(y, test_idx, "test");
  std::vector<int> y_test;
  for (auto i : test_idx) y_test.push_back(y[i]);
  count_classes(t, y_test);
  t.folds.push_back(fit_and_score(x, y, train_idx, test_idx, options.solver, 0));
  summarize(t, false);

  EvalReport report;
  report.config.protocol = "round_holdout";
  report.config.solver = options.solver;
  report.config.subset = options.subset;
  report.config.percentiles = {options.percentile};
  report.config.round = options.round;
  report.config.train_n = train_idx.size();
  report.config.test_n = test_idx.size();
  report.n_teams = train_idx.size() + test_idx.size();
  report.thresholds.push_back(std::move(t));
  return report;
}

std::vector<EvalReport> condition_split_eval(const FeatureMatrix& features,
                                             const std::map<std::string, double>& scores,
                                             const std::map<std::string, Condition>& conditions,
                                             const ConditionOptions& options) {
  const auto x = subset_columns(features, options.subset);
  const double cutoff = percentile_cutoff(score_values(scores), options.percentile);
  const auto y = labels_for(x, scores, cutoff);
  auto members = [&](Condition c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto it = conditions.find(x.team_ids[i]);
      if (it != conditions.end() && it->second == c) idx.push_back(i);
    }
    if (idx.empty()) throw DegenerateError("corpus has no " + std::string(to_string(c)) + " teams");
    return idx;
  };
  const auto train_idx = members(options.train_condition);
  require_both(y, train_idx, "training");
  std::vector<int> y_train;
  for (auto i : train_idx) y_train.push_back(y[i]);
  const auto model = train(x.select_rows(train_idx), y_train, options.solver);

  std::vector<EvalReport> out;
  for (const auto c : options.test_conditions) {
    const auto test_idx = members(c);
    require_both(y, test_idx, "test");
    std::vector<int> y_test;
    for (auto i : test_idx) y_test.push_back(y[i]);
    const auto p = predict_proba(model, x.select_rows(test_idx));
    ThresholdReport t;
    t.percentile = options.percentile;
    t.cutoff = cutoff;
    count_classes(t, y_test);
    FoldMetrics f;
    f.n_train = train_idx.size();
    f.n_test = test_idx.size();
    f.auc = auc_roc(p, y_test);
    f.metrics = threshold_metrics(p, y_test);
    t.folds.push_back(f);
    summarize(t, false);

    EvalReport r;
    r.config.protocol = "condition_split";
    r.config.solver = options.solver;
    r.config.subset = options.subset;
    r.config.percentiles = {options.percentile};
    r.config.train_condition = options.train_condition;
    r.config.test_condition = c;
    r.config.train_n = train_idx.size();
    r.config.test_n = test_idx.size();
    r.n_teams = train_idx.size() + test_idx.size();
    r.thresholds.push_back(std::move(t));
    out.push_back(std::move(r));
  }
  return out;
}

std::string_view to_string(SliceMode m) { return m == SliceMode::cumulative ? "cumulative" : "disjoint"; }

std::optional<SliceMode> parse_slice_mode(std::string_view s) {
  if (s == "cumulative") return SliceMode::cumulative;
  if (s == "disjoint") return SliceMode::disjoint;
  return std::nullopt;
}

std::vector<Window> slice_windows(SliceMode mode, double duration, double increment, double window) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  constexpr double eps = 1e-9;
  const double step = mode == SliceMode::cumulative ? increment : window;
  if (!(step > 0.0)) throw std::invalid_argument("window increment and length must be positive");
  if (step > duration * (1.0 + eps)) throw std::invalid_argument("window larger than the session duration");
  const double count = std::round(duration / step);
  if (std::abs(count * step - duration) > eps * duration) {
    throw std::invalid_argument(mode == SliceMode::cumulative ? "increment does not divide the session duration"
                                                              : "window length does not divide the session duration");
  }
  std::vector<Window> out;
  const auto n = static_cast<long>(count);
  for (long i = 0; i < n; ++i) {
    const double end = i + 1 == n ? duration : static_cast<double>(i + 1) * step;
    out.push_back({mode == SliceMode::cumulative ? 0.0 : static_cast<double>(i) * step, end});
  }
  return out;
}

SliceReport thin_slice_sweep(const std::vector<PreparedTranscript>& corpus,
                             const std::map<std::string, double>& scores, const SliceOptions& options) {
  if (corpus.empty()) throw DegenerateError("empty corpus");
  const double duration = corpus.front().duration();
  for (const auto& t : corpus) {
    if (t.duration() != duration) throw ValidationError("thin-slice analysis needs a common session duration");
  }
  SliceReport report;
  report.mode = options.mode;
  report.increment = options.increment;
  report.window = options.mode == SliceMode::disjoint ? options.window : 0.0;
  report.duration = duration;
  auto cv = options.cv;
  cv.subset = FeatureSubset::computational;
  for (const auto& w : slice_windows(options.mode, duration, options.increment, options.window)) {
    WindowResult result;
    result.window = w;
    const auto extracted = extract_features(corpus, w, options.features, cv.threads);
    result.n_teams = extracted.matrix.size();
    result.n_dropped = extracted.dropped.size();
    try {
      auto r = cv_sweep(extracted.matrix, scores, cv);
      r.config.protocol = "thin_slice";
      r.config.window = w;
      r.dropped = result.n_dropped;
      result.report = std::move(r);
    } catch (const DegenerateError& e) {
      result.skipped = e.what();
    }
    report.windows.push_back(std::move(result));
  }
  return report;
}

Correlation performance_correlation(std::span<const double> viability, std::span<const double> performance) {
  if (viability.size() != performance.size()) throw std::invalid_argument("series lengths differ");
  const std::size_t n = viability.size();
  if (n < 3) throw DegenerateError("correlation needs at least three teams");
  const double mx = mean_of(viability), my = mean_of(performance);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (viability[i] - mx) * (performance[i] - my);
    sxx += (viability[i] - mx) * (viability[i] - mx);
    syy += (performance[i] - my) * (performance[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("correlation undefined for a constant series");
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  c.r_squared = c.r * c.r;
  c.n = n;
  return c;
}

namespace {

ojson window_json(const Window& w) {
  ojson j;
  j["start"] = w.start;
  j["end"] = w.end ? ojson(*w.end) : ojson(nullptr);
  return j;
}

ojson interval_json(const std::optional<Interval>& i) {
  if (!i) return nullptr;
  return ojson::array({i->low, i->high});
}

ojson metric_json(double v, bool undefined) { return undefined ? ojson(nullptr) : ojson(v); }

ojson threshold_json(const ThresholdReport& t) {
  ojson j;
  j["percentile"] = t.percentile;
  j["cutoff"] = t.cutoff;
  j["n_high"] = t.n_high;
  j["n_low"] = t.n_low;
  j["auc"] = t.mean_auc;
  j["auc_ci95"] = interval_json(t.auc_ci);
  j["precision"] = t.mean_precision;
  j["precision_ci95"] = interval_json(t.precision_ci);
  j["recall"] = t.mean_recall;
  j["recall_ci95"] = interval_json(t.recall_ci);
  j["f1"] = t.mean_f1;
  j["f1_ci95"] = interval_json(t.f1_ci);
  ojson folds = ojson::array();
  for (const auto& f : t.folds) {
    ojson fj;
    fj["fold"] = f.fold;
    fj["n_train"] = f.n_train;
    fj["n_test"] = f.n_test;
    fj["auc"] = f.auc;
    fj["precision"] = metric_json(f.metrics.precision, f.metrics.precision_undefined);
    fj["recall"] = f.metrics.recall;
    fj["f1"] = metric_json(f.metrics.f1, f.metrics.f1_undefined);
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  return j;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string interval_text(const std::optional<Interval>& i) {
  return i ? "[" + fixed(i->low) + ", " + fixed(i->high) + "]" : "";
}

void threshold_rows(std::ostringstream& os, const EvalReport& r) {
  for (const auto& t : r.thresholds) {
    os << std::setw(6) << fixed(t.percentile, 0) << std::setw(10) << fixed(t.cutoff) << std::setw(7) << t.n_high
       << std::setw(7) << t.n_low << std::setw(8) << fixed(t.mean_auc) << "  " << std::setw(16) << std::left
       << interval_text(t.auc_ci) << std::right << std::setw(10) << fixed(t.mean_precision) << std::setw(8)
       << fixed(t.mean_recall) << std::setw(8) << fixed(t.mean_f1) << '\n';
  }
}

const char* kThresholdHeader = "  pctl    cutoff  n_high  n_low     auc  auc 95% CI         precision  recall      f1\n";

}  // namespace

ojson to_json(const EvalConfig& c) {
  ojson j;
  j["protocol"] = c.protocol;
  j["subset"] = to_string(c.subset);
  j["lambda"] = c.solver.lambda;
  j["tol"] = c.solver.tol;
  j["max_iter"] = c.solver.max_iter;
  j["seed"] = c.solver.seed;
  j["percentiles"] = c.percentiles;
  if (c.folds > 0) j["folds"] = c.folds;
  if (c.window) j["window"] = window_json(*c.window);
  if (c.round) j["round"] = *c.round;
  if (c.train_n) j["train_n"] = *c.train_n;
  if (c.test_n) j["test_n"] = *c.test_n;
  if (c.train_condition) j["train_condition"] = to_string(*c.train_condition);
  if (c.test_condition) j["test_condition"] = to_string(*c.test_condition);
  return j;
}

ojson to_json(const EvalReport& r) {
  ojson j;
  j["config"] = to_json(r.config);
  j["n_teams"] = r.n_teams;
  j["dropped"] = r.dropped;
  ojson th = ojson::array();
  for (const auto& t : r.thresholds) th.push_back(threshold_json(t));
  j["thresholds"] = std::move(th);
  return j;
}

ojson to_json(const SliceReport& r) {
  ojson j;
  j["mode"] = to_string(r.mode);
  j["increment"] = r.increment;
  if (r.mode == SliceMode::disjoint) j["window"] = r.window;
  j["duration"] = r.duration;
  ojson ws = ojson::array();
  for (const auto& w : r.windows) {
    ojson wj;
    wj["window"] = window_json(w.window);
    wj["n_teams"] = w.n_teams;
    wj["n_dropped"] = w.n_dropped;
    if (w.report) wj["report"] = to_json(*w.report);
    else wj["skipped"] = w.skipped;
    ws.push_back(std::move(wj));
  }
  j["windows"] = std::move(ws);
  return j;
}

ojson to_json(const CoefficientReport& r) {
  ojson j;
  j["lambda"] = r.lambda;
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  j["intercept"] = r.intercept;
  ojson cs = ojson::array();
  for (const auto& c : r.coefficients) {
    ojson cj;
    cj["feature"] = c.feature;
    cj["coefficient"] = c.coefficient;
    cj["bootstrap_median"] = c.bootstrap_median;
    cj["ci95"] = ojson::array({c.ci_low, c.ci_high});
    cj["significant"] = c.significant;
    cs.push_back(std::move(cj));
  }
  j["coefficients"] = std::move(cs);
  return j;
}

std::string to_text(const EvalReport& r) {
  std::ostringstream os;
  os << r.config.protocol << ": " << r.n_teams << " teams";
  if (r.dropped > 0) os << " (" << r.dropped << " dropped)";
  os << ", subset " << to_string(r.config.subset) << ", lambda " << r.config.solver.lambda;
  if (r.config.test_condition) {
    os << ", train " << to_string(*r.config.train_condition) << " -> test " << to_string(*r.config.test_condition);
  }
  if (r.config.round) os << ", held-out round " << *r.config.round;
  os << '\n' << kThresholdHeader;
  threshold_rows(os, r);
  return os.str();
}

std::string to_text(const SliceReport& r) {
  std::ostringstream os;
  os << "thin slices (" << to_string(r.mode) << ", increment " << r.increment;
  if (r.mode == SliceMode::disjoint) os << ", window " << r.window;
  os << ")\n";
  for (const auto& w : r.windows) {
    os << "window [" << fixed(w.window.start, 1) << ", " << (w.window.end ? fixed(*w.window.end, 1) : "end")
       << "): " << w.n_teams << " teams, " << w.n_dropped << " dropped\n";
    if (w.report) {
      os << kThresholdHeader;
      threshold_rows(os, *w.report);
    } else {
      os << "  skipped: " << w.skipped << '\n';
    }
  }
  return os.str();
}

std::string to_text(const CoefficientReport& r) {
  std::ostringstream os;
  os << "lambda " << r.lambda << ", " << r.replicates << " bootstrap replicates, seed " << r.seed << '\n';
  os << std::left << std::setw(26) << "feature" << std::right << std::setw(11) << "coef" << std::setw(11) << "ci_low"
     << std::setw(11) << "ci_high" << "  sig\n";
  for (const auto& c : r.coefficients) {
    os << std::left << std::setw(26) << c.feature << std::right << std::setw(11) << fixed(c.coefficient, 4)
       << std::setw(11) << fixed(c.ci_low, 4) << std::setw(11) << fixed(c.ci_high, 4) << "  "
       << (c.significant ? "*" : "") << '\n';
  }
  return os.str();
}

namespace {

std::string optional_number(const std::optional<Interval>& i, bool high) {
  if (!i) return "";
  return format_number(high ? i->high : i->low);
}

void csv_threshold(std::ostringstream& os, const ThresholdReport& t) {
  os << format_number(t.percentile) << ',' << format_number(t.cutoff) << ',' << t.n_high << ',' << t.n_low << ','
     << format_number(t.mean_auc) << ',' << optional_number(t.auc_ci, false) << ','
     << optional_number(t.auc_ci, true) << ',' << format_number(t.mean_precision) << ','
     << format_number(t.mean_recall) << ',' << format_number(t.mean_f1) << '\n';
}

const char* kCsvColumns = "percentile,cutoff,n_high,n_low,auc,auc_ci_low,auc_ci_high,precision,recall,f1\n";

}  // namespace

std::string auc_csv(const EvalReport& r) {
  std::ostringstream os;
  os << kCsvColumns;
  for (const auto& t : r.thresholds) csv_threshold(os, t);
  return os.str();
}

std::string auc_csv(const SliceReport& r) {
  std::ostringstream os;
  os << "window_start,window_end,n_teams,n_dropped," << kCsvColumns;
  for (const auto& w : r.windows) {
    if (!w.report) continue;
    for (const auto& t : w.report->thresholds) {
      os << format_number(w.window.start) << ',' << (w.window.end ? format_number(*w.window.end) : "") << ','
         << w.n_teams << ',' << w.n_dropped << ',';
      csv_threshold(os, t);
    }
  }
  return os.str();
}

}  // namespace teamviab
