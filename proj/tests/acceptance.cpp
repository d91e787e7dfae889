// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "cli_pipeline.hpp"
#include "oracles/auc_brute.hpp"
#include "oracles/model_fixture.hpp"
#include "oracles/newton_mle.hpp"
#include "teamviab/eval.hpp"
#include "teamviab/labels.hpp"
#include "teamviab/model.hpp"
#include "teamviab/synth.hpp"

using namespace teamviab;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradRelTol = 1e-5;
constexpr double kNewtonTol = 1e-4;
constexpr double kTfidfTol = 1e-9;
constexpr double kPlantedP90 = 0.85;
constexpr double kPlantedP50 = 0.70;
constexpr double kNullBand = 0.07;
constexpr double kSliceSlack = 0.05;
constexpr double kRoundSpread = 0.1;
constexpr double kAucBudget = 5.0;
constexpr double kSolverBudget = 30.0;
constexpr double kPlantedBudget = 120.0;

constexpr std::uint64_t kSeed = 7;
constexpr std::size_t kTeams = 600;
constexpr int kBootstrap = 200;
constexpr double kLambda = 0.01;
constexpr std::size_t kHoldoutTrain = 300;
constexpr std::size_t kHoldoutTest = 100;
constexpr double kConditionShift = 0.8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const LexiconSet& lexicons() {
  static const auto set = load_lexicon_dir(default_lexicon_dir());
  return set;
}

struct Planted {
  SyntheticCorpus synth;
  std::vector<PreparedTranscript> prepared;
  FeatureMatrix features;
  std::map<std::string, double> scores;
};

Planted build(double effect, double shift) {
  Planted p;
  p.synth = generate_synthetic_corpus({kTeams, effect, shift, kSeed});
  p.prepared = prepare_corpus(p.synth.corpus, lexicons());
  p.features = extract_features(p.prepared, Window{}).matrix;
  p.scores = viability_scores(p.synth.corpus);
  return p;
}

CvOptions cv_options() {
  CvOptions o;
  o.k = 5;
  o.solver.lambda = kLambda;
  o.solver.seed = kSeed;
  return o;
}

const Planted& planted() {
  static const Planted p = build(1.0, 0.0);
  return p;
}

std::vector<int> labels_at(const FeatureMatrix& x, const std::map<std::string, double>& scores, double p) {
  const auto lab = label_teams(scores, p);
  std::vector<int> y;
  for (const auto& id : x.team_ids) y.push_back(lab.labels.at(id) == ViabilityClass::high ? 1 : -1);
  return y;
}

Outcome auc_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240101);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 49;
    const unsigned levels = 1 + static_cast<unsigned>(gen() % 10);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(gen() % levels) / 3.0;
      y[i] = gen() % 2 ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    if (auc_roc(s, y) != oracle::auc_pairwise(s, y)) ++mismatches;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < kAucBudget,
          std::to_string(mismatches) + " mismatches in 200 instances, " + fmt("%.2f s", t)};
}

Outcome solver() {
  const auto t0 = Clock::now();
  const auto f = oracle::logistic_fixture();
  const auto x = f.dense();

  double worst_grad = 0.0;
  std::mt19937_64 gen(77);
  std::normal_distribution<double> normal;
  const double h = 1e-6;
  for (int point = 0; point < 20; ++point) {
    std::vector<double> w(x.cols);
    for (auto& v : w) v = normal(gen);
    const double b = normal(gen);
    std::vector<double> gw(x.cols);
    double gb = 0.0;
    logistic_gradient(x, f.y, w, b, gw, gb);
    for (std::size_t j = 0; j <= x.cols; ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < x.cols) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fd = (logistic_loss(x, f.y, wp, bp) - logistic_loss(x, f.y, wm, bm)) / (2.0 * h);
      const double an = j < x.cols ? gw[j] : gb;
      worst_grad = std::max(worst_grad, std::abs(an - fd) / std::max(std::abs(fd), 1e-3));
    }
  }

  const auto mle = oracle::newton_logistic(f.x, f.y);
  SolverOptions o;
  o.lambda = 0.0;
  o.tol = 1e-15;
  o.max_iter = 200000;
  const auto fit = fit_lasso_logistic(x, f.y, o);
  double worst_mle = std::abs(fit.intercept - mle.back());
  for (std::size_t j = 0; j < fit.weights.size(); ++j) worst_mle = std::max(worst_mle, std::abs(fit.weights[j] - mle[j]));

  bool zero = true;
  const double lmax = lambda_max(x, f.y);
  for (double scale : {1.0, 2.0}) {
    o = SolverOptions{};
    o.lambda = lmax * scale;
    for (double w : fit_lasso_logistic(x, f.y, o).weights) zero = zero && w == 0.0;
  }

  bool monotone = true;
  for (double frac : {0.0, 0.05, 0.2, 0.5}) {
    o = SolverOptions{};
    o.lambda = lmax * frac;
    o.tol = 1e-12;
    const auto trace = fit_lasso_logistic(x, f.y, o).diagnostics.objective_trace;
    for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i] <= trace[i - 1];
  }
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << "grad rel err " << fmt("%.1e", worst_grad) << ", Newton max diff " << fmt("%.1e", worst_mle)
    << ", lambda_max zeroes " << (zero ? "yes" : "no") << ", monotone " << (monotone ? "yes" : "no") << ", "
    << fmt("%.2f s", t);
  return {worst_grad < kGradRelTol && worst_mle < kNewtonTol && zero && monotone && t < kSolverBudget, d.str()};
}

Outcome feature_fixture() {
  const auto corpus = load_corpus(std::filesystem::path(TEAMVIAB_FIXTURES) / "feature_messages.jsonl",
                                  std::filesystem::path(TEAMVIAB_FIXTURES) / "feature_teams.jsonl");
  const auto& t = corpus.transcripts.at(0);
  int checked = 0, bad = 0;
  std::string first_bad;
  for (const auto& [file, window] : std::vector<std::pair<std::string, Window>>{
           {"feature_golden.json", Window{}}, {"feature_golden_70.json", Window{0.0, 70.0}}}) {
    const auto golden =
        nlohmann::json::parse(clitest::slurp(std::filesystem::path(TEAMVIAB_FIXTURES) / file)).at("features");
    const auto fv = team_features(t, window, lexicons());
    if (golden.size() != kComputationalFeatures || fv.names != computational_feature_names()) {
      return {false, file + ": registry mismatch"};
    }
    for (std::size_t i = 0; i < fv.names.size(); ++i) {
      const double want = golden.at(fv.names[i]).get<double>();
      const bool ok = fv.names[i] == "tfidf_cosine_mean" ? std::abs(fv.values[i] - want) <= kTfidfTol
                                                          : fv.values[i] == want;
      ++checked;
      if (!ok) {
        ++bad;
        if (first_bad.empty()) first_bad = fv.names[i];
      }
    }
  }
  return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) + " feature values match" +
                        (first_bad.empty() ? "" : ", first mismatch " + first_bad)};
}

Outcome label_fixture() {
  const std::vector<std::pair<std::vector<int>, double>> cases = {
      {{1, 5, 5, 5, 5}, 5.0}, {{3, 3, 3}, 3.0}, {{1, 2, 3, 4}, 2.5},
      {{1, 1, 5}, 1.0},       {{2, 2, 2, 2, 5}, 2.0}, {{1, 4, 4, 4, 5, 5, 5}, 4.5}};
  int ok = 0;
  for (const auto& [ratings, want] : cases) ok += aggregate_question(ratings) == want;

  Transcript t;
  t.team_id = "A";
  t.roster = {"a", "b", "c", "d"};
  std::vector<RatingSubmission> subs;
  for (int k = 0; k < 6; ++k) {
    RatingSubmission s;
    s.team_id = "A";
    s.rater_id = "r" + std::to_string(k);
    s.attention_answer = k % 3 == 1 ? 5 : 4;
    s.answers.fill(1 + k % 5);
    subs.push_back(s);
  }
  const auto kept = filter_attention(subs, t);
  bool filter_ok = kept.size() == 4;
  for (const auto& s : kept) filter_ok = filter_ok && s.attention_answer == 4;
  return {ok == static_cast<int>(cases.size()) && filter_ok,
          std::to_string(ok) + "/" + std::to_string(cases.size()) + " aggregation cases, attention filter kept " +
              std::to_string(kept.size()) + "/6"};
}

Outcome planted_signal() {
  const auto t0 = Clock::now();
  const auto& p = planted();
  const auto rep = cv_sweep(p.features, p.scores, cv_options());
  const double t = seconds_since(t0);
  double a50 = 0, a90 = 0;
  std::string curve;
  for (const auto& th : rep.thresholds) {
    if (th.percentile == 50) a50 = th.mean_auc;
    if (th.percentile == 90) a90 = th.mean_auc;
    curve += (curve.empty() ? "" : " ") + fmt("%.3f", th.mean_auc);
  }
  return {a90 >= kPlantedP90 && a50 >= kPlantedP50 && a90 > a50 && t < kPlantedBudget,
          "AUC p10..p90 " + curve + "; p50 " + fmt("%.3f", a50) + ", p90 " + fmt("%.3f", a90) + ", " +
              fmt("%.1f s", t)};
}

Outcome null_control() {
  const auto p = build(0.0, 0.0);
  const auto rep = cv_sweep(p.features, p.scores, cv_options());
  double worst = 0.0;
  std::string curve;
  for (const auto& th : rep.thresholds) {
    worst = std::max(worst, std::abs(th.mean_auc - 0.5));
    curve += (curve.empty() ? "" : " ") + fmt("%.3f", th.mean_auc);
  }
  return {worst <= kNullBand, "AUC p10..p90 " + curve + "; max |AUC-0.5| " + fmt("%.3f", worst)};
}

Outcome coefficient_recovery() {
  const auto& p = planted();
  const auto x = p.features.select_columns(feature_registry(FeatureSubset::computational));
  const auto y = labels_at(x, p.scores, 50);
  SolverOptions o;
  o.lambda = kLambda;
  o.seed = kSeed;
  const auto rep = coefficients_with_ci(x, y, o, kBootstrap);
  std::map<std::string, CoefficientEstimate> by;
  for (const auto& c : rep.coefficients) by[c.feature] = c;
  const auto& ex = by.at("liwc_exclusive");
  const auto& sp = by.at("liwc_second_person");
  const auto& sd = by.at("liwc_sadness");
  auto ci = [](const CoefficientEstimate& c) { return "[" + fmt("%.3f", c.ci_low) + ", " + fmt("%.3f", c.ci_high) + "]"; };
  return {ex.ci_low > 0.0 && sp.ci_low > 0.0 && sd.ci_high < 0.0,
          "exclusive " + ci(ex) + ", second_person " + ci(sp) + ", sadness " + ci(sd)};
}

Outcome thin_slice() {
  const auto& p = planted();
  SliceOptions s;
  s.mode = SliceMode::cumulative;
  s.increment = 10.0;
  s.cv = cv_options();
  s.cv.percentiles = {90};
  const auto rep = thin_slice_sweep(p.prepared, p.scores, s);
  const WindowResult* w70 = nullptr;
  const WindowResult* w600 = nullptr;
  for (const auto& w : rep.windows) {
    if (*w.window.end == 70.0) w70 = &w;
    if (*w.window.end == 600.0) w600 = &w;
  }
  if (!w70 || !w600 || !w70->report || !w600->report) return {false, "window 70 or 600 missing"};
  const auto full = cv_sweep(p.features, p.scores, s.cv);
  const bool identical = w600->report->thresholds == full.thresholds &&
                         to_json(*w600->report).at("thresholds").dump() == to_json(full).at("thresholds").dump();
  const double a70 = w70->report->thresholds[0].mean_auc;
  const double a600 = w600->report->thresholds[0].mean_auc;
  return {identical && a600 >= a70 - kSliceSlack,
          std::string("t=600 equals full report: ") + (identical ? "yes" : "no") + "; p90 AUC t=70 " +
              fmt("%.3f", a70) + ", t=600 " + fmt("%.3f", a600) + ", " + std::to_string(rep.windows.size()) +
              " windows"};
}

Outcome stationarity() {
  const auto& p = planted();
  std::map<std::string, int> rounds;
  for (const auto& t : p.synth.corpus.transcripts) rounds[t.team_id] = t.round;
  std::vector<double> aucs;
  std::string list;
  for (int j = 1; j <= 4; ++j) {
    HoldoutOptions h;
    h.round = j;
    h.train_n = kHoldoutTrain;
    h.test_n = kHoldoutTest;
    h.solver.lambda = kLambda;
    h.solver.seed = kSeed;
    aucs.push_back(round_holdout(p.features, p.scores, rounds, h).thresholds.at(0).mean_auc);
    list += (list.empty() ? "" : " ") + fmt("%.3f", aucs.back());
  }
  const double spread = *std::max_element(aucs.begin(), aucs.end()) - *std::min_element(aucs.begin(), aucs.end());

  const auto shifted = build(1.0, kConditionShift);
  std::map<std::string, Condition> conds;
  for (const auto& t : shifted.synth.corpus.transcripts) conds[t.team_id] = t.condition;
  ConditionOptions co;
  co.solver.lambda = kLambda;
  co.solver.seed = kSeed;
  const auto reps = condition_split_eval(shifted.features, shifted.scores, conds, co);
  const double initial = reps.at(0).thresholds.at(0).mean_auc;
  const double reconvened = reps.at(1).thresholds.at(0).mean_auc;
  return {spread < kRoundSpread && reconvened < initial,
          "round AUCs " + list + " (spread " + fmt("%.3f", spread) + "); shift " + fmt("%.1f", kConditionShift) +
              ": initial " + fmt("%.3f", initial) + ", reconvened " + fmt("%.3f", reconvened)};
}

Outcome determinism() {
  // Each run starts from an empty directory at the same path, so recorded
  // input paths and config hashes line up.
  const auto dir = std::filesystem::temp_directory_path() / ("teamviab_accept_" + std::to_string(::getpid()));
  auto fresh = [&](unsigned threads) {
    std::filesystem::remove_all(dir);
    return clitest::run_pipeline(dir, threads);
  };
  const auto a = fresh(1);
  const auto b = fresh(1);
  const auto c = fresh(4);
  std::filesystem::remove_all(dir);
  for (const auto* r : {&a, &b, &c}) {
    if (!r->failed.empty()) return {false, "pipeline command failed: " + r->failed[0]};
  }
  const auto& na = a.files;
  const auto& nb = b.files;
  const auto& nc = c.files;
  std::string diff;
  for (const auto& [name, body] : na) {
    if (!nb.count(name) || nb.at(name) != body) diff += " rerun:" + name;
    if (!nc.count(name) || nc.at(name) != body) diff += " threads:" + name;
  }

  // Library-level parallelism checks on the planted corpus.
  const auto& p = planted();
  auto o1 = cv_options();
  o1.percentiles = {50, 90};
  o1.threads = 1;
  auto o4 = o1;
  o4.threads = 4;
  const bool cv_same = cv_sweep(p.features, p.scores, o1).thresholds == cv_sweep(p.features, p.scores, o4).thresholds;
  const auto x = p.features.select_columns(feature_registry(FeatureSubset::computational));
  const auto y = labels_at(x, p.scores, 50);
  SolverOptions so;
  so.lambda = kLambda;
  so.seed = kSeed;
  const auto b1 = to_json(coefficients_with_ci(x, y, so, 50, 1)).dump();
  const auto b4 = to_json(coefficients_with_ci(x, y, so, 50, 4)).dump();
  const bool boot_same = b1 == b4;
  return {diff.empty() && cv_same && boot_same,
          std::to_string(na.size()) + " CLI output files compared across reruns and 1 vs 4 threads" +
              (diff.empty() ? ", all identical" : ", differing:" + diff) + "; cv threads equal " +
              (cv_same ? "yes" : "no") + ", bootstrap threads equal " + (boot_same ? "yes" : "no")};
}

}  // namespace

int main() {
  report(1, "AUC equals exhaustive pairwise count", auc_oracle);
  report(2, "solver gradient, MLE oracle, lambda_max and monotone objective", solver);
  report(3, "fixture transcript features match the independent oracle", feature_fixture);
  report(4, "label aggregation and attention filtering fixtures", label_fixture);
  report(5, "planted signal: AUC p90 >= 0.85, p50 >= 0.70, p90 > p50", planted_signal);
  report(6, "null control: AUC within 0.5 +/- 0.07 at every threshold", null_control);
  report(7, "coefficient recovery: exclusive, second_person > 0, sadness < 0", coefficient_recovery);
  report(8, "thin slice totality and t=600 vs t=70 shape", thin_slice);
  report(9, "round stationarity and reconvened drop under condition shift", stationarity);
  report(10, "determinism of CLI reruns and parallel execution", determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
