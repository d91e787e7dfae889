#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles/auc_brute.hpp"
#include "teamviab/eval.hpp"
#include "teamviab/synth.hpp"

using namespace teamviab;

namespace {

struct SmallCorpus {
  SyntheticCorpus synth;
  std::vector<PreparedTranscript> prepared;
  FeatureMatrix features;
  std::map<std::string, double> scores;
  std::map<std::string, int> rounds;
  std::map<std::string, Condition> conditions;
};

const SmallCorpus& small_corpus() {
  static const SmallCorpus c = [] {
    SmallCorpus out;
    out.synth = generate_synthetic_corpus({160, 1.0, 0.0, 3});
    out.prepared = prepare_corpus(out.synth.corpus, testutil::lexicons(), 1);
    out.features = extract_features(out.prepared, Window{}, {}, 1).matrix;
    out.scores = viability_scores(out.synth.corpus);
    for (const auto& t : out.synth.corpus.transcripts) {
      out.rounds[t.team_id] = t.round;
      out.conditions[t.team_id] = t.condition;
    }
    return out;
  }();
  return c;
}

}  // namespace

TEST_CASE("AUC equals the pairwise count on random instances with ties") {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 49;
    std::vector<double> s(n);
    std::vector<int> y(n);
    const int levels = 1 + static_cast<int>(gen() % 8);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(gen() % static_cast<unsigned>(levels)) * 0.25;
      y[i] = gen() % 2 ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    CHECK(auc_roc(s, y) == oracle::auc_pairwise(s, y));
  }
}

TEST_CASE("AUC properties") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(30);
    std::vector<int> y(30);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = normal(gen);
      y[i] = i % 3 == 0 ? 1 : -1;
    }
    const double a = auc_roc(s, y);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    std::vector<double> t(s.size());
    std::transform(s.begin(), s.end(), t.begin(), [](double v) { return std::exp(3.0 * v) + 1.0; });
    CHECK(auc_roc(t, y) == a);
    std::vector<int> flipped(y.size());
    std::transform(y.begin(), y.end(), flipped.begin(), [](int v) { return -v; });
    CHECK(auc_roc(s, flipped) == doctest::Approx(1.0 - a).epsilon(1e-15));
  }
  CHECK(auc_roc(std::vector<double>{1, 2, 3}, std::vector<int>{-1, 1, 1}) == 1.0);
  CHECK(auc_roc(std::vector<double>{5, 5, 5}, std::vector<int>{-1, 1, 1}) == 0.5);
  CHECK_THROWS_AS(auc_roc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), DegenerateError);
}

TEST_CASE("threshold metrics") {
  const std::vector<double> s = {0.9, 0.8, 0.4, 0.6, 0.1};
  const std::vector<int> y = {1, -1, 1, 1, -1};
  const auto m = threshold_metrics(s, y);
  CHECK(m.precision == 2.0 / 3.0);
  CHECK(m.recall == 2.0 / 3.0);
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const auto none = threshold_metrics(std::vector<double>{0.1, 0.2}, std::vector<int>{1, -1});
  CHECK(none.precision_undefined);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("stratified folds partition the teams and keep class balance") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 20 + gen() % 200;
    std::vector<int> y(n, -1);
    const std::size_t pos = 5 + gen() % (n - 10);
    for (std::size_t i = 0; i < pos; ++i) y[gen() % n] = 1;
    const std::size_t n_pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    const std::size_t n_neg = n - n_pos;
    const int k = 5;
    if (n_pos < 5 || n_neg < 5) {
      CHECK_THROWS_AS(stratified_kfold(y, k, 9), DegenerateError);
      continue;
    }
    const auto plan = stratified_kfold(y, k, static_cast<std::uint64_t>(trial));
    REQUIRE(plan.fold_of.size() == n);
    std::vector<int> seen(n, 0);
    for (int f = 0; f < k; ++f) {
      const auto test = plan.test_indices(f);
      const auto train = plan.train_indices(f);
      CHECK(test.size() + train.size() == n);
      double p = 0.0;
      for (auto i : test) {
        ++seen[i];
        p += y[i] == 1;
      }
      CHECK(std::abs(p - static_cast<double>(n_pos) / k) <= 1.0);
      CHECK(std::abs((static_cast<double>(test.size()) - p) - static_cast<double>(n_neg) / k) <= 1.0);
    }
    for (int s : seen) CHECK(s == 1);
    CHECK(stratified_kfold(y, k, static_cast<std::uint64_t>(trial)) == plan);
  }
}

TEST_CASE("t interval") {
  const std::vector<double> v = {0.6, 0.7, 0.8};
  const auto ci = t_interval95(v);
  // mean 0.7, sd 0.1, t(0.975, 2) = 4.302653
  CHECK(ci.low == doctest::Approx(0.7 - 4.302653 * 0.1 / std::sqrt(3.0)).epsilon(1e-6));
  CHECK(ci.high == doctest::Approx(0.7 + 4.302653 * 0.1 / std::sqrt(3.0)).epsilon(1e-6));
  CHECK(t_interval95(std::vector<double>{0.9, 1.0, 1.0}).high == 1.0);
  const auto flat = t_interval95(std::vector<double>{0.5, 0.5});
  CHECK(flat.low == 0.5);
  CHECK(flat.high == 0.5);
}

TEST_CASE("slice windows") {
  const auto cum = slice_windows(SliceMode::cumulative, 600, 10, 200);
  REQUIRE(cum.size() == 60);
  CHECK(cum[0] == Window{0.0, 10.0});
  CHECK(cum[6] == Window{0.0, 70.0});
  CHECK(*cum.back().end == 600.0);
  const auto dis = slice_windows(SliceMode::disjoint, 600, 10, 200);
  REQUIRE(dis.size() == 3);
  CHECK(dis[1] == Window{200.0, 400.0});
  CHECK(*dis[2].end == 600.0);
  CHECK_THROWS_AS(slice_windows(SliceMode::cumulative, 600, 7, 200), std::invalid_argument);
  CHECK_THROWS_AS(slice_windows(SliceMode::disjoint, 600, 10, 250), std::invalid_argument);
  CHECK_THROWS_AS(slice_windows(SliceMode::disjoint, 600, 10, 700), std::invalid_argument);
}

TEST_CASE("cv sweep is reproducible and thread independent") {
  const auto& c = small_corpus();
  CvOptions o;
  o.percentiles = {30, 50, 70};
  o.solver.seed = 11;
  o.threads = 1;
  const auto a = cv_sweep(c.features, c.scores, o);
  o.threads = 4;
  const auto b = cv_sweep(c.features, c.scores, o);
  CHECK(a.thresholds == b.thresholds);
  CHECK(to_json(a).dump() == to_json(b).dump());
  REQUIRE(a.thresholds.size() == 3);
  for (const auto& t : a.thresholds) {
    CHECK(t.folds.size() == 5);
    CHECK(t.auc_ci.has_value());
    CHECK(t.auc_ci->low <= t.mean_auc);
    CHECK(t.mean_auc <= t.auc_ci->high);
    CHECK(t.n_high + t.n_low == c.features.size());
  }
  const auto j = to_json(a);
  CHECK(j.at("config").at("seed") == 11);
  CHECK(j.at("config").at("protocol") == "cv");
  CHECK(auc_csv(a).find("percentile,cutoff") == 0);
}

TEST_CASE("cumulative slice at the full duration reproduces the full report") {
  const auto& c = small_corpus();
  SliceOptions s;
  s.increment = 300.0;
  s.cv.percentiles = {50};
  s.cv.solver.seed = 5;
  s.cv.threads = 1;
  const auto rep = thin_slice_sweep(c.prepared, c.scores, s);
  REQUIRE(rep.windows.size() == 2);
  REQUIRE(rep.windows[1].report.has_value());
  const auto full = cv_sweep(c.features, c.scores, s.cv);
  CHECK(rep.windows[1].report->thresholds == full.thresholds);
  CHECK(rep.windows[1].n_dropped == 0);
}

TEST_CASE("round holdout and condition splits") {
  const auto& c = small_corpus();
  HoldoutOptions h;
  h.round = 2;
  h.train_n = 60;
  h.test_n = 20;
  h.solver.seed = 8;
  const auto a = round_holdout(c.features, c.scores, c.rounds, h);
  const auto b = round_holdout(c.features, c.scores, c.rounds, h);
  CHECK(a.thresholds == b.thresholds);
  REQUIRE(a.thresholds.size() == 1);
  CHECK_FALSE(a.thresholds[0].auc_ci.has_value());
  CHECK(a.thresholds[0].folds[0].n_train == 60);
  CHECK(a.thresholds[0].folds[0].n_test == 20);
  h.round = 9;
  CHECK_THROWS_AS(round_holdout(c.features, c.scores, c.rounds, h), DegenerateError);
  h.round = 2;
  h.train_n = 10000;
  CHECK_THROWS_AS(round_holdout(c.features, c.scores, c.rounds, h), DegenerateError);

  const auto reports = condition_split_eval(c.features, c.scores, c.conditions, ConditionOptions{});
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].config.test_condition == Condition::initial_visible);
  CHECK(reports[1].config.test_condition == Condition::reconvened);

  auto masked_only = c.conditions;
  for (auto& [team, cond] : masked_only) cond = Condition::masked;
  CHECK_THROWS_AS(condition_split_eval(c.features, c.scores, masked_only, ConditionOptions{}), DegenerateError);
}

TEST_CASE("performance correlation") {
  const std::vector<double> v = {1, 2, 3, 4};
  const std::vector<double> p = {2, 4, 6, 8};
  const auto r = performance_correlation(v, p);
  CHECK(r.r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.n == 4);
  const auto q = performance_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2});
  CHECK(q.r == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q.r_squared == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(performance_correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DegenerateError);
  CHECK_THROWS_AS(performance_correlation(v, std::vector<double>{3, 3, 3, 3}), DegenerateError);
}
