#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teamviab/error.hpp"
#include "teamviab/eval.hpp"
#include "teamviab/feature_matrix.hpp"
#include "teamviab/labels.hpp"
#include "teamviab/lexicon.hpp"
#include "teamviab/model.hpp"
#include "teamviab/synth.hpp"
#include "teamviab/transcript.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace teamviab;

namespace {

constexpr const char* kVersion = TEAMVIAB_VERSION;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

// Every command records its resolved configuration next to its primary output.
void write_sidecar(const fs::path& out, const std::string& command, const ojson& config) {
  ojson j;
  j["tool"] = "teamviab";
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = hex(fnv1a(config.dump()));
  write_text(fs::path(out.string() + ".config.json"), j.dump(2) + "\n");
}

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
  auto p = out;
  p.replace_extension(suffix);
  return p;
}

struct Options {
  std::string transcripts, teams, ratings, features, model, out, out_dir, lexicons, profile;
  std::uint64_t seed = 0;
  double lambda = 0.01;
  double percentile = 50.0;
  std::vector<double> percentiles = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  int folds = 5;
  int round = 1;
  std::size_t train_n = 300;
  std::size_t test_n = 60;
  double window_start = 0.0;
  std::optional<double> window_end;
  double increment = 10.0;
  double window = 200.0;
  std::string mode = "cumulative";
  std::string subset = "computational";
  bool rates = false;
  int bootstrap = 200;
  unsigned threads = 0;
  std::size_t n_teams = 200;
  double effect = 1.0;
  double condition_shift = 0.0;
  double tol = 1e-8;
  int max_iter = 10000;
};

LexiconSet lexicons_for(const Options& o) {
  return load_lexicon_dir(o.lexicons.empty() ? default_lexicon_dir() : fs::path(o.lexicons));
}

fs::path lexicon_path(const Options& o) { return o.lexicons.empty() ? default_lexicon_dir() : fs::path(o.lexicons); }

FeatureSubset subset_of(const Options& o) {
  const auto s = parse_feature_subset(o.subset);
  if (!s) throw std::invalid_argument("--subset must be computational, human or all");
  return *s;
}

SolverOptions solver_of(const Options& o) {
  SolverOptions s;
  s.lambda = o.lambda;
  s.seed = o.seed;
  s.tol = o.tol;
  s.max_iter = o.max_iter;
  return s;
}

Window window_of(const Options& o) { return {o.window_start, o.window_end}; }

ojson window_config(const Options& o) {
  ojson w;
  w["start"] = o.window_start;
  w["end"] = o.window_end ? ojson(*o.window_end) : ojson(nullptr);
  return w;
}

ojson solver_config(const Options& o) {
  return {{"lambda", o.lambda}, {"seed", o.seed}, {"tol", o.tol}, {"max_iter", o.max_iter}};
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw std::invalid_argument(std::string(flag) + " is required");
}

void emit_report(const Options& o, const std::string& command, const ojson& config, const ojson& report,
                 const std::string& text, const std::string& csv) {
  write_text(o.out, report.dump(2) + "\n");
  write_text(with_suffix(o.out, ".txt"), text);
  if (!csv.empty()) write_text(with_suffix(o.out, ".auc.csv"), csv);
  write_sidecar(o.out, command, config);
  std::cout << text;
}

std::map<std::string, int> rounds_of(const Corpus& c) {
  std::map<std::string, int> m;
  for (const auto& t : c.transcripts) m[t.team_id] = t.round;
  return m;
}

std::map<std::string, Condition> conditions_of(const Corpus& c) {
  std::map<std::string, Condition> m;
  for (const auto& t : c.transcripts) m[t.team_id] = t.condition;
  return m;
}

void print_warnings(const Corpus& c) {
  for (const auto& w : c.warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_validate(const Options& o) {
  require(o.transcripts, "--transcripts");
  require(o.teams, "--teams");
  const auto corpus = load_corpus(o.transcripts, o.teams);
  print_warnings(corpus);
  ojson summary;
  summary["teams"] = corpus.size();
  summary["messages"] = corpus.message_count();
  if (!o.ratings.empty()) {
    const auto ratings = load_ratings(o.ratings);
    aggregate_corpus(ratings, corpus);
    summary["ratings"] = ratings.size();
  }
  summary["warnings"] = corpus.warnings;
  std::cout << "ok: " << corpus.size() << " teams, " << corpus.message_count() << " messages\n";
  if (!o.out.empty()) {
    write_text(o.out, summary.dump(2) + "\n");
    write_sidecar(o.out, "validate",
                  {{"transcripts", o.transcripts}, {"teams", o.teams}, {"ratings", o.ratings}});
  }
  return 0;
}

int cmd_extract(const Options& o) {
  require(o.transcripts, "--transcripts");
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto corpus = load_corpus(o.transcripts, o.teams);
  print_warnings(corpus);
  const auto lex = lexicons_for(o);
  const auto prepared = prepare_corpus(corpus, lex, o.threads);
  FeatureOptions fo;
  fo.rates = o.rates;
  auto result = extract_features(prepared, window_of(o), fo, o.threads);
  for (const auto& d : result.dropped) std::cerr << "dropped " << d << ": no messages in window\n";
  if (!o.ratings.empty()) result.matrix = merge_columns(result.matrix, aggregate_corpus(load_ratings(o.ratings), corpus));
  write_csv(result.matrix, fs::path(o.out));
  write_sidecar(o.out, "extract",
                {{"transcripts", o.transcripts},
                 {"teams", o.teams},
                 {"ratings", o.ratings},
                 {"lexicons", lexicon_path(o).string()},
                 {"window", window_config(o)},
                 {"rates", o.rates},
                 {"rows", result.matrix.size()},
                 {"dropped", result.dropped}});
  std::cout << "wrote " << result.matrix.size() << " teams to " << o.out << '\n';
  return 0;
}

int cmd_labels(const Options& o) {
  require(o.ratings, "--ratings");
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto corpus = load_teams(o.teams);
  const auto m = aggregate_corpus(load_ratings(o.ratings), corpus);
  write_csv(m, fs::path(o.out));
  write_sidecar(o.out, "labels-aggregate", {{"ratings", o.ratings}, {"teams", o.teams}});
  std::cout << "wrote " << m.size() << " teams to " << o.out << '\n';
  return 0;
}

struct LabeledData {
  FeatureMatrix x;
  std::vector<int> y;
  double cutoff = 0.0;
};

LabeledData labeled(const Options& o, const Corpus& teams) {
  const auto scores = viability_scores(teams);
  const auto labeling = label_teams(scores, o.percentile);
  if (labeling.degenerate) throw DegenerateError("percentile split leaves one class empty");
  LabeledData d;
  d.cutoff = labeling.cutoff;
  d.x = read_csv(o.features).select_columns(feature_registry(subset_of(o)));
  for (const auto& id : d.x.team_ids) {
    const auto it = labeling.labels.find(id);
    if (it == labeling.labels.end()) throw ValidationError("no viability record for team " + id);
    d.y.push_back(it->second == ViabilityClass::high ? 1 : -1);
  }
  return d;
}

int cmd_train(const Options& o) {
  require(o.features, "--features");
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto d = labeled(o, load_teams(o.teams));
  const auto model = train(d.x, d.y, solver_of(o));
  save_model(model, o.out);
  write_sidecar(o.out, "train",
                {{"features", o.features},
                 {"teams", o.teams},
                 {"subset", o.subset},
                 {"percentile", o.percentile},
                 {"cutoff", d.cutoff},
                 {"solver", solver_config(o)}});
  std::cout << "trained on " << d.x.size() << " teams; " << model.solver.iterations << " iterations, objective "
            << model.solver.objective << (model.solver.converged ? "" : " (not converged)") << '\n';
  return 0;
}

int cmd_cv(const Options& o) {
  require(o.features, "--features");
  require(o.teams, "--teams");
  require(o.out, "--out");
  CvOptions cv;
  cv.percentiles = o.percentiles;
  cv.k = o.folds;
  cv.solver = solver_of(o);
  cv.subset = subset_of(o);
  cv.threads = o.threads;
  const auto report = cv_sweep(read_csv(o.features), viability_scores(load_teams(o.teams)), cv);
  ojson config = to_json(report.config);
  config["features"] = o.features;
  config["teams"] = o.teams;
  emit_report(o, "cv", config, to_json(report), to_text(report), auc_csv(report));
  return 0;
}

int cmd_holdout(const Options& o) {
  require(o.features, "--features");
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto teams = load_teams(o.teams);
  HoldoutOptions h;
  h.round = o.round;
  h.train_n = o.train_n;
  h.test_n = o.test_n;
  h.percentile = o.percentile;
  h.solver = solver_of(o);
  h.subset = subset_of(o);
  const auto report = round_holdout(read_csv(o.features), viability_scores(teams), rounds_of(teams), h);
  ojson config = to_json(report.config);
  config["features"] = o.features;
  config["teams"] = o.teams;
  config["requested_train_n"] = o.train_n;
  config["requested_test_n"] = o.test_n;
  emit_report(o, "holdout-round", config, to_json(report), to_text(report), auc_csv(report));
  return 0;
}

int cmd_condition(const Options& o) {
  require(o.features, "--features");
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto teams = load_teams(o.teams);
  ConditionOptions c;
  c.percentile = o.percentile;
  c.solver = solver_of(o);
  c.subset = subset_of(o);
  const auto reports = condition_split_eval(read_csv(o.features), viability_scores(teams), conditions_of(teams), c);
  ojson all = ojson::array();
  std::string text;
  for (const auto& r : reports) {
    all.push_back(to_json(r));
    text += to_text(r);
  }
  ojson config = {{"features", o.features},
                  {"teams", o.teams},
                  {"subset", o.subset},
                  {"percentile", o.percentile},
                  {"train_condition", "masked"},
                  {"test_conditions", {"initial_visible", "reconvened"}},
                  {"solver", solver_config(o)}};
  emit_report(o, "condition-eval", config, all, text, "");
  return 0;
}

int cmd_slice(const Options& o) {
  require(o.transcripts, "--transcripts");
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto corpus = load_corpus(o.transcripts, o.teams);
  print_warnings(corpus);
  const auto prepared = prepare_corpus(corpus, lexicons_for(o), o.threads);
  SliceOptions s;
  const auto mode = parse_slice_mode(o.mode);
  if (!mode) throw std::invalid_argument("--mode must be cumulative or disjoint");
  s.mode = *mode;
  s.increment = o.increment;
  s.window = o.window;
  s.cv.percentiles = o.percentiles;
  s.cv.k = o.folds;
  s.cv.solver = solver_of(o);
  s.cv.threads = o.threads;
  s.features.rates = o.rates;
  const auto report = thin_slice_sweep(prepared, viability_scores(corpus), s);
  ojson config = {{"transcripts", o.transcripts},
                  {"teams", o.teams},
                  {"lexicons", lexicon_path(o).string()},
                  {"mode", o.mode},
                  {"increment", o.increment},
                  {"window", o.window},
                  {"percentiles", o.percentiles},
                  {"folds", o.folds},
                  {"rates", o.rates},
                  {"solver", solver_config(o)}};
  emit_report(o, "slice", config, to_json(report), to_text(report), auc_csv(report));
  return 0;
}

int cmd_score(const Options& o) {
  require(o.model, "--model");
  require(o.features, "--features");
  require(o.out, "--out");
  const auto model = load_model(o.model);
  const auto m = read_csv(o.features).select_columns(model.standardizer.names);
  const auto p = predict_proba(model, m);
  std::ostringstream os;
  os << "team_id,probability_high\n";
  for (std::size_t i = 0; i < m.size(); ++i) os << m.team_ids[i] << ',' << format_number(p[i]) << '\n';
  write_text(o.out, os.str());
  write_sidecar(o.out, "score", {{"model", o.model}, {"features", o.features}});
  std::cout << "scored " << m.size() << " teams\n";
  return 0;
}

int cmd_coeffs(const Options& o) {
  require(o.features, "--features");
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto d = labeled(o, load_teams(o.teams));
  const auto report = coefficients_with_ci(d.x, d.y, solver_of(o), o.bootstrap, o.threads);
  ojson config = {{"features", o.features},
                  {"teams", o.teams},
                  {"subset", o.subset},
                  {"percentile", o.percentile},
                  {"cutoff", d.cutoff},
                  {"bootstrap", o.bootstrap},
                  {"solver", solver_config(o)}};
  emit_report(o, "coeffs", config, to_json(report), to_text(report), "");
  return 0;
}

int cmd_corr(const Options& o) {
  require(o.teams, "--teams");
  require(o.out, "--out");
  const auto teams = load_teams(o.teams);
  std::vector<double> v, p;
  for (const auto& r : teams.records) {
    if (!r.performance) continue;
    v.push_back(team_viability(r));
    p.push_back(*r.performance);
  }
  const auto c = performance_correlation(v, p);
  ojson j = {{"n", c.n}, {"r", c.r}, {"r_squared", c.r_squared}};
  std::ostringstream text;
  text << "viability vs performance: n " << c.n << ", r " << format_number(c.r) << ", r^2 "
       << format_number(c.r_squared) << '\n';
  emit_report(o, "corr", {{"teams", o.teams}}, j, text.str(), "");
  return 0;
}

int cmd_synth(const Options& o) {
  require(o.out_dir, "--out-dir");
  SynthOptions s;
  s.n_teams = o.n_teams;
  s.effect = o.effect;
  s.condition_shift = o.condition_shift;
  s.seed = o.seed;
  const auto profile = o.profile.empty() ? bundled_synth_profile() : load_synth_profile(o.profile);
  const auto corpus = generate_synthetic_corpus(s, profile);
  write_synthetic_corpus(corpus, o.out_dir);
  write_sidecar(fs::path(o.out_dir) / "synth",
                "synth",
                {{"teams", o.n_teams},
                 {"effect", o.effect},
                 {"condition_shift", o.condition_shift},
                 {"seed", o.seed},
                 {"profile", o.profile.empty() ? "bundled" : o.profile},
                 {"profile_version", profile.version}});
  std::cout << "wrote " << corpus.corpus.size() << " teams to " << o.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Team viability analysis from chat transcripts"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto add_inputs = [&](CLI::App* c, bool transcripts, bool features) {
    if (transcripts) c->add_option("--transcripts", o.transcripts, "Messages JSONL");
    if (features) c->add_option("--features", o.features, "Feature CSV");
    c->add_option("--teams", o.teams, "Teams JSONL");
  };
  auto add_solver = [&](CLI::App* c) {
    c->add_option("--lambda", o.lambda, "L1 penalty")->capture_default_str();
    c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    c->add_option("--tol", o.tol, "Relative objective tolerance")->capture_default_str();
    c->add_option("--max-iter", o.max_iter, "Solver iteration cap")->capture_default_str();
    c->add_option("--subset", o.subset, "computational, human or all")->capture_default_str();
  };
  auto add_threads = [&](CLI::App* c) {
    c->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check transcripts, teams and ratings files");
  add_inputs(validate, true, false);
  validate->add_option("--ratings", o.ratings, "Ratings JSONL");
  validate->add_option("--out", o.out, "Summary JSON");

  auto* extract = app.add_subcommand("extract", "Compute the feature CSV");
  add_inputs(extract, true, false);
  extract->add_option("--ratings", o.ratings, "Append aggregated rater labels");
  extract->add_option("--lexicons", o.lexicons, "Lexicon directory");
  extract->add_option("--window-start", o.window_start, "Window start (s)")->capture_default_str();
  extract->add_option("--window-end", o.window_end, "Window end (s)");
  extract->add_flag("--rates", o.rates, "Word-choice counts per 100 words");
  extract->add_option("--out", o.out, "Output CSV");
  add_threads(extract);

  auto* labels = app.add_subcommand("labels-aggregate", "Aggregate rater submissions");
  labels->add_option("--ratings", o.ratings, "Ratings JSONL");
  labels->add_option("--teams", o.teams, "Teams JSONL");
  labels->add_option("--out", o.out, "Output CSV");

  auto* train_cmd = app.add_subcommand("train", "Fit a classifier");
  add_inputs(train_cmd, false, true);
  add_solver(train_cmd);
  train_cmd->add_option("--percentile", o.percentile, "Viability split percentile")->capture_default_str();
  train_cmd->add_option("--out", o.out, "Model JSON");

  auto* cv = app.add_subcommand("cv", "Cross-validated threshold sweep");
  add_inputs(cv, false, true);
  add_solver(cv);
  cv->add_option("--percentiles", o.percentiles, "Comma-separated percentiles")->delimiter(',');
  cv->add_option("--folds", o.folds, "Folds")->capture_default_str();
  cv->add_option("--out", o.out, "Report JSON");
  add_threads(cv);

  auto* holdout = app.add_subcommand("holdout-round", "Train on other rounds, test on one");
  add_inputs(holdout, false, true);
  add_solver(holdout);
  holdout->add_option("--round", o.round, "Held-out round")->capture_default_str();
  holdout->add_option("--train-n", o.train_n, "Training teams (0: all)")->capture_default_str();
  holdout->add_option("--test-n", o.test_n, "Test teams (0: all)")->capture_default_str();
  holdout->add_option("--percentile", o.percentile, "Viability split percentile")->capture_default_str();
  holdout->add_option("--out", o.out, "Report JSON");

  auto* condition = app.add_subcommand("condition-eval", "Train on masked teams, test per condition");
  add_inputs(condition, false, true);
  add_solver(condition);
  condition->add_option("--percentile", o.percentile, "Viability split percentile")->capture_default_str();
  condition->add_option("--out", o.out, "Report JSON");

  auto* slice = app.add_subcommand("slice", "Thin-slice window sweep");
  add_inputs(slice, true, false);
  slice->add_option("--lambda", o.lambda, "L1 penalty")->capture_default_str();
  slice->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  slice->add_option("--lexicons", o.lexicons, "Lexicon directory");
  slice->add_option("--mode", o.mode, "cumulative or disjoint")->capture_default_str();
  slice->add_option("--increment", o.increment, "Cumulative step (s)")->capture_default_str();
  slice->add_option("--window", o.window, "Disjoint window length (s)")->capture_default_str();
  slice->add_option("--percentiles", o.percentiles, "Comma-separated percentiles")->delimiter(',');
  slice->add_option("--folds", o.folds, "Folds")->capture_default_str();
  slice->add_flag("--rates", o.rates, "Word-choice counts per 100 words");
  slice->add_option("--out", o.out, "Report JSON");
  add_threads(slice);

  auto* score = app.add_subcommand("score", "Apply a saved model");
  score->add_option("--model", o.model, "Model JSON");
  score->add_option("--features", o.features, "Feature CSV");
  score->add_option("--out", o.out, "Output CSV");

  auto* coeffs = app.add_subcommand("coeffs", "Bootstrap coefficient intervals");
  add_inputs(coeffs, false, true);
  add_solver(coeffs);
  coeffs->add_option("--percentile", o.percentile, "Viability split percentile")->capture_default_str();
  coeffs->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates")->capture_default_str();
  coeffs->add_option("--out", o.out, "Report JSON");
  add_threads(coeffs);

  auto* corr = app.add_subcommand("corr", "Viability vs performance correlation");
  corr->add_option("--teams", o.teams, "Teams JSONL");
  corr->add_option("--out", o.out, "Report JSON");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--teams", o.n_teams, "Number of teams")->capture_default_str();
  synth->add_option("--effect", o.effect, "Planted effect size")->capture_default_str();
  synth->add_option("--condition-shift", o.condition_shift, "Reconvened behavior shift in [0, 1]")
      ->capture_default_str();
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth->add_option("--profile", o.profile, "Generator profile JSON (default: bundled)");
  synth->add_option("--out-dir", o.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  const std::map<const CLI::App*, int (*)(const Options&)> handlers = {
      {validate, cmd_validate}, {extract, cmd_extract},     {labels, cmd_labels}, {train_cmd, cmd_train},
      {cv, cmd_cv},             {holdout, cmd_holdout},     {condition, cmd_condition}, {slice, cmd_slice},
      {score, cmd_score},       {coeffs, cmd_coeffs},       {corr, cmd_corr},     {synth, cmd_synth}};
  try {
    return handlers.at(app.get_subcommands().front())(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate analysis: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const InsufficientRatersError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
