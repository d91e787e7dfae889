#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "teamviab/labels.hpp"
#include "teamviab/transcript.hpp"

namespace teamviab {

struct SynthPool {
  std::string category;  // lexicon category the words belong to, or positive / negative sentiment
  std::vector<std::string> words;
  double base_rate = 0.0;  // expected tokens per message at u = 0
  double slope = 0.0;      // log-rate change per unit of effect * u
  double style_sd = 0.0;   // per-team log-rate jitter, independent of u
};

// Generator constants. The bundled profile is compiled in from
// data/synth_profile.json.
struct SynthProfile {
  int version = 0;
  double duration = kDefaultDuration;
  int rounds = 4;
  int roster_min = 3;
  int roster_max = 6;
  double p_masked = 0.6;
  double p_initial = 0.2;
  double viability_mean = 45.0;
  double viability_slope = 8.0;
  double team_noise_sd = 2.0;
  // Score centre is mean + slope * (v + score_curvature * max(v, 0) * v).
  double score_curvature = 0.0;
  double member_noise_sd = 3.0;
  double messages_per_team = 80.0;
  int filler_min = 3;
  double filler_extra_mean = 5.0;
  double mention_rate = 0.05;
  double participation_spread = 0.6;
  double participation_slope = -0.3;
  double participation_min_spread = 0.05;
  std::vector<SynthPool> pools;
  std::vector<std::string> filler;
  std::vector<std::string> pseudonyms;
  int raters = 4;
  double attention_fail_rate = 0.1;
  double performance_fraction = 0.3;
  double performance_correlation = 0.33;
  double performance_mean = 50.0;
  double performance_sd = 10.0;
};

const SynthProfile& bundled_synth_profile();
SynthProfile load_synth_profile(const std::filesystem::path& path);

struct SynthOptions {
  std::size_t n_teams = 200;
  double effect = 1.0;           // 0 removes every planted signal
  double condition_shift = 0.0;  // in [0, 1]; decouples reconvened behavior from viability
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<RatingSubmission> ratings;
  std::map<std::string, double> latent;  // per-team viability draw
};

// Each team draws a latent viability v ~ N(0, 1). Instrument responses sum
// near viability_mean + viability_slope * v; message content is drawn from
// filler plus planted pools whose per-message rates scale as
// exp(slope * effect * u + style), where u = v except for reconvened teams
// under a condition shift s, which use u = (1 - s) v + s z with fresh noise z.
// Timestamps are uniform over the session, so the signal is stationary in
// time and across rounds. Rater answers carry no signal.
SyntheticCorpus generate_synthetic_corpus(const SynthOptions& options,
                                          const SynthProfile& profile = bundled_synth_profile());

// Writes messages.jsonl, teams.jsonl and ratings.jsonl into `dir`.
void write_synthetic_corpus(const SyntheticCorpus& synth, const std::filesystem::path& dir);

}  // namespace teamviab
