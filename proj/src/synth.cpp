#include "teamviab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "teamviab/error.hpp"
#include "teamviab/random.hpp"

namespace teamviab {

using json = nlohmann::json;

namespace {

constexpr const char* kBundledProfile =
#include "synth_profile.inc"
    ;

SynthProfile parse_profile(const json& j) {
  SynthProfile p;
  p.version = j.at("version").get<int>();
  p.duration = j.at("duration_s").get<double>();
  p.rounds = j.at("rounds").get<int>();
  p.roster_min = j.at("roster").at("min").get<int>();
  p.roster_max = j.at("roster").at("max").get<int>();
  p.p_masked = j.at("conditions").at("masked").get<double>();
  p.p_initial = j.at("conditions").at("initial_visible").get<double>();
  const auto& v = j.at("viability");
  p.viability_mean = v.at("mean").get<double>();
  p.viability_slope = v.at("slope").get<double>();
  p.team_noise_sd = v.at("team_noise_sd").get<double>();
  p.member_noise_sd = v.at("member_noise_sd").get<double>();
  p.score_curvature = v.value("score_curvature", 0.0);
  const auto& m = j.at("messages");
  p.messages_per_team = m.at("mean_per_team").get<double>();
  p.filler_min = m.at("filler_min").get<int>();
  p.filler_extra_mean = m.at("filler_extra_mean").get<double>();
  p.mention_rate = m.at("mention_rate").get<double>();
  const auto& part = j.at("participation");
  p.participation_spread = part.at("base_spread").get<double>();
  p.participation_slope = part.at("slope").get<double>();
  p.participation_min_spread = part.at("min_spread").get<double>();
  for (const auto& pool : j.at("pools")) {
    p.pools.push_back({pool.at("category").get<std::string>(), pool.at("words").get<std::vector<std::string>>(),
                       pool.at("base_rate").get<double>(), pool.at("slope").get<double>(),
                       pool.value("style_sd", 0.0)});
  }
  p.filler = j.at("filler").get<std::vector<std::string>>();
  p.pseudonyms = j.at("pseudonyms").get<std::vector<std::string>>();
  p.raters = j.at("ratings").at("raters").get<int>();
  p.attention_fail_rate = j.at("ratings").at("attention_fail_rate").get<double>();
  const auto& perf = j.at("performance");
  p.performance_fraction = perf.at("fraction").get<double>();
  p.performance_correlation = perf.at("correlation").get<double>();
  p.performance_mean = perf.at("mean").get<double>();
  p.performance_sd = perf.at("sd").get<double>();

  if (p.roster_min < kMinRoster || p.roster_max > kMaxRoster || p.roster_min > p.roster_max) {
    throw ValidationError("synth profile: roster bounds outside 3-8");
  }
  if (static_cast<int>(p.pseudonyms.size()) < p.roster_max) throw ValidationError("synth profile: too few pseudonyms");
  if (p.filler.empty()) throw ValidationError("synth profile: empty filler pool");
  if (p.raters < static_cast<int>(kMinRaters) + 1) throw ValidationError("synth profile: need at least 4 raters");
  if (p.rounds < 1 || !(p.duration > 0.0)) throw ValidationError("synth profile: invalid rounds or duration");
  for (const auto& pool : p.pools) {
    if (pool.words.empty()) throw ValidationError("synth profile: empty pool " + pool.category);
  }
  return p;
}

double normal(Rng& rng, double mean, double sd) { return mean + sd * standard_normal(rng); }

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(uniform_index(rng, v.size()))];
}

ViabilityItems spread_items(int total, Rng& rng) {
  ViabilityItems items;
  items.fill(1);
  const int extra = total - kViabilityItems;
  const int each = extra / kViabilityItems;
  for (auto& x : items) x += each;
  std::vector<int> slots(kViabilityItems);
  for (int i = 0; i < kViabilityItems; ++i) slots[static_cast<std::size_t>(i)] = i;
  shuffle_in_place(slots, rng);
  for (int r = 0; r < extra % kViabilityItems; ++r) ++items[static_cast<std::size_t>(slots[static_cast<std::size_t>(r)])];
  // Move single points between items so responses are not flat.
  for (int s = 0; s < 10; ++s) {
    const auto a = uniform_index(rng, kViabilityItems);
    const auto b = uniform_index(rng, kViabilityItems);
    if (a != b && items[a] < 5 && items[b] > 1) {
      ++items[a];
      --items[b];
    }
  }
  return items;
}

std::string message_text(std::vector<std::string> words, Rng& rng) {
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    text += w;
  }
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 'a' + 'A');
  const double r = uniform01(rng);
  text += r < 0.7 ? "." : (r < 0.9 ? "?" : "!");
  return text;
}

}  // namespace

const SynthProfile& bundled_synth_profile() {
  static const SynthProfile profile = parse_profile(json::parse(kBundledProfile));
  return profile;
}

SynthProfile load_synth_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open synth profile " + path.string());
  try {
    return parse_profile(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed synth profile: " + e.what());
  }
}

SyntheticCorpus generate_synthetic_corpus(const SynthOptions& options, const SynthProfile& profile) {
  if (options.n_teams < 20) throw std::invalid_argument("synthetic corpus needs at least 20 teams");
  if (!(options.effect >= 0.0) || !std::isfinite(options.effect)) {
    throw std::invalid_argument("effect must be a finite non-negative number");
  }
  if (!(options.condition_shift >= 0.0 && options.condition_shift <= 1.0)) {
    throw std::invalid_argument("condition_shift must lie in [0, 1]");
  }

  SyntheticCorpus out;
  for (std::size_t t = 0; t < options.n_teams; ++t) {
    Rng rng(mix_seed(options.seed, t));
    char id[32];
    std::snprintf(id, sizeof id, "T%04zu", t + 1);

    const double v = standard_normal(rng);
    const double team_noise = normal(rng, 0.0, profile.team_noise_sd);
    const double z = standard_normal(rng);

    Transcript tr;
    tr.team_id = id;
    tr.duration = profile.duration;
    tr.round = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(profile.rounds)));
    const double c = uniform01(rng);
    tr.condition = c < profile.p_masked ? Condition::masked
                   : c < profile.p_masked + profile.p_initial ? Condition::initial_visible
                                                              : Condition::reconvened;
    const int size = profile.roster_min +
                     static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(profile.roster_max - profile.roster_min + 1)));
    auto names = profile.pseudonyms;
    shuffle_in_place(names, rng);
    tr.roster.assign(names.begin(), names.begin() + size);

    const double u = tr.condition == Condition::reconvened
                         ? (1.0 - options.condition_shift) * v + options.condition_shift * z
                         : v;
    const double drive = options.effect * u;

    // Participation weights: a wider spread means a few members dominate.
    const double spread = std::max(profile.participation_min_spread,
                                   profile.participation_spread + profile.participation_slope * drive);
    std::vector<double> weights;
    double wsum = 0.0;
    for (int m = 0; m < size; ++m) {
      weights.push_back(std::exp(spread * standard_normal(rng)));
      wsum += weights.back();
    }

    std::vector<double> rates;
    for (const auto& pool : profile.pools) {
      rates.push_back(pool.base_rate * std::exp(pool.slope * drive + pool.style_sd * standard_normal(rng)));
    }

    const int n_messages = std::max(1, poisson(rng, profile.messages_per_team));
    for (int k = 0; k < n_messages; ++k) {
      double r = uniform01(rng) * wsum;
      std::size_t sender = 0;
      while (sender + 1 < weights.size() && r >= weights[sender]) r -= weights[sender++];

      std::vector<std::string> words;
      const int n_filler = profile.filler_min + poisson(rng, profile.filler_extra_mean);
      for (int f = 0; f < n_filler; ++f) words.push_back(pick(profile.filler, rng));
      for (std::size_t p = 0; p < profile.pools.size(); ++p) {
        const int count = poisson(rng, rates[p]);
        for (int i = 0; i < count; ++i) {
          const auto at = uniform_index(rng, words.size() + 1);
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), pick(profile.pools[p].words, rng));
        }
      }
      if (uniform01(rng) < profile.mention_rate) {
        const auto other = (sender + 1 + uniform_index(rng, static_cast<std::uint64_t>(size - 1))) %
                           static_cast<std::size_t>(size);
        words.insert(words.begin(), tr.roster[other] + ",");
      }
      ChatMessage msg;
      msg.sender = tr.roster[sender];
      msg.timestamp = std::floor(uniform01(rng) * profile.duration * 1000.0) / 1000.0;
      msg.text = message_text(std::move(words), rng);
      tr.messages.push_back(std::move(msg));
    }
    std::stable_sort(tr.messages.begin(), tr.messages.end(),
                     [](const ChatMessage& a, const ChatMessage& b) { return a.timestamp < b.timestamp; });

    ViabilityRecord rec;
    rec.team_id = tr.team_id;
    const double centre = profile.viability_mean +
                          profile.viability_slope * (v + profile.score_curvature * std::max(v, 0.0) * v) + team_noise;
    for (const auto& member : tr.roster) {
      const double raw = normal(rng, centre, profile.member_noise_sd);
      const int total = std::clamp(static_cast<int>(std::lround(raw)), kViabilityItems, 5 * kViabilityItems);
      rec.members.push_back({member, spread_items(total, rng)});
    }
    if (uniform01(rng) < profile.performance_fraction) {
      const double rho = profile.performance_correlation;
      const double perf = profile.performance_mean +
                          profile.performance_sd * (rho * v + std::sqrt(1.0 - rho * rho) * standard_normal(rng));
      rec.performance = std::round(perf * 100.0) / 100.0;
    }

    bool failed = false;
    for (int k = 0; k < profile.raters; ++k) {
      RatingSubmission s;
      s.team_id = tr.team_id;
      s.rater_id = tr.team_id + "_r" + std::to_string(k + 1);
      const bool fail = !failed && uniform01(rng) < profile.attention_fail_rate;
      failed = failed || fail;
      s.attention_answer = fail ? size + 1 : size;
      for (auto& a : s.answers) a = 1 + static_cast<int>(uniform_index(rng, 5));
      out.ratings.push_back(std::move(s));
    }

    validate(tr);
    out.latent[tr.team_id] = v;
    out.corpus.transcripts.push_back(std::move(tr));
    out.corpus.records.push_back(std::move(rec));
  }
  return out;
}

void write_synthetic_corpus(const SyntheticCorpus& synth, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_messages(synth.corpus, dir / "messages.jsonl");
  write_teams(synth.corpus, dir / "teams.jsonl");
  write_ratings(synth.ratings, dir / "ratings.jsonl");
}

}  // namespace teamviab
