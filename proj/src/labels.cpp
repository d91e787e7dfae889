#include "teamviab/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "teamviab/error.hpp"
#include "teamviab/features.hpp"

namespace teamviab {

using json = nlohmann::json;

namespace {

double median_of(std::vector<int> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace

std::vector<RatingSubmission> filter_attention(std::span<const RatingSubmission> submissions,
                                               const Transcript& transcript) {
  const auto roster = static_cast<int>(transcript.roster.size());
  std::vector<RatingSubmission> out;
  std::copy_if(submissions.begin(), submissions.end(), std::back_inserter(out),
               [&](const RatingSubmission& s) { return s.attention_answer == roster; });
  return out;
}

QuestionAggregate aggregate_question_detail(std::span<const int> ratings) {
  if (ratings.size() < kMinRaters) {
    throw InsufficientRatersError("need at least 3 ratings, got " + std::to_string(ratings.size()));
  }
  const double n = static_cast<double>(ratings.size());
  double sum = 0.0;
  for (int r : ratings) sum += r;
  const double mean = sum / n;
  double ss = 0.0;
  for (int r : ratings) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / n);

  std::vector<int> kept;
  for (int r : ratings) {
    if (std::abs(r - mean) <= 1.5 * sd) kept.push_back(r);
  }
  if (kept.empty()) return {median_of({ratings.begin(), ratings.end()}), ratings.size()};
  const auto used = kept.size();
  return {median_of(std::move(kept)), used};
}

double aggregate_question(std::span<const int> ratings) { return aggregate_question_detail(ratings).value; }

AggregatedLabels aggregate_team(std::span<const RatingSubmission> submissions, const Transcript& transcript) {
  std::vector<RatingSubmission> own;
  for (const auto& s : submissions) {
    if (s.team_id == transcript.team_id) own.push_back(s);
  }
  const auto passing = filter_attention(own, transcript);
  if (passing.size() < kMinRaters) {
    throw InsufficientRatersError("team " + transcript.team_id + ": " + std::to_string(passing.size()) +
                                  " attention-passing raters, need at least 3");
  }
  AggregatedLabels out;
  out.team_id = transcript.team_id;
  std::vector<int> column(passing.size());
  for (std::size_t q = 0; q < kQuestions; ++q) {
    for (std::size_t i = 0; i < passing.size(); ++i) column[i] = passing[i].answers[q];
    const auto agg = aggregate_question_detail(column);
    out.values[q] = agg.value;
    out.rater_count_used[q] = agg.used;
  }
  return out;
}

std::vector<RatingSubmission> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  const std::string file = path.string();
  if (!in) throw ValidationError("cannot open " + file);
  const auto& names = human_label_names();
  std::vector<RatingSubmission> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = json::parse(line);
      RatingSubmission s;
      s.team_id = obj.at("team_id").get<std::string>();
      s.rater_id = obj.at("rater_id").get<std::string>();
      s.attention_answer = obj.at("attention_answer").get<int>();
      const auto& answers = obj.at("answers");
      if (!answers.is_object()) throw ValidationError(file, line_no, "answers must be an object");
      for (std::size_t q = 0; q < kQuestions; ++q) {
        if (!answers.contains(names[q])) throw ValidationError(file, line_no, "missing answer " + names[q]);
        const int v = answers.at(names[q]).get<int>();
        if (v < 1 || v > 5) throw ValidationError(file, line_no, names[q] + " answer outside 1-5");
        s.answers[q] = v;
      }
      if (answers.size() != kQuestions) throw ValidationError(file, line_no, "unexpected answer keys");
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ValidationError(file, line_no, std::string("malformed rating: ") + e.what());
    }
  }
  return out;
}

void write_ratings(std::span<const RatingSubmission> ratings, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  const auto& names = human_label_names();
  for (const auto& s : ratings) {
    nlohmann::ordered_json obj;
    obj["team_id"] = s.team_id;
    obj["rater_id"] = s.rater_id;
    obj["attention_answer"] = s.attention_answer;
    nlohmann::ordered_json answers;
    for (std::size_t q = 0; q < kQuestions; ++q) answers[names[q]] = s.answers[q];
    obj["answers"] = std::move(answers);
    out << obj.dump() << '\n';
  }
}

FeatureMatrix aggregate_corpus(std::span<const RatingSubmission> ratings, const Corpus& corpus) {
  std::map<std::string, std::vector<RatingSubmission>> by_team;
  for (const auto& r : ratings) {
    if (corpus.find(r.team_id) == nullptr) throw ValidationError("rating for unknown team_id " + r.team_id);
    by_team[r.team_id].push_back(r);
  }
  FeatureMatrix m;
  m.columns = human_label_names();
  for (const auto& t : corpus.transcripts) {
    const auto it = by_team.find(t.team_id);
    const auto agg = aggregate_team(it == by_team.end() ? std::span<const RatingSubmission>{}
                                                        : std::span<const RatingSubmission>(it->second),
                                    t);
    m.team_ids.push_back(t.team_id);
    m.rows.emplace_back(agg.values.begin(), agg.values.end());
  }
  return m;
}

}  // namespace teamviab
