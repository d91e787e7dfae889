#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teamviab/feature_matrix.hpp"
#include "teamviab/transcript.hpp"

namespace teamviab {

inline constexpr std::size_t kQuestions = 20;
inline constexpr std::size_t kMinRaters = 3;

// Short names of hl_01..hl_20, in column order.
inline constexpr std::array<std::string_view, kQuestions> kHumanLabelTitles = {
    "generating many ideas",   "reaching a conclusion",      "progressing slowly",
    "thoughtful response",     "social loafing",             "annoying collaborators",
    "frustrated collaborators", "positive interaction",      "starting salutations",
    "ending salutations",      "sarcastic interaction",      "agreeable interaction",
    "respectful interaction",  "passive-aggressive interaction", "dismissing collaborators",
    "punishing collaborators", "showing embarrassment",      "political interaction",
    "playful interaction",     "fact-driven discussion"};

struct RatingSubmission {
  std::string team_id;
  std::string rater_id;
  int attention_answer = 0;  // claimed number of participants
  std::array<int, kQuestions> answers{};

  bool operator==(const RatingSubmission&) const = default;
};

struct QuestionAggregate {
  double value = 0.0;
  std::size_t used = 0;  // ratings surviving the outlier filter
};

struct AggregatedLabels {
  std::string team_id;
  std::array<double, kQuestions> values{};
  std::array<std::size_t, kQuestions> rater_count_used{};
};

class InsufficientRatersError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keeps submissions whose attention answer equals the roster size.
std::vector<RatingSubmission> filter_attention(std::span<const RatingSubmission> submissions,
                                               const Transcript& transcript);

// Drops ratings more than 1.5 population standard deviations from the mean
// and returns the median of the rest (the unfiltered median if nothing
// survives). Needs at least three ratings.
QuestionAggregate aggregate_question_detail(std::span<const int> ratings);
double aggregate_question(std::span<const int> ratings);

AggregatedLabels aggregate_team(std::span<const RatingSubmission> submissions, const Transcript& transcript);

std::vector<RatingSubmission> load_ratings(const std::filesystem::path& path);
void write_ratings(std::span<const RatingSubmission> ratings, const std::filesystem::path& path);

// One row per corpus team with columns hl_01..hl_20. Throws
// InsufficientRatersError naming the first team without enough raters.
FeatureMatrix aggregate_corpus(std::span<const RatingSubmission> ratings, const Corpus& corpus);

}  // namespace teamviab
