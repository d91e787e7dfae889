#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teamviab/error.hpp"
#include "teamviab/lexicon.hpp"
#include "teamviab/transcript.hpp"

namespace teamviab {

// Half-open time window [start, end). A window whose end reaches the
// transcript duration also keeps messages stamped exactly at the duration,
// so [0, duration) and the full transcript select the same messages.
struct Window {
  double start = 0.0;
  std::optional<double> end;  // nullopt: through the end of the transcript

  bool contains(double timestamp, double duration) const;
  bool operator==(const Window&) const = default;
};

// No message of the team falls inside the window.
class EmptyWindowError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

struct MemberMeasures {
  std::string member_id;
  std::size_t message_count = 0;
  std::size_t word_count = 0;
  double polarity = 0.0;
  double subjectivity = 0.0;
  double readability = 0.0;
  TokenStream document;
};

std::vector<MemberMeasures> member_measures(const Transcript& transcript, const Window& window,
                                            const LexiconSet& lexicons);

// Mean polarity and subjectivity over sentiment-lexicon matches. A match
// directly preceded (within the same message) by a negation token has its
// polarity flipped. (0, 0) when nothing matches.
SentimentScore sentiment(const TokenStream& tokens, const CategoryLexicon& sentiment_lex,
                         const CategoryLexicon& negation_lex);

// New Dale-Chall raw score. A difficult word is neither on the easy list nor
// a pure number. Zero words yields 0.
double dale_chall_score(std::size_t words, std::size_t difficult, std::size_t sentences);
double dale_chall(const TokenStream& tokens, const CategoryLexicon& easy_words);

// Mean pairwise cosine similarity of unigram+bigram TF-IDF vectors, one
// document per member, with idf = ln((1 + N) / (1 + df)) + 1. Bigrams never
// cross a segment boundary. Pairs involving an empty vector count as 0.
double tfidf_team_similarity(std::span<const TokenStream> documents);

// Mentions of other roster members' identifiers inside the window.
std::size_t pseudonym_refs(const Transcript& transcript, const Window& window);

enum class FeatureSubset { computational, human, all };

std::string_view to_string(FeatureSubset s);
std::optional<FeatureSubset> parse_feature_subset(std::string_view s);

inline constexpr std::size_t kComputationalFeatures = 42;
inline constexpr std::size_t kHumanLabelFeatures = 20;

const std::vector<std::string>& computational_feature_names();
const std::vector<std::string>& human_label_names();
std::vector<std::string> feature_registry(FeatureSubset subset);

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  double at(std::string_view name) const;
  bool operator==(const FeatureVector&) const = default;
};

struct FeatureOptions {
  // Divide word-choice counts (liwc_* and argue_count) by the team word
  // count and multiply by 100.
  bool rates = false;
};

// Tokenized, lexicon-annotated transcript for repeated window extraction.
class PreparedTranscript {
 public:
  PreparedTranscript(const Transcript& transcript, const LexiconSet& lexicons);

  const std::string& team_id() const { return team_id_; }
  double duration() const { return duration_; }
  FeatureVector features(const Window& window, const FeatureOptions& options = {}) const;
  std::vector<MemberMeasures> measures(const Window& window) const;
  bool has_messages(const Window& window) const;

 private:
  struct TokenInfo {
    std::uint32_t categories = 0;  // bit i: kWordCategories[i]; see .cpp for the rest
    std::uint32_t term = 0;        // team-local term id
    std::optional<SentimentScore> sentiment;
  };
  struct Message {
    std::size_t sender = 0;  // roster index
    double timestamp = 0.0;
    TokenStream tokens;
    std::vector<TokenInfo> info;
    std::size_t mentions = 0;
  };
  struct MemberAccumulator;

  std::vector<MemberAccumulator> accumulate(const Window& window) const;

  std::string team_id_;
  std::vector<std::string> roster_;
  double duration_ = kDefaultDuration;
  std::vector<Message> messages_;
};

FeatureVector team_features(const Transcript& transcript, const Window& window,
                            const LexiconSet& lexicons, const FeatureOptions& options = {});

}  // namespace teamviab
