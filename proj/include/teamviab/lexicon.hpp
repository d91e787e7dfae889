#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace teamviab {

// Lowercased, accent-stripped tokens of one or more texts.
struct TokenStream {
  std::vector<std::string> tokens;
  std::vector<std::size_t> offsets;        // byte offset of each token in its source text
  std::vector<std::size_t> sentence_ends;  // exclusive end index of each sentence
  std::vector<std::size_t> segment_ends;   // exclusive end index of each source text

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::size_t sentence_count() const { return sentence_ends.size(); }

  // Concatenates another stream; sentences and segments never span the join.
  void append(const TokenStream& other);

  bool operator==(const TokenStream&) const = default;
};

// Canonical decomposition with combining marks dropped, then lowercase.
// Tokens are maximal runs of letters, digits and apostrophes (apostrophes
// trimmed from token edges); runs of . ! ? end a sentence, as does the end
// of the text.
TokenStream tokenize(std::string_view text);

// Renders tokens as text that tokenizes back to the same stream (one
// sentence per ". "-terminated group).
std::string detokenize(const TokenStream& stream);

struct SentimentScore {
  double polarity = 0.0;      // [-1, 1]
  double subjectivity = 0.0;  // [0, 1]
};

enum class LexiconKind { category, sentiment };

// A named word list. Entries are literal tokens or prefix patterns with a
// single trailing '*'. Literal entries win over prefixes; among prefixes the
// longest match wins.
class CategoryLexicon {
 public:
  explicit CategoryLexicon(std::string name, LexiconKind kind = LexiconKind::category);

  // Throws std::invalid_argument for malformed entries or out-of-range
  // sentiment values.
  void add(std::string_view entry, std::optional<SentimentScore> score = std::nullopt);

  const std::string& name() const { return name_; }
  LexiconKind kind() const { return kind_; }
  std::size_t size() const { return literals_.size() + prefixes_.size(); }

  bool matches(std::string_view token) const { return lookup(token) != nullptr; }
  const SentimentScore* lookup(std::string_view token) const;

 private:
  std::string name_;
  LexiconKind kind_;
  std::unordered_map<std::string, SentimentScore> literals_;
  std::unordered_map<std::string, SentimentScore> prefixes_;
  std::size_t max_prefix_ = 0;
};

std::size_t count_category(const TokenStream& tokens, const CategoryLexicon& lex);

// Word-choice categories in feature-registry order.
inline constexpr std::array<std::string_view, 19> kWordCategories = {
    "anger",        "anxiety",       "sadness",        "articles",        "conjunctions",
    "prepositions", "inclusive",     "exclusive",      "quantifiers",     "certainty",
    "discrepancies", "negation",     "tentativeness",  "first_singular",  "first_plural",
    "second_person", "indefinite_pronouns", "adverbs", "social"};

inline constexpr std::string_view kArgueLexicon = "argue";
inline constexpr std::string_view kSentimentLexicon = "sentiment";
inline constexpr std::string_view kEasyWordsLexicon = "easy_words";
inline constexpr std::string_view kNegationLexicon = "negation";

class LexiconSet {
 public:
  // Throws ValidationError on a duplicate name.
  void add(CategoryLexicon lex);

  bool contains(std::string_view name) const;
  const CategoryLexicon& at(std::string_view name) const;
  std::size_t size() const { return lexicons_.size(); }
  std::vector<std::string> names() const;

  // Throws ValidationError naming the first missing required lexicon.
  void require_standard() const;

 private:
  std::map<std::string, CategoryLexicon, std::less<>> lexicons_;
};

// Parses one lexicon file:
//   #name: <category>          (first line)
//   #type: sentiment           (optional)
//   term                       (category entries)
//   term<TAB>polarity<TAB>subj (sentiment entries)
// Other lines starting with '#' are comments.
CategoryLexicon parse_lexicon(const std::filesystem::path& path);

// Loads every *.txt file of a directory and checks that the 19 word-choice
// categories plus argue, sentiment and easy_words are present.
LexiconSet load_lexicon_dir(const std::filesystem::path& dir);

std::filesystem::path default_lexicon_dir();

}  // namespace teamviab
