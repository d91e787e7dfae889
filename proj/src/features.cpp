#include "teamviab/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace teamviab {

namespace {

constexpr std::uint32_t kArgueBit = 1u << 19;
constexpr std::uint32_t kEasyBit = 1u << 20;
constexpr std::uint32_t kNumberBit = 1u << 21;

constexpr std::size_t category_index(std::string_view name) {
  for (std::size_t i = 0; i < kWordCategories.size(); ++i) {
    if (kWordCategories[i] == name) return i;
  }
  return kWordCategories.size();
}

constexpr std::uint32_t kNegationBit = 1u << category_index(kNegationLexicon);

bool is_number(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

class SentimentAccumulator {
 public:
  void add(const SentimentScore& s, bool negated) {
    polarity_ += negated ? -s.polarity : s.polarity;
    subjectivity_ += s.subjectivity;
    ++n_;
  }
  SentimentScore result() const {
    if (n_ == 0) return {};
    return {polarity_ / static_cast<double>(n_), subjectivity_ / static_cast<double>(n_)};
  }

 private:
  double polarity_ = 0.0;
  double subjectivity_ = 0.0;
  std::size_t n_ = 0;
};

// A document as team-local term ids with message boundaries.
struct TermDocument {
  std::vector<std::uint32_t> terms;
  std::vector<std::size_t> segment_ends;
};

using SparseVector = std::vector<std::pair<std::uint64_t, double>>;

SparseVector term_frequencies(const TermDocument& doc) {
  std::unordered_map<std::uint64_t, double> tf;
  std::size_t begin = 0;
  for (auto end : doc.segment_ends) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t a = doc.terms[i] + 1ull;
      tf[a] += 1.0;
      if (i + 1 < end) tf[(a << 32) | (doc.terms[i + 1] + 1ull)] += 1.0;
    }
    begin = end;
  }
  SparseVector out(tf.begin(), tf.end());
  std::sort(out.begin(), out.end());
  return out;
}

double tfidf_similarity(const std::vector<TermDocument>& docs) {
  const std::size_t n = docs.size();
  if (n < 2) throw std::invalid_argument("TF-IDF similarity needs at least two members");
  std::vector<SparseVector> vecs;
  vecs.reserve(n);
  std::unordered_map<std::uint64_t, std::size_t> df;
  for (const auto& d : docs) {
    vecs.push_back(term_frequencies(d));
    for (const auto& [term, count] : vecs.back()) ++df[term];
  }
  for (auto& v : vecs) {
    double norm = 0.0;
    for (auto& [term, w] : v) {
      const double idf = std::log((1.0 + static_cast<double>(n)) / (1.0 + static_cast<double>(df[term]))) + 1.0;
      w *= idf;
      norm += w * w;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& [term, w] : v) w /= norm;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = vecs[i];
      const auto& b = vecs[j];
      double dot = 0.0;
      for (std::size_t p = 0, q = 0; p < a.size() && q < b.size();) {
        if (a[p].first < b[q].first) {
          ++p;
        } else if (b[q].first < a[p].first) {
          ++q;
        } else {
          dot += a[p++].second * b[q++].second;
        }
      }
      total += dot;
    }
  }
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  return std::clamp(total / pairs, 0.0, 1.0);
}

// Roster identifiers as token sequences; empty when an id has no tokens.
std::vector<std::vector<std::string>> roster_tokens(const std::vector<std::string>& roster) {
  std::vector<std::vector<std::string>> out;
  out.reserve(roster.size());
  for (const auto& id : roster) out.push_back(tokenize(id).tokens);
  return out;
}

std::size_t count_mentions(const TokenStream& message, std::size_t sender,
                           const std::vector<std::vector<std::string>>& ids) {
  std::size_t count = 0;
  for (std::size_t m = 0; m < ids.size(); ++m) {
    const auto& needle = ids[m];
    if (m == sender || needle.empty() || needle.size() > message.size()) continue;
    for (std::size_t i = 0; i + needle.size() <= message.size(); ++i) {
      if (std::equal(needle.begin(), needle.end(), message.tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        ++count;
      }
    }
  }
  return count;
}

struct Stats {
  double mean = 0.0, min = 0.0, max = 0.0, std = 0.0;
};

// Population statistics; a single value has std 0.
Stats describe(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / n;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

std::vector<std::string> build_computational_names() {
  std::vector<std::string> names;
  for (const char* base : {"msg_count", "word_count", "polarity", "subjectivity", "readability"}) {
    for (const char* stat : {"mean", "min", "max", "std"}) names.push_back(std::string(base) + "_" + stat);
  }
  names.emplace_back("tfidf_cosine_mean");
  for (auto cat : kWordCategories) names.push_back("liwc_" + std::string(cat));
  names.emplace_back("argue_count");
  names.emplace_back("pseudonym_refs");
  return names;
}

std::vector<std::string> build_human_names() {
  std::vector<std::string> names;
  for (int i = 1; i <= static_cast<int>(kHumanLabelFeatures); ++i) {
    names.push_back(std::string("hl_") + (i < 10 ? "0" : "") + std::to_string(i));
  }
  return names;
}

}  // namespace

bool Window::contains(double timestamp, double duration) const {
  if (timestamp < start) return false;
  if (!end) return true;
  return timestamp < *end || (*end >= duration && timestamp <= duration);
}

SentimentScore sentiment(const TokenStream& tokens, const CategoryLexicon& sentiment_lex,
                         const CategoryLexicon& negation_lex) {
  SentimentAccumulator acc;
  std::size_t segment = 0;
  std::size_t segment_begin = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    while (segment < tokens.segment_ends.size() && i >= tokens.segment_ends[segment]) {
      segment_begin = tokens.segment_ends[segment++];
    }
    const auto* score = sentiment_lex.lookup(tokens.tokens[i]);
    if (score == nullptr) continue;
    const bool negated = i > segment_begin && negation_lex.matches(tokens.tokens[i - 1]);
    acc.add(*score, negated);
  }
  return acc.result();
}

double dale_chall_score(std::size_t words, std::size_t difficult, std::size_t sentences) {
  if (words == 0 || sentences == 0) return 0.0;
  const double w = static_cast<double>(words);
  const double pct_difficult = 100.0 * static_cast<double>(difficult) / w;
  double score = 0.1579 * pct_difficult + 0.0496 * (w / static_cast<double>(sentences));
  if (pct_difficult > 5.0) score += 3.6365;
  return score;
}

double dale_chall(const TokenStream& tokens, const CategoryLexicon& easy_words) {
  std::size_t difficult = 0;
  for (const auto& t : tokens.tokens) {
    if (!is_number(t) && !easy_words.matches(t)) ++difficult;
  }
  return dale_chall_score(tokens.size(), difficult, tokens.sentence_count());
}

double tfidf_team_similarity(std::span<const TokenStream> documents) {
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<TermDocument> docs;
  docs.reserve(documents.size());
  for (const auto& d : documents) {
    TermDocument td;
    td.terms.reserve(d.size());
    for (const auto& t : d.tokens) {
      td.terms.push_back(ids.emplace(t, static_cast<std::uint32_t>(ids.size())).first->second);
    }
    td.segment_ends = d.segment_ends;
    if (td.segment_ends.empty() && !td.terms.empty()) td.segment_ends.push_back(td.terms.size());
    docs.push_back(std::move(td));
  }
  return tfidf_similarity(docs);
}

std::size_t pseudonym_refs(const Transcript& transcript, const Window& window) {
  const auto ids = roster_tokens(transcript.roster);
  std::size_t total = 0;
  for (const auto& m : transcript.messages) {
    if (!window.contains(m.timestamp, transcript.duration)) continue;
    const auto sender = static_cast<std::size_t>(
        std::find(transcript.roster.begin(), transcript.roster.end(), m.sender) - transcript.roster.begin());
    total += count_mentions(tokenize(m.text), sender, ids);
  }
  return total;
}

std::string_view to_string(FeatureSubset s) {
  switch (s) {
    case FeatureSubset::computational: return "computational";
    case FeatureSubset::human: return "human";
    case FeatureSubset::all: return "all";
  }
  return "computational";
}

std::optional<FeatureSubset> parse_feature_subset(std::string_view s) {
  if (s == "computational") return FeatureSubset::computational;
  if (s == "human") return FeatureSubset::human;
  if (s == "all") return FeatureSubset::all;
  return std::nullopt;
}

const std::vector<std::string>& computational_feature_names() {
  static const std::vector<std::string> names = build_computational_names();
  return names;
}

const std::vector<std::string>& human_label_names() {
  static const std::vector<std::string> names = build_human_names();
  return names;
}

std::vector<std::string> feature_registry(FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::computational: return computational_feature_names();
    case FeatureSubset::human: return human_label_names();
    case FeatureSubset::all: {
      auto names = computational_feature_names();
      const auto& hl = human_label_names();
      names.insert(names.end(), hl.begin(), hl.end());
      return names;
    }
  }
  return {};
}

double FeatureVector::at(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no feature named " + std::string(name));
  return values[static_cast<std::size_t>(it - names.begin())];
}

struct PreparedTranscript::MemberAccumulator {
  std::size_t message_count = 0;
  std::size_t word_count = 0;
  std::size_t difficult = 0;
  std::size_t sentences = 0;
  SentimentAccumulator sentiment;
  std::vector<std::size_t> messages;  // indices into messages_
};

PreparedTranscript::PreparedTranscript(const Transcript& transcript, const LexiconSet& lexicons)
    : team_id_(transcript.team_id), roster_(transcript.roster), duration_(transcript.duration) {
  std::vector<const CategoryLexicon*> categories;
  for (auto name : kWordCategories) categories.push_back(&lexicons.at(name));
  const auto& argue = lexicons.at(kArgueLexicon);
  const auto& easy = lexicons.at(kEasyWordsLexicon);
  const auto& sentiment_lex = lexicons.at(kSentimentLexicon);
  const auto ids = roster_tokens(roster_);

  std::unordered_map<std::string, std::uint32_t> terms;
  messages_.reserve(transcript.messages.size());
  for (const auto& m : transcript.messages) {
    Message pm;
    pm.sender = static_cast<std::size_t>(std::find(roster_.begin(), roster_.end(), m.sender) - roster_.begin());
    if (pm.sender >= roster_.size()) throw ValidationError("team " + team_id_ + ": sender " + m.sender + " not in roster");
    pm.timestamp = m.timestamp;
    pm.tokens = tokenize(m.text);
    pm.info.reserve(pm.tokens.size());
    for (const auto& tok : pm.tokens.tokens) {
      TokenInfo info;
      for (std::size_t c = 0; c < categories.size(); ++c) {
        if (categories[c]->matches(tok)) info.categories |= 1u << c;
      }
      if (argue.matches(tok)) info.categories |= kArgueBit;
      if (easy.matches(tok)) info.categories |= kEasyBit;
      if (is_number(tok)) info.categories |= kNumberBit;
      if (const auto* s = sentiment_lex.lookup(tok)) info.sentiment = *s;
      info.term = terms.emplace(tok, static_cast<std::uint32_t>(terms.size())).first->second;
      pm.info.push_back(info);
    }
    pm.mentions = count_mentions(pm.tokens, pm.sender, ids);
    messages_.push_back(std::move(pm));
  }
}

bool PreparedTranscript::has_messages(const Window& window) const {
  return std::any_of(messages_.begin(), messages_.end(),
                     [&](const Message& m) { return window.contains(m.timestamp, duration_); });
}

std::vector<PreparedTranscript::MemberAccumulator> PreparedTranscript::accumulate(const Window& window) const {
  std::vector<MemberAccumulator> members(roster_.size());
  bool any = false;
  for (std::size_t idx = 0; idx < messages_.size(); ++idx) {
    const auto& m = messages_[idx];
    if (!window.contains(m.timestamp, duration_)) continue;
    any = true;
    auto& acc = members[m.sender];
    acc.message_count += 1;
    acc.word_count += m.tokens.size();
    acc.sentences += m.tokens.sentence_count();
    acc.messages.push_back(idx);
    for (std::size_t i = 0; i < m.info.size(); ++i) {
      const auto& info = m.info[i];
      if ((info.categories & (kEasyBit | kNumberBit)) == 0) ++acc.difficult;
      if (info.sentiment) {
        const bool negated = i > 0 && (m.info[i - 1].categories & kNegationBit) != 0;
        acc.sentiment.add(*info.sentiment, negated);
      }
    }
  }
  if (!any) throw EmptyWindowError("team " + team_id_ + ": no messages in window");
  return members;
}

std::vector<MemberMeasures> PreparedTranscript::measures(const Window& window) const {
  const auto members = accumulate(window);
  std::vector<MemberMeasures> out;
  out.reserve(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& acc = members[k];
    MemberMeasures mm;
    mm.member_id = roster_[k];
    mm.message_count = acc.message_count;
    mm.word_count = acc.word_count;
    const auto s = acc.sentiment.result();
    mm.polarity = s.polarity;
    mm.subjectivity = s.subjectivity;
    mm.readability = dale_chall_score(acc.word_count, acc.difficult, acc.sentences);
    for (auto idx : acc.messages) mm.document.append(messages_[idx].tokens);
    out.push_back(std::move(mm));
  }
  return out;
}

FeatureVector PreparedTranscript::features(const Window& window, const FeatureOptions& options) const {
  const auto members = accumulate(window);
  const std::size_t n = members.size();

  std::vector<double> msgs(n), words(n), pol(n), subj(n), read(n);
  std::vector<TermDocument> docs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& acc = members[k];
    msgs[k] = static_cast<double>(acc.message_count);
    words[k] = static_cast<double>(acc.word_count);
    const auto s = acc.sentiment.result();
    pol[k] = s.polarity;
    subj[k] = s.subjectivity;
    read[k] = dale_chall_score(acc.word_count, acc.difficult, acc.sentences);
    auto& doc = docs[k];
    for (auto idx : acc.messages) {
      for (const auto& info : messages_[idx].info) doc.terms.push_back(info.term);
      if (!messages_[idx].info.empty()) doc.segment_ends.push_back(doc.terms.size());
    }
  }

  std::array<double, kWordCategories.size()> category_counts{};
  double argue = 0.0;
  double mentions = 0.0;
  double total_words = 0.0;
  for (const auto& acc : members) {
    for (auto idx : acc.messages) {
      const auto& m = messages_[idx];
      mentions += static_cast<double>(m.mentions);
      total_words += static_cast<double>(m.info.size());
      for (const auto& info : m.info) {
        for (std::size_t c = 0; c < kWordCategories.size(); ++c) {
          if (info.categories & (1u << c)) category_counts[c] += 1.0;
        }
        if (info.categories & kArgueBit) argue += 1.0;
      }
    }
  }
  if (options.rates) {
    const double scale = total_words > 0.0 ? 100.0 / total_words : 0.0;
    for (auto& c : category_counts) c *= scale;
    argue *= scale;
  }

  FeatureVector fv;
  fv.names = computational_feature_names();
  fv.values.reserve(kComputationalFeatures);
  for (const auto* series : {&msgs, &words, &pol, &subj, &read}) {
    const auto s = describe(*series);
    fv.values.insert(fv.values.end(), {s.mean, s.min, s.max, s.std});
  }
  fv.values.push_back(tfidf_similarity(docs));
  fv.values.insert(fv.values.end(), category_counts.begin(), category_counts.end());
  fv.values.push_back(argue);
  fv.values.push_back(mentions);
  return fv;
}

std::vector<MemberMeasures> member_measures(const Transcript& transcript, const Window& window,
                                            const LexiconSet& lexicons) {
  return PreparedTranscript(transcript, lexicons).measures(window);
}

FeatureVector team_features(const Transcript& transcript, const Window& window, const LexiconSet& lexicons,
                            const FeatureOptions& options) {
  return PreparedTranscript(transcript, lexicons).features(window, options);
}

}  // namespace teamviab
