#include "teamviab/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "teamviab/error.hpp"

namespace teamviab {

void TokenStream::append(const TokenStream& other) {
  const std::size_t base = tokens.size();
  tokens.insert(tokens.end(), other.tokens.begin(), other.tokens.end());
  offsets.insert(offsets.end(), other.offsets.begin(), other.offsets.end());
  for (auto e : other.sentence_ends) sentence_ends.push_back(base + e);
  for (auto e : other.segment_ends) segment_ends.push_back(base + e);
}

namespace {

constexpr UChar32 kRightSingleQuote = 0x2019;

bool is_terminator(UChar32 c) { return c == '.' || c == '!' || c == '?'; }

bool is_word_char(UChar32 c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  const auto type = u_charType(c);
  return u_isalnum(c) || type == U_COMBINING_SPACING_MARK;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

class Tokenizer {
 public:
  TokenStream run(std::string_view text) {
    const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
      const int32_t start = i;
      UChar32 c;
      U8_NEXT(bytes, i, length, c);
      if (c < 0) {
        boundary(false);
        continue;
      }
      if (c < 0x80) {
        if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
        feed(c, static_cast<std::size_t>(start));
        continue;
      }
      decompose(c, static_cast<std::size_t>(start));
    }
    boundary(false);
    close_sentence();
    if (!out_.tokens.empty()) out_.segment_ends.push_back(out_.tokens.size());
    return std::move(out_);
  }

 private:
  void decompose(UChar32 c, std::size_t offset) {
    UErrorCode status = U_ZERO_ERROR;
    static const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
    icu::UnicodeString decomposed;
    if (nfd == nullptr || !nfd->getDecomposition(c, decomposed)) {
      feed(u_tolower(c), offset);
      return;
    }
    for (int32_t k = 0; k < decomposed.length();) {
      const UChar32 d = decomposed.char32At(k);
      k += U16_LENGTH(d);
      if (u_charType(d) == U_NON_SPACING_MARK) continue;
      feed(u_tolower(d), offset);
    }
  }

  void feed(UChar32 c, std::size_t offset) {
    if (c == '\'' || c == kRightSingleQuote) {
      current_ += '\'';
      char_offsets_.push_back(offset);
      return;
    }
    if (c < 0x80 ? is_word_char(c) : (u_charType(c) != U_NON_SPACING_MARK && is_word_char(c))) {
      const auto before = current_.size();
      append_utf8(current_, c);
      char_offsets_.insert(char_offsets_.end(), current_.size() - before, offset);
      return;
    }
    if (u_charType(c) == U_NON_SPACING_MARK) return;
    boundary(is_terminator(c));
  }

  void boundary(bool terminator) {
    flush();
    if (terminator) close_sentence();
  }

  void flush() {
    if (current_.empty()) return;
    std::size_t lo = 0;
    std::size_t hi = current_.size();
    while (lo < hi && current_[lo] == '\'') ++lo;
    while (hi > lo && current_[hi - 1] == '\'') --hi;
    if (lo < hi) {
      out_.tokens.push_back(current_.substr(lo, hi - lo));
      out_.offsets.push_back(char_offsets_[lo]);
    }
    current_.clear();
    char_offsets_.clear();
  }

  void close_sentence() {
    const std::size_t last = out_.sentence_ends.empty() ? 0 : out_.sentence_ends.back();
    if (out_.tokens.size() > last) out_.sentence_ends.push_back(out_.tokens.size());
  }

  TokenStream out_;
  std::string current_;
  std::vector<std::size_t> char_offsets_;  // one per byte of current_
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("bad number '" + std::string(s) + "'");
  return value;
}

}  // namespace

TokenStream tokenize(std::string_view text) { return Tokenizer{}.run(text); }

std::string detokenize(const TokenStream& stream) {
  std::string out;
  std::size_t begin = 0;
  for (auto end : stream.sentence_ends) {
    for (std::size_t i = begin; i < end; ++i) {
      out += stream.tokens[i];
      out += i + 1 < end ? " " : ". ";
    }
    begin = end;
  }
  return out;
}

CategoryLexicon::CategoryLexicon(std::string name, LexiconKind kind)
    : name_(std::move(name)), kind_(kind) {}

void CategoryLexicon::add(std::string_view entry, std::optional<SentimentScore> score) {
  if (entry.empty()) throw std::invalid_argument("empty entry");
  if (entry.find_first_of(" \t\r\n") != std::string_view::npos) {
    throw std::invalid_argument("entry '" + std::string(entry) + "' contains whitespace");
  }
  bool prefix = false;
  if (entry.back() == '*') {
    prefix = true;
    entry.remove_suffix(1);
  }
  if (entry.empty() || entry.find('*') != std::string_view::npos) {
    throw std::invalid_argument("entry may only carry a single trailing '*'");
  }
  // Anything the tokenizer would split or trim can never match a token.
  const bool ascii_ok = std::all_of(entry.begin(), entry.end(), [](char ch) {
    const auto u = static_cast<unsigned char>(ch);
    return u >= 0x80 || std::isalnum(u) || ch == '\'';
  });
  const auto folded = tokenize(entry);
  if (!ascii_ok || folded.size() != 1 || entry.front() == '\'' || entry.back() == '\'') {
    throw std::invalid_argument("entry '" + std::string(entry) + "' is not a single token");
  }
  const std::string term = folded.tokens[0];

  if (kind_ == LexiconKind::sentiment) {
    if (!score) throw std::invalid_argument("sentiment entry '" + term + "' needs scores");
    if (!(score->polarity >= -1.0 && score->polarity <= 1.0)) {
      throw std::invalid_argument("polarity outside [-1, 1] for '" + term + "'");
    }
    if (!(score->subjectivity >= 0.0 && score->subjectivity <= 1.0)) {
      throw std::invalid_argument("subjectivity outside [0, 1] for '" + term + "'");
    }
  } else if (score) {
    throw std::invalid_argument("category entry '" + term + "' must not carry scores");
  }

  auto& table = prefix ? prefixes_ : literals_;
  if (!table.emplace(term, score.value_or(SentimentScore{})).second) {
    throw std::invalid_argument("duplicate entry '" + std::string(entry) + (prefix ? "*'" : "'"));
  }
  if (prefix) max_prefix_ = std::max(max_prefix_, term.size());
}

const SentimentScore* CategoryLexicon::lookup(std::string_view token) const {
  if (token.empty()) return nullptr;
  if (!literals_.empty()) {
    const auto it = literals_.find(std::string(token));
    if (it != literals_.end()) return &it->second;
  }
  if (prefixes_.empty()) return nullptr;
  std::string key(token.substr(0, std::min(token.size(), max_prefix_)));
  while (!key.empty()) {
    const auto it = prefixes_.find(key);
    if (it != prefixes_.end()) return &it->second;
    key.pop_back();
  }
  return nullptr;
}

std::size_t count_category(const TokenStream& tokens, const CategoryLexicon& lex) {
  return static_cast<std::size_t>(std::count_if(tokens.tokens.begin(), tokens.tokens.end(),
                                                [&](const std::string& t) { return lex.matches(t); }));
}

void LexiconSet::add(CategoryLexicon lex) {
  const std::string name = lex.name();
  if (!lexicons_.emplace(name, std::move(lex)).second) {
    throw ValidationError("duplicate lexicon name '" + name + "'");
  }
}

bool LexiconSet::contains(std::string_view name) const { return lexicons_.find(name) != lexicons_.end(); }

const CategoryLexicon& LexiconSet::at(std::string_view name) const {
  const auto it = lexicons_.find(name);
  if (it == lexicons_.end()) throw ValidationError("missing lexicon '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> LexiconSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, lex] : lexicons_) out.push_back(name);
  return out;
}

void LexiconSet::require_standard() const {
  for (auto name : kWordCategories) {
    if (!contains(name)) throw ValidationError("missing required lexicon category '" + std::string(name) + "'");
  }
  for (auto name : {kArgueLexicon, kSentimentLexicon, kEasyWordsLexicon}) {
    if (!contains(name)) throw ValidationError("missing required lexicon '" + std::string(name) + "'");
  }
  if (at(kSentimentLexicon).kind() != LexiconKind::sentiment) {
    throw ValidationError("lexicon 'sentiment' must declare #type: sentiment");
  }
}

CategoryLexicon parse_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  const std::string file = path.string();
  if (!in) throw ValidationError("cannot open lexicon " + file);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError(file, 1, "empty lexicon file");
  ++line_no;
  const std::string header = trim(line);
  constexpr std::string_view kNameTag = "#name:";
  if (header.rfind(kNameTag, 0) != 0) throw ValidationError(file, line_no, "first line must be '#name: <category>'");
  const std::string name = trim(std::string_view(header).substr(kNameTag.size()));
  if (name.empty()) throw ValidationError(file, line_no, "empty lexicon name");

  CategoryLexicon lex(name);
  bool any_entry = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      const std::string t = trim(line);
      if (t.rfind("#type:", 0) == 0) {
        const std::string type = trim(std::string_view(t).substr(6));
        if (any_entry) throw ValidationError(file, line_no, "#type must precede entries");
        if (type == "sentiment") {
          lex = CategoryLexicon(name, LexiconKind::sentiment);
        } else if (type != "category") {
          throw ValidationError(file, line_no, "unknown lexicon type '" + type + "'");
        }
      }
      continue;
    }
    try {
      if (lex.kind() == LexiconKind::sentiment) {
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
          throw std::invalid_argument("sentiment entries are term<TAB>polarity<TAB>subjectivity");
        }
        SentimentScore s{parse_number(std::string_view(line).substr(t1 + 1, t2 - t1 - 1)),
                         parse_number(std::string_view(line).substr(t2 + 1))};
        lex.add(std::string_view(line).substr(0, t1), s);
      } else {
        lex.add(line);
      }
    } catch (const std::invalid_argument& e) {
      throw ValidationError(file, line_no, e.what());
    }
    any_entry = true;
  }
  if (!any_entry) throw ValidationError(file, line_no, "lexicon '" + name + "' has no entries");
  return lex;
}

LexiconSet load_lexicon_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a lexicon directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  LexiconSet set;
  for (const auto& f : files) set.add(parse_lexicon(f));
  set.require_standard();
  return set;
}

std::filesystem::path default_lexicon_dir() {
  if (const char* env = std::getenv("TEAMVIAB_LEXICONS"); env != nullptr && *env != '\0') return env;
#ifdef TEAMVIAB_DATA_DIR
  return std::filesystem::path(TEAMVIAB_DATA_DIR) / "lexicons";
#else
  return "data/lexicons";
#endif
}

}  // namespace teamviab
