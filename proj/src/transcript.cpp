#include "teamviab/transcript.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "teamviab/error.hpp"

namespace teamviab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::masked: return "masked";
    case Condition::initial_visible: return "initial_visible";
    case Condition::reconvened: return "reconvened";
  }
  return "masked";
}

std::optional<Condition> parse_condition(std::string_view s) {
  if (s == "masked") return Condition::masked;
  if (s == "initial_visible") return Condition::initial_visible;
  if (s == "reconvened") return Condition::reconvened;
  return std::nullopt;
}

bool Transcript::has_member(std::string_view id) const {
  return std::find(roster.begin(), roster.end(), id) != roster.end();
}

std::size_t Corpus::message_count() const {
  std::size_t n = 0;
  for (const auto& t : transcripts) n += t.messages.size();
  return n;
}

const Transcript* Corpus::find(std::string_view team_id) const {
  for (const auto& t : transcripts) {
    if (t.team_id == team_id) return &t;
  }
  return nullptr;
}

void validate(const Transcript& t) {
  const auto n = static_cast<int>(t.roster.size());
  if (n < kMinRoster || n > kMaxRoster) {
    throw ValidationError("team " + t.team_id + ": roster size " + std::to_string(n) +
                          " outside " + std::to_string(kMinRoster) + "-" +
                          std::to_string(kMaxRoster));
  }
  std::set<std::string> seen(t.roster.begin(), t.roster.end());
  if (seen.size() != t.roster.size()) {
    throw ValidationError("team " + t.team_id + ": duplicate member id in roster");
  }
  if (t.round < 0 || t.round > 4) {
    throw ValidationError("team " + t.team_id + ": round must be 1-4 (or 0 for unknown)");
  }
  if (!(t.duration > 0.0) || !std::isfinite(t.duration)) {
    throw ValidationError("team " + t.team_id + ": duration must be positive");
  }
  double prev = 0.0;
  for (const auto& m : t.messages) {
    if (!(m.timestamp >= 0.0) || m.timestamp > t.duration) {
      throw ValidationError("team " + t.team_id + ": timestamp " + std::to_string(m.timestamp) +
                            " outside [0, duration]");
    }
    if (m.timestamp < prev) {
      throw ValidationError("team " + t.team_id + ": messages not sorted by timestamp");
    }
    prev = m.timestamp;
    if (!seen.contains(m.sender)) {
      throw ValidationError("team " + t.team_id + ": sender " + m.sender + " not in roster");
    }
  }
}

int individual_viability(std::span<const int> items) {
  if (items.size() != kViabilityItems) {
    throw ValidationError("viability instrument needs exactly 14 items, got " +
                          std::to_string(items.size()));
  }
  int sum = 0;
  for (int v : items) {
    if (v < 1 || v > 5) {
      throw ValidationError("viability item " + std::to_string(v) + " outside 1-5");
    }
    sum += v;
  }
  return sum;
}

double team_viability(const ViabilityRecord& record) {
  if (record.members.empty()) {
    throw ValidationError("team " + record.team_id + ": no members with viability responses");
  }
  double sum = 0.0;
  for (const auto& m : record.members) sum += individual_viability(m.items);
  return sum / static_cast<double>(record.members.size());
}

double percentile_cutoff(std::vector<double> scores, double p) {
  if (scores.empty()) throw std::invalid_argument("percentile of an empty score list");
  if (!(p > 0.0 && p < 100.0)) {
    throw std::invalid_argument("percentile must lie strictly between 0 and 100");
  }
  std::sort(scores.begin(), scores.end());
  const double h = static_cast<double>(scores.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= scores.size()) return scores.back();
  const double frac = h - static_cast<double>(lo);
  return scores[lo] + frac * (scores[lo + 1] - scores[lo]);
}

Labeling label_teams_at(const std::map<std::string, double>& scores, double cutoff) {
  Labeling out;
  out.cutoff = cutoff;
  for (const auto& [team, score] : scores) {
    const auto cls = score > cutoff ? ViabilityClass::high : ViabilityClass::low;
    out.labels.emplace(team, cls);
    (cls == ViabilityClass::high ? out.n_high : out.n_low)++;
  }
  out.degenerate = out.n_high == 0 || out.n_low == 0;
  return out;
}

Labeling label_teams(const std::map<std::string, double>& scores, double p) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& [team, score] : scores) values.push_back(score);
  return label_teams_at(scores, percentile_cutoff(std::move(values), p));
}

std::map<std::string, double> viability_scores(const Corpus& corpus) {
  std::map<std::string, double> out;
  for (const auto& r : corpus.records) out.emplace(r.team_id, team_viability(r));
  return out;
}

namespace {

class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
    if (!in_) throw ValidationError("cannot open " + path_);
  }

  // Skips blank lines. Returns false at end of file.
  bool next(json& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        out = json::parse(line);
      } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
      }
      if (!out.is_object()) fail("expected a JSON object per line");
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ValidationError(path_, line_no_, msg); }

  void warn_unknown(const json& obj, const std::set<std::string>& known,
                    std::vector<std::string>& warnings) {
    for (const auto& [key, value] : obj.items()) {
      if (!known.contains(key) && warned_.insert(key).second) {
        warnings.push_back(path_ + ": ignoring unknown field '" + key + "'");
      }
    }
  }

  template <typename T>
  T require(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(std::string("missing field '") + key + "'");
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      fail(std::string("field '") + key + "' has the wrong type");
    }
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::set<std::string> warned_;
};

void read_teams(const std::filesystem::path& path, Corpus& corpus) {
  static const std::set<std::string> kTeamFields = {"team_id", "round", "condition", "duration_s",
                                                    "members", "performance"};
  static const std::set<std::string> kMemberFields = {"member_id", "viability_items"};
  LineReader reader(path);
  std::set<std::string> ids;
  json obj;
  while (reader.next(obj)) {
    reader.warn_unknown(obj, kTeamFields, corpus.warnings);
    Transcript t;
    ViabilityRecord r;
    t.team_id = reader.require<std::string>(obj, "team_id");
    if (t.team_id.empty()) reader.fail("empty team_id");
    if (!ids.insert(t.team_id).second) reader.fail("duplicate team_id " + t.team_id);
    r.team_id = t.team_id;
    if (obj.contains("round")) t.round = reader.require<int>(obj, "round");
    const auto cond = parse_condition(reader.require<std::string>(obj, "condition"));
    if (!cond) reader.fail("condition must be masked, initial_visible or reconvened");
    t.condition = *cond;
    if (obj.contains("duration_s") && !obj["duration_s"].is_null()) {
      t.duration = reader.require<double>(obj, "duration_s");
    }
    if (obj.contains("performance") && !obj["performance"].is_null()) {
      r.performance = reader.require<double>(obj, "performance");
    }
    const auto members = obj.find("members");
    if (members == obj.end() || !members->is_array()) reader.fail("missing members array");
    for (const auto& m : *members) {
      if (!m.is_object()) reader.fail("member entries must be objects");
      reader.warn_unknown(m, kMemberFields, corpus.warnings);
      MemberResponses resp;
      resp.member_id = reader.require<std::string>(m, "member_id");
      const auto items = reader.require<std::vector<int>>(m, "viability_items");
      if (items.size() != kViabilityItems) {
        reader.fail("member " + resp.member_id + ": expected 14 viability items, got " +
                    std::to_string(items.size()));
      }
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i] < 1 || items[i] > 5) {
          reader.fail("member " + resp.member_id + ": item response " + std::to_string(items[i]) +
                      " outside 1-5");
        }
        resp.items[i] = items[i];
      }
      t.roster.push_back(resp.member_id);
      r.members.push_back(std::move(resp));
    }
    try {
      validate(t);
    } catch (const ValidationError& e) {
      reader.fail(e.what());
    }
    corpus.transcripts.push_back(std::move(t));
    corpus.records.push_back(std::move(r));
  }
}

ordered_json teams_line(const Transcript& t, const ViabilityRecord& r) {
  ordered_json obj;
  obj["team_id"] = t.team_id;
  obj["round"] = t.round;
  obj["condition"] = std::string(to_string(t.condition));
  obj["duration_s"] = t.duration;
  auto members = ordered_json::array();
  for (const auto& m : r.members) {
    ordered_json mj;
    mj["member_id"] = m.member_id;
    mj["viability_items"] = m.items;
    members.push_back(std::move(mj));
  }
  obj["members"] = std::move(members);
  if (r.performance) obj["performance"] = *r.performance;
  return obj;
}

}  // namespace

Corpus load_teams(const std::filesystem::path& teams_path) {
  Corpus corpus;
  read_teams(teams_path, corpus);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& messages_path,
                   const std::filesystem::path& teams_path) {
  Corpus corpus;
  read_teams(teams_path, corpus);

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.transcripts.size(); ++i) {
    index.emplace(corpus.transcripts[i].team_id, i);
  }

  static const std::set<std::string> kMessageFields = {"team_id", "sender", "timestamp_s", "text"};
  LineReader reader(messages_path);
  json obj;
  while (reader.next(obj)) {
    reader.warn_unknown(obj, kMessageFields, corpus.warnings);
    const auto team_id = reader.require<std::string>(obj, "team_id");
    const auto it = index.find(team_id);
    if (it == index.end()) reader.fail("unknown team_id " + team_id);
    auto& t = corpus.transcripts[it->second];
    ChatMessage m;
    m.sender = reader.require<std::string>(obj, "sender");
    m.timestamp = reader.require<double>(obj, "timestamp_s");
    m.text = reader.require<std::string>(obj, "text");
    if (!t.has_member(m.sender)) {
      reader.fail("sender " + m.sender + " is not on the roster of team " + team_id);
    }
    if (!(m.timestamp >= 0.0) || m.timestamp > t.duration) {
      reader.fail("timestamp outside [0, duration] for team " + team_id);
    }
    t.messages.push_back(std::move(m));
  }

  for (auto& t : corpus.transcripts) {
    std::stable_sort(t.messages.begin(), t.messages.end(),
                     [](const ChatMessage& a, const ChatMessage& b) { return a.timestamp < b.timestamp; });
  }
  return corpus;
}

void write_messages(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& t : corpus.transcripts) {
    for (const auto& m : t.messages) {
      ordered_json obj;
      obj["team_id"] = t.team_id;
      obj["sender"] = m.sender;
      obj["timestamp_s"] = m.timestamp;
      obj["text"] = m.text;
      out << obj.dump() << '\n';
    }
  }
}

void write_teams(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (std::size_t i = 0; i < corpus.transcripts.size(); ++i) {
    out << teams_line(corpus.transcripts[i], corpus.records[i]).dump() << '\n';
  }
}

}  // namespace teamviab
