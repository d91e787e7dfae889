#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace teamviab {

inline constexpr int kViabilityItems = 14;
inline constexpr int kMinRoster = 3;
inline constexpr int kMaxRoster = 8;
inline constexpr double kDefaultDuration = 600.0;

enum class Condition { masked, initial_visible, reconvened };

std::string_view to_string(Condition c);
std::optional<Condition> parse_condition(std::string_view s);

struct ChatMessage {
  std::string sender;
  double timestamp = 0.0;  // seconds since the interaction started
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

struct Transcript {
  std::string team_id;
  int round = 0;  // 1-4, 0 when unknown
  Condition condition = Condition::masked;
  std::vector<std::string> roster;  // teams-file order
  std::vector<ChatMessage> messages;  // nondecreasing timestamps
  double duration = kDefaultDuration;

  bool has_member(std::string_view id) const;
  bool operator==(const Transcript&) const = default;
};

using ViabilityItems = std::array<int, kViabilityItems>;

struct MemberResponses {
  std::string member_id;
  ViabilityItems items{};

  bool operator==(const MemberResponses&) const = default;
};

struct ViabilityRecord {
  std::string team_id;
  std::vector<MemberResponses> members;
  std::optional<double> performance;

  bool operator==(const ViabilityRecord&) const = default;
};

// Transcripts and viability records are parallel: index i of each describes
// the same team, in teams-file order.
struct Corpus {
  std::vector<Transcript> transcripts;
  std::vector<ViabilityRecord> records;
  std::vector<std::string> warnings;

  std::size_t size() const { return transcripts.size(); }
  std::size_t message_count() const;
  const Transcript* find(std::string_view team_id) const;

  // Warnings are load diagnostics, not corpus content.
  bool operator==(const Corpus& o) const {
    return transcripts == o.transcripts && records == o.records;
  }
};

// Throws ValidationError when the roster, messages, or duration break the
// transcript invariants.
void validate(const Transcript& t);

// Sum of the 14 instrument items; the result lies in [14, 70].
int individual_viability(std::span<const int> items);

// Mean of the members' individual scores.
double team_viability(const ViabilityRecord& record);

// Inclusive linear-interpolation percentile, p strictly inside (0, 100).
double percentile_cutoff(std::vector<double> scores, double p);

enum class ViabilityClass { low, high };

struct Labeling {
  double cutoff = 0.0;
  std::map<std::string, ViabilityClass> labels;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  bool degenerate = false;  // one class is empty
};

// Teams strictly above the percentile cutoff are high; ties at the cutoff
// are low.
Labeling label_teams(const std::map<std::string, double>& scores, double p);

// Same rule against an explicit cutoff.
Labeling label_teams_at(const std::map<std::string, double>& scores, double cutoff);

std::map<std::string, double> viability_scores(const Corpus& corpus);

// JSON Lines ingestion. Messages are grouped per team and stably sorted by
// timestamp.
Corpus load_corpus(const std::filesystem::path& messages_path,
                   const std::filesystem::path& teams_path);

// Teams file only: transcripts carry metadata and rosters but no messages.
Corpus load_teams(const std::filesystem::path& teams_path);

void write_messages(const Corpus& corpus, const std::filesystem::path& path);
void write_teams(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace teamviab
