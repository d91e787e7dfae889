#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "teamviab/features.hpp"
#include "teamviab/transcript.hpp"

namespace teamviab {

// Teams by rows, named feature columns. Row order is corpus order.
struct FeatureMatrix {
  std::vector<std::string> team_ids;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t column_index(std::string_view name) const;
  std::size_t row_index(std::string_view team_id) const;

  // Columns in the requested order; throws ValidationError when one is absent.
  FeatureMatrix select_columns(const std::vector<std::string>& names) const;
  FeatureMatrix select_rows(const std::vector<std::size_t>& indices) const;
  FeatureVector vector(std::size_t row) const;

  bool operator==(const FeatureMatrix&) const = default;
};

// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

void write_csv(const FeatureMatrix& matrix, std::ostream& out);
void write_csv(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix read_csv(const std::filesystem::path& path);

// Appends columns of `extra` by team id; every team in `base` must be present.
FeatureMatrix merge_columns(const FeatureMatrix& base, const FeatureMatrix& extra);

struct ExtractionResult {
  FeatureMatrix matrix;
  std::vector<std::string> dropped;  // teams with no message in the window
};

ExtractionResult extract_features(const std::vector<PreparedTranscript>& prepared, const Window& window,
                                  const FeatureOptions& options = {}, unsigned threads = 0);

std::vector<PreparedTranscript> prepare_corpus(const Corpus& corpus, const LexiconSet& lexicons,
                                               unsigned threads = 0);

}  // namespace teamviab
