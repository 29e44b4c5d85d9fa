#pragma once

#include "flower/model.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flower {

inline constexpr std::string_view kCaseFileSuffix = ".case.json";

struct CorpusError {
  std::string file;
  std::string message;

  bool operator==(const CorpusError&) const = default;
};

struct LoadedCorpus {
  std::vector<Case> cases;
  std::vector<CorpusError> errors;
};

// Imports every *.case.json file in `dir` (sorted by file name) and keeps
// only those that import and validate cleanly. Throws Error{IoError} when
// the directory cannot be read.
LoadedCorpus load_corpus(const std::filesystem::path& dir);

using LeafCounts = std::array<std::size_t, kAllLeafKinds.size()>;
using LeafPresence = std::array<bool, kAllLeafKinds.size()>;

struct CorpusRow {
  std::string case_id;
  std::size_t targets = 0;
  LeafPresence presence{};

  bool operator==(const CorpusRow&) const = default;
};

struct CorpusStats {
  std::size_t cases = 0;
  std::size_t multi_target_cases = 0;
  // Rows ordered by case id.
  std::vector<CorpusRow> rows;
  // Leaf counts per kind, in kAllLeafKinds order.
  LeafCounts leaf_totals{};

  std::vector<std::size_t> per_case_target_counts() const;
  bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const std::vector<Case>& cases);

// format is "csv" or "md"; anything else throws Error{UnsupportedFormat}.
std::string emit_stats(const CorpusStats& stats, std::string_view format);

}  // namespace flower
