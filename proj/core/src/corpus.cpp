#include "flower/corpus.hpp"

#include "flower/error.hpp"
#include "flower/graph.hpp"
#include "flower/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace flower {
namespace fs = std::filesystem;

namespace {

bool has_case_suffix(const std::string& name) {
  return name.size() > kCaseFileSuffix.size() && name.ends_with(kCaseFileSuffix);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

LoadedCorpus load_corpus(const fs::path& dir) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot read directory " + dir.string() + ": " + ec.message());
  std::vector<fs::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file(ec) && has_case_suffix(entry.path().filename().string())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  LoadedCorpus out;
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    try {
      Case c = import_case_json(read_file(file));
      auto violations = validate_graph(c);
      if (!violations.empty()) {
        const auto& v = violations.front();
        out.errors.push_back({name, v.rule + " on " + v.entity + ": " + v.message});
        continue;
      }
      out.cases.push_back(std::move(c));
    } catch (const Error& e) {
      out.errors.push_back({name, std::string(to_string(e.kind())) + ": " + e.detail()});
    }
  }
  return out;
}

std::vector<std::size_t> CorpusStats::per_case_target_counts() const {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.targets);
  return out;
}

CorpusStats corpus_stats(const std::vector<Case>& cases) {
  CorpusStats s;
  s.cases = cases.size();
  for (const auto& c : cases) {
    CorpusRow row;
    row.case_id = c.id.str();
    row.targets = c.targets.size();
    if (row.targets >= 2) ++s.multi_target_cases;
    for (const auto& [_, t] : c.targets) {
      for (const auto& l : t.leaves) {
        const auto k = leaf_index(l.kind);
        row.presence[k] = true;
        ++s.leaf_totals[k];
      }
    }
    s.rows.push_back(std::move(row));
  }
  std::sort(s.rows.begin(), s.rows.end(),
            [](const CorpusRow& a, const CorpusRow& b) { return a.case_id < b.case_id; });
  return s;
}

std::string emit_stats(const CorpusStats& stats, std::string_view format) {
  const bool csv = format == "csv";
  if (!csv && format != "md") {
    throw Error(ErrorKind::UnsupportedFormat, "unknown stats format: " + std::string(format));
  }
  std::vector<std::string> header{"case_id", "targets"};
  for (auto k : kAllLeafKinds) header.emplace_back(to_string(k));

  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    if (csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    } else {
      out << "|";
      for (const auto& cell : cells) out << " " << cell << " |";
    }
    out << "\n";
  };
  emit_row(header);
  if (!csv) {
    out << "|";
    for (std::size_t i = 0; i < header.size(); ++i) out << "---|";
    out << "\n";
  }
  for (const auto& row : stats.rows) {
    std::vector<std::string> cells{row.case_id, std::to_string(row.targets)};
    for (bool present : row.presence) cells.emplace_back(present ? "1" : "0");
    emit_row(cells);
  }
  return out.str();
}

}  // namespace flower
