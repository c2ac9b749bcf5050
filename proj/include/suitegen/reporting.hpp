#pragma once

// Round snapshots and the analysis reports derived from them. Every report
// is a pure function of its inputs and renders both as JSON and as an
// aligned text table.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "suitegen/jsonl.hpp"
#include "suitegen/passmatrix.hpp"
#include "suitegen/suite.hpp"

namespace suitegen::reporting {

inline const std::vector<std::size_t> kDefaultKs = {1, 4, 8};

struct MethodCounts {
  std::size_t generated = 0;
  std::size_t retained = 0;
  friend bool operator==(const MethodCounts&, const MethodCounts&) = default;
};

struct SourceStats {
  std::size_t n_problems = 0;
  double avg_active_tests = 0.0;
  std::map<std::size_t, double> pass_at;
  friend bool operator==(const SourceStats&, const SourceStats&) = default;
};

struct RoundSnapshot {
  int round = 0;
  std::size_t n_problems = 0;
  double avg_active_tests = 0.0;
  std::map<std::size_t, double> pass_at;
  std::map<std::string, MethodCounts> per_method; // adversarial, discriminative
  std::map<std::string, SourceStats> per_source;
  friend bool operator==(const RoundSnapshot&, const RoundSnapshot&) = default;
};

Json to_json(const RoundSnapshot& s);
RoundSnapshot snapshot_from_json(const Json& j);

/// Correct-solution count of one problem: rows passing every active test
/// whose pass rate is at least `lo`. Columns below `lo` are the ones final
/// filtering would discard as unreliable, so they are not allowed to veto.
std::size_t reliable_correct_count(const passmatrix::PassMatrix& m, double lo);

/// `matrices[i]` covers the active tests of `problems[i]`; pass@k uses the
/// full pool as n.
RoundSnapshot compute_snapshot(int round, const std::vector<suite::Problem>& problems,
                               const std::vector<passmatrix::PassMatrix>& matrices,
                               std::map<std::string, MethodCounts> per_method, double lo,
                               const std::vector<std::size_t>& ks = kDefaultKs);

// ---------------------------------------------------------------------------

struct Table {
  std::string title;
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
  friend bool operator==(const Table&, const Table&) = default;
};

/// "# title", a header line, a dash rule, then rows; columns separated by two
/// spaces and left aligned.
std::string render_table(const Table& t);
/// Inverse of render_table for cells without leading or trailing spaces.
Table parse_table(const std::string& text);
std::string format_real(double v);

struct Report {
  Json data;
  Table table;
  std::vector<std::string> warnings;
};

/// Round x pass@k series. Any increase between consecutive rounds is flagged.
Report difficulty_report(const std::vector<RoundSnapshot>& snapshots);

/// pass@k per model tag, using only that model's solutions as n and averaging
/// over problems. Throws InvalidArgument when some k exceeds a model's count.
Report per_model_pass_report(const std::vector<suite::SolutionPool>& pools,
                             const std::vector<passmatrix::PassMatrix>& matrices,
                             const std::vector<std::size_t>& ks = kDefaultKs);

/// generated / retained / rate per round and method, with a comparison line
/// naming the higher-retention method.
Report retention_report(const std::vector<RoundSnapshot>& snapshots);

/// Problems and average active tests per round, overall and per source.
Report round_stats_report(const std::vector<RoundSnapshot>& snapshots);

/// Writes difficulty, per_model, retention, and round_stats as .json + .txt.
void write_reports(const std::filesystem::path& directory, const std::vector<RoundSnapshot>& snapshots,
                   const std::vector<suite::SolutionPool>& pools,
                   const std::vector<passmatrix::PassMatrix>& final_matrices);

} // namespace suitegen::reporting
