#include <cstdio>
#include <regex>

#include "suitegen/error.hpp"
#include "suitegen/evolution.hpp"

namespace suitegen::evolution {

namespace fs = std::filesystem;

fs::path round_directory(const fs::path& dir, int round) {
  char name[32];
  std::snprintf(name, sizeof name, "round_%03d", round);
  return dir / name;
}

std::vector<suite::Problem> load_problems(const fs::path& path) {
  std::vector<suite::Problem> out;
  for (const auto& j : read_jsonl(path)) out.push_back(suite::problem_from_json(j));
  return out;
}

void save_problems(const fs::path& path, const std::vector<suite::Problem>& problems) {
  std::vector<Json> rows;
  for (const auto& p : problems) rows.push_back(suite::to_json(p));
  write_jsonl(path, rows);
}

std::vector<suite::SolutionPool> load_pools(const fs::path& path) {
  std::vector<suite::SolutionPool> out;
  for (const auto& j : read_jsonl(path)) out.push_back(suite::pool_from_json(j));
  return out;
}

void save_pools(const fs::path& path, const std::vector<suite::SolutionPool>& pools) {
  std::vector<Json> rows;
  for (const auto& p : pools) rows.push_back(suite::to_json(p));
  write_jsonl(path, rows);
}

std::vector<passmatrix::PassMatrix> load_matrices(const fs::path& path) {
  std::vector<passmatrix::PassMatrix> out;
  for (const auto& j : read_jsonl(path)) {
    if (!j.contains("matrix")) throw FormatError(path.string() + ": matrix record without \"matrix\"");
    out.push_back(passmatrix::matrix_from_json(j["matrix"]));
  }
  return out;
}

void save_matrices(const fs::path& path, const std::vector<std::string>& problem_ids,
                   const std::vector<passmatrix::PassMatrix>& matrices) {
  if (problem_ids.size() != matrices.size()) {
    throw InvalidArgument("save_matrices: one id per matrix required");
  }
  std::vector<Json> rows;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    rows.push_back({{"problem_id", problem_ids[i]}, {"matrix", passmatrix::to_json(matrices[i])}});
  }
  write_jsonl(path, rows);
}

void write_checkpoint(const fs::path& dir, const Checkpoint& cp) {
  const auto target = round_directory(dir, cp.round);
  fs::create_directories(target);
  fs::remove(target / "snapshot.json");
  std::vector<std::string> ids;
  for (const auto& p : cp.problems) ids.push_back(p.id);
  write_json(target / "meta.json", {{"round", cp.round}, {"config_hash", cp.config_hash}});
  save_problems(target / "problems.jsonl", cp.problems);
  save_pools(target / "pools.jsonl", cp.pools);
  save_matrices(target / "matrices.jsonl", ids, cp.matrices);
  write_json(target / "snapshot.json", reporting::to_json(cp.snapshot));
}

Checkpoint load_checkpoint(const fs::path& dir, int round) {
  const auto src = round_directory(dir, round);
  if (!fs::exists(src / "snapshot.json")) {
    throw IoError("checkpoint " + src.string() + " is incomplete");
  }
  Checkpoint cp;
  const auto meta = read_json(src / "meta.json");
  cp.round = meta.at("round").get<int>();
  cp.config_hash = meta.at("config_hash").get<std::string>();
  cp.problems = load_problems(src / "problems.jsonl");
  cp.pools = load_pools(src / "pools.jsonl");
  cp.matrices = load_matrices(src / "matrices.jsonl");
  cp.snapshot = reporting::snapshot_from_json(read_json(src / "snapshot.json"));
  if (cp.problems.size() != cp.pools.size() || cp.problems.size() != cp.matrices.size()) {
    throw FormatError("checkpoint " + src.string() + ": problem, pool, and matrix counts disagree");
  }
  return cp;
}

std::optional<int> last_complete_round(const fs::path& dir) {
  if (!fs::is_directory(dir)) return std::nullopt;
  static const std::regex pattern("round_(\\d{3})");
  std::optional<int> best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && std::regex_match(name, m, pattern) && fs::exists(entry.path() / "snapshot.json")) {
      const int r = std::stoi(m[1]);
      if (!best || r > *best) best = r;
    }
  }
  // Rounds are only usable as a contiguous prefix.
  if (best) {
    for (int r = 0; r <= *best; ++r) {
      if (!fs::exists(round_directory(dir, r) / "snapshot.json")) return r == 0 ? std::nullopt : std::optional(r - 1);
    }
  }
  return best;
}

} // namespace suitegen::evolution
