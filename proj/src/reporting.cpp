#include <algorithm>
#include <cstdio>
#include <sstream>

#include "suitegen/error.hpp"
#include "suitegen/reporting.hpp"

namespace suitegen::reporting {

using passmatrix::PassMatrix;

namespace {

Json pass_at_json(const std::map<std::size_t, double>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

std::map<std::size_t, double> pass_at_from_json(const Json& j) {
  std::map<std::size_t, double> m;
  for (const auto& [k, v] : j.items()) m[std::stoul(k)] = v.get<double>();
  return m;
}

} // namespace

Json to_json(const RoundSnapshot& s) {
  Json methods = Json::object();
  for (const auto& [name, c] : s.per_method) methods[name] = {{"generated", c.generated}, {"retained", c.retained}};
  Json sources = Json::object();
  for (const auto& [name, st] : s.per_source) {
    sources[name] = {{"n_problems", st.n_problems},
                     {"avg_active_tests", st.avg_active_tests},
                     {"pass_at", pass_at_json(st.pass_at)}};
  }
  return {{"round", s.round},
          {"n_problems", s.n_problems},
          {"avg_active_tests", s.avg_active_tests},
          {"pass_at", pass_at_json(s.pass_at)},
          {"per_method", methods},
          {"per_source", sources}};
}

RoundSnapshot snapshot_from_json(const Json& j) {
  try {
    RoundSnapshot s;
    s.round = j.at("round").get<int>();
    s.n_problems = j.at("n_problems").get<std::size_t>();
    s.avg_active_tests = j.at("avg_active_tests").get<double>();
    s.pass_at = pass_at_from_json(j.at("pass_at"));
    const Json methods = j.value("per_method", Json::object());
    const Json sources = j.value("per_source", Json::object());
    for (const auto& [name, c] : methods.items()) {
      s.per_method[name] = {c.at("generated").get<std::size_t>(), c.at("retained").get<std::size_t>()};
    }
    for (const auto& [name, st] : sources.items()) {
      s.per_source[name] = {st.at("n_problems").get<std::size_t>(), st.at("avg_active_tests").get<double>(),
                            pass_at_from_json(st.at("pass_at"))};
    }
    return s;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("round snapshot: ") + e.what());
  }
}

std::size_t reliable_correct_count(const PassMatrix& m, double lo) {
  std::vector<std::string> reliable;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    if (passmatrix::test_pass_rate(m, t) >= lo) reliable.push_back(m.test_ids()[t]);
  }
  return passmatrix::count_correct(m.restrict_tests(reliable));
}

RoundSnapshot compute_snapshot(int round, const std::vector<suite::Problem>& problems,
                               const std::vector<PassMatrix>& matrices,
                               std::map<std::string, MethodCounts> per_method, double lo,
                               const std::vector<std::size_t>& ks) {
  if (problems.size() != matrices.size()) {
    throw InvalidArgument("compute_snapshot: one matrix per problem required");
  }
  struct Acc {
    std::size_t tests = 0;
    std::vector<passmatrix::SampleCount> counts;
  };
  Acc all;
  std::map<std::string, Acc> by_source;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    passmatrix::SampleCount sc{matrices[i].n_solutions(), reliable_correct_count(matrices[i], lo)};
    const auto active = problems[i].active_count();
    all.tests += active;
    all.counts.push_back(sc);
    auto& src = by_source[problems[i].source];
    src.tests += active;
    src.counts.push_back(sc);
  }
  auto fill = [&](const Acc& acc, std::size_t& n, double& avg, std::map<std::size_t, double>& pass) {
    n = acc.counts.size();
    avg = n ? static_cast<double>(acc.tests) / static_cast<double>(n) : 0.0;
    for (auto k : ks) pass[k] = passmatrix::mean_pass_at_k(acc.counts, k);
  };
  RoundSnapshot s;
  s.round = round;
  fill(all, s.n_problems, s.avg_active_tests, s.pass_at);
  for (const auto& [name, acc] : by_source) {
    auto& st = s.per_source[name];
    fill(acc, st.n_problems, st.avg_active_tests, st.pass_at);
  }
  s.per_method = std::move(per_method);
  return s;
}

// ---------------------------------------------------------------------------

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string render_table(const Table& t) {
  const std::size_t cols = t.headers.size();
  std::vector<std::size_t> width(cols, 1);
  for (std::size_t c = 0; c < cols; ++c) width[c] = std::max(width[c], t.headers[c].size());
  for (const auto& row : t.rows) {
    if (row.size() != cols) throw InvalidArgument("render_table: ragged row");
    for (std::size_t c = 0; c < cols; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  out << "# " << t.title << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) s += "  ";
      s += cells[c];
      if (c + 1 < cols) s.append(width[c] - cells[c].size(), ' ');
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out << s << '\n';
  };
  line(t.headers);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& row : t.rows) line(row);
  return out.str();
}

Table parse_table(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  if (lines.size() < 3 || lines[0].rfind("# ", 0) != 0) {
    throw FormatError("parse_table: expected title, header, and rule lines");
  }
  Table t;
  t.title = lines[0].substr(2);
  // Column extents come from the dash runs of the rule line.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  const auto& rule = lines[2];
  for (std::size_t i = 0; i < rule.size();) {
    if (rule[i] != '-') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < rule.size() && rule[j] == '-') ++j;
    spans.emplace_back(i, j);
    i = j;
  }
  auto split = [&](const std::string& l) {
    std::vector<std::string> cells;
    for (std::size_t c = 0; c < spans.size(); ++c) {
      const auto begin = spans[c].first;
      const auto end = c + 1 < spans.size() ? spans[c + 1].first : l.size();
      std::string cell = begin < l.size() ? l.substr(begin, end - std::min(begin, end)) : std::string();
      while (!cell.empty() && cell.back() == ' ') cell.pop_back();
      cells.push_back(cell);
    }
    return cells;
  };
  t.headers = split(lines[1]);
  for (std::size_t i = 3; i < lines.size(); ++i) {
    if (lines[i].rfind("warning: ", 0) == 0) break;
    if (!lines[i].empty()) t.rows.push_back(split(lines[i]));
  }
  return t;
}

namespace {

std::vector<std::size_t> snapshot_ks(const std::vector<RoundSnapshot>& snapshots) {
  std::vector<std::size_t> ks;
  for (const auto& [k, v] : snapshots.front().pass_at) ks.push_back(k);
  return ks;
}

} // namespace

Report difficulty_report(const std::vector<RoundSnapshot>& snapshots) {
  if (snapshots.empty()) {
    throw InvalidArgument("difficulty_report: at least one snapshot required");
  }
  Report r;
  const auto ks = snapshot_ks(snapshots);
  r.table.title = "pass@k by round";
  r.table.headers = {"round"};
  for (auto k : ks) r.table.headers.push_back("pass@" + std::to_string(k));
  Json series = Json::array();
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const auto& s = snapshots[i];
    std::vector<std::string> row{std::to_string(s.round)};
    for (auto k : ks) {
      const double v = s.pass_at.at(k);
      row.push_back(format_real(v));
      if (i > 0 && v > snapshots[i - 1].pass_at.at(k)) {
        r.warnings.push_back("pass@" + std::to_string(k) + " increases from round " +
                             std::to_string(snapshots[i - 1].round) + " to round " + std::to_string(s.round));
      }
    }
    r.table.rows.push_back(row);
    series.push_back({{"round", s.round}, {"pass_at", pass_at_json(s.pass_at)}});
  }
  r.data = {{"series", series}, {"monotone", r.warnings.empty()}, {"warnings", r.warnings}};
  return r;
}

Report per_model_pass_report(const std::vector<suite::SolutionPool>& pools, const std::vector<PassMatrix>& matrices,
                             const std::vector<std::size_t>& ks) {
  if (pools.size() != matrices.size()) {
    throw InvalidArgument("per_model_pass_report: one matrix per pool required");
  }
  std::map<std::string, std::vector<passmatrix::SampleCount>> counts;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    const auto& m = matrices[i];
    std::map<std::string, passmatrix::SampleCount> per_problem;
    for (const auto& sol : pools[i].solutions) {
      auto& sc = per_problem[sol.model_tag];
      ++sc.n;
      auto it = std::find(m.solution_ids().begin(), m.solution_ids().end(), sol.id);
      if (it == m.solution_ids().end()) {
        throw InvalidArgument("per_model_pass_report: solution " + sol.id + " missing from matrix of " +
                              pools[i].problem_id);
      }
      sc.c += passmatrix::solution_is_correct(m, static_cast<std::size_t>(it - m.solution_ids().begin()));
    }
    for (const auto& [tag, sc] : per_problem) {
      for (auto k : ks) {
        if (k > sc.n) {
          throw InvalidArgument("per_model_pass_report: k=" + std::to_string(k) + " exceeds the " +
                                std::to_string(sc.n) + " samples of model " + tag);
        }
      }
      counts[tag].push_back(sc);
    }
  }
  Report r;
  r.table.title = "pass@k by model";
  r.table.headers = {"model"};
  for (auto k : ks) r.table.headers.push_back("pass@" + std::to_string(k));
  Json models = Json::object();
  for (const auto& [tag, list] : counts) {
    std::vector<std::string> row{tag};
    std::map<std::size_t, double> values;
    for (auto k : ks) {
      values[k] = passmatrix::mean_pass_at_k(list, k);
      row.push_back(format_real(values[k]));
    }
    r.table.rows.push_back(row);
    models[tag] = {{"pass_at", pass_at_json(values)}, {"n_problems", list.size()}};
  }
  r.data = {{"models", models}};
  return r;
}

Report retention_report(const std::vector<RoundSnapshot>& snapshots) {
  Report r;
  r.table.title = "generated and retained tests";
  r.table.headers = {"round", "method", "generated", "retained", "rate", "note"};
  Json rows = Json::array();
  for (const auto& s : snapshots) {
    std::string best;
    double best_rate = -1.0;
    bool tie = false;
    for (const auto& [method, c] : s.per_method) {
      const double rate = c.generated ? static_cast<double>(c.retained) / static_cast<double>(c.generated) : 0.0;
      const std::string note = c.generated ? "" : "nothing generated";
      r.table.rows.push_back({std::to_string(s.round), method, std::to_string(c.generated),
                              std::to_string(c.retained), format_real(rate), note});
      rows.push_back({{"round", s.round}, {"method", method}, {"generated", c.generated},
                      {"retained", c.retained}, {"rate", rate}, {"note", note}});
      if (c.generated == 0) continue;
      if (rate > best_rate) {
        best_rate = rate;
        best = method;
        tie = false;
      } else if (rate == best_rate) {
        tie = true;
      }
    }
    if (s.per_method.size() > 1 && !best.empty()) {
      const std::string verdict = tie ? "tie" : best;
      r.table.rows.push_back({std::to_string(s.round), "higher retention", "", "", "", verdict});
      rows.push_back({{"round", s.round}, {"comparison", verdict}});
    }
  }
  r.data = {{"rows", rows}};
  return r;
}

Report round_stats_report(const std::vector<RoundSnapshot>& snapshots) {
  Report r;
  r.table.title = "problems and average tests per round";
  r.table.headers = {"round", "source", "problems", "avg_tests"};
  Json rounds = Json::array();
  for (const auto& s : snapshots) {
    r.table.rows.push_back({std::to_string(s.round), "all", std::to_string(s.n_problems),
                            format_real(s.avg_active_tests)});
    Json sources = Json::object();
    for (const auto& [name, st] : s.per_source) {
      r.table.rows.push_back({std::to_string(s.round), name, std::to_string(st.n_problems),
                              format_real(st.avg_active_tests)});
      sources[name] = {{"n_problems", st.n_problems}, {"avg_active_tests", st.avg_active_tests}};
    }
    rounds.push_back({{"round", s.round},
                      {"n_problems", s.n_problems},
                      {"avg_active_tests", s.avg_active_tests},
                      {"per_source", sources}});
  }
  r.data = {{"rounds", rounds}};
  return r;
}

void write_reports(const std::filesystem::path& directory, const std::vector<RoundSnapshot>& snapshots,
                   const std::vector<suite::SolutionPool>& pools, const std::vector<PassMatrix>& final_matrices) {
  std::filesystem::create_directories(directory);
  auto emit = [&](const std::string& name, const Report& rep) {
    write_json(directory / (name + ".json"), rep.data);
    std::string text = render_table(rep.table);
    for (const auto& w : rep.warnings) text += "warning: " + w + "\n";
    write_text_atomic(directory / (name + ".txt"), text);
  };
  emit("difficulty", difficulty_report(snapshots));
  emit("per_model", per_model_pass_report(pools, final_matrices));
  emit("retention", retention_report(snapshots));
  emit("round_stats", round_stats_report(snapshots));
}

} // namespace suitegen::reporting
