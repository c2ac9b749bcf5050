#include "suitegen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "suitegen/error.hpp"
#include "suitegen/random.hpp"

namespace suitegen::corpus {

Json to_json(const ProblemRecord& r) {
  Json j = {{"id", r.id}, {"source", r.source}, {"statement", r.statement}, {"tests", r.tests}};
  if (r.reference_solution) {
    j["reference_solution"] = *r.reference_solution;
  }
  return j;
}

void Corpus::add(ProblemRecord record) {
  if (record.statement.empty()) {
    throw InvalidArgument("problem " + record.id + ": empty statement");
  }
  if (index_.contains(record.id)) {
    throw InvalidArgument("duplicate problem id: " + record.id);
  }
  index_.emplace(record.id, problems_.size());
  ++source_counts_[record.source];
  problems_.push_back(std::move(record));
}

std::optional<std::size_t> Corpus::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

namespace {

bool non_empty_string(const Json& j, const char* key) {
  return j.contains(key) && j[key].is_string() && !j[key].get<std::string>().empty();
}

// Returns the rejection reason, or empty when the record is well-formed.
std::string validate_record(const Json& j) {
  if (!j.is_object()) {
    return "record is not a JSON object";
  }
  if (!non_empty_string(j, "source")) {
    return "missing or empty \"source\"";
  }
  if (!non_empty_string(j, "statement")) {
    return "missing or empty \"statement\"";
  }
  if (j.contains("id") && !non_empty_string(j, "id")) {
    return "\"id\" must be a non-empty string";
  }
  if (j.contains("reference_solution") && !j["reference_solution"].is_null() &&
      !j["reference_solution"].is_string()) {
    return "\"reference_solution\" must be a string";
  }
  if (j.contains("tests")) {
    if (!j["tests"].is_array()) {
      return "\"tests\" must be an array";
    }
    std::set<std::string> seen;
    for (const auto& t : j["tests"]) {
      if (!t.is_string()) {
        return "\"tests\" entries must be strings";
      }
      if (!seen.insert(t.get<std::string>()).second) {
        return "duplicate test id " + t.get<std::string>();
      }
    }
  }
  return {};
}

void ingest_one(IngestResult& result, std::map<std::string, std::size_t>& ordinals,
                std::size_t line, const Json& j) {
  if (auto reason = validate_record(j); !reason.empty()) {
    result.rejected.push_back({line, std::move(reason)});
    return;
  }
  ProblemRecord r;
  r.source = j["source"].get<std::string>();
  r.statement = j["statement"].get<std::string>();
  std::size_t ordinal = ++ordinals[r.source];
  r.id = j.contains("id") ? j["id"].get<std::string>()
                          : r.source + "/" + std::to_string(ordinal);
  if (j.contains("reference_solution") && j["reference_solution"].is_string()) {
    r.reference_solution = j["reference_solution"].get<std::string>();
  }
  if (j.contains("tests")) {
    r.tests = j["tests"].get<std::vector<std::string>>();
  }
  result.corpus.add(std::move(r)); // duplicate id is fatal
}

} // namespace

IngestResult ingest_problems(std::istream& in) {
  IngestResult result;
  std::map<std::string, std::size_t> ordinals;
  for_each_line(in, [&](std::size_t line, const std::string& text) {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error&) {
      result.rejected.push_back({line, "unparsable JSON"});
      return;
    }
    ingest_one(result, ordinals, line, j);
  });
  return result;
}

IngestResult ingest_records(std::span<const Json> records) {
  IngestResult result;
  std::map<std::string, std::size_t> ordinals;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ingest_one(result, ordinals, i + 1, records[i]);
  }
  return result;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open corpus " + path.string());
  }
  auto result = ingest_problems(in);
  if (!result.rejected.empty()) {
    const auto& r = result.rejected.front();
    throw FormatError(path.string() + ":" + std::to_string(r.line) + ": " + r.reason);
  }
  return std::move(result.corpus);
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::vector<Json> rows;
  rows.reserve(corpus.size());
  for (const auto& p : corpus.problems()) {
    rows.push_back(to_json(p));
  }
  write_jsonl(path, rows);
}

// ---------------------------------------------------------------------------

EmbeddingMap parse_embeddings(std::span<const Json> rows) {
  EmbeddingMap out;
  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& j = rows[i];
    const std::string where = "embedding record " + std::to_string(i + 1);
    if (!j.is_object() || !non_empty_string(j, "id") || !j.contains("vector") ||
        !j["vector"].is_array()) {
      throw FormatError(where + ": expected {\"id\", \"vector\"}");
    }
    std::vector<double> v;
    for (const auto& x : j["vector"]) {
      if (!x.is_number()) {
        throw InvalidEmbedding(where + ": non-numeric entry");
      }
      v.push_back(x.get<double>());
    }
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
      throw InvalidEmbedding(where + ": non-finite entry");
    }
    if (dim && *dim != v.size()) {
      throw InvalidEmbedding(where + ": dimension " + std::to_string(v.size()) +
                             " differs from corpus dimension " + std::to_string(*dim));
    }
    dim = v.size();
    auto id = j["id"].get<std::string>();
    if (!out.emplace(id, std::move(v)).second) {
      throw InvalidArgument(where + ": repeated id " + id);
    }
  }
  return out;
}

EmbeddingMap load_embeddings(const std::filesystem::path& path) {
  auto rows = read_jsonl(path);
  return parse_embeddings(rows);
}

kernels::EmbeddingMatrix align_embeddings(const Corpus& corpus, const EmbeddingMap& embeddings) {
  std::vector<double> values;
  std::size_t dim = 0;
  for (const auto& p : corpus.problems()) {
    auto it = embeddings.find(p.id);
    if (it == embeddings.end()) {
      throw InvalidArgument("missing embedding for problem " + p.id);
    }
    if (values.empty()) {
      dim = it->second.size();
    } else if (it->second.size() != dim) {
      throw InvalidEmbedding("embedding for " + p.id + " has mismatched dimension");
    }
    values.insert(values.end(), it->second.begin(), it->second.end());
  }
  return kernels::EmbeddingMatrix(corpus.size(), dim, std::move(values));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidEmbedding("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
  }
  double na = kernels::l2_norm(a);
  double nb = kernels::l2_norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw InvalidEmbedding("cosine_similarity: zero-norm vector");
  }
  return kernels::dot(a, b) / (na * nb);
}

// ---------------------------------------------------------------------------

Json to_json(const KnnStats& s) {
  return {{"k", s.k},
          {"per_problem", s.per_problem},
          {"corpus_mean", s.corpus_mean},
          {"histogram", {{"lo", s.histogram.lo}, {"hi", s.histogram.hi}, {"counts", s.histogram.counts}}}};
}

KnnStats knn_similarity_stats(const kernels::EmbeddingMatrix& embeddings, std::size_t k,
                              std::size_t buckets, int threads) {
  KnnStats stats;
  stats.k = k;
  stats.per_problem = kernels::parallel::knn_means(embeddings, k, threads);
  stats.corpus_mean = std::accumulate(stats.per_problem.begin(), stats.per_problem.end(), 0.0) /
                      static_cast<double>(stats.per_problem.size());
  stats.histogram.counts.assign(std::max<std::size_t>(buckets, 1), 0);
  const double width = (stats.histogram.hi - stats.histogram.lo) /
                       static_cast<double>(stats.histogram.counts.size());
  for (double v : stats.per_problem) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - stats.histogram.lo) / width));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(stats.histogram.counts.size()) - 1);
    ++stats.histogram.counts[static_cast<std::size_t>(b)];
  }
  return stats;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> connected_components(std::size_t n,
                                                           std::span<const kernels::Edge> edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : edges) {
    auto ra = find(e.a);
    auto rb = find(e.b);
    if (ra != rb) {
      parent[std::max(ra, rb)] = std::min(ra, rb); // root stays the smallest index
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = find(i);
    if (slot[r] == n) {
      slot[r] = groups.size();
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

std::map<std::string, std::map<std::string, double>>
source_overlap(const Corpus& corpus, std::span<const kernels::Edge> edges) {
  const auto& problems = corpus.problems();
  // For each problem, the set of other sources it has a duplicate in.
  std::vector<std::set<std::string>> hits(problems.size());
  for (const auto& e : edges) {
    hits[e.a].insert(problems[e.b].source);
    hits[e.b].insert(problems[e.a].source);
  }
  std::map<std::string, std::map<std::string, double>> overlap;
  for (const auto& [row, count] : corpus.source_counts()) {
    for (const auto& [col, unused] : corpus.source_counts()) {
      (void)unused;
      if (row == col) {
        overlap[row][col] = 1.0;
        continue;
      }
      std::size_t with = 0;
      for (std::size_t i = 0; i < problems.size(); ++i) {
        if (problems[i].source == row && hits[i].contains(col)) {
          ++with;
        }
      }
      overlap[row][col] = static_cast<double>(with) / static_cast<double>(count);
    }
  }
  return overlap;
}

Json to_json(const DedupReport& r) {
  Json per_source = Json::object();
  for (const auto& [src, t] : r.per_source) {
    per_source[src] = {{"kept", t.kept}, {"dropped", t.dropped}};
  }
  Json comps = Json::array();
  for (const auto& g : r.components) {
    comps.push_back({{"members", g.members}, {"representative", g.representative}});
  }
  Json j = {{"threshold", r.threshold},
            {"seed", r.seed},
            {"knn_k", r.knn_k},
            {"per_source", per_source},
            {"components", comps},
            {"source_overlap", r.source_overlap}};
  j["mean_knn_before"] = r.mean_knn_before ? Json(*r.mean_knn_before) : Json(nullptr);
  j["mean_knn_after"] = r.mean_knn_after ? Json(*r.mean_knn_after) : Json(nullptr);
  return j;
}

DedupResult dedup_corpus(const Corpus& corpus, const EmbeddingMap& embeddings,
                         const DedupOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw InvalidArgument("dedup threshold must lie strictly between 0 and 1");
  }
  auto matrix = align_embeddings(corpus, embeddings);
  auto edges = kernels::parallel::similarity_edges(matrix, options.threshold, options.threads);
  auto groups = connected_components(corpus.size(), edges);

  DedupResult result;
  auto& report = result.report;
  report.threshold = options.threshold;
  report.seed = options.seed;
  report.knn_k = options.knn_k;
  report.source_overlap = source_overlap(corpus, edges);

  Rng rng(options.seed);
  std::vector<bool> keep(corpus.size(), false);
  for (const auto& g : groups) {
    std::size_t chosen = g.size() == 1 ? g.front() : g[uniform_index(rng, g.size())];
    keep[chosen] = true;
    if (g.size() > 1) {
      DuplicateGroup dg;
      for (auto idx : g) {
        dg.members.push_back(corpus.problems()[idx].id);
      }
      dg.representative = corpus.problems()[chosen].id;
      report.components.push_back(std::move(dg));
    }
  }

  std::vector<std::size_t> kept_idx;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus.problems()[i];
    auto& tally = report.per_source[p.source];
    if (keep[i]) {
      ++tally.kept;
      kept_idx.push_back(i);
      result.corpus.add(p);
    } else {
      ++tally.dropped;
    }
  }

  if (corpus.size() > options.knn_k) {
    report.mean_knn_before = knn_similarity_stats(matrix, options.knn_k, 40, options.threads).corpus_mean;
  }
  if (kept_idx.size() > options.knn_k) {
    report.mean_knn_after =
        knn_similarity_stats(matrix.subset(kept_idx), options.knn_k, 40, options.threads).corpus_mean;
  }
  return result;
}

} // namespace suitegen::corpus
