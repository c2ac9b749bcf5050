#pragma once

// Seed-problem ingestion and embedding-based semantic deduplication.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suitegen/jsonl.hpp"
#include "suitegen/kernels.hpp"

namespace suitegen::corpus {

struct ProblemRecord {
  std::string id;
  std::string source;
  std::string statement;
  std::optional<std::string> reference_solution;
  std::vector<std::string> tests;
};

Json to_json(const ProblemRecord& r);

class Corpus {
public:
  Corpus() = default;

  /// Appends a record; throws InvalidArgument on a duplicate id or empty statement.
  void add(ProblemRecord record);

  const std::vector<ProblemRecord>& problems() const { return problems_; }
  std::size_t size() const { return problems_.size(); }
  bool empty() const { return problems_.empty(); }
  const std::map<std::string, std::size_t>& source_counts() const { return source_counts_; }
  std::optional<std::size_t> find(const std::string& id) const;

private:
  std::vector<ProblemRecord> problems_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::size_t> source_counts_;
};

struct Rejection {
  std::size_t line; // 1-based position in the input stream
  std::string reason;
};

struct IngestResult {
  Corpus corpus;
  std::vector<Rejection> rejected;
};

/// One JSON object per line. Malformed records are rejected individually;
/// a duplicate explicit id aborts with InvalidArgument. Records without an id
/// are assigned "<source>/<ordinal within source>".
IngestResult ingest_problems(std::istream& in);
IngestResult ingest_records(std::span<const Json> records);

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// ---------------------------------------------------------------------------
// Embeddings

using EmbeddingMap = std::map<std::string, std::vector<double>>;

/// {"id", "vector": [...]} per line. Throws InvalidEmbedding on non-finite
/// entries or mixed dimensions, InvalidArgument on a repeated id.
EmbeddingMap load_embeddings(const std::filesystem::path& path);
EmbeddingMap parse_embeddings(std::span<const Json> rows);

/// Stacks embeddings in corpus order. Throws InvalidArgument naming the first
/// problem id without an embedding.
kernels::EmbeddingMatrix align_embeddings(const Corpus& corpus, const EmbeddingMap& embeddings);

/// dot(a,b) / (|a||b|). Throws InvalidEmbedding on dimension mismatch or zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Similarity statistics

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
};

struct KnnStats {
  std::size_t k = 0;
  std::vector<double> per_problem; // corpus order
  double corpus_mean = 0.0;
  Histogram histogram;
};

Json to_json(const KnnStats& s);

/// Mean similarity of each problem to its k nearest neighbours (exact scan).
/// Throws InvalidArgument when the corpus has k or fewer problems.
KnnStats knn_similarity_stats(const kernels::EmbeddingMatrix& embeddings, std::size_t k = 10,
                              std::size_t buckets = 40, int threads = 0);

// ---------------------------------------------------------------------------
// Deduplication

struct DuplicateGroup {
  std::vector<std::string> members; // corpus order
  std::string representative;
};

struct SourceTally {
  std::size_t kept = 0;
  std::size_t dropped = 0;
};

struct DedupReport {
  double threshold = 0.9;
  std::uint64_t seed = 0;
  std::map<std::string, SourceTally> per_source;
  std::vector<DuplicateGroup> components; // only groups of size >= 2
  std::optional<double> mean_knn_before;  // absent when the corpus is too small for k
  std::optional<double> mean_knn_after;
  std::size_t knn_k = 10;
  // Fraction of row-source problems with an above-threshold neighbour in the
  // column source; diagonal fixed at 1.
  std::map<std::string, std::map<std::string, double>> source_overlap;
};

Json to_json(const DedupReport& r);

struct DedupResult {
  Corpus corpus;
  DedupReport report;
};

struct DedupOptions {
  double threshold = 0.9;
  std::uint64_t seed = 0;
  std::size_t knn_k = 10;
  int threads = 0;
};

/// Connected components over the graph of pairs with similarity > threshold;
/// one uniformly drawn representative survives per component.
DedupResult dedup_corpus(const Corpus& corpus, const EmbeddingMap& embeddings,
                         const DedupOptions& options);

/// Groups of row indices joined by `edges`, each sorted ascending, ordered by
/// smallest member. Singletons included.
std::vector<std::vector<std::size_t>> connected_components(std::size_t n,
                                                           std::span<const kernels::Edge> edges);

std::map<std::string, std::map<std::string, double>>
source_overlap(const Corpus& corpus, std::span<const kernels::Edge> edges);

} // namespace suitegen::corpus
