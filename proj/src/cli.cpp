#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "suitegen/cli.hpp"
#include "suitegen/corpus.hpp"
#include "suitegen/error.hpp"
#include "suitegen/filtering.hpp"
#include "suitegen/hashing.hpp"
#include "suitegen/reporting.hpp"

namespace suitegen::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

std::vector<std::string> PipelineConfig::problems_found() const {
  auto out = round.problems();
  if (limits.time_limit_ms <= 0) out.push_back("limits.time_limit_ms must be positive");
  if (limits.memory_limit_mb <= 0) out.push_back("limits.memory_limit_mb must be positive");
  if (!(dedup_threshold > 0.0 && dedup_threshold < 1.0)) out.push_back("dedup.threshold must lie strictly between 0 and 1");
  if (knn_k == 0) out.push_back("dedup.knn_k must be positive");
  if (problem_workers < 0 || exec_workers < 0) out.push_back("parallelism caps must be >= 0");
  if (runner.empty()) out.push_back("runner command must not be empty");
  if (sampling.model_tags.empty()) out.push_back("sampling.model_tags must not be empty");
  if (sampling.samples_per_model == 0) out.push_back("sampling.samples_per_model must be positive");
  if (sampling.max_resamples < 0) out.push_back("sampling.max_resamples must be >= 0");
  if (sampling.min_pool < selection::kSubsetSize) out.push_back("sampling.min_pool must be at least 5");
  if (provider.temperature < 0.0) out.push_back("provider.temperature must be >= 0");
  if (provider.max_tokens <= 0) out.push_back("provider.max_tokens must be positive");
  if (provider.timeout_s <= 0) out.push_back("provider.timeout_s must be positive");
  return out;
}

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"", {"workdir", "paths", "round", "limits", "provider", "runner", "sampling", "dedup", "parallelism", "seed"}},
    {"paths", {"corpus", "embeddings", "problems", "pools", "truth_table", "mock_pool"}},
    {"round",
     {"rounds", "hi_threshold", "lo_threshold", "class_cap_final", "min_tests", "max_perfect", "min_seed_tests",
      "adversarial_calls", "discriminative_calls"}},
    {"limits", {"time_limit_ms", "memory_limit_mb"}},
    {"provider", {"endpoint", "model", "temperature", "max_tokens", "auth_env", "timeout_s"}},
    {"sampling", {"model_tags", "samples_per_model", "max_resamples", "min_pool"}},
    {"dedup", {"threshold", "knn_k"}},
    {"parallelism", {"problem_workers", "exec_workers"}},
};

const std::set<std::string> kSecretKeys = {"api_key", "apikey", "token", "access_token", "secret",
                                           "password", "authorization", "bearer"};

void check_keys(const Json& j, const std::string& section, std::vector<std::string>& errors) {
  if (!j.is_object()) {
    errors.push_back((section.empty() ? std::string("config") : section) + " must be an object");
    return;
  }
  const auto& known = kKnownKeys.at(section);
  for (const auto& [key, value] : j.items()) {
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::string where = section.empty() ? key : section + "." + key;
    if (kSecretKeys.count(lower)) {
      errors.push_back(where + ": secrets are read from the environment, never from config files");
    } else if (!known.count(key)) {
      errors.push_back(where + ": unknown key");
    } else if (kKnownKeys.count(key) && section.empty()) {
      check_keys(value, key, errors);
    }
  }
}

} // namespace

PipelineConfig config_from_json(const Json& j, std::vector<std::string>& errors) {
  PipelineConfig c;
  check_keys(j, "", errors);
  if (!errors.empty()) return c;
  try {
    c.workdir = j.value("workdir", c.workdir.string());
    const auto paths = j.value("paths", Json::object());
    auto path = [&](const char* key, std::optional<fs::path>& slot) {
      if (paths.contains(key)) slot = paths[key].get<std::string>();
    };
    path("corpus", c.corpus);
    path("embeddings", c.embeddings);
    path("problems", c.problems);
    path("pools", c.pools);
    path("truth_table", c.truth_table);
    path("mock_pool", c.mock_pool);
    if (j.contains("round")) c.round = suite::round_config_from_json(j["round"], c.round);
    const auto limits = j.value("limits", Json::object());
    c.limits.time_limit_ms = limits.value("time_limit_ms", c.limits.time_limit_ms);
    c.limits.memory_limit_mb = limits.value("memory_limit_mb", c.limits.memory_limit_mb);
    if (j.contains("provider")) c.provider = genclient::provider_config_from_json(j["provider"]);
    c.runner = j.value("runner", c.runner);
    const auto sampling = j.value("sampling", Json::object());
    c.sampling.model_tags = sampling.value("model_tags", c.sampling.model_tags);
    c.sampling.samples_per_model = sampling.value("samples_per_model", c.sampling.samples_per_model);
    c.sampling.max_resamples = sampling.value("max_resamples", c.sampling.max_resamples);
    c.sampling.min_pool = sampling.value("min_pool", c.sampling.min_pool);
    const auto dedup = j.value("dedup", Json::object());
    c.dedup_threshold = dedup.value("threshold", c.dedup_threshold);
    c.knn_k = dedup.value("knn_k", c.knn_k);
    const auto par = j.value("parallelism", Json::object());
    c.problem_workers = par.value("problem_workers", c.problem_workers);
    c.exec_workers = par.value("exec_workers", c.exec_workers);
    c.seed = j.value("seed", c.seed);
  } catch (const std::exception& e) {
    errors.push_back(std::string("config: ") + e.what());
  }
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json paths = Json::object();
  auto put = [&](const char* key, const std::optional<fs::path>& p) {
    if (p) paths[key] = p->string();
  };
  put("corpus", c.corpus);
  put("embeddings", c.embeddings);
  put("problems", c.problems);
  put("pools", c.pools);
  put("truth_table", c.truth_table);
  put("mock_pool", c.mock_pool);
  auto round = suite::to_json(c.round);
  round.erase("seed");
  return {{"workdir", c.workdir.string()},
          {"paths", paths},
          {"round", round},
          {"limits", {{"time_limit_ms", c.limits.time_limit_ms}, {"memory_limit_mb", c.limits.memory_limit_mb}}},
          {"provider", genclient::to_json(c.provider)},
          {"runner", c.runner},
          {"sampling",
           {{"model_tags", c.sampling.model_tags},
            {"samples_per_model", c.sampling.samples_per_model},
            {"max_resamples", c.sampling.max_resamples},
            {"min_pool", c.sampling.min_pool}}},
          {"dedup", {{"threshold", c.dedup_threshold}, {"knn_k", c.knn_k}}},
          {"parallelism", {{"problem_workers", c.problem_workers}, {"exec_workers", c.exec_workers}}},
          {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Stages

namespace {

struct Flags {
  std::string config;
  std::string workdir;
  std::string input;
  std::string embeddings;
  std::string problems;
  std::string pools;
  std::string truth_table;
  std::string mock_pool;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::optional<int> workers;
  bool dry_run = false;
  bool resume = false;
  bool mock_provider = false;
  bool fake_executor = false;
};

struct Stage {
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::function<void()> run;
};

class Runner {
public:
  Runner(PipelineConfig config, Flags flags, const CliEnvironment& env, std::ostream& out)
      : cfg_(std::move(config)), flags_(std::move(flags)), env_(env), out_(out) {}

  /// Builds the plan for a stage; itemized errors are appended when required inputs are missing.
  Stage plan(const std::string& name, std::vector<std::string>& errors);

private:
  fs::path w(const std::string& rel) const { return cfg_.workdir / rel; }
  fs::path problems_path() const { return cfg_.problems.value_or(w("problems.refined.jsonl")); }
  fs::path pools_path() const { return cfg_.pools.value_or(w("pools.jsonl")); }

  genclient::TestGenerator& generator();
  execution::Executor& executor();
  evolution::Sampler& sampler();
  execution::VerdictCache& cache();

  std::pair<std::vector<suite::Problem>, std::vector<suite::SolutionPool>> load_aligned();
  void write_final(const filtering::FilterOutputs& filtered, const std::vector<passmatrix::PassMatrix>& matrices,
                   const std::vector<suite::SolutionPool>& pools,
                   const std::vector<reporting::RoundSnapshot>& snapshots, const filtering::Provenance& prov);

  PipelineConfig cfg_;
  Flags flags_;
  const CliEnvironment& env_;
  std::ostream& out_;

  std::unique_ptr<genclient::Provider> provider_;
  std::unique_ptr<genclient::TestGenerator> generator_;
  std::unique_ptr<execution::Executor> executor_;
  std::unique_ptr<evolution::Sampler> sampler_;
  std::unique_ptr<execution::VerdictCache> cache_;
};

genclient::TestGenerator& Runner::generator() {
  if (env_.generator) return *env_.generator;
  if (!generator_) {
    if (flags_.mock_provider) {
      std::optional<genclient::MockPool> pool;
      if (cfg_.mock_pool) pool = genclient::MockPool::load(*cfg_.mock_pool);
      generator_ = std::make_unique<genclient::MockGenerator>(cfg_.seed, std::move(pool));
    } else {
      provider_ = std::make_unique<genclient::HttpProvider>(cfg_.provider);
      generator_ = std::make_unique<genclient::ProviderGenerator>(*provider_, genclient::RetryPolicy{},
                                                                  cfg_.round.min_seed_tests, w("audit/generation"));
      fs::create_directories(w("audit/generation"));
    }
  }
  return *generator_;
}

execution::Executor& Runner::executor() {
  if (env_.executor) return *env_.executor;
  if (!executor_) {
    if (flags_.fake_executor) {
      if (!cfg_.truth_table) throw InvalidArgument("--fake-executor needs --truth-table");
      executor_ = execution::TruthTableExecutor::load(*cfg_.truth_table);
    } else {
      executor_ = std::make_unique<execution::SubprocessExecutor>(cfg_.runner);
    }
  }
  return *executor_;
}

evolution::Sampler& Runner::sampler() {
  if (env_.sampler) return *env_.sampler;
  if (!sampler_) {
    if (cfg_.pools) {
      sampler_ = std::make_unique<evolution::FixtureSampler>(evolution::load_pools(*cfg_.pools));
    } else if (flags_.mock_provider) {
      sampler_ = std::make_unique<evolution::MockSampler>(cfg_.seed);
    } else {
      std::map<std::string, std::shared_ptr<genclient::Provider>> providers;
      for (const auto& tag : cfg_.sampling.model_tags) {
        auto pc = cfg_.provider;
        pc.model = tag;
        providers[tag] = std::make_shared<genclient::HttpProvider>(pc);
      }
      sampler_ = std::make_unique<evolution::ProviderSampler>(std::move(providers), genclient::RetryPolicy{});
    }
  }
  return *sampler_;
}

execution::VerdictCache& Runner::cache() {
  if (!cache_) cache_ = std::make_unique<execution::VerdictCache>(w("cache"));
  return *cache_;
}

std::pair<std::vector<suite::Problem>, std::vector<suite::SolutionPool>> Runner::load_aligned() {
  auto problems = evolution::load_problems(problems_path());
  std::map<std::string, suite::SolutionPool> by_id;
  for (auto& p : evolution::load_pools(pools_path())) by_id.emplace(p.problem_id, std::move(p));
  std::vector<suite::Problem> kept;
  std::vector<suite::SolutionPool> pools;
  for (auto& p : problems) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      spdlog::warn("problem {} has no solution pool; skipped", p.id);
      continue;
    }
    pools.push_back(std::move(it->second));
    kept.push_back(std::move(p));
  }
  return {std::move(kept), std::move(pools)};
}

void Runner::write_final(const filtering::FilterOutputs& filtered, const std::vector<passmatrix::PassMatrix>& matrices,
                         const std::vector<suite::SolutionPool>& pools,
                         const std::vector<reporting::RoundSnapshot>& snapshots, const filtering::Provenance& prov) {
  const auto dir = w("final");
  filtering::write_final_outputs(dir, filtered, prov);
  std::vector<std::string> ids;
  for (const auto& p : filtered.problems) ids.push_back(p.id);
  evolution::save_matrices(dir / "matrices.jsonl", ids, matrices);
  evolution::save_pools(dir / "pools.jsonl", pools);
  Json snaps = Json::array();
  for (const auto& s : snapshots) snaps.push_back(reporting::to_json(s));
  write_json(dir / "snapshots.json", snaps);
  std::size_t kept = 0;
  for (const auto& d : filtered.decisions) kept += d.kept;
  out_ << "final: " << kept << " of " << filtered.decisions.size() << " problems kept\n";
}

Stage Runner::plan(const std::string& name, std::vector<std::string>& errors) {
  Stage s;
  auto require = [&](const std::optional<fs::path>& p, const char* what) {
    if (!p) errors.push_back(std::string(what) + " is required for " + name);
  };
  if (name == "ingest") {
    require(cfg_.corpus, "--input (or paths.corpus)");
    if (cfg_.corpus) s.inputs = {*cfg_.corpus};
    s.outputs = {w("corpus.jsonl"), w("ingest_rejections.jsonl")};
    s.run = [this] {
      std::ifstream in(*cfg_.corpus);
      if (!in) throw IoError("cannot open " + cfg_.corpus->string());
      auto result = corpus::ingest_problems(in);
      corpus::save_corpus(w("corpus.jsonl"), result.corpus);
      std::vector<Json> rejected;
      for (const auto& r : result.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
      write_jsonl(w("ingest_rejections.jsonl"), rejected);
      out_ << "ingest: " << result.corpus.size() << " problems, " << rejected.size() << " rejected\n";
    };
  } else if (name == "dedup") {
    require(cfg_.embeddings, "--embeddings (or paths.embeddings)");
    s.inputs = {w("corpus.jsonl")};
    if (cfg_.embeddings) s.inputs.push_back(*cfg_.embeddings);
    s.outputs = {w("corpus.dedup.jsonl"), w("dedup_report.json")};
    s.run = [this] {
      auto input = corpus::load_corpus(w("corpus.jsonl"));
      auto result = corpus::dedup_corpus(input, corpus::load_embeddings(*cfg_.embeddings),
                                         {cfg_.dedup_threshold, cfg_.seed, cfg_.knn_k, cfg_.problem_workers});
      corpus::save_corpus(w("corpus.dedup.jsonl"), result.corpus);
      write_json(w("dedup_report.json"), corpus::to_json(result.report));
      out_ << "dedup: kept " << result.corpus.size() << " of " << input.size() << " problems\n";
    };
  } else if (name == "refine") {
    const auto input = fs::exists(w("corpus.dedup.jsonl")) ? w("corpus.dedup.jsonl") : w("corpus.jsonl");
    s.inputs = {input};
    s.outputs = {w("problems.refined.jsonl"), w("refine_dropped.jsonl")};
    s.run = [this, input] {
      auto records = corpus::load_corpus(input);
      std::vector<suite::Problem> refined;
      std::vector<Json> dropped;
      for (const auto& r : records.problems()) {
        try {
          refined.push_back(evolution::refine_seed_problem(r, generator(), cfg_.round.min_seed_tests));
        } catch (const genclient::GenerationUnavailable& e) {
          dropped.push_back({{"problem_id", r.id}, {"reason", e.what()}});
        } catch (const genclient::PromptError& e) {
          dropped.push_back({{"problem_id", r.id}, {"reason", e.what()}});
        }
      }
      evolution::save_problems(w("problems.refined.jsonl"), refined);
      write_jsonl(w("refine_dropped.jsonl"), dropped);
      out_ << "refine: " << refined.size() << " refined, " << dropped.size() << " dropped\n";
    };
  } else if (name == "sample") {
    s.inputs = {problems_path()};
    if (cfg_.pools) s.inputs.push_back(*cfg_.pools);
    s.outputs = {w("pools.jsonl"), w("sample_dropped.jsonl")};
    s.run = [this] {
      std::vector<suite::SolutionPool> pools;
      std::vector<Json> dropped;
      for (const auto& p : evolution::load_problems(problems_path())) {
        try {
          pools.push_back(evolution::sample_solutions(p, sampler(), cfg_.sampling));
        } catch (const evolution::SamplingShortfall& e) {
          dropped.push_back({{"problem_id", p.id}, {"reason", e.what()}});
        }
      }
      evolution::save_pools(w("pools.jsonl"), pools);
      write_jsonl(w("sample_dropped.jsonl"), dropped);
      out_ << "sample: " << pools.size() << " pools, " << dropped.size() << " dropped\n";
    };
  } else if (name == "evaluate") {
    s.inputs = {problems_path(), pools_path()};
    s.outputs = {w("evaluation/verdicts.jsonl"), w("evaluation/matrices.jsonl"), w("cache")};
    s.run = [this] {
      auto [problems, pools] = load_aligned();
      std::vector<Json> cells;
      std::vector<passmatrix::PassMatrix> matrices;
      std::vector<std::string> ids;
      execution::ExecuteStats stats;
      for (std::size_t i = 0; i < problems.size(); ++i) {
        const auto tests = suite::active_specs(problems[i]);
        const auto solutions = pools[i].specs();
        auto table = execution::execute_suite(problems[i].id, solutions, tests, cfg_.limits, executor(),
                                              {cfg_.exec_workers, &cache()}, &stats);
        auto rows = table.to_jsonl();
        cells.insert(cells.end(), rows.begin(), rows.end());
        matrices.push_back(table.to_matrix());
        ids.push_back(problems[i].id);
      }
      fs::create_directories(w("evaluation"));
      write_jsonl(w("evaluation/verdicts.jsonl"), cells);
      evolution::save_matrices(w("evaluation/matrices.jsonl"), ids, matrices);
      out_ << "evaluate: " << problems.size() << " problems, " << stats.invocations << " runner invocations, "
           << stats.cache_hits << " cache hits\n";
    };
  } else if (name == "evolve") {
    s.inputs = {problems_path(), pools_path()};
    if (flags_.fake_executor && cfg_.truth_table) s.inputs.push_back(*cfg_.truth_table);
    if (flags_.mock_provider && cfg_.mock_pool) s.inputs.push_back(*cfg_.mock_pool);
    s.outputs = {w("checkpoints"), w("final"), w("audit"), w("cache")};
    s.run = [this] {
      auto [problems, pools] = load_aligned();
      evolution::EvolutionOptions opts;
      opts.limits = cfg_.limits;
      opts.problem_workers = cfg_.problem_workers;
      opts.exec_workers = cfg_.exec_workers;
      opts.cache = &cache();
      opts.checkpoint_dir = w("checkpoints");
      opts.audit_dir = w("audit");
      opts.resume = flags_.resume;
      auto result = evolution::run_evolution(std::move(problems), std::move(pools), cfg_.round, generator(),
                                             executor(), opts);
      for (const auto& snap : result.snapshots) {
        out_ << "round " << snap.round << ": " << snap.n_problems << " problems, avg tests "
             << reporting::format_real(snap.avg_active_tests) << ", pass@1 "
             << reporting::format_real(snap.pass_at.count(1) ? snap.pass_at.at(1) : 0.0) << "\n";
      }
      write_final(result.filtered, result.final_matrices, result.pools, result.snapshots, result.provenance);
    };
  } else if (name == "filter") {
    s.inputs = {w("checkpoints")};
    s.outputs = {w("final")};
    s.run = [this] {
      const auto dir = w("checkpoints");
      auto last = evolution::last_complete_round(dir);
      if (!last) throw IoError("no complete checkpoint under " + dir.string());
      auto cp = evolution::load_checkpoint(dir, *last);
      std::vector<reporting::RoundSnapshot> snapshots;
      for (int r = 0; r <= *last; ++r) snapshots.push_back(evolution::load_checkpoint(dir, r).snapshot);
      auto filtered = filtering::filter_corpus(std::move(cp.problems), cp.matrices, filtering::filter_config(cfg_.round));
      std::vector<passmatrix::PassMatrix> finals;
      for (std::size_t i = 0; i < cp.matrices.size(); ++i) {
        finals.push_back(cp.matrices[i].restrict_tests(filtered.decisions[i].retained_test_ids));
      }
      write_final(filtered, finals, cp.pools, snapshots, {cp.config_hash, cfg_.seed, *last});
    };
  } else if (name == "report") {
    s.inputs = {w("final/snapshots.json"), w("final/matrices.jsonl"), w("final/pools.jsonl"),
                w("final/decisions.jsonl")};
    s.outputs = {w("reports")};
    s.run = [this] {
      std::vector<reporting::RoundSnapshot> snapshots;
      for (const auto& j : read_json(w("final/snapshots.json"))) snapshots.push_back(reporting::snapshot_from_json(j));
      auto matrices = evolution::load_matrices(w("final/matrices.jsonl"));
      auto pools = evolution::load_pools(w("final/pools.jsonl"));
      auto decisions = read_jsonl(w("final/decisions.jsonl"));
      if (matrices.size() != pools.size() || decisions.size() != pools.size()) {
        throw FormatError("final outputs disagree on the number of problems");
      }
      std::vector<passmatrix::PassMatrix> kept_matrices;
      std::vector<suite::SolutionPool> kept_pools;
      for (std::size_t i = 0; i < pools.size(); ++i) {
        if (decisions[i].at("kept").get<bool>()) {
          kept_matrices.push_back(std::move(matrices[i]));
          kept_pools.push_back(std::move(pools[i]));
        }
      }
      reporting::write_reports(w("reports"), snapshots, kept_pools, kept_matrices);
      out_ << reporting::render_table(reporting::difficulty_report(snapshots).table);
    };
  } else {
    errors.push_back("unknown command: " + name);
  }
  return s;
}

void write_manifest(const PipelineConfig& cfg, const std::string& stage, const Stage& s) {
  Json inputs = Json::object();
  for (const auto& p : s.inputs) {
    if (fs::is_regular_file(p)) inputs[p.string()] = sha256_file(p);
  }
  Json outputs = Json::array();
  for (const auto& p : s.outputs) outputs.push_back(p.string());
  const auto dir = cfg.workdir / "manifests";
  fs::create_directories(dir);
  write_json(dir / (stage + ".json"), {{"stage", stage},
                                       {"config_hash", sha256_hex(to_json(cfg).dump())},
                                       {"seed", cfg.seed},
                                       {"inputs", inputs},
                                       {"outputs", outputs}});
}

void add_common_options(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON configuration file");
  sub->add_option("--workdir", f.workdir, "Working directory for stage outputs");
  sub->add_option("--seed", f.seed, "Seed for every randomized step");
  sub->add_flag("--dry-run", f.dry_run, "Print the plan without running anything");
  sub->add_flag("--mock-provider", f.mock_provider, "Use the deterministic offline generator and sampler");
  sub->add_option("--mock-pool", f.mock_pool, "Authored responses for the mock generator");
  sub->add_flag("--fake-executor", f.fake_executor, "Answer executions from a truth table");
  sub->add_option("--truth-table", f.truth_table, "Truth table for --fake-executor");
  sub->add_option("--workers", f.workers, "Problem-level worker cap");
}

} // namespace

int dispatch(const std::vector<std::string>& args, const CliEnvironment& env) {
  std::ostream& out = env.out ? *env.out : std::cout;
  std::ostream& err = env.err ? *env.err : std::cerr;

  Flags f;
  CLI::App app{"Builds and hardens verification suites for programming problems", "suitegen"};
  app.require_subcommand(1, 1);
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"ingest", "Read seed problems into the working corpus"},
      {"dedup", "Remove near-duplicate problems by embedding similarity"},
      {"refine", "Rewrite seed problems and generate seed tests"},
      {"sample", "Sample candidate solution pools"},
      {"evaluate", "Execute every pool solution on every active test"},
      {"evolve", "Run adversarial and discriminative refinement rounds"},
      {"filter", "Apply final filtering to the last checkpoint"},
      {"report", "Write round, difficulty, per-model, and retention reports"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common_options(sub, f);
    subs[c.name] = sub;
  }
  subs["ingest"]->add_option("--input", f.input, "Seed problems, one JSON object per line");
  subs["dedup"]->add_option("--embeddings", f.embeddings, "Embeddings, one {id, vector} per line");
  subs["dedup"]->add_option("--threshold", f.threshold, "Cosine similarity above which problems are duplicates");
  for (const char* name : {"sample", "evaluate", "evolve"}) {
    subs[name]->add_option("--problems", f.problems, "Refined problems file");
    subs[name]->add_option("--pools", f.pools, "Solution pools file");
  }
  subs["evolve"]->add_option("--rounds", f.rounds, "Number of refinement rounds");
  subs["evolve"]->add_flag("--resume", f.resume, "Continue from the last complete round checkpoint");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  std::vector<std::string> errors;
  PipelineConfig cfg;
  if (!f.config.empty()) {
    try {
      cfg = config_from_json(read_json(f.config), errors);
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }
  if (!f.workdir.empty()) cfg.workdir = f.workdir;
  if (!f.input.empty()) cfg.corpus = f.input;
  if (!f.embeddings.empty()) cfg.embeddings = f.embeddings;
  if (!f.problems.empty()) cfg.problems = f.problems;
  if (!f.pools.empty()) cfg.pools = f.pools;
  if (!f.truth_table.empty()) cfg.truth_table = f.truth_table;
  if (!f.mock_pool.empty()) cfg.mock_pool = f.mock_pool;
  if (f.threshold) cfg.dedup_threshold = *f.threshold;
  if (f.seed) cfg.seed = *f.seed;
  if (f.rounds) cfg.round.rounds = *f.rounds;
  if (f.workers) cfg.problem_workers = *f.workers;
  cfg.round.seed = cfg.seed;

  if (errors.empty()) {
    auto more = cfg.problems_found();
    errors.insert(errors.end(), more.begin(), more.end());
  }
  Runner runner(cfg, f, env, out);
  Stage plan;
  if (errors.empty()) plan = runner.plan(stage, errors);
  if (!errors.empty()) {
    err << "configuration errors:\n";
    for (const auto& e : errors) err << "  - " << e << "\n";
    return kExitUsage;
  }

  if (f.dry_run) {
    out << "plan: " << stage << "\n";
    for (const auto& p : plan.inputs) out << "  input  " << p.string() << "\n";
    for (const auto& p : plan.outputs) out << "  output " << p.string() << "\n";
    return kExitOk;
  }
  try {
    fs::create_directories(cfg.workdir);
    plan.run();
    write_manifest(cfg, stage, plan);
  } catch (const std::exception& e) {
    err << stage << " failed: " << e.what() << "\n";
    return kExitStageFailure;
  }
  return kExitOk;
}

} // namespace suitegen::cli
