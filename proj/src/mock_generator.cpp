#include <algorithm>

#include "suitegen/genclient.hpp"
#include "suitegen/hashing.hpp"
#include "suitegen/random.hpp"

namespace suitegen::genclient {

MockPool MockPool::from_json(const Json& j) {
  MockPool pool;
  if (!j.is_object() || !j.contains("problems") || !j["problems"].is_object()) {
    throw FormatError("mock pool: expected {\"problems\": {...}}");
  }
  for (const auto& [pid, e] : j["problems"].items()) {
    Entry entry;
    if (e.contains("seed_refine")) {
      const auto& s = e["seed_refine"];
      if (s.contains("question")) entry.question = s["question"].get<std::string>();
      entry.seed_tests = s.value("tests", std::vector<std::string>{});
    }
    entry.adversarial = e.value("adversarial", std::vector<std::vector<std::string>>{});
    entry.discriminative = e.value("discriminative", std::vector<std::vector<std::string>>{});
    entry.unavailable = e.value("unavailable", std::vector<std::string>{});
    pool.problems.emplace(pid, std::move(entry));
  }
  return pool;
}

MockPool MockPool::load(const std::filesystem::path& path) { return from_json(read_json(path)); }

namespace {

std::vector<std::string> synthetic_tests(Rng& rng, std::size_t count) {
  std::vector<std::string> tests;
  for (std::size_t i = 0; i < count; ++i) {
    auto a = uniform_index(rng, 1000);
    auto b = uniform_index(rng, 1000);
    tests.push_back("assert solve(" + std::to_string(a) + ", " + std::to_string(b) +
                    ") == " + std::to_string(uniform_index(rng, 2000)));
  }
  return tests;
}

} // namespace

GenerationResult mock_generate(std::uint64_t seed, const PromptContext& ctx, const MockPool* pool) {
  const std::string key = std::to_string(seed) + "|" + ctx.problem_id + "|" +
                          std::string(to_string(ctx.kind)) + "|" + std::to_string(ctx.round);
  Rng rng(stable_hash64(key));

  const MockPool::Entry* entry = nullptr;
  if (pool) {
    if (auto it = pool->problems.find(ctx.problem_id); it != pool->problems.end()) {
      entry = &it->second;
    }
  }

  GenerationResult result;
  result.provider = "mock/" + std::to_string(seed);
  std::vector<std::string> tests;
  if (expects_question(ctx.kind)) {
    result.question = entry && entry->question ? *entry->question : "[refined] " + ctx.question;
    tests = entry && !entry->seed_tests.empty() ? entry->seed_tests : synthetic_tests(rng, 20);
  } else {
    const auto& batches = !entry ? std::vector<std::vector<std::string>>{}
                          : ctx.kind == Template::adversarial ? entry->adversarial
                                                              : entry->discriminative;
    const auto slot = static_cast<std::size_t>(std::max(ctx.round, 1) - 1);
    tests = slot < batches.size() ? batches[slot] : synthetic_tests(rng, 20);
  }
  stable_shuffle(rng, std::span<std::string>(tests));
  for (std::size_t i = 0; i < tests.size(); ++i) {
    result.tests.push_back({tests[i], i});
  }
  return result;
}

GenerationResult MockGenerator::produce(const PromptContext& ctx, std::vector<AttemptRecord>* log) {
  ++calls_;
  validate(ctx);
  if (pool_) {
    if (auto it = pool_->problems.find(ctx.problem_id); it != pool_->problems.end()) {
      const auto& off = it->second.unavailable;
      if (std::find(off.begin(), off.end(), std::string(to_string(ctx.kind))) != off.end()) {
        if (log) log->push_back({1, "transport", "mock provider marked unavailable"});
        throw GenerationUnavailable("mock: generation unavailable for " + ctx.problem_id);
      }
    }
  }
  auto generated = mock_generate(seed_, ctx, pool_ ? &*pool_ : nullptr);
  // Round-trip through the wire format so the mock exercises the real parser.
  Json doc = Json::object();
  if (generated.question) {
    doc["question"] = *generated.question;
  }
  Json tests = Json::array();
  for (const auto& t : generated.tests) {
    tests.push_back(t.code);
  }
  doc["tests"] = tests;
  auto result = parse_generation(doc.dump(), expects_question(ctx.kind));
  result.provider = identity();
  if (log) log->push_back({1, "ok", {}});
  return result;
}

} // namespace suitegen::genclient
