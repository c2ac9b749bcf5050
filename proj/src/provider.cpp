#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "suitegen/genclient.hpp"

namespace suitegen::genclient {

ProviderConfig provider_config_from_json(const Json& j) {
  ProviderConfig c;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.temperature = j.value("temperature", c.temperature);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.auth_env = j.value("auth_env", c.auth_env);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  return c;
}

Json to_json(const ProviderConfig& c) {
  return {{"endpoint", c.endpoint},     {"model", c.model},       {"temperature", c.temperature},
          {"max_tokens", c.max_tokens}, {"auth_env", c.auth_env}, {"timeout_s", c.timeout_s}};
}

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty() || config_.model.empty()) {
    throw InvalidArgument("provider: endpoint and model are required");
  }
}

std::string HttpProvider::complete(const std::string& prompt) {
  // Split "scheme://host[:port]/path" into the client base and request path.
  const auto scheme_end = config_.endpoint.find("://");
  const auto path_begin = config_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = config_.endpoint.substr(0, path_begin);
  const std::string path = path_begin == std::string::npos ? "/" : config_.endpoint.substr(path_begin);

  httplib::Client client(base);
  client.set_read_timeout(config_.timeout_s, 0);
  client.set_write_timeout(config_.timeout_s, 0);
  httplib::Headers headers;
  if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  Json body = {{"model", config_.model},
               {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", config_.temperature},
               {"max_tokens", config_.max_tokens}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("provider request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("provider returned HTTP " + std::to_string(res->status));
  }
  auto doc = Json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) {
    throw TransportError("provider returned non-JSON body");
  }
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception&) {
    throw TransportError("provider response lacks choices[0].message.content");
  }
}

void RetryPolicy::pause(int attempt) const {
  auto delay = initial_backoff;
  for (int i = 1; i < attempt; ++i) {
    delay = std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(delay.count()) * multiplier));
  }
  if (sleep) {
    sleep(delay);
  } else {
    std::this_thread::sleep_for(delay);
  }
}

std::string generate(Provider& provider, const std::string& prompt, const RetryPolicy& policy,
                     std::vector<AttemptRecord>* log) {
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    try {
      auto text = provider.complete(prompt);
      if (log) log->push_back({attempt, "ok", {}});
      return text;
    } catch (const TransportError& e) {
      spdlog::warn("generation attempt {}/{} failed: {}", attempt, policy.max_attempts, e.what());
      if (log) log->push_back({attempt, "transport", e.what()});
      if (attempt < policy.max_attempts) policy.pause(attempt);
    }
  }
  throw GenerationUnavailable("provider " + provider.identity() + ": retries exhausted");
}

ProviderGenerator::ProviderGenerator(Provider& provider, RetryPolicy policy, std::size_t min_seed_tests,
                                     std::optional<std::filesystem::path> audit_dir)
    : provider_(provider), policy_(std::move(policy)), min_seed_tests_(min_seed_tests),
      audit_dir_(std::move(audit_dir)) {}

GenerationResult ProviderGenerator::produce(const PromptContext& ctx, std::vector<AttemptRecord>* log) {
  ++calls_;
  const std::string prompt = render_prompt(ctx);
  const bool seed = expects_question(ctx.kind);
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    std::string raw;
    try {
      raw = provider_.complete(prompt);
      auto result = parse_generation(raw, seed);
      if (seed && result.tests.size() < min_seed_tests_) {
        throw GenerationParseError(ParseFailure::too_few_tests,
                                   "only " + std::to_string(result.tests.size()) + " tests, need " +
                                       std::to_string(min_seed_tests_));
      }
      result.provider = provider_.identity();
      if (log) log->push_back({attempt, "ok", {}});
      if (audit_dir_) {
        write_json(*audit_dir_ / ("gen_" + std::to_string(++audit_seq_) + ".json"),
                   {{"problem_id", ctx.problem_id}, {"template", to_string(ctx.kind)}, {"round", ctx.round},
                    {"attempt", attempt}, {"prompt", prompt}, {"response", raw}});
      }
      return result;
    } catch (const TransportError& e) {
      if (log) log->push_back({attempt, "transport", e.what()});
    } catch (const GenerationParseError& e) {
      if (log) log->push_back({attempt, std::string(to_string(e.category())), e.what()});
      if (audit_dir_) {
        write_json(*audit_dir_ / ("gen_" + std::to_string(++audit_seq_) + ".json"),
                   {{"problem_id", ctx.problem_id}, {"template", to_string(ctx.kind)}, {"round", ctx.round},
                    {"attempt", attempt}, {"prompt", prompt}, {"response", raw}, {"error", e.what()}});
      }
    }
    if (attempt < policy_.max_attempts) policy_.pause(attempt);
  }
  throw GenerationUnavailable("generation for " + ctx.problem_id + " (" + std::string(to_string(ctx.kind)) +
                              "): retries exhausted");
}

} // namespace suitegen::genclient
