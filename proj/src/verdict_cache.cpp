#include <filesystem>
#include <fstream>
#include <system_error>
#include <thread>

#include <spdlog/spdlog.h>

#include "suitegen/execution.hpp"
#include "suitegen/hashing.hpp"

namespace suitegen::execution {

VerdictCache::VerdictCache(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(*directory_);
}

std::string VerdictCache::make_key(std::string_view solution, std::string_view test,
                                   const ExecutionLimits& limits, std::string_view runner) {
  Json material = Json::array({solution, test, limits.time_limit_ms, limits.memory_limit_mb, runner});
  return sha256_hex(material.dump());
}

std::size_t VerdictCache::size() const {
  std::shared_lock lock(mutex_);
  return memory_.size();
}

std::optional<Verdict> VerdictCache::lookup(const std::string& key) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = memory_.find(key); it != memory_.end()) {
      ++hits_;
      return it->second;
    }
  }
  if (directory_) {
    const auto file = *directory_ / (key + ".json");
    std::error_code ec;
    if (std::filesystem::exists(file, ec)) {
      try {
        Json doc = read_json(file);
        if (doc.value("key", std::string()) != key) {
          throw FormatError("key mismatch");
        }
        Verdict v = verdict_from_json(doc.at("verdict"));
        std::unique_lock lock(mutex_);
        memory_.insert_or_assign(key, v);
        ++hits_;
        return v;
      } catch (const std::exception& e) {
        spdlog::warn("verdict cache: evicting corrupt entry {} ({})", file.string(), e.what());
        std::filesystem::remove(file, ec);
        ++evictions_;
      }
    }
  }
  ++misses_;
  return std::nullopt;
}

void VerdictCache::store(const std::string& key, const Verdict& verdict) {
  {
    std::unique_lock lock(mutex_);
    memory_.insert_or_assign(key, verdict);
  }
  if (directory_) {
    Json doc = {{"key", key}, {"verdict", to_json(verdict)}};
    // Unique temp name per writer; rename makes the last writer win atomically.
    const auto file = *directory_ / (key + ".json");
    auto tmp = file;
    tmp += "." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << doc.dump();
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file, ec);
    if (ec) {
      spdlog::warn("verdict cache: cannot persist {}: {}", file.string(), ec.message());
      std::filesystem::remove(tmp, ec);
    }
  }
}

} // namespace suitegen::execution
