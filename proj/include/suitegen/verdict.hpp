#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "suitegen/jsonl.hpp"

namespace suitegen {

enum class VerdictStatus { pass, fail, error, timeout, crash };

std::string_view to_string(VerdictStatus s);
/// Throws FormatError on anything but the five lowercase tokens.
VerdictStatus parse_status(std::string_view token);

struct Verdict {
  VerdictStatus status = VerdictStatus::crash;
  std::int64_t time_ms = 0;
  std::optional<std::string> detail;

  bool passed() const { return status == VerdictStatus::pass; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

Json to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);

} // namespace suitegen
