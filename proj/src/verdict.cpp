#include "suitegen/verdict.hpp"

#include "suitegen/error.hpp"

namespace suitegen {

std::string_view to_string(VerdictStatus s) {
  switch (s) {
  case VerdictStatus::pass: return "pass";
  case VerdictStatus::fail: return "fail";
  case VerdictStatus::error: return "error";
  case VerdictStatus::timeout: return "timeout";
  case VerdictStatus::crash: return "crash";
  }
  return "crash";
}

VerdictStatus parse_status(std::string_view token) {
  if (token == "pass") return VerdictStatus::pass;
  if (token == "fail") return VerdictStatus::fail;
  if (token == "error") return VerdictStatus::error;
  if (token == "timeout") return VerdictStatus::timeout;
  if (token == "crash") return VerdictStatus::crash;
  throw FormatError("unknown verdict status token: \"" + std::string(token) + "\"");
}

Json to_json(const Verdict& v) {
  Json j = {{"status", to_string(v.status)}, {"time_ms", v.time_ms}};
  if (v.detail) {
    j["detail"] = *v.detail;
  }
  return j;
}

Verdict verdict_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) {
    throw FormatError("verdict: missing status");
  }
  Verdict v;
  v.status = parse_status(j["status"].get<std::string>());
  if (j.contains("time_ms") && j["time_ms"].is_number()) {
    v.time_ms = std::max<std::int64_t>(0, j["time_ms"].get<std::int64_t>());
  }
  if (j.contains("detail") && j["detail"].is_string()) {
    v.detail = j["detail"].get<std::string>();
  }
  return v;
}

} // namespace suitegen
