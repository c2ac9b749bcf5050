#include "suitegen/genclient.hpp"

#include <cctype>

namespace suitegen::genclient {

std::string_view to_string(ParseFailure f) {
  switch (f) {
  case ParseFailure::no_json: return "no_json";
  case ParseFailure::wrong_schema: return "wrong_schema";
  case ParseFailure::empty_tests: return "empty_tests";
  case ParseFailure::no_valid_tests: return "no_valid_tests";
  case ParseFailure::too_few_tests: return "too_few_tests";
  }
  return "";
}

std::optional<Json> extract_first_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (c == '\\') {
          ++i;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        end = i;
        break;
      }
    }
    if (end == std::string_view::npos) {
      continue;
    }
    auto parsed = Json::parse(text.substr(start, end - start + 1), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) {
      return parsed;
    }
  }
  return std::nullopt;
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool starts_with_word(std::string_view s, std::string_view word) {
  return s.substr(0, word.size()) == word && (s.size() == word.size() || !is_word_char(s[word.size()]));
}

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_compound_header(std::string_view stmt) {
  for (std::string_view kw : {"for", "while", "if", "with", "def", "try", "class", "async"}) {
    if (starts_with_word(stmt, kw)) return true;
  }
  return false;
}

bool is_clause_continuation(std::string_view stmt) {
  for (std::string_view kw : {"elif", "else", "except", "finally"}) {
    if (starts_with_word(stmt, kw)) return true;
  }
  return false;
}

struct RawStatement {
  std::string text;
  bool indented = false;
};

// Visits code characters outside string literals and comments. `on_code`
// receives (index, char, bracket depth before the char).
template <class F>
void scan_python(std::string_view src, F&& on_code) {
  int depth = 0;
  char quote = 0;
  bool triple = false;
  bool comment = false;
  for (std::size_t i = 0; i < src.size(); ++i) {
    char c = src[i];
    if (comment) {
      if (c == '\n') {
        comment = false;
        on_code(i, c, depth);
      }
      continue;
    }
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        if (!triple) {
          quote = 0;
        } else if (i + 2 < src.size() && src[i + 1] == quote && src[i + 2] == quote) {
          i += 2;
          quote = 0;
        }
      } else if (c == '\n' && !triple) {
        quote = 0; // unterminated literal; resync at end of line
        on_code(i, c, depth);
      }
      continue;
    }
    if (c == '#') {
      comment = true;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      triple = i + 2 < src.size() && src[i + 1] == c && src[i + 2] == c;
      if (triple) {
        i += 2;
      }
      continue;
    }
    on_code(i, c, depth);
    if (c == '(' || c == '[' || c == '{') {
      ++depth;
    } else if ((c == ')' || c == ']' || c == '}') && depth > 0) {
      --depth;
    }
  }
}

std::vector<RawStatement> split_statements(std::string_view src) {
  std::vector<RawStatement> out;
  std::size_t start = 0;
  auto indented_at = [&](std::size_t pos) {
    return pos < src.size() && (src[pos] == ' ' || src[pos] == '\t');
  };
  bool line_indented = indented_at(0);
  auto flush = [&](std::size_t end) {
    auto piece = trim(src.substr(start, end - start));
    if (!piece.empty()) {
      out.push_back({std::string(piece), line_indented});
    }
    start = end + 1;
  };
  scan_python(src, [&](std::size_t i, char c, int depth) {
    if (depth != 0) {
      return;
    }
    if (c == '\n') {
      if (i > 0 && src[i - 1] == '\\') {
        return;
      }
      flush(i);
      line_indented = indented_at(i + 1);
    } else if (c == ';') {
      auto current = trim(src.substr(start, i - start));
      if (!line_indented && !is_compound_header(current)) {
        flush(i);
      }
    }
  });
  flush(src.size());
  return out;
}

} // namespace

bool contains_assert(std::string_view code) {
  bool found = false;
  scan_python(code, [&](std::size_t i, char, int) {
    if (found || code.compare(i, 6, "assert") != 0) {
      return;
    }
    bool left_ok = i == 0 || !is_word_char(code[i - 1]);
    bool right_ok = i + 6 >= code.size() || !is_word_char(code[i + 6]);
    found = left_ok && right_ok;
  });
  return found;
}

std::string normalize_whitespace(std::string_view code) {
  std::string out;
  bool pending_space = false;
  for (char c : code) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_asserts(std::string_view entry) {
  // Merge indented bodies and else/except clauses into their statement.
  std::vector<std::string> merged;
  for (auto& raw : split_statements(entry)) {
    if (!merged.empty() && (raw.indented || is_clause_continuation(raw.text))) {
      merged.back() += "\n" + (raw.indented ? std::string("    ") : std::string()) + raw.text;
    } else {
      merged.push_back(std::move(raw.text));
    }
  }
  std::vector<std::string> tests;
  std::string setup;
  for (const auto& stmt : merged) {
    bool closes = starts_with_word(stmt, "assert") || (is_compound_header(stmt) && contains_assert(stmt));
    if (!closes) {
      setup += stmt + "\n";
      continue;
    }
    tests.push_back(setup + stmt);
    setup.clear();
  }
  return tests;
}

GenerationResult parse_generation(std::string_view raw, bool expects_question) {
  auto obj = extract_first_json_object(raw);
  if (!obj) {
    throw GenerationParseError(ParseFailure::no_json, "no JSON object found in response");
  }
  if (!obj->contains("tests") || !(*obj)["tests"].is_array()) {
    throw GenerationParseError(ParseFailure::wrong_schema, "response lacks a \"tests\" array");
  }
  GenerationResult result;
  result.raw = std::string(raw);
  if (expects_question) {
    const auto& q = obj->value("question", Json());
    if (!q.is_string() || trim(q.get<std::string>()).empty()) {
      throw GenerationParseError(ParseFailure::wrong_schema, "response lacks a \"question\" string");
    }
    result.question = std::string(trim(q.get<std::string>()));
  }
  const auto& tests = (*obj)["tests"];
  if (tests.empty()) {
    throw GenerationParseError(ParseFailure::empty_tests, "response has an empty \"tests\" array");
  }
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (!tests[i].is_string()) {
      throw GenerationParseError(ParseFailure::wrong_schema, "\"tests\" entries must be strings");
    }
    for (auto& code : split_asserts(tests[i].get<std::string>())) {
      result.tests.push_back({std::move(code), i});
    }
  }
  if (result.tests.empty()) {
    throw GenerationParseError(ParseFailure::no_valid_tests, "no entry contains an assert statement");
  }
  return result;
}

} // namespace suitegen::genclient
