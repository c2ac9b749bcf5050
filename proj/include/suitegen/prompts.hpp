#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "suitegen/error.hpp"

namespace suitegen::genclient {

enum class Template { seed_refine, seed_refine_no_program, adversarial, discriminative };

std::string_view to_string(Template t);
/// The JSON-producing mode a template expects: only seed refinement yields a question.
inline bool expects_question(Template t) {
  return t == Template::seed_refine || t == Template::seed_refine_no_program;
}

struct PromptContext {
  Template kind = Template::adversarial;
  std::string question;              // original statement for seed templates
  std::vector<std::string> programs; // reference program, or exactly 5 for test generation
  std::vector<std::string> tests;
  /// Pass/fail per program (rows) and test (columns).
  std::vector<std::vector<bool>> eval;

  // Routing metadata; never rendered.
  std::string problem_id;
  int round = 0;
};

class PromptError : public Error {
public:
  using Error::Error;
};

/// Throws PromptError naming the first missing or malformed slot.
void validate(const PromptContext& ctx);

/// Rows "Program i", columns t1..tm, cells P/F.
std::string render_eval_grid(const std::vector<std::vector<bool>>& eval);

/// Deterministic template rendering with slot substitution.
std::string render_prompt(const PromptContext& ctx);

} // namespace suitegen::genclient
