#include "suitegen/prompts.hpp"

#include <map>
#include <stdexcept>

namespace suitegen::genclient {
namespace {

constexpr const char* kSeedRefine = R"(Task: Transform a code snippet into a very challenging LeetCode-style question intended for advanced CS university students and experienced software engineers.

Role / Prompt:
You are the latest and best bot aimed at transforming some code snippet into a very challenging LeetCode-style question intended for advanced CS university students and experienced software engineers.

You will be given:
1. Original question/prompt for writing code
2. Reference program that attempts to answer the question

Primary objectives (what to create):
1. Create a LeetCode-style question that meets the requirements below
2. Generate 20 independent test cases using assert statements

Question requirements (must follow):
1. Difficulty level:
   The question must be hard or very hard difficulty level (similar to the hardest LeetCode problems).
   Challenging enough that solving it takes 30-60 minutes for experts.
2. Algorithmic requirements:
   The question should require advanced algorithmic thinking, such as:
   -> Graph theory with dynamic programming.
   -> Advanced string processing (suffix arrays, KMP, etc.).
   -> Complex greedy + data structure combinations.
   -> Sliding windows with optimization, interval DP, or segment trees.
3. Format requirements:
   Must contain a function signature, rather than stdin/stdout style.
   Must be self-contained (no external resources or data).
   Avoid machine learning, OS-level concepts, or anything requiring system calls or file I/O.
   Do NOT request time/space complexity analysis or ask for test cases in the question text.
4. Adaptation policy:
   You can take inspiration from the reference code snippet, but you may discard parts of it if necessary to make the question cleaner and harder.

Test case requirements:
1. Generate 20 independent test cases using assert statements.
2. Each test case must:
   -> Use constant values (no randomness or external resource calls).
   -> Be independent of other test cases.
   -> Include both input parameters and expected output.

Output format (JSON ONLY):
Return a JSON object with the following keys ONLY.
Do not output any text outside JSON.

{
  "question": "...",
  "tests": ["assert ...", "assert ..."]
}

Inputs:
Original Question:
{{instruction}}
Reference Program:
```python
{{program}}
```
)";

constexpr const char* kSeedRefineNoProgram = R"(Task: Transform a code snippet into a very challenging LeetCode-style question intended for advanced CS university students and experienced software engineers.

Role / Prompt:
You are the latest and best bot aimed at transforming some code snippet into a very challenging LeetCode-style question intended for advanced CS university students and experienced software engineers. You will be provided with a prompt for writing code.

Primary objectives:
1. Create a LeetCode-style question that meets these requirements:
   The question must be hard or very hard difficulty level (similar to the hardest LeetCode problems).
   The question should require advanced algorithmic thinking, such as:
   - Graph theory with dynamic programming.
   - Advanced string processing (suffix arrays, KMP, etc.).
   - Complex greedy + data structure combinations.
   - Sliding windows with optimization, interval DP, or segment trees.
   The question must:
   - Contain a function signature, rather than stdin/stdout style.
   - Be self-contained (no external resources or data).
   - Be challenging enough that solving it takes 30-60 minutes for experts.
   - Avoid machine learning, OS-level concepts, or anything requiring system calls or file I/O.
   Do NOT request time/space complexity analysis or ask for test cases in the question text.
   You can take inspiration from the reference code snippet, but you may discard parts of it if necessary to make the question cleaner and harder.
2. Based on the question you create:
   Generate 20 independent test cases using assert statements.
   Each test case must:
   - Use constant values (no randomness or external resource calls).
   - Be independent of other test cases.
   - Include both input parameters and expected output.

Output format (JSON ONLY):
Return a JSON object with the following keys ONLY.
question: The LeetCode-style question text (string).
tests: Array of assert statements (list of strings).
Do not output any text outside JSON.

{
  "question": "...",
  "tests": ["assert ...", "assert ..."]
}

Inputs:
Original Question:
{{instruction}}
)";

constexpr const char* kAdversarial = R"(Task: Generate adversarial and diverse test cases that reveal subtle weaknesses in high-performing programs. Create 20 new assert-based test cases that significantly upgrade the current test suite.

Role / Prompt:
You are an advanced AI system specialized in generating adversarial and diverse test cases that reveal subtle weaknesses in high-performing programs. You will receive a coding problem, five different programs solving it, existing test cases, and their evaluation results.

You will be given:
1. Coding problem description (question)
2. Five different programs solving the problem (Python code)
3. Existing test cases
4. Evaluation results (rows = programs, columns = tests)

Primary objectives (what to achieve):
Create 20 new test cases that satisfy these requirements:
1. Focus on challenging high-pass-rate programs
2. Design cases likely to make at least one top-performing solution fail
3. Include diverse input patterns that challenge different dimensions of the problem space
4. Avoid repetition of existing test cases or trivial variations
5. Ensure all test cases are correct according to the problem definition
6. Make test cases independent of other test cases
7. Use constant values (no randomness or external resource calls)
8. Include both input parameters and expected output

Hard constraints (must follow):
1. Correctness requirement:
   All test cases must be correct according to the problem definition.
   Do NOT create test cases based on any specific program's behavior.
2. Diversity requirement:
   Test cases must cover diverse input patterns across different dimensions of the problem space.
   Avoid duplicating existing test cases or creating trivial variations.
3. Adversarial targeting:
   Prioritize challenging high-pass-rate programs.
   Design cases likely to expose weaknesses in at least one top-performing solution.
4. Test independence:
   Each test case must be independent of other test cases.
   Use constant values only (no randomness or external resource calls).
5. Format requirement:
   All test cases must be in assert-based format.
   Include both input parameters and expected output in each test case.

Output format (JSON ONLY):
Return a JSON object with the following structure:
The output must be a JSON object with a single key tests.
The value must be an array of strings, where each string is an assert statement.
Do not output any text outside JSON.

{
  "tests": [
    "assert ...",
    "assert ...",
    ...
  ]
}

Inputs:
Question:

{{question}}
Programs (5 Python programs):
{{program1}}

{{program2}}

{{program3}}

{{program4}}

{{program5}}

Existing tests:

{{tests}}
Evaluation results (rows = programs, columns = tests):

{{eval_tests}}
)";

constexpr const char* kDiscriminative = R"(Task: Generate differentiating test cases that expose logical and behavioral differences between similar programs.

Role / Prompt:
You are an advanced AI system specialized in generating differentiating test cases that expose logical and behavioral differences between similar programs. You will receive a coding problem, five programs that currently produce mostly similar evaluation results, existing test cases, and their evaluation results.

Your task:
Create 20 new assert-based test cases that maximize discrimination power among these programs.

Requirements:
1. Differentiation requirement:
   Each test case must clearly differentiate among programs that share similar evaluation results.
   At least one program must fail in each test case.
   At least one program must pass in each test case.
   Test cases should expose different failure modes across the programs.
2. Correctness and independence:
   All test cases must be correct according to the problem definition, not based on any specific program.
   Use constant values (no randomness or external resource calls).
   Each test case must be independent of other test cases.
   Include both input parameters and expected output.

Output format (JSON ONLY):
Return a JSON object with the following structure:
Do not output any text outside JSON.

{
  "tests": [
    "assert ...",
    "assert ..."
  ]
}

Inputs:
Question:

{{question}}
Programs (5 Python programs):
{{program1}}

{{program2}}

{{program3}}

{{program4}}

{{program5}}

Existing tests:

{{tests}}
Evaluation results (rows = programs, columns = tests):

{{eval_tests}}

)";

// Single pass over the template: substituted text is never rescanned.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    auto close = tmpl.find("}}", open + 2);
    out.append(tmpl.substr(pos, open - pos));
    auto name = std::string(tmpl.substr(open + 2, close - open - 2));
    out.append(slots.at(name));
    pos = close + 2;
  }
  return out;
}

std::string render_program(std::size_t index, const std::string& program) {
  return "Program " + std::to_string(index + 1) + ":\n```python\n" + program + "\n```";
}

std::string render_tests(const std::vector<std::string>& tests) {
  std::string out;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    out += "t" + std::to_string(i + 1) + ": " + tests[i] + "\n";
  }
  return out;
}

} // namespace

std::string_view to_string(Template t) {
  switch (t) {
  case Template::seed_refine: return "seed_refine";
  case Template::seed_refine_no_program: return "seed_refine_no_program";
  case Template::adversarial: return "adversarial";
  case Template::discriminative: return "discriminative";
  }
  return "";
}

void validate(const PromptContext& ctx) {
  if (ctx.question.empty()) {
    throw PromptError(expects_question(ctx.kind) ? "missing slot: instruction" : "missing slot: question");
  }
  switch (ctx.kind) {
  case Template::seed_refine:
    if (ctx.programs.size() != 1 || ctx.programs.front().empty()) {
      throw PromptError("missing slot: program");
    }
    return;
  case Template::seed_refine_no_program:
    return;
  case Template::adversarial:
  case Template::discriminative:
    if (ctx.programs.size() != 5) {
      throw PromptError("missing slot: program" + std::to_string(ctx.programs.size() + 1) +
                        " (exactly 5 programs required, got " + std::to_string(ctx.programs.size()) + ")");
    }
    if (ctx.tests.empty()) {
      throw PromptError("missing slot: tests");
    }
    if (ctx.eval.size() != ctx.programs.size()) {
      throw PromptError("missing slot: eval_tests (one row per program required)");
    }
    for (const auto& row : ctx.eval) {
      if (row.size() != ctx.tests.size()) {
        throw PromptError("missing slot: eval_tests (one column per test required)");
      }
    }
    return;
  }
}

std::string render_eval_grid(const std::vector<std::vector<bool>>& eval) {
  if (eval.empty()) {
    return {};
  }
  const std::size_t cols = eval.front().size();
  std::string label_pad(std::string("Program ").size() + std::to_string(eval.size()).size(), ' ');
  std::vector<std::string> headers;
  std::size_t width = 1;
  for (std::size_t c = 0; c < cols; ++c) {
    headers.push_back("t" + std::to_string(c + 1));
    width = std::max(width, headers.back().size());
  }
  auto cell = [&](const std::string& s) { return s + std::string(width - s.size() + 1, ' '); };
  std::string out = label_pad + " ";
  for (const auto& h : headers) {
    out += cell(h);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  out += "\n";
  for (std::size_t r = 0; r < eval.size(); ++r) {
    std::string label = "Program " + std::to_string(r + 1);
    std::string line = label + std::string(label_pad.size() - label.size(), ' ') + " ";
    for (std::size_t c = 0; c < cols; ++c) {
      line += cell(eval[r][c] ? "P" : "F");
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string render_prompt(const PromptContext& ctx) {
  validate(ctx);
  std::map<std::string, std::string> slots;
  switch (ctx.kind) {
  case Template::seed_refine:
    slots["instruction"] = ctx.question;
    slots["program"] = ctx.programs.front();
    return substitute(kSeedRefine, slots);
  case Template::seed_refine_no_program:
    slots["instruction"] = ctx.question;
    return substitute(kSeedRefineNoProgram, slots);
  case Template::adversarial:
  case Template::discriminative:
    slots["question"] = ctx.question;
    for (std::size_t i = 0; i < 5; ++i) {
      slots["program" + std::to_string(i + 1)] = render_program(i, ctx.programs[i]);
    }
    slots["tests"] = render_tests(ctx.tests);
    slots["eval_tests"] = render_eval_grid(ctx.eval);
    return substitute(ctx.kind == Template::adversarial ? kAdversarial : kDiscriminative, slots);
  }
  throw PromptError("unknown template");
}

} // namespace suitegen::genclient
