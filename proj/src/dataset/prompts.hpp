#pragma once

#include <map>
#include <string>
#include <string_view>

namespace comira {

enum class PromptTemplate { visualizability, caption, accessory_image };

const char* prompt_template_name(PromptTemplate id) noexcept;
PromptTemplate parse_prompt_template(const std::string& name);

// Shipped template text; placeholders are {name}.
std::string_view prompt_template(PromptTemplate id) noexcept;

using PromptSlots = std::map<std::string, std::string, std::less<>>;

// Replaces every {identifier} with its slot value. Braces not enclosing an
// identifier are copied through. Errc::invalid_argument on a missing slot.
std::string render_template(std::string_view text, const PromptSlots& slots);
std::string render_prompt(PromptTemplate id, const PromptSlots& slots);

enum class LlmAnswer { yes, no, unparseable };

const char* llm_answer_name(LlmAnswer a) noexcept;

// Reads the token after the last "The answer is" (any case), punctuation
// stripped.
LlmAnswer parse_llm_answer(std::string_view response);

}  // namespace comira
