#include "dataset/prompts.hpp"

#include <cctype>

#include "common/error.hpp"
#include "common/text.hpp"

namespace comira {

const char* prompt_template_name(PromptTemplate id) noexcept {
  switch (id) {
    case PromptTemplate::visualizability: return "visualizability";
    case PromptTemplate::caption: return "caption";
    case PromptTemplate::accessory_image: return "accessory_image";
  }
  return "caption";
}

PromptTemplate parse_prompt_template(const std::string& name) {
  if (name == "visualizability") return PromptTemplate::visualizability;
  if (name == "caption") return PromptTemplate::caption;
  if (name == "accessory_image" || name == "accessory-image") return PromptTemplate::accessory_image;
  throw Error(Errc::invalid_argument, "unknown prompt template '" + name + "'");
}

namespace {

bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::string render_template(std::string_view text, const PromptSlots& slots) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && is_ident(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        auto name = text.substr(i + 1, j - i - 1);
        auto it = slots.find(name);
        if (it == slots.end()) throw Error(Errc::invalid_argument, "prompt slot {" + std::string(name) + "} not supplied");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string render_prompt(PromptTemplate id, const PromptSlots& slots) {
  return render_template(prompt_template(id), slots);
}

const char* llm_answer_name(LlmAnswer a) noexcept {
  switch (a) {
    case LlmAnswer::yes: return "yes";
    case LlmAnswer::no: return "no";
    case LlmAnswer::unparseable: return "unparseable";
  }
  return "unparseable";
}

LlmAnswer parse_llm_answer(std::string_view response) {
  static constexpr std::string_view kPhrase = "the answer is";
  const std::string lower = to_lower_ascii(response);
  const auto at = lower.rfind(kPhrase);
  if (at == std::string::npos) return LlmAnswer::unparseable;
  std::size_t i = at + kPhrase.size();
  while (i < lower.size() && std::isspace(static_cast<unsigned char>(lower[i]))) ++i;
  std::string token;
  while (i < lower.size() && !std::isspace(static_cast<unsigned char>(lower[i]))) {
    if (!std::ispunct(static_cast<unsigned char>(lower[i]))) token.push_back(lower[i]);
    ++i;
  }
  if (token == "yes") return LlmAnswer::yes;
  if (token == "no") return LlmAnswer::no;
  return LlmAnswer::unparseable;
}

}  // namespace comira
