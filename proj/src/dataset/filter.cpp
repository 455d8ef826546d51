#include "dataset/filter.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <json.hpp>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"
#include "dataset/prompts.hpp"

namespace comira {

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    auto word = line.substr(0, tab);
    unsigned mask = 0;
    if (tab != std::string_view::npos) {
      for (char c : line.substr(tab + 1)) {
        switch (c) {
          case 'n': mask |= kNoun; break;
          case 'v': mask |= kVerb; break;
          case 'a': mask |= kAdjective; break;
          case 'r': mask |= kAdverb; break;
          default: throw Error(Errc::format, "lexicon line " + std::to_string(lineno) + ": unknown tag '" + c + "'");
        }
      }
    }
    if (word.empty()) throw Error(Errc::format, "lexicon line " + std::to_string(lineno) + ": empty word");
    lex.words_[to_lower_ascii(word)] |= mask;
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) { return parse(read_file(path)); }

std::string Lexicon::default_path() { return std::string(COMIRA_DATA_DIR) + "/lexicon_en.tsv"; }

unsigned Lexicon::tags(std::string_view word) const {
  auto it = words_.find(word);
  return it == words_.end() ? 0u : it->second;
}

const char* filter_stage_name(FilterStage stage) noexcept {
  switch (stage) {
    case FilterStage::digit: return "digit";
    case FilterStage::dictionary: return "dictionary";
    case FilterStage::pos: return "pos";
    case FilterStage::literal: return "literal";
    case FilterStage::llm: return "llm";
    case FilterStage::llm_unparseable: return "llm_unparseable";
  }
  return "digit";
}

namespace {

enum class Verdict { keep, drop, retry };

}  // namespace

FilterResult filter_accessories(std::span<const ConceptPairSpec> candidates, const Lexicon& dictionary,
                                const PosTagger& tagger, Generator* llm, unsigned max_in_flight) {
  FilterResult result;
  auto& report = result.report;
  report.input_pairs = candidates.size();

  std::map<std::string, Verdict> verdict;
  for (const auto& p : candidates) verdict.emplace(p.accessory, Verdict::keep);
  report.input_accessories = verdict.size();

  auto drop = [&](Verdict& v, FilterStage stage) {
    v = Verdict::drop;
    ++report.dropped[static_cast<unsigned>(stage)];
  };
  std::vector<std::string> ask;
  for (auto& [word, v] : verdict) {
    if (std::any_of(word.begin(), word.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      drop(v, FilterStage::digit);
    else if (!dictionary.contains(word))
      drop(v, FilterStage::dictionary);
    else if (!(tagger.tags(word) & (kNoun | kAdjective)))
      drop(v, FilterStage::pos);
    else if (word == "photo" || word == "image")
      drop(v, FilterStage::literal);
    else if (llm)
      ask.push_back(word);
  }

  if (llm && !ask.empty()) {
    report.llm_stage_run = true;
    std::vector<std::string> prompts;
    prompts.reserve(ask.size());
    for (const auto& w : ask) prompts.push_back(render_prompt(PromptTemplate::visualizability, {{"c", w}}));
    auto answers = generate_all(*llm, prompts, max_in_flight);
    for (std::size_t i = 0; i < ask.size(); ++i) {
      auto& v = verdict[ask[i]];
      if (!answers[i].ok) {
        v = Verdict::retry;
        ++report.retryable_accessories;
        continue;
      }
      switch (parse_llm_answer(answers[i].text)) {
        case LlmAnswer::yes: break;
        case LlmAnswer::no: drop(v, FilterStage::llm); break;
        case LlmAnswer::unparseable: drop(v, FilterStage::llm_unparseable); break;
      }
    }
    if (report.retryable_accessories > 0)
      log_warning(std::to_string(report.retryable_accessories) + " accessory judgement(s) failed and are retryable");
  }

  for (const auto& [w, v] : verdict) report.kept_accessories += v == Verdict::keep;
  for (const auto& p : candidates) {
    auto v = verdict[p.accessory];
    if (v == Verdict::keep) result.kept.push_back(p);
    else if (v == Verdict::retry) result.retryable.push_back(p);
  }
  return result;
}

std::string filter_report_json(const FilterReport& r) {
  nlohmann::json dropped = nlohmann::json::object();
  for (unsigned s = 0; s < kNumFilterStages; ++s) dropped[filter_stage_name(static_cast<FilterStage>(s))] = r.dropped[s];
  nlohmann::json j = {{"input_pairs", r.input_pairs},
                      {"input_accessories", r.input_accessories},
                      {"dropped", std::move(dropped)},
                      {"kept_accessories", r.kept_accessories},
                      {"retryable_accessories", r.retryable_accessories},
                      {"llm_stage_run", r.llm_stage_run}};
  return j.dump(2) + "\n";
}

}  // namespace comira
