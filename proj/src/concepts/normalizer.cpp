#include "concepts/normalizer.hpp"

#include <algorithm>

#include "common/text.hpp"
#include "concepts/default_tables.hpp"

namespace comira {

NormalizerConfig NormalizerConfig::defaults() {
  NormalizerConfig c;
  c.stopwords = parse_stopwords(default_stopword_list());
  return c;
}

std::vector<std::string> NormalizerConfig::parse_stopwords(std::string_view text) {
  std::vector<std::string> out;
  for (auto raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(to_lower_ascii(line));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> NormalizerConfig::load_stopwords(const std::string& path) {
  return parse_stopwords(read_file(path));
}

std::string NormalizerConfig::canonical() const {
  std::string out = "lowercase=";
  out += lowercase ? "1" : "0";
  out += "\ntoken_pattern=ascii-alpha\nstopwords=" + std::to_string(stopwords.size()) + "\n";
  for (const auto& s : stopwords) out += s + "\n";
  out += "lemma_table\n" + lemmatizer.canonical();
  return out;
}

Normalizer::Normalizer(NormalizerConfig config) : config_(std::move(config)) {
  std::sort(config_.stopwords.begin(), config_.stopwords.end());
  config_.stopwords.erase(std::unique(config_.stopwords.begin(), config_.stopwords.end()), config_.stopwords.end());
  stop_.insert(config_.stopwords.begin(), config_.stopwords.end());
}

bool Normalizer::drop(std::string_view token) const {
  if (config_.keep_yes_no && (token == "yes" || token == "no")) return false;
  return is_stopword(token);
}

bool Normalizer::is_stopword(std::string_view lemma) const { return stop_.find(lemma) != stop_.end(); }

std::vector<std::string> Normalizer::normalize(std::string_view text) const {
  std::vector<std::string> out;
  for_each_lemma(text, [&](std::string lemma) { out.push_back(std::move(lemma)); });
  return out;
}

Normalizer Normalizer::with_keep_yes_no(bool keep) const {
  NormalizerConfig c = config_;
  c.keep_yes_no = keep;
  return Normalizer(std::move(c));
}

}  // namespace comira
