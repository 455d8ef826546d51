#include "dataset/pairs.hpp"

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"

namespace comira {

std::vector<ClassEntry> parse_class_list(std::string_view text) {
  std::vector<ClassEntry> out;
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    ClassEntry e;
    if (auto tab = line.find('\t'); tab != std::string_view::npos) {
      e.class_id = std::string(trim(line.substr(0, tab)));
      line = line.substr(tab + 1);
    } else {
      e.class_id = std::to_string(out.size());
    }
    e.class_name = std::string(trim(line.substr(0, line.find(','))));
    if (e.class_id.empty() || e.class_name.empty())
      throw Error(Errc::format, "class list line " + std::to_string(lineno) + " has an empty id or name");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ClassEntry> load_class_list(const std::string& path) { return parse_class_list(read_file(path)); }

std::string category_of(std::string_view class_name, const Normalizer& normalizer) {
  auto name = trim(class_name);
  auto sp = name.find_last_of(" \t");
  auto last = sp == std::string_view::npos ? name : name.substr(sp + 1);
  std::size_t end = last.size();
  while (end > 0 && !is_ascii_alpha(last[end - 1])) --end;
  std::size_t begin = end;
  while (begin > 0 && is_ascii_alpha(last[begin - 1])) --begin;
  if (begin == end) return {};
  return normalizer.config().lemmatizer.lemma(to_lower_ascii(last.substr(begin, end - begin)));
}

std::map<std::string, ClassEntry> derive_categories(std::span<const ClassEntry> classes,
                                                    const Normalizer& normalizer) {
  std::map<std::string, ClassEntry> out;
  for (const auto& c : classes) {
    auto cat = category_of(c.class_name, normalizer);
    if (cat.empty()) {
      log_warning("class '" + c.class_name + "' has no category word");
      continue;
    }
    out.emplace(std::move(cat), c);
  }
  return out;
}

std::vector<ConceptPairSpec> select_candidate_pairs(const ConceptVocabulary& vocab,
                                                    const std::map<std::string, ClassEntry>& categories) {
  if (vocab.empty() || categories.empty())
    throw Error(Errc::empty, "candidate pairs need a non-empty vocabulary and category set");
  std::vector<std::string> accessories;
  for (const auto& lemma : vocab.lemmas())
    if (!categories.count(lemma)) accessories.push_back(lemma);
  std::sort(accessories.begin(), accessories.end());
  std::vector<ConceptPairSpec> out;
  std::size_t missing = 0;
  for (const auto& [cat, cls] : categories) {
    if (!vocab.find(cat)) {
      ++missing;
      continue;
    }
    for (const auto& a : accessories) out.push_back({a, cat, 0.0, cls.class_id, cls.class_name});
  }
  if (missing > 0) log_info(std::to_string(missing) + " category word(s) are not in the vocabulary");
  if (out.empty()) log_warning("no candidate pairs: no category word is in the vocabulary");
  return out;
}

void fill_pmi(std::span<ConceptPairSpec> pairs, const PmiModel& model) {
  for (auto& p : pairs) p.pmi = model.pmi(p.accessory, p.imagenet_concept);
}

std::string pairs_csv(std::span<const ConceptPairSpec> pairs) {
  std::string out = "accessory,imagenet_concept,imagenet_class_id,class_name,pmi\n";
  for (const auto& p : pairs)
    out += csv_row({p.accessory, p.imagenet_concept, p.imagenet_class_id, p.class_name, format_double(p.pmi)});
  return out;
}

std::vector<ConceptPairSpec> parse_pairs_csv(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"accessory", "imagenet_concept", "imagenet_class_id",
                                                          "class_name", "pmi"})
    throw Error(Errc::format, "pairs file lacks the expected header");
  std::vector<ConceptPairSpec> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5) throw Error(Errc::format, "pairs row " + std::to_string(i) + " does not have 5 fields");
    out.push_back({r[0], r[1], parse_double(r[4]), r[2], r[3]});
  }
  return out;
}

void save_pairs(const std::string& path, std::span<const ConceptPairSpec> pairs) {
  write_file_atomic(path, pairs_csv(pairs));
}

std::vector<ConceptPairSpec> load_pairs(const std::string& path) { return parse_pairs_csv(read_file(path)); }

}  // namespace comira
