#include "concepts/lemmatizer.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "common/error.hpp"
#include "common/text.hpp"
#include "concepts/default_tables.hpp"

namespace comira {

namespace {

bool is_vowel_char(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// y counts as a vowel after a consonant
bool is_consonant(std::string_view w, std::size_t i) {
  char c = w[i];
  if (is_vowel_char(c)) return false;
  if (c == 'y') return i == 0 || !is_consonant(w, i - 1);
  return true;
}

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!is_consonant(w, i)) return true;
  return false;
}

// Number of vowel-consonant sequences in [C](VC)^m[V].
int measure(std::string_view w) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool cons = is_consonant(w, i);
    if (cons && prev_vowel) ++m;
    prev_vowel = !cons;
  }
  return m;
}

bool ends_cvc(std::string_view w) {
  std::size_t n = w.size();
  if (n < 3) return false;
  char last = w[n - 1];
  return is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) && last != 'w' &&
         last != 'x' && last != 'y';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : split(s, ','))
    if (!part.empty()) out.emplace_back(part);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

}  // namespace

Lemmatizer Lemmatizer::parse(std::string_view table) {
  Lemmatizer lem;
  std::size_t line_no = 0;
  for (auto raw : split(table, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields;
    for (auto f : split(line, ' '))
      if (!f.empty()) fields.push_back(f);
    auto fail = [&](const std::string& why) {
      throw Error(Errc::format, "lemma table line " + std::to_string(line_no) + ": " + why);
    };
    if (fields[0] == "except") {
      if (fields.size() != 3) fail("expected 'except <word> <lemma>'");
      if (!lem.exceptions_.emplace(std::string(fields[1]), std::string(fields[2])).second)
        fail("duplicate exception '" + std::string(fields[1]) + "'");
    } else if (fields[0] == "rule") {
      if (fields.size() < 3) fail("expected 'rule <suffix> <replacement>'");
      SuffixRule r;
      r.suffix = std::string(fields[1]);
      r.replacement = fields[2] == "-" ? std::string() : std::string(fields[2]);
      for (std::size_t i = 3; i < fields.size(); ++i) {
        auto opt = fields[i];
        if (opt == "vowel") {
          r.need_vowel = true;
        } else if (opt == "undouble") {
          r.undouble = true;
        } else if (opt == "restore_e") {
          r.restore_e = true;
        } else if (opt.rfind("min_stem=", 0) == 0) {
          auto v = opt.substr(9);
          auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), r.min_stem);
          if (ec != std::errc() || p != v.data() + v.size()) fail("bad min_stem");
        } else if (opt.rfind("not_after=", 0) == 0) {
          r.not_after = split_list(opt.substr(10));
        } else if (opt.rfind("e_after=", 0) == 0) {
          r.e_after = split_list(opt.substr(8));
        } else {
          fail("unknown rule option '" + std::string(opt) + "'");
        }
      }
      if (r.suffix.empty()) fail("empty suffix");
      if (r.replacement.size() + (r.restore_e ? 1 : 0) >= r.suffix.size())
        fail("replacement for '" + r.suffix + "' must shorten the word");
      if (r.min_stem == 0) r.min_stem = 1;
      lem.rules_.push_back(std::move(r));
    } else {
      fail("unknown directive '" + std::string(fields[0]) + "'");
    }
  }
  for (const auto& [word, target] : lem.exceptions_) {
    if (lem.lemma(target) != target)
      throw Error(Errc::format, "lemma table: exception target '" + target + "' (from '" + word +
                                    "') is not a fixed point; add 'except " + target + " " + target + "'");
  }
  return lem;
}

Lemmatizer Lemmatizer::from_file(const std::string& path) { return parse(read_file(path)); }

const Lemmatizer& Lemmatizer::builtin() {
  static const Lemmatizer instance = parse(default_lemma_table());
  return instance;
}

bool Lemmatizer::step(std::string& word) const {
  for (const auto& r : rules_) {
    if (!ends_with(word, r.suffix)) continue;
    std::string_view stem(word.data(), word.size() - r.suffix.size());
    if (stem.size() < r.min_stem) continue;
    if (r.need_vowel && !has_vowel(stem)) continue;
    bool blocked = false;
    for (const auto& na : r.not_after) {
      if (ends_with(stem, na)) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;

    std::string out(stem);
    bool undoubled = false;
    if (r.undouble && out.size() >= 2) {
      char a = out[out.size() - 1];
      if (a == out[out.size() - 2] && is_consonant(out, out.size() - 1) && a != 'l' && a != 's' && a != 'z') {
        out.pop_back();
        undoubled = true;
      }
    }
    if (r.restore_e && !undoubled) {
      bool add_e = measure(out) == 1 && ends_cvc(out);
      for (const auto& ea : r.e_after) add_e = add_e || ends_with(out, ea);
      if (add_e) out.push_back('e');
    }
    out += r.replacement;
    word = std::move(out);
    return true;
  }
  return false;
}

std::string Lemmatizer::lemma(std::string_view word) const {
  std::string w(word);
  // every rule shortens the word, so this terminates
  while (true) {
    if (auto it = exceptions_.find(w); it != exceptions_.end()) return it->second;
    if (!step(w)) return w;
  }
}

std::string Lemmatizer::canonical() const {
  std::string out;
  for (const auto& r : rules_) {
    out += "rule " + r.suffix + " " + (r.replacement.empty() ? "-" : r.replacement);
    out += " min_stem=" + std::to_string(r.min_stem);
    if (r.need_vowel) out += " vowel";
    if (r.undouble) out += " undouble";
    if (r.restore_e) out += " restore_e";
    if (!r.not_after.empty()) out += " not_after=" + join(r.not_after);
    if (!r.e_after.empty()) out += " e_after=" + join(r.e_after);
    out += '\n';
  }
  std::map<std::string, std::string> sorted(exceptions_.begin(), exceptions_.end());
  for (const auto& [w, l] : sorted) out += "except " + w + " " + l + "\n";
  return out;
}

}  // namespace comira
