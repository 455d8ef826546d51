#pragma once

#include <string_view>

namespace comira {

// Shipped tables, compiled in from data/lemma_rules.txt and data/stopwords_en.txt.
std::string_view default_lemma_table() noexcept;
std::string_view default_stopword_list() noexcept;

}  // namespace comira
