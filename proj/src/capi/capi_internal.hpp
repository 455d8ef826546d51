#pragma once

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "comira/comira.h"
#include "common/error.hpp"
#include "common/parallel.hpp"
#include "concepts/normalizer.hpp"
#include "concepts/vocabulary.hpp"
#include "cooccur/pair_table.hpp"
#include "pmi/pmi_model.hpp"
#include "scoring/scoring.hpp"

struct comira_strings {
  std::vector<std::string> items;
};

struct comira_normalizer {
  comira::Normalizer normalizer;
};

struct comira_vocab {
  std::shared_ptr<const comira::ConceptVocabulary> vocab;
  std::string fingerprint;
};

struct comira_counts {
  std::shared_ptr<const comira::PairCountTable> counts;
  std::string fingerprint;
};

struct comira_model {
  comira::PmiModel model;
};

struct comira_scorer {
  comira::PmiModel model;  // the scorer below refers to this copy
  comira::Scorer scorer;

  comira_scorer(const comira::PmiModel& m, const comira::Normalizer& n) : model(m), scorer(model, n) {}
};

namespace comira::capi {

void set_last_error(const std::string& message);

// Runs fn, translating exceptions into a status and the thread's last error.
template <class Fn>
comira_status guard(Fn&& fn) noexcept {
  try {
    fn();
    return COMIRA_OK;
  } catch (const Error& e) {
    set_last_error(e.what());
    return static_cast<comira_status>(e.code());
  } catch (const std::bad_alloc&) {
    set_last_error("out of memory");
    return COMIRA_E_INTERNAL;
  } catch (const std::exception& e) {
    set_last_error(e.what());
    return COMIRA_E_INTERNAL;
  } catch (...) {
    set_last_error("unknown error");
    return COMIRA_E_INTERNAL;
  }
}

template <class T>
T& need(T* p, const char* what) {
  if (p == nullptr) throw Error(Errc::invalid_argument, std::string(what) + " must not be NULL");
  return *p;
}

inline const char* need_str(const char* s, const char* what) {
  if (s == nullptr) throw Error(Errc::invalid_argument, std::string(what) + " must not be NULL");
  return s;
}

inline unsigned workers_or_default(unsigned workers) { return workers == 0 ? default_workers() : workers; }

inline char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

inline std::vector<std::string> string_array(const char* const* items, std::size_t count, const char* what) {
  if (count > 0 && items == nullptr) throw Error(Errc::invalid_argument, std::string(what) + " must not be NULL");
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(need_str(items[i], what));
  return out;
}

}  // namespace comira::capi
