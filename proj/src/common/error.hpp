#pragma once

#include <stdexcept>
#include <string>

namespace comira {

// Error categories shared by the core and the C API status codes.
enum class Errc {
  invalid_argument = 1,
  io,               // unreadable/unwritable path
  corrupt,          // corrupt corpus or damaged artifact
  format,           // bad magic, version, or malformed file content
  mismatch,         // pipeline fingerprint mismatch
  undefined,        // undefined score or correlation
  empty,            // empty corpus or empty selection
  unknown_concept,  // lemma or id not in the vocabulary
  external,         // external service failure
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

const char* errc_name(Errc code) noexcept;

}  // namespace comira
