#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace comira {

struct GenerationResult {
  bool ok = false;
  std::string text;   // response field; base64 image data for image services
  std::string error;  // set when !ok; such jobs are retryable
};

// A text or image generation backend. Implementations must be callable from
// several threads at once.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual GenerationResult generate(const std::string& prompt) = 0;
};

// Runs all prompts with at most max_in_flight concurrent calls; results are
// in prompt order.
std::vector<GenerationResult> generate_all(Generator& generator, std::span<const std::string> prompts,
                                           unsigned max_in_flight);

struct ClientConfig {
  std::string endpoint;        // http://host[:port]/path or https://...
  std::string auth_token_env;  // variable holding a bearer token; empty for none
  // JSON request body. A string value that is exactly "{name}" becomes the
  // parameter's value (a number when it parses as one); "{prompt}" is the
  // prompt. Other {name} occurrences inside strings are substituted as text.
  std::string request_template;
  std::string response_field;  // JSON pointer into the response body
  unsigned max_in_flight = 4;
  double timeout_seconds = 120.0;
  unsigned retries = 2;
  std::map<std::string, std::string> params;

  // Completion-style text service: temperature 0.1, min_p 0.05,
  // max_new_tokens 50.
  static ClientConfig text_defaults();
  // Image service returning base64 PNG: 512x512, guidance 5.0, 28 steps.
  static ClientConfig image_defaults();

  // "key = value" lines over `base`; "param.<name>" sets a parameter and
  // "request_template_file" reads the template from a file. '#' comments.
  static ClientConfig parse(std::string_view text, ClientConfig base);
  static ClientConfig load(const std::string& path, ClientConfig base);

  std::string describe() const;
  void validate() const;
};

// Numeric-looking values become JSON numbers, everything else stays a string.
nlohmann::json typed_value(const std::string& value);
nlohmann::json typed_params(const ClientConfig& config);

std::string build_request_body(const ClientConfig& config, const std::string& prompt);
// Extracts config.response_field from a JSON body; Errc::format on failure.
std::string extract_response(const ClientConfig& config, const std::string& body);

class HttpGenerator : public Generator {
 public:
  explicit HttpGenerator(ClientConfig config);
  GenerationResult generate(const std::string& prompt) override;
  const ClientConfig& config() const noexcept { return config_; }

 private:
  ClientConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
};

std::vector<std::uint8_t> decode_base64(std::string_view text);

}  // namespace comira
