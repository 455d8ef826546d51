#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <cmath>
#include <httplib.h>

#include "dataset/generation.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "common/text.hpp"
#include "dataset/prompts.hpp"

namespace comira {

using json = nlohmann::json;

std::vector<GenerationResult> generate_all(Generator& generator, std::span<const std::string> prompts,
                                           unsigned max_in_flight) {
  std::vector<GenerationResult> out(prompts.size());
  std::atomic<std::size_t> next{0};
  const unsigned lanes = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, max_in_flight), prompts.size()));
  parallel_chunks(lanes, lanes, [&](unsigned, std::size_t, std::size_t) {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      try {
        out[i] = generator.generate(prompts[i]);
      } catch (const std::exception& e) {
        out[i] = {false, {}, e.what()};
      }
    }
  });
  return out;
}

ClientConfig ClientConfig::text_defaults() {
  ClientConfig c;
  c.request_template =
      R"({"prompt": "{prompt}", "temperature": "{temperature}", "min_p": "{min_p}", "max_tokens": "{max_new_tokens}"})";
  c.response_field = "/choices/0/text";
  c.params = {{"temperature", "0.1"}, {"min_p", "0.05"}, {"max_new_tokens", "50"}};
  return c;
}

ClientConfig ClientConfig::image_defaults() {
  ClientConfig c;
  c.request_template =
      R"({"prompt": "{prompt}", "width": "{width}", "height": "{height}", "guidance_scale": "{guidance}", "num_inference_steps": "{steps}"})";
  c.response_field = "/image";
  c.params = {{"width", "512"}, {"height", "512"}, {"guidance", "5.0"}, {"steps", "28"}};
  return c;
}

ClientConfig ClientConfig::parse(std::string_view text, ClientConfig c) {
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::format, "client config line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    try {
      if (key == "endpoint") c.endpoint = value;
      else if (key == "auth_token_env") c.auth_token_env = value;
      else if (key == "request_template") c.request_template = value;
      else if (key == "request_template_file") c.request_template = read_file(value);
      else if (key == "response_field") c.response_field = value;
      else if (key == "max_in_flight") c.max_in_flight = static_cast<unsigned>(std::stoul(value));
      else if (key == "timeout_seconds") c.timeout_seconds = std::stod(value);
      else if (key == "retries") c.retries = static_cast<unsigned>(std::stoul(value));
      else if (key.rfind("param.", 0) == 0) c.params[key.substr(6)] = value;
      else throw Error(Errc::format, "client config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(Errc::format, "client config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  c.validate();
  return c;
}

ClientConfig ClientConfig::load(const std::string& path, ClientConfig base) { return parse(read_file(path), base); }

std::string ClientConfig::describe() const {
  std::string s = "endpoint=" + endpoint + " auth_token_env=" + auth_token_env + " response_field=" + response_field +
                  " max_in_flight=" + std::to_string(max_in_flight) + " retries=" + std::to_string(retries);
  for (const auto& [k, v] : params) s += " param." + k + "=" + v;
  return s;
}

void ClientConfig::validate() const {
  if (!endpoint.empty() && endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0)
    throw Error(Errc::invalid_argument, "endpoint must start with http:// or https://");
  if (max_in_flight == 0) throw Error(Errc::invalid_argument, "max_in_flight must be at least 1");
  if (!(timeout_seconds > 0)) throw Error(Errc::invalid_argument, "timeout_seconds must be positive");
  if (!json::accept(request_template)) throw Error(Errc::invalid_argument, "request template is not valid JSON");
}

json typed_value(const std::string& v) {
  const char* b = v.c_str();
  char* end = nullptr;
  double d = std::strtod(b, &end);
  if (!v.empty() && end == b + v.size() && std::isfinite(d)) {
    if (v.find_first_of(".eE") == std::string::npos) return static_cast<std::int64_t>(d);
    return d;
  }
  return v;
}

json typed_params(const ClientConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config.params) j[k] = typed_value(v);
  return j;
}

namespace {

void substitute(json& node, const PromptSlots& slots, const std::map<std::string, std::string>& params,
                const std::string& prompt) {
  if (node.is_object() || node.is_array()) {
    for (auto& child : node) substitute(child, slots, params, prompt);
    return;
  }
  if (!node.is_string()) return;
  const auto s = node.get<std::string>();
  if (s == "{prompt}") {
    node = prompt;
  } else if (s.size() > 2 && s.front() == '{' && s.back() == '}' && params.count(s.substr(1, s.size() - 2))) {
    node = typed_value(params.at(s.substr(1, s.size() - 2)));
  } else {
    node = render_template(s, slots);
  }
}

}  // namespace

std::string build_request_body(const ClientConfig& config, const std::string& prompt) {
  auto body = json::parse(config.request_template);
  PromptSlots slots(config.params.begin(), config.params.end());
  slots["prompt"] = prompt;
  substitute(body, slots, config.params, prompt);
  return body.dump();
}

std::string extract_response(const ClientConfig& config, const std::string& body) {
  try {
    auto j = json::parse(body);
    const auto& v = j.at(json::json_pointer(config.response_field));
    if (!v.is_string()) throw Error(Errc::format, "response field " + config.response_field + " is not a string");
    return v.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::format, std::string("bad response body: ") + e.what());
  }
}

HttpGenerator::HttpGenerator(ClientConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.endpoint.empty()) throw Error(Errc::invalid_argument, "client endpoint not configured");
  const auto scheme_end = config_.endpoint.find("://") + 3;
  const auto slash = config_.endpoint.find('/', scheme_end);
  scheme_host_port_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
  if (!config_.auth_token_env.empty()) {
    const char* t = std::getenv(config_.auth_token_env.c_str());
    if (!t || !*t) throw Error(Errc::external, "auth token variable " + config_.auth_token_env + " is not set");
    token_ = t;
  }
}

GenerationResult HttpGenerator::generate(const std::string& prompt) {
  const std::string body = build_request_body(config_, prompt);
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  client.set_write_timeout(secs);
  if (!token_.empty()) client.set_bearer_token_auth(token_);
  GenerationResult result;
  for (unsigned attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200u << std::min(attempt, 5u)));
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      result.error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      result.error = "HTTP status " + std::to_string(res->status);
      if (res->status < 500 && res->status != 429) break;  // not worth retrying
      continue;
    }
    try {
      return {true, extract_response(config_, res->body), {}};
    } catch (const Error& e) {
      result.error = e.what();
      break;
    }
  }
  result.ok = false;
  return result;
}

std::vector<std::uint8_t> decode_base64(std::string_view text) {
  std::string clean;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  if (clean.size() % 4 != 0) throw Error(Errc::format, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) throw Error(Errc::format, "invalid base64 data");
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace comira
