#include "dataset/gen_jobs.hpp"

#include <cmath>
#include <filesystem>
#include <map>

#include <json.hpp>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"
#include "dataset/image.hpp"
#include "dataset/prompts.hpp"

namespace comira {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Decodes a base64 PNG response, checks that it decodes, and writes it.
bool write_image_result(const GenerationResult& r, const fs::path& path, std::string& error) {
  if (!r.ok) {
    error = r.error;
    return false;
  }
  try {
    auto bytes = decode_base64(r.text);
    decode_png(bytes);
    write_file_atomic(path.string(), {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    return true;
  } catch (const Error& e) {
    error = e.what();
    return false;
  }
}

}  // namespace

GenJobStats write_generation_jobs(std::span<const ConceptPairSpec> pairs, const std::string& out_path,
                                  const GenJobOptions& options) {
  GenJobStats stats;
  stats.jobs = pairs.size();
  std::vector<std::string> caption_prompts;
  caption_prompts.reserve(pairs.size());
  for (const auto& p : pairs)
    caption_prompts.push_back(render_prompt(PromptTemplate::caption, {{"c1", p.accessory}, {"c2", p.imagenet_concept}}));

  std::vector<GenerationResult> captions(pairs.size());
  if (options.caption_llm) {
    captions = generate_all(*options.caption_llm, caption_prompts, options.caption_config.max_in_flight);
    for (auto& c : captions) {
      if (c.ok) {
        c.text = std::string(trim(c.text));
        ++stats.captions;
      } else {
        ++stats.caption_failures;
      }
    }
  }

  std::vector<std::string> image_errors(pairs.size());
  if (options.image_service && !options.image_dir.empty()) {
    if (!options.caption_llm) throw Error(Errc::invalid_argument, "pair images need a caption service");
    fs::create_directories(options.image_dir);
    std::vector<std::size_t> todo;
    std::vector<std::string> prompts;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!captions[i].ok) continue;
      auto path = fs::path(options.image_dir) / (pairs[i].imagenet_class_id + "-" + pairs[i].accessory + ".png");
      if (fs::exists(path)) {
        ++stats.skipped_existing;
        continue;
      }
      todo.push_back(i);
      prompts.push_back(captions[i].text);
    }
    auto results = generate_all(*options.image_service, prompts, options.image_config.max_in_flight);
    for (std::size_t k = 0; k < todo.size(); ++k) {
      const auto& p = pairs[todo[k]];
      auto path = fs::path(options.image_dir) / (p.imagenet_class_id + "-" + p.accessory + ".png");
      if (write_image_result(results[k], path, image_errors[todo[k]])) ++stats.images;
      else ++stats.image_failures;
    }
  }

  if (options.image_service && !options.accessory_dir.empty()) {
    fs::create_directories(options.accessory_dir);
    std::map<std::string, std::string> accessories;  // lemma -> file name
    for (const auto& p : pairs) accessories.emplace(p.accessory, p.accessory + ".png");
    std::vector<std::string> todo, prompts;
    for (const auto& [a, file] : accessories) {
      if (fs::exists(fs::path(options.accessory_dir) / file)) {
        ++stats.skipped_existing;
        continue;
      }
      todo.push_back(a);
      prompts.push_back(render_prompt(PromptTemplate::accessory_image, {{"c", a}}));
    }
    auto results = generate_all(*options.image_service, prompts, options.image_config.max_in_flight);
    for (std::size_t k = 0; k < todo.size(); ++k) {
      std::string err;
      if (write_image_result(results[k], fs::path(options.accessory_dir) / accessories[todo[k]], err)) {
        ++stats.accessory_images;
      } else {
        ++stats.accessory_failures;
        log_warning("accessory image for '" + todo[k] + "' failed: " + err);
      }
    }
    std::string index;
    for (const auto& [a, file] : accessories)
      if (fs::exists(fs::path(options.accessory_dir) / file)) index += a + "\t" + file + "\n";
    write_file_atomic((fs::path(options.accessory_dir) / "index.tsv").string(), index);
  }

  std::string out;
  const json text_params = typed_params(options.caption_config);
  const json image_params = typed_params(options.image_config);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    json j = {{"accessory", p.accessory},
              {"imagenet_concept", p.imagenet_concept},
              {"imagenet_class_id", p.imagenet_class_id},
              {"pmi", std::isfinite(p.pmi) ? json(p.pmi) : json(p.pmi > 0 ? "inf" : "-inf")},
              {"caption_prompt", caption_prompts[i]},
              {"accessory_image_prompt", render_prompt(PromptTemplate::accessory_image, {{"c", p.accessory}})},
              {"text_params", text_params},
              {"image_params", image_params}};
    if (!options.caption_llm) {
      j["image_prompt"] = nullptr;
      j["status"] = "pending";
    } else if (captions[i].ok) {
      j["image_prompt"] = captions[i].text;
      j["status"] = image_errors[i].empty() ? "ok" : "retryable: " + image_errors[i];
    } else {
      j["image_prompt"] = nullptr;
      j["status"] = "retryable: " + captions[i].error;
    }
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(out_path, out);
  if (stats.caption_failures + stats.image_failures > 0)
    log_warning(std::to_string(stats.caption_failures + stats.image_failures) + " generation call(s) failed; rows marked retryable");
  return stats;
}

}  // namespace comira
