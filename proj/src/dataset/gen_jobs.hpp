#pragma once

#include <span>
#include <string>

#include "dataset/generation.hpp"
#include "dataset/pairs.hpp"

namespace comira {

struct GenJobOptions {
  // Caption service; when null the image prompt is left empty.
  Generator* caption_llm = nullptr;
  ClientConfig caption_config = ClientConfig::text_defaults();
  // Image service returning base64 PNG. Pair images go to image_dir
  // (needs generated captions); accessory images go to accessory_dir with an
  // index.tsv for edit-images.
  Generator* image_service = nullptr;
  ClientConfig image_config = ClientConfig::image_defaults();
  std::string image_dir;
  std::string accessory_dir;
};

struct GenJobStats {
  std::size_t jobs = 0;
  std::size_t captions = 0;
  std::size_t caption_failures = 0;
  std::size_t images = 0;
  std::size_t image_failures = 0;
  std::size_t accessory_images = 0;
  std::size_t accessory_failures = 0;
  std::size_t skipped_existing = 0;
};

// Writes one JSON line per pair with the rendered caption and accessory-image
// prompts, the generated caption when a caption service is set, the client
// parameters, and a status. Image files that already exist are not
// regenerated.
GenJobStats write_generation_jobs(std::span<const ConceptPairSpec> pairs, const std::string& out_path,
                                  const GenJobOptions& options);

}  // namespace comira
