#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dataset/pairs.hpp"

namespace comira {

// "key\tpath" lines; relative paths resolve against the index file's
// directory. A key may repeat (several base images per class).
using AssetIndex = std::map<std::string, std::vector<std::string>>;
AssetIndex parse_asset_index(std::string_view text, const std::string& base_dir = {});
AssetIndex load_asset_index(const std::string& path);

struct PasteOptions {
  std::uint64_t run_seed = 0;
  std::string out_dir;
  std::size_t bases_per_pair = 1;
  double max_area_fraction = 0.10;
  std::uint8_t white_threshold = 245;  // for accessory images without alpha
  unsigned workers = 1;
};

struct ManifestRow {
  std::string example_id;
  std::string class_id;
  std::string class_name;
  std::string accessory;
  double pmi = 0.0;
  std::string base_path;
  std::string out_path;
  std::uint64_t seed = 0;
  double scale = 0.0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::string status;  // "ok" or "error: <reason>"

  bool operator==(const ManifestRow&) const = default;
};

inline constexpr const char* kManifestHeader =
    "example_id,class_id,class_name,accessory,pmi,base_path,out_path,seed,scale,x,y,status";

std::string manifest_csv(std::span<const ManifestRow> rows);
std::vector<ManifestRow> parse_manifest(std::string_view text);

struct PasteStats {
  std::size_t rows = 0;
  std::size_t generated = 0;
  std::size_t reused = 0;  // already present from an earlier run
  std::size_t errors = 0;
};

// One edited image per (pair, sampled base image) under out_dir/images and a
// manifest at out_dir/manifest.csv. Rows of an earlier run whose status is ok,
// whose seed matches and whose output file exists are kept without
// regenerating. Missing assets become error rows; the run continues.
PasteStats build_paste_dataset(std::span<const ConceptPairSpec> pairs, const AssetIndex& bases,
                               const AssetIndex& accessories, const PasteOptions& options);

}  // namespace comira
