#include "dataset/paste_dataset.hpp"

#include <filesystem>
#include <unordered_map>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/parallel.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"
#include "dataset/image.hpp"

namespace comira {

namespace fs = std::filesystem;

AssetIndex parse_asset_index(std::string_view text, const std::string& base_dir) {
  AssetIndex out;
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw Error(Errc::format, "asset index line " + std::to_string(lineno) + ": expected key<TAB>path");
    fs::path p(std::string(line.substr(tab + 1)));
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    out[std::string(line.substr(0, tab))].push_back(p.string());
  }
  return out;
}

AssetIndex load_asset_index(const std::string& path) {
  return parse_asset_index(read_file(path), fs::path(path).parent_path().string());
}

std::string manifest_csv(std::span<const ManifestRow> rows) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : rows)
    out += csv_row({r.example_id, r.class_id, r.class_name, r.accessory, format_double(r.pmi), r.base_path, r.out_path,
                    std::to_string(r.seed), format_double(r.scale), std::to_string(r.x), std::to_string(r.y), r.status});
  return out;
}

std::vector<ManifestRow> parse_manifest(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty() || csv_row(rows[0]) != std::string(kManifestHeader) + "\n")
    throw Error(Errc::format, "manifest lacks the expected header");
  std::vector<ManifestRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 12) throw Error(Errc::format, "manifest row " + std::to_string(i) + " does not have 12 fields");
    try {
      out.push_back({f[0], f[1], f[2], f[3], parse_double(f[4]), f[5], f[6], std::stoull(f[7]), parse_double(f[8]),
                     static_cast<std::uint32_t>(std::stoul(f[9])), static_cast<std::uint32_t>(std::stoul(f[10])), f[11]});
    } catch (const std::logic_error&) {
      throw Error(Errc::format, "manifest row " + std::to_string(i) + " has a malformed number");
    }
  }
  return out;
}

namespace {

std::string file_safe(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
  return out;
}

struct PasteJob {
  ManifestRow row;
  bool reuse = false;
};

void run_job(PasteJob& job, const AssetIndex& accessories, const PasteOptions& options) {
  auto& row = job.row;
  if (!row.status.empty()) return;  // error decided during planning
  auto acc = accessories.find(row.accessory);
  if (acc == accessories.end() || acc->second.empty()) {
    row.status = "error: no accessory image for '" + row.accessory + "'";
    return;
  }
  try {
    Image base = load_png(row.base_path);
    Image accessory = load_png(acc->second.front());
    if (accessory.channels == 3) accessory = white_to_alpha(accessory, options.white_threshold);
    auto pasted = paste_accessory(base, accessory, row.seed, options.max_area_fraction);
    save_png(row.out_path, pasted.image);
    row.scale = pasted.spec.scale;
    row.x = pasted.spec.x;
    row.y = pasted.spec.y;
    row.status = "ok";
  } catch (const Error& e) {
    row.status = std::string("error: ") + e.what();
  }
}

}  // namespace

PasteStats build_paste_dataset(std::span<const ConceptPairSpec> pairs, const AssetIndex& bases,
                               const AssetIndex& accessories, const PasteOptions& options) {
  if (options.out_dir.empty()) throw Error(Errc::invalid_argument, "output directory not set");
  if (options.bases_per_pair == 0) throw Error(Errc::invalid_argument, "bases per pair must be at least 1");
  const fs::path out_dir(options.out_dir);
  const fs::path image_dir = out_dir / "images";
  const std::string manifest_path = (out_dir / "manifest.csv").string();
  std::error_code ec;
  fs::create_directories(image_dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + image_dir.string() + ": " + ec.message());

  std::unordered_map<std::string, ManifestRow> previous;
  if (fs::exists(manifest_path))
    for (auto& r : parse_manifest(read_file(manifest_path))) previous.emplace(r.example_id, std::move(r));

  std::vector<PasteJob> jobs;
  for (const auto& p : pairs) {
    const std::string stem = file_safe(p.imagenet_class_id) + "-" + file_safe(p.accessory);
    ManifestRow proto{{}, p.imagenet_class_id, p.class_name, p.accessory, p.pmi, {}, {}, 0, 0.0, 0, 0, {}};
    auto b = bases.find(p.imagenet_class_id);
    if (b == bases.end() || b->second.empty()) {
      proto.example_id = stem + "-0";
      proto.seed = SeededRng::derive_seed(options.run_seed, proto.example_id);
      proto.status = "error: no base image for class '" + p.imagenet_class_id + "'";
      jobs.push_back({std::move(proto), false});
      continue;
    }
    std::vector<std::string> pool = b->second;
    SeededRng pick(SeededRng::derive_seed(options.run_seed, "bases:" + stem));
    const std::size_t n = std::min(options.bases_per_pair, pool.size());
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(pool[k], pool[k + pick.below(pool.size() - k)]);
      ManifestRow row = proto;
      row.example_id = stem + "-" + std::to_string(k);
      row.base_path = pool[k];
      row.out_path = (image_dir / (row.example_id + ".png")).string();
      row.seed = SeededRng::derive_seed(options.run_seed, row.example_id);
      PasteJob job{std::move(row), false};
      if (auto it = previous.find(job.row.example_id); it != previous.end()) {
        const auto& old = it->second;
        if (old.status == "ok" && old.seed == job.row.seed && old.base_path == job.row.base_path &&
            old.out_path == job.row.out_path && fs::exists(old.out_path)) {
          job.row.scale = old.scale;
          job.row.x = old.x;
          job.row.y = old.y;
          job.row.status = old.status;
          job.reuse = true;
        }
      }
      jobs.push_back(std::move(job));
    }
  }

  parallel_chunks(jobs.size(), std::max(1u, options.workers), [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      if (!jobs[i].reuse) run_job(jobs[i], accessories, options);
  });

  PasteStats stats;
  std::vector<ManifestRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) {
    ++stats.rows;
    if (j.reuse) ++stats.reused;
    else if (j.row.status == "ok") ++stats.generated;
    else ++stats.errors;
    rows.push_back(std::move(j.row));
  }
  write_file_atomic(manifest_path, manifest_csv(rows));
  if (stats.errors > 0) log_warning(std::to_string(stats.errors) + " manifest row(s) recorded errors");
  return stats;
}

}  // namespace comira
