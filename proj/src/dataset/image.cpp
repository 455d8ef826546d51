#include "dataset/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"

namespace comira {

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw Error(Errc::format, std::string("not a readable PNG: ") + img.message);
  const bool alpha = (img.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  img.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  Image out(img.width, img.height, alpha ? 4 : 3);
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw Error(Errc::format, "PNG decode failed: " + msg);
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty() || (image.channels != 3 && image.channels != 4))
    throw Error(Errc::invalid_argument, "can only encode non-empty RGB or RGBA images");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = image.width;
  img.height = image.height;
  img.format = image.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, image.pixels.data(), 0, nullptr))
    throw Error(Errc::internal, std::string("PNG encode failed: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr))
    throw Error(Errc::internal, std::string("PNG encode failed: ") + img.message);
  out.resize(size);
  return out;
}

Image load_png(const std::string& path) {
  auto data = read_file(path);
  try {
    return decode_png({reinterpret_cast<const std::uint8_t*>(data.data()), data.size()});
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void save_png(const std::string& path, const Image& image) {
  auto bytes = encode_png(image);
  write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

Image white_to_alpha(const Image& rgb, std::uint8_t threshold) {
  Image out(rgb.width, rgb.height, 4);
  for (std::uint32_t y = 0; y < rgb.height; ++y) {
    for (std::uint32_t x = 0; x < rgb.width; ++x) {
      const auto* s = rgb.at(x, y);
      auto* d = out.at(x, y);
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];
      d[3] = std::min({s[0], s[1], s[2]}) >= threshold ? 0 : 255;
    }
  }
  return out;
}

namespace {

// Bilinear sample of a straight-alpha raster on premultiplied values.
// Writes straight RGBA to `out`.
void sample_bilinear(const Image& src, double sx, double sy, std::uint8_t out[4]) {
  sx = std::clamp(sx, 0.0, static_cast<double>(src.width - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(src.height - 1));
  const auto x0 = static_cast<std::uint32_t>(sx), y0 = static_cast<std::uint32_t>(sy);
  const auto x1 = std::min(x0 + 1, src.width - 1), y1 = std::min(y0 + 1, src.height - 1);
  const double fx = sx - x0, fy = sy - y0;
  const std::uint32_t xs[4] = {x0, x1, x0, x1}, ys[4] = {y0, y0, y1, y1};
  const double ws[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  double a = 0.0, c[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < 4; ++k) {
    const auto* p = src.at(xs[k], ys[k]);
    const double pa = src.channels == 4 ? p[3] : 255.0;
    a += ws[k] * pa;
    for (int ch = 0; ch < 3; ++ch) c[ch] += ws[k] * p[ch] * pa;
  }
  for (int ch = 0; ch < 3; ++ch)
    out[ch] = a > 0 ? static_cast<std::uint8_t>(std::clamp(std::lround(c[ch] / a), 0L, 255L)) : 0;
  out[3] = static_cast<std::uint8_t>(std::clamp(std::lround(a), 0L, 255L));
}

}  // namespace

PasteResult paste_accessory(const Image& base, const Image& accessory, std::uint64_t seed, double max_area_fraction) {
  if (base.empty() || accessory.empty()) throw Error(Errc::invalid_argument, "base and accessory must be non-empty");
  if (base.channels < 3 || accessory.channels < 3)
    throw Error(Errc::invalid_argument, "base and accessory must be RGB or RGBA");
  if (!(max_area_fraction > 0.0) || max_area_fraction > 1.0)
    throw Error(Errc::invalid_argument, "max area fraction must be in (0, 1]");

  const double wb = base.width, hb = base.height, wa = accessory.width, ha = accessory.height;
  const double limit = max_area_fraction * wb * hb;
  const double s = std::min({1.0, std::sqrt(limit / (wa * ha)), wb / wa, hb / ha});
  auto w = static_cast<std::uint32_t>(std::floor(wa * s));
  auto h = static_cast<std::uint32_t>(std::floor(ha * s));
  // Rounding in wa * s must never push the area over the limit.
  while (w > 0 && h > 0 && static_cast<double>(w) * h > limit) (w >= h ? w : h) -= 1;
  if (w == 0 || h == 0)
    throw Error(Errc::invalid_argument, "accessory cannot be scaled into the base: scaled size would be zero");

  SeededRng rng(seed);
  const auto x0 = static_cast<std::uint32_t>(rng.below(base.width - w + 1));
  const auto y0 = static_cast<std::uint32_t>(rng.below(base.height - h + 1));

  PasteResult result{base, {}};
  const double rx = wa / w, ry = ha / h;
  std::uint8_t px[4];
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      if (w == accessory.width && h == accessory.height) {
        const auto* p = accessory.at(x, y);
        std::memcpy(px, p, 3);
        px[3] = accessory.channels == 4 ? p[3] : 255;
      } else {
        sample_bilinear(accessory, (x + 0.5) * rx - 0.5, (y + 0.5) * ry - 0.5, px);
      }
      auto* d = result.image.at(x0 + x, y0 + y);
      const unsigned a = px[3];
      for (int ch = 0; ch < 3; ++ch) d[ch] = static_cast<std::uint8_t>((px[ch] * a + d[ch] * (255 - a) + 127) / 255);
    }
  }
  result.spec.seed = seed;
  result.spec.max_area_fraction = max_area_fraction;
  result.spec.scale = s;
  result.spec.x = x0;
  result.spec.y = y0;
  result.spec.width = w;
  result.spec.height = h;
  return result;
}

}  // namespace comira
