#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace comira {

// 8-bit interleaved raster, RGB (3 channels) or RGBA (4).
struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 3;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::uint32_t w, std::uint32_t h, std::uint32_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(std::size_t{w} * h * c, fill) {}

  bool empty() const noexcept { return width == 0 || height == 0; }
  std::uint8_t* at(std::uint32_t x, std::uint32_t y) { return &pixels[(std::size_t{y} * width + x) * channels]; }
  const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const {
    return &pixels[(std::size_t{y} * width + x) * channels];
  }
  bool operator==(const Image&) const = default;
};

// PNG I/O. Gray, palette and 16-bit inputs are expanded to 8-bit RGB(A).
// Output bytes depend only on the pixels.
Image decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& image);
Image load_png(const std::string& path);
void save_png(const std::string& path, const Image& image);

// RGBA copy where pixels with min(R,G,B) >= threshold get alpha 0 and all
// others alpha 255. RGB is preserved.
Image white_to_alpha(const Image& rgb, std::uint8_t threshold = 245);

struct EditSpec {
  std::string base_image;
  std::string accessory_image;
  std::uint64_t seed = 0;
  double max_area_fraction = 0.10;
  double scale = 1.0;
  std::uint32_t x = 0;  // top-left of the pasted accessory
  std::uint32_t y = 0;
  std::uint32_t width = 0;  // pasted size
  std::uint32_t height = 0;
};

struct PasteResult {
  Image image;
  EditSpec spec;
};

// Scales `accessory` (RGBA) by s = min(1, sqrt(f*Ab/Aa), Wb/Wa, Hb/Ha),
// flooring the pasted size, resamples bilinearly on premultiplied values,
// places it uniformly at random fully in frame and alpha-composites it.
// Pixels outside the pasted rectangle are untouched.
PasteResult paste_accessory(const Image& base, const Image& accessory, std::uint64_t seed,
                            double max_area_fraction = 0.10);

}  // namespace comira
