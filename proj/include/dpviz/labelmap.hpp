#pragma once

// Label-map rendering and projection of cluster centroids to input pixels.

#include <array>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "dpviz/pointset.hpp"

namespace dpviz {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kBackgroundColor{128, 128, 128};

/// Golden-angle hue walk: H = 137.508 * k mod 360, S = 0.75, V = 0.95.
Rgb palette_color(std::size_t k);

struct Palette {
  std::vector<Rgb> colors;
  Rgb background_color = kBackgroundColor;

  static Palette golden(std::size_t size);
};

struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  Rgb at(std::size_t r, std::size_t q) const {
    const std::size_t i = 3 * (r * width + q);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
};

/// Most populous id in the grid; ties go to the lowest id.
std::int32_t select_background(const LabelMap& map);

RgbImage render(const LabelMap& map, const Palette& palette);

void write_ppm(const RgbImage& img, std::ostream& out);
void write_ppm(const RgbImage& img, const std::filesystem::path& path);

struct ClusterCenter {
  std::int32_t cluster_id = 0;
  std::size_t image_index = 0;
  double input_row = 0.0;
  double input_col = 0.0;
};

/// Pixel-centroid of each non-background id, mapped to input coordinates as
/// (s * (rbar + 0.5), s * (qbar + 0.5)). Sorted by cluster id. Uses
/// select_background when the map has no background_id.
std::vector<ClusterCenter> cluster_centers(const LabelMap& map, std::size_t subsample_factor);

/// CSV with header image_index,cluster_id,input_row,input_col.
void write_centers_csv(const std::vector<ClusterCenter>& centers, std::ostream& out);

}  // namespace dpviz
