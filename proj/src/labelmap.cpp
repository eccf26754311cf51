#include "dpviz/labelmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "dpviz/error.hpp"

namespace dpviz {

namespace {

std::uint8_t to_byte(double unit) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(unit * 255.0), 0L, 255L));
}

Rgb hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  return {to_byte(r + m), to_byte(g + m), to_byte(b + m)};
}

void require_nonempty(const LabelMap& map) {
  if (map.height == 0 || map.width == 0 || map.labels.size() != map.height * map.width)
    throw Error(Errc::InvalidImage, "label map is empty or inconsistent");
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Rgb palette_color(std::size_t k) {
  const double hue = std::fmod(static_cast<double>(k) * 137.508, 360.0);
  return hsv_to_rgb(hue, 0.75, 0.95);
}

Palette Palette::golden(std::size_t size) {
  Palette p;
  p.colors.reserve(size);
  for (std::size_t k = 0; k < size; ++k) p.colors.push_back(palette_color(k));
  return p;
}

std::int32_t select_background(const LabelMap& map) {
  require_nonempty(map);
  std::map<std::int32_t, std::size_t> counts;
  for (auto id : map.labels) ++counts[id];
  std::int32_t best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [id, count] : counts)  // ascending id, so ties keep the lower id
    if (count > best_count) {
      best = id;
      best_count = count;
    }
  return best;
}

RgbImage render(const LabelMap& map, const Palette& palette) {
  require_nonempty(map);
  RgbImage img{map.height, map.width, std::vector<std::uint8_t>(3 * map.labels.size())};
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    const auto id = map.labels[i];
    Rgb c;
    if (map.background_id && id == *map.background_id) {
      c = palette.background_color;
    } else {
      if (id < 0 || static_cast<std::size_t>(id) >= palette.colors.size())
        throw Error(Errc::PaletteTooSmall, "no color for cluster id " + std::to_string(id));
      c = palette.colors[static_cast<std::size_t>(id)];
    }
    std::copy(c.begin(), c.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return img;
}

void write_ppm(const RgbImage& img, std::ostream& out) {
  if (img.height == 0 || img.width == 0 || img.pixels.size() != 3 * img.height * img.width)
    throw Error(Errc::InvalidImage, "cannot write an empty or inconsistent image");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error(Errc::IoError, "PPM write failed");
}

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
  if (img.height == 0 || img.width == 0)
    throw Error(Errc::InvalidImage, "cannot write an empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  write_ppm(img, out);
}

std::vector<ClusterCenter> cluster_centers(const LabelMap& map, std::size_t subsample_factor) {
  require_nonempty(map);
  if (subsample_factor < 1) throw Error(Errc::InvalidConfig, "subsample factor must be >= 1");
  const std::int32_t background = map.background_id.value_or(select_background(map));

  struct Acc {
    double rows = 0, cols = 0;
    std::size_t count = 0;
  };
  std::map<std::int32_t, Acc> acc;
  for (std::size_t r = 0; r < map.height; ++r)
    for (std::size_t q = 0; q < map.width; ++q) {
      const auto id = map.at(r, q);
      if (id == background) continue;
      auto& a = acc[id];
      a.rows += static_cast<double>(r);
      a.cols += static_cast<double>(q);
      ++a.count;
    }
  if (acc.empty())
    throw Error(Errc::NoForegroundClusters,
                "image " + std::to_string(map.image_index) + " is entirely background");

  const double s = static_cast<double>(subsample_factor);
  std::vector<ClusterCenter> out;
  out.reserve(acc.size());
  for (const auto& [id, a] : acc) {
    const double n = static_cast<double>(a.count);
    out.push_back({id, map.image_index, s * (a.rows / n + 0.5), s * (a.cols / n + 0.5)});
  }
  return out;
}

void write_centers_csv(const std::vector<ClusterCenter>& centers, std::ostream& out) {
  out << "image_index,cluster_id,input_row,input_col\n";
  for (const auto& c : centers)
    out << c.image_index << ',' << c.cluster_id << ',' << fmt_double(c.input_row) << ','
        << fmt_double(c.input_col) << '\n';
}

}  // namespace dpviz
