#pragma once

// NPY tensor and CSV metadata I/O.
//
// Accepted NPY: versions 1.0 and 2.0, little-endian '<f4' / '<f8', C order,
// rank 2 (n, d) or rank 4 (n, c, h, w). Written NPY is always version 1.0.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dpviz {

enum class Dtype { Float32, Float64 };

class FeatureTensor {
 public:
  FeatureTensor() = default;
  /// Validates rank, extents and finiteness; throws Error on violation.
  FeatureTensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::span<const double> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  /// Element (i, c, r, q) of a rank-4 tensor.
  double at(std::size_t i, std::size_t c, std::size_t r, std::size_t q) const {
    return data_[((i * shape_[1] + c) * shape_[2] + r) * shape_[3] + q];
  }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

FeatureTensor load_npy(const std::filesystem::path& path);

/// Parses an in-memory NPY image. load_npy is a thin wrapper around this.
FeatureTensor parse_npy(std::span<const unsigned char> bytes);

void save_npy(const FeatureTensor& tensor, const std::filesystem::path& path,
              Dtype dtype = Dtype::Float64);

/// Serializes to an NPY v1.0 byte image.
std::vector<unsigned char> encode_npy(const FeatureTensor& tensor, Dtype dtype);

struct MetaRecord {
  std::string image_id;
  std::string class_label;
  std::optional<std::string> patient_id;
};

struct DatasetMeta {
  std::vector<MetaRecord> records;
  std::size_t size() const noexcept { return records.size(); }
};

DatasetMeta load_meta(const std::filesystem::path& path);
DatasetMeta parse_meta(const std::string& text);

}  // namespace dpviz
