#pragma once

// Feature tensors as point clouds.
//
// Spatial mode turns an (n, c, h, w) tensor into n*h*w points of dimension c.
// Row p = (i*h + r)*w + q holds the channel vector of image i at pixel (r, q).
// Vector mode takes an (n, d) tensor as n points of dimension d.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpviz/tensor_io.hpp"

namespace dpviz {

enum class PointMode { Spatial, Vector };

struct ScaleRecord {
  double src_min = 0.0;
  double src_max = 0.0;
  double lo = 0.0;
  double hi = 10.0;
  bool degenerate = false;

  double apply(double x) const noexcept {
    if (degenerate) return lo;
    return lo + (x - src_min) / (src_max - src_min) * (hi - lo);
  }
  friend bool operator==(const ScaleRecord&, const ScaleRecord&) = default;
};

struct RowOrigin {
  std::size_t image_index = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const RowOrigin&, const RowOrigin&) = default;
};

class PointMatrix {
 public:
  PointMatrix() = default;
  PointMatrix(std::size_t n_points, std::size_t dim, std::vector<double> values,
              PointMode mode, std::vector<std::size_t> origin_shape);

  std::size_t n_points() const noexcept { return n_points_; }
  std::size_t dim() const noexcept { return dim_; }
  PointMode mode() const noexcept { return mode_; }
  const std::vector<std::size_t>& origin_shape() const noexcept { return origin_shape_; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t p) const noexcept {
    return {values_.data() + p * dim_, dim_};
  }

  /// Global scaling record, set by scale_to_range.
  const std::optional<ScaleRecord>& scale() const noexcept { return scale_; }
  /// One record per dimension, set by scale_features_to_range.
  const std::vector<ScaleRecord>& feature_scale() const noexcept { return feature_scale_; }
  bool is_scaled() const noexcept { return scale_.has_value() || !feature_scale_.empty(); }

  /// Image index and pixel for row p (pixel is (0,0) in Vector mode).
  RowOrigin origin(std::size_t p) const;

 private:
  friend PointMatrix scale_to_range(const PointMatrix&, double, double);
  friend PointMatrix scale_features_to_range(const PointMatrix&, double, double);
  friend PointMatrix apply_scale(const PointMatrix&, const std::optional<ScaleRecord>&,
                                 const std::vector<ScaleRecord>&);

  std::size_t n_points_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  PointMode mode_ = PointMode::Vector;
  std::vector<std::size_t> origin_shape_;
  std::optional<ScaleRecord> scale_;
  std::vector<ScaleRecord> feature_scale_;
};

PointMatrix flatten_spatial(const FeatureTensor& t);
PointMatrix as_vector_points(const FeatureTensor& t);
PointMatrix to_points(const FeatureTensor& t, PointMode mode);

/// Global min-max map of every entry onto [lo, hi].
PointMatrix scale_to_range(const PointMatrix& pm, double lo = 0.0, double hi = 10.0);

/// Per-dimension min-max variant. Experimental; the pipeline default is global.
PointMatrix scale_features_to_range(const PointMatrix& pm, double lo = 0.0, double hi = 10.0);

/// Re-applies recorded scaling (from a fitted model) to fresh, unscaled points.
PointMatrix apply_scale(const PointMatrix& pm, const std::optional<ScaleRecord>& global,
                        const std::vector<ScaleRecord>& per_feature);

struct LabelMap {
  std::size_t image_index = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::int32_t> labels;  // row-major h*w
  std::optional<std::int32_t> background_id;

  std::int32_t at(std::size_t r, std::size_t q) const { return labels[r * width + q]; }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

std::vector<LabelMap> unflatten_labels(const PointMatrix& pm, std::span<const std::int32_t> labels);

}  // namespace dpviz
