#include "dpviz/pointset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpviz/error.hpp"

namespace dpviz {

PointMatrix::PointMatrix(std::size_t n_points, std::size_t dim, std::vector<double> values,
                         PointMode mode, std::vector<std::size_t> origin_shape)
    : n_points_(n_points),
      dim_(dim),
      values_(std::move(values)),
      mode_(mode),
      origin_shape_(std::move(origin_shape)) {
  if (values_.size() != n_points_ * dim_)
    throw Error(Errc::LengthMismatch, "point matrix " + std::to_string(n_points_) + "x" +
                                          std::to_string(dim_) + " given " +
                                          std::to_string(values_.size()) + " values");
  if (mode_ == PointMode::Spatial) {
    if (origin_shape_.size() != 4)
      throw Error(Errc::RankError, "spatial point matrix needs a rank-4 origin shape");
    const auto& s = origin_shape_;
    if (n_points_ != s[0] * s[2] * s[3] || dim_ != s[1])
      throw Error(Errc::LengthMismatch, "spatial point matrix does not match origin shape");
  } else if (!origin_shape_.empty()) {
    if (origin_shape_.size() != 2 || origin_shape_[0] != n_points_ || origin_shape_[1] != dim_)
      throw Error(Errc::LengthMismatch, "vector point matrix does not match origin shape");
  }
}

RowOrigin PointMatrix::origin(std::size_t p) const {
  if (mode_ == PointMode::Vector) return {p, 0, 0};
  const std::size_t h = origin_shape_[2];
  const std::size_t w = origin_shape_[3];
  return {p / (h * w), (p / w) % h, p % w};
}

PointMatrix flatten_spatial(const FeatureTensor& t) {
  if (t.rank() != 4)
    throw Error(Errc::RankError, "flatten_spatial needs rank 4, got " + std::to_string(t.rank()));
  const std::size_t n = t.extent(0), c = t.extent(1), h = t.extent(2), w = t.extent(3);
  const std::size_t plane = h * w;
  std::vector<double> values(n * plane * c);
  const auto src = t.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* map = src.data() + (i * c + ch) * plane;
      double* dst = values.data() + i * plane * c + ch;
      for (std::size_t px = 0; px < plane; ++px) dst[px * c] = map[px];
    }
  }
  return PointMatrix(n * plane, c, std::move(values), PointMode::Spatial, t.shape());
}

PointMatrix as_vector_points(const FeatureTensor& t) {
  if (t.rank() != 2)
    throw Error(Errc::RankError, "as_vector_points needs rank 2, got " + std::to_string(t.rank()));
  const auto src = t.data();
  return PointMatrix(t.extent(0), t.extent(1), std::vector<double>(src.begin(), src.end()),
                     PointMode::Vector, t.shape());
}

PointMatrix to_points(const FeatureTensor& t, PointMode mode) {
  return mode == PointMode::Spatial ? flatten_spatial(t) : as_vector_points(t);
}

namespace {

ScaleRecord make_record(double mn, double mx, double lo, double hi) {
  return ScaleRecord{mn, mx, lo, hi, mx == mn};
}

void check_range(const PointMatrix& pm, double lo, double hi) {
  if (!(hi > lo)) throw Error(Errc::InvalidRange, "hi must exceed lo");
  if (pm.is_scaled()) throw Error(Errc::AlreadyScaled, "point matrix already scaled");
}

}  // namespace

PointMatrix scale_to_range(const PointMatrix& pm, double lo, double hi) {
  check_range(pm, lo, hi);
  PointMatrix out = pm;
  if (out.values_.empty()) {
    out.scale_ = make_record(0.0, 0.0, lo, hi);
    return out;
  }
  const auto [mn, mx] = std::minmax_element(out.values_.begin(), out.values_.end());
  const ScaleRecord rec = make_record(*mn, *mx, lo, hi);
  for (double& v : out.values_) v = rec.apply(v);
  out.scale_ = rec;
  return out;
}

PointMatrix scale_features_to_range(const PointMatrix& pm, double lo, double hi) {
  check_range(pm, lo, hi);
  PointMatrix out = pm;
  const std::size_t d = out.dim_;
  std::vector<double> mn(d, INFINITY), mx(d, -INFINITY);
  for (std::size_t p = 0; p < out.n_points_; ++p)
    for (std::size_t j = 0; j < d; ++j) {
      const double v = out.values_[p * d + j];
      mn[j] = std::min(mn[j], v);
      mx[j] = std::max(mx[j], v);
    }
  out.feature_scale_.resize(d);
  for (std::size_t j = 0; j < d; ++j) out.feature_scale_[j] = make_record(mn[j], mx[j], lo, hi);
  for (std::size_t p = 0; p < out.n_points_; ++p)
    for (std::size_t j = 0; j < d; ++j)
      out.values_[p * d + j] = out.feature_scale_[j].apply(out.values_[p * d + j]);
  return out;
}

PointMatrix apply_scale(const PointMatrix& pm, const std::optional<ScaleRecord>& global,
                        const std::vector<ScaleRecord>& per_feature) {
  if (pm.is_scaled()) throw Error(Errc::AlreadyScaled, "point matrix already scaled");
  PointMatrix out = pm;
  if (global) {
    for (double& v : out.values_) v = global->apply(v);
    out.scale_ = global;
  } else if (!per_feature.empty()) {
    if (per_feature.size() != out.dim_)
      throw Error(Errc::DimMismatch, "per-feature scaling has " +
                                         std::to_string(per_feature.size()) + " records for dim " +
                                         std::to_string(out.dim_));
    for (std::size_t p = 0; p < out.n_points_; ++p)
      for (std::size_t j = 0; j < out.dim_; ++j)
        out.values_[p * out.dim_ + j] = per_feature[j].apply(out.values_[p * out.dim_ + j]);
    out.feature_scale_ = per_feature;
  }
  return out;
}

std::vector<LabelMap> unflatten_labels(const PointMatrix& pm,
                                       std::span<const std::int32_t> labels) {
  if (pm.mode() != PointMode::Spatial)
    throw Error(Errc::ModeError, "unflatten_labels needs a spatial point matrix");
  if (labels.size() != pm.n_points())
    throw Error(Errc::LengthMismatch, std::to_string(labels.size()) + " labels for " +
                                          std::to_string(pm.n_points()) + " points");
  const auto& s = pm.origin_shape();
  const std::size_t n = s[0], h = s[2], w = s[3];
  std::vector<LabelMap> maps(n);
  for (std::size_t i = 0; i < n; ++i) {
    maps[i].image_index = i;
    maps[i].height = h;
    maps[i].width = w;
    const auto first = labels.begin() + static_cast<std::ptrdiff_t>(i * h * w);
    maps[i].labels.assign(first, first + static_cast<std::ptrdiff_t>(h * w));
  }
  return maps;
}

}  // namespace dpviz
