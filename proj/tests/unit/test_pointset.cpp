#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "dpviz/error.hpp"
#include "dpviz/pointset.hpp"

using namespace dpviz;

namespace {

FeatureTensor iota_tensor(std::vector<std::size_t> shape) {
  std::size_t count = 1;
  for (auto e : shape) count *= e;
  std::vector<double> data(count);
  std::iota(data.begin(), data.end(), 0.0);
  return FeatureTensor(std::move(shape), std::move(data));
}

}  // namespace

TEST(FlattenSpatial, TwoChannelOrdering) {
  const FeatureTensor t({1, 2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  const auto pm = flatten_spatial(t);
  ASSERT_EQ(pm.n_points(), 4u);
  ASSERT_EQ(pm.dim(), 2u);
  const std::vector<std::vector<double>> expected{{1, 5}, {2, 6}, {3, 7}, {4, 8}};
  for (std::size_t p = 0; p < 4; ++p) {
    EXPECT_EQ(pm.row(p)[0], expected[p][0]);
    EXPECT_EQ(pm.row(p)[1], expected[p][1]);
  }
}

TEST(FlattenSpatial, PixelByPixelAgainstSource) {
  const auto t = iota_tensor({2, 3, 4, 5});
  const auto pm = flatten_spatial(t);
  ASSERT_EQ(pm.n_points(), 40u);
  ASSERT_EQ(pm.dim(), 3u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t q = 0; q < 5; ++q) {
        const std::size_t p = (i * 4 + r) * 5 + q;
        EXPECT_EQ(pm.origin(p), (RowOrigin{i, r, q}));
        for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(pm.row(p)[c], t.at(i, c, r, q));
      }
}

TEST(FlattenSpatial, RankErrors) {
  try {
    flatten_spatial(iota_tensor({2, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankError);
  }
  try {
    as_vector_points(iota_tensor({1, 1, 2, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankError);
  }
}

TEST(AsVectorPoints, IdentityReshape) {
  const auto t = iota_tensor({165, 16});
  const auto pm = as_vector_points(t);
  EXPECT_EQ(pm.n_points(), 165u);
  EXPECT_EQ(pm.dim(), 16u);
  EXPECT_EQ(pm.mode(), PointMode::Vector);
  EXPECT_TRUE(std::equal(pm.values().begin(), pm.values().end(), t.data().begin()));

  const auto one = as_vector_points(FeatureTensor({1, 3}, {4, 5, 6}));
  EXPECT_EQ(one.n_points(), 1u);
  EXPECT_EQ(one.row(0)[2], 6.0);
}

TEST(ScaleToRange, LinearMapArithmetic) {
  const PointMatrix pm(3, 1, {-2.0, 0.5, 3.0}, PointMode::Vector, {3, 1});
  const auto s = scale_to_range(pm);
  EXPECT_EQ(s.row(0)[0], 0.0);
  EXPECT_DOUBLE_EQ(s.row(1)[0], 5.0);
  EXPECT_EQ(s.row(2)[0], 10.0);
  ASSERT_TRUE(s.scale());
  EXPECT_EQ(s.scale()->src_min, -2.0);
  EXPECT_EQ(s.scale()->src_max, 3.0);
  EXPECT_EQ(s.scale()->lo, 0.0);
  EXPECT_EQ(s.scale()->hi, 10.0);
  EXPECT_FALSE(s.scale()->degenerate);
}

TEST(ScaleToRange, ConstantInputIsDegenerate) {
  const PointMatrix pm(2, 2, {4, 4, 4, 4}, PointMode::Vector, {2, 2});
  const auto s = scale_to_range(pm);
  for (double v : s.values()) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(s.scale()->degenerate);
}

TEST(ScaleToRange, Errors) {
  const PointMatrix pm(2, 1, {1, 2}, PointMode::Vector, {2, 1});
  try {
    scale_to_range(pm, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidRange);
  }
  try {
    scale_to_range(scale_to_range(pm));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AlreadyScaled);
  }
}

TEST(ScaleToRange, OrderPreservingWithExactEndpoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 80.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(37);
    for (auto& x : v) x = u(rng);
    const PointMatrix pm(37, 1, v, PointMode::Vector, {37, 1});
    const auto s = scale_to_range(pm, 0.0, 10.0);
    const auto out = s.values();
    EXPECT_EQ(*std::min_element(out.begin(), out.end()), 0.0);
    EXPECT_NEAR(*std::max_element(out.begin(), out.end()), 10.0, 1e-12);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        if (v[i] <= v[j]) ASSERT_LE(out[i], out[j]);
  }
}

TEST(ScaleFeaturesToRange, EachDimensionSpansRange) {
  const PointMatrix pm(3, 2, {0, 100, 5, 200, 10, 300}, PointMode::Vector, {3, 2});
  const auto s = scale_features_to_range(pm, 0, 1);
  EXPECT_EQ(s.row(0)[0], 0.0);
  EXPECT_EQ(s.row(2)[0], 1.0);
  EXPECT_EQ(s.row(1)[1], 0.5);
  EXPECT_EQ(s.feature_scale().size(), 2u);
}

TEST(ApplyScale, ReplaysRecordedMap) {
  const PointMatrix fitted(2, 1, {0.0, 4.0}, PointMode::Vector, {2, 1});
  const auto s = scale_to_range(fitted);
  const PointMatrix fresh(2, 1, {2.0, 8.0}, PointMode::Vector, {2, 1});
  const auto replay = apply_scale(fresh, s.scale(), {});
  EXPECT_EQ(replay.row(0)[0], 5.0);
  EXPECT_EQ(replay.row(1)[0], 20.0);  // outside the fitted range is allowed
}

TEST(UnflattenLabels, Ordering) {
  const auto pm = flatten_spatial(iota_tensor({1, 3, 2, 2}));
  const std::vector<std::int32_t> labels{0, 1, 2, 3};
  const auto maps = unflatten_labels(pm, labels);
  ASSERT_EQ(maps.size(), 1u);
  EXPECT_EQ(maps[0].at(0, 0), 0);
  EXPECT_EQ(maps[0].at(0, 1), 1);
  EXPECT_EQ(maps[0].at(1, 0), 2);
  EXPECT_EQ(maps[0].at(1, 1), 3);

  const std::vector<std::int32_t> constant(4, 7);
  const auto constant_maps = unflatten_labels(pm, constant);
  for (auto v : constant_maps[0].labels) EXPECT_EQ(v, 7);
}

TEST(UnflattenLabels, InvertsFlattenForEveryPixel) {
  const auto pm = flatten_spatial(iota_tensor({2, 3, 4, 5}));
  std::vector<std::int32_t> ids(pm.n_points());
  std::iota(ids.begin(), ids.end(), 0);
  const auto maps = unflatten_labels(pm, ids);
  ASSERT_EQ(maps.size(), 2u);
  for (const auto& m : maps)
    for (std::size_t r = 0; r < m.height; ++r)
      for (std::size_t q = 0; q < m.width; ++q) {
        const auto p = static_cast<std::size_t>(m.at(r, q));
        EXPECT_EQ(pm.origin(p), (RowOrigin{m.image_index, r, q}));
      }
}

TEST(UnflattenLabels, Errors) {
  const auto spatial = flatten_spatial(iota_tensor({1, 1, 2, 2}));
  const std::vector<std::int32_t> three(3, 0);
  try {
    unflatten_labels(spatial, three);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
  const auto vec = as_vector_points(iota_tensor({3, 2}));
  try {
    unflatten_labels(vec, three);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ModeError);
  }
}
