#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "dpviz/error.hpp"
#include "dpviz/tensor_io.hpp"
#include "test_support.hpp"

using namespace dpviz;
using dpviz::testing::TempDir;

namespace {

// Hand-assembled NPY v1.0 image: preamble, header text, payload.
std::string npy_bytes(const std::string& dict, const std::string& payload,
                      unsigned char major = 1) {
  std::string header = dict;
  const std::size_t pre = major == 1 ? 10 : 12;
  while ((pre + header.size() + 1) % 64 != 0) header.push_back(' ');
  header.push_back('\n');
  std::string out = "\x93NUMPY";
  out.push_back(static_cast<char>(major));
  out.push_back(0);
  out.push_back(static_cast<char>(header.size() & 0xff));
  out.push_back(static_cast<char>(header.size() >> 8));
  if (major != 1) {
    out.push_back(0);
    out.push_back(0);
  }
  return out + header + payload;
}

std::string f32_payload(std::initializer_list<float> values) {
  std::string s;
  for (float v : values) s.append(reinterpret_cast<const char*>(&v), 4);
  return s;
}

std::string f64_payload(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) s.append(reinterpret_cast<const char*>(&v), 8);
  return s;
}

Errc load_error(const std::string& bytes) {
  try {
    parse_npy({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::IoError;
}

}  // namespace

TEST(LoadNpy, HandBuiltFloat32Fixture) {
  TempDir dir;
  dpviz::testing::write_bytes(
      dir / "a.npy", npy_bytes("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3), }",
                               f32_payload({1, 2, 3, 4, 5, 6})));
  const auto t = load_npy(dir / "a.npy");
  EXPECT_EQ(t.shape(), (std::vector<std::size_t>{2, 3}));
  const std::vector<double> expected{1, 2, 3, 4, 5, 6};
  EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), expected.begin()));
}

TEST(LoadNpy, Version2Header) {
  const auto bytes = npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 2), }",
                               f64_payload({0.25, -7.5}), 2);
  const auto t = parse_npy({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
  EXPECT_EQ(t.data()[1], -7.5);
}

TEST(LoadNpy, RejectsBadInputs) {
  const std::string ok_dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1), }";
  auto bad_magic = npy_bytes(ok_dict, f64_payload({1}));
  bad_magic[1] = 'X';
  EXPECT_EQ(load_error(bad_magic), Errc::MagicMismatch);
  EXPECT_EQ(load_error(npy_bytes(ok_dict, f64_payload({1}), 3)), Errc::UnsupportedVersion);
  EXPECT_EQ(load_error(npy_bytes("{'descr': '<i4', 'fortran_order': False, 'shape': (1, 1), }",
                                 "\0\0\0\0")),
            Errc::UnsupportedDtype);
  EXPECT_EQ(load_error(npy_bytes("{'descr': '>f8', 'fortran_order': False, 'shape': (1, 1), }",
                                 f64_payload({1}))),
            Errc::UnsupportedDtype);
  EXPECT_EQ(load_error(npy_bytes("{'descr': '<f8', 'fortran_order': True, 'shape': (1, 1), }",
                                 f64_payload({1}))),
            Errc::FortranOrderUnsupported);
  EXPECT_EQ(load_error(npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (3,), }",
                                 f64_payload({1, 2, 3}))),
            Errc::ShapeRankUnsupported);
  EXPECT_EQ(load_error(npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 2, 3), }",
                                 f64_payload({1, 2, 3, 4, 5, 6}))),
            Errc::ShapeRankUnsupported);
  EXPECT_EQ(load_error(npy_bytes(ok_dict, f64_payload({std::nan("")}))), Errc::NonFiniteData);
  EXPECT_EQ(load_error(npy_bytes(ok_dict, f64_payload({INFINITY}))), Errc::NonFiniteData);
  EXPECT_EQ(load_error(npy_bytes(ok_dict, "")), Errc::TruncatedData);
}

TEST(LoadNpy, MissingFileIsIoError) {
  try {
    load_npy("/nonexistent/dir/x.npy");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
}

TEST(SaveNpy, HeaderBlockAlignedAndNewlineTerminated) {
  const FeatureTensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto bytes = encode_npy(t, Dtype::Float64);
  const std::size_t header_len = bytes[8] | (bytes[9] << 8);
  EXPECT_EQ((10 + header_len) % 64, 0u);
  EXPECT_EQ(bytes[10 + header_len - 1], 0x0A);
  EXPECT_EQ(bytes.size(), 10 + header_len + 6 * 8);
  const std::string text(bytes.begin() + 10, bytes.begin() + 10 + static_cast<long>(header_len));
  EXPECT_EQ(text.rfind("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }", 0), 0u);
}

TEST(SaveNpy, DegenerateShapesRejected) {
  EXPECT_THROW(FeatureTensor({}, {}), Error);
  try {
    FeatureTensor({0, 3}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidShape);
  }
  try {
    encode_npy(FeatureTensor{}, Dtype::Float64);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidShape);
  }
}

TEST(SaveNpy, RoundTripIsBitExactForFloat64) {
  TempDir dir;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> shape =
        trial % 2 ? std::vector<std::size_t>{1 + rng() % 4, 1 + rng() % 5, 1 + rng() % 3, 1 + rng() % 6}
                  : std::vector<std::size_t>{1 + rng() % 30, 1 + rng() % 30};
    std::size_t count = 1;
    for (auto e : shape) count *= e;
    std::vector<double> data(count);
    for (auto& v : data) v = u(rng) * std::ldexp(1.0, static_cast<int>(rng() % 200) - 100);
    const FeatureTensor t(shape, data);
    save_npy(t, dir / "t.npy", Dtype::Float64);
    const auto back = load_npy(dir / "t.npy");
    ASSERT_EQ(back.shape(), t.shape());
    ASSERT_EQ(std::memcmp(back.data().data(), t.data().data(), count * 8), 0);
  }
}

TEST(SaveNpy, Float32RoundsValues) {
  TempDir dir;
  const FeatureTensor t({1, 2}, {0.1, 3.0});
  save_npy(t, dir / "f.npy", Dtype::Float32);
  const auto back = load_npy(dir / "f.npy");
  EXPECT_EQ(back.data()[0], static_cast<double>(0.1f));
  EXPECT_EQ(back.data()[1], 3.0);
}

TEST(SaveNpy, UnwritablePathIsIoError) {
  try {
    save_npy(FeatureTensor({1, 1}, {1.0}), "/nonexistent/dir/x.npy");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
}

// numpy writes a (1, 64, 224, 224) float32 tensor; we load it and compare the
// element count and a float64 sum numpy computed independently.
TEST(CrossTool, LoadsNumpyWrittenConvTensor) {
  if (!dpviz::testing::python_has("numpy")) GTEST_SKIP() << "python3/numpy unavailable";
  TempDir dir;
  const auto npy = (dir / "conv.npy").string();
  const auto sum_file = (dir / "sum.txt").string();
  const std::string script =
      "import numpy as np\n"
      "rng = np.random.default_rng(7)\n"
      "a = rng.standard_normal((1, 64, 224, 224)).astype(np.float32)\n"
      "np.save(\"" + npy + "\", a)\n"
      "open(\"" + sum_file + "\", \"w\").write(repr(float(a.astype(np.float64).sum())) + \" \" + "
      "repr(float(a[0, 5, 17, 200])))\n";
  ASSERT_EQ(dpviz::testing::run_python(script), 0);
  const auto t = load_npy(npy);
  EXPECT_EQ(t.shape(), (std::vector<std::size_t>{1, 64, 224, 224}));
  std::istringstream in(dpviz::testing::read_bytes(sum_file));
  double expected_sum = 0, probe = 0;
  in >> expected_sum >> probe;
  double sum = 0;
  for (double v : t.data()) sum += v;
  EXPECT_NEAR(sum, expected_sum, 1e-6 * std::max(1.0, std::abs(expected_sum)));
  EXPECT_EQ(t.at(0, 5, 17, 200), probe);
}

TEST(CrossTool, NumpyReadsWhatWeWrite) {
  if (!dpviz::testing::python_has("numpy")) GTEST_SKIP() << "python3/numpy unavailable";
  TempDir dir;
  std::vector<double> data(2 * 3 * 4 * 5);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = 0.5 * static_cast<double>(i) - 7.25;
  save_npy(FeatureTensor({2, 3, 4, 5}, data), dir / "ours.npy", Dtype::Float64);
  save_npy(FeatureTensor({2, 3, 4, 5}, data), dir / "ours32.npy", Dtype::Float32);
  const std::string script =
      "import numpy as np\n"
      "for name in (\"ours.npy\", \"ours32.npy\"):\n"
      "    a = np.load(\"" + dir.path().string() + "/\" + name)\n"
      "    assert a.shape == (2, 3, 4, 5), a.shape\n"
      "    assert np.array_equal(a.ravel(), 0.5 * np.arange(120) - 7.25)\n";
  EXPECT_EQ(dpviz::testing::run_python(script), 0);
}

TEST(LoadMeta, PreservesOrder) {
  const auto meta = parse_meta("image_id,class_label,patient_id\na,benign,p1\nb,benign,\nc,malign,p2\n");
  ASSERT_EQ(meta.size(), 3u);
  EXPECT_EQ(meta.records[0].class_label, "benign");
  EXPECT_EQ(meta.records[1].class_label, "benign");
  EXPECT_EQ(meta.records[2].class_label, "malign");
  EXPECT_EQ(meta.records[0].patient_id, "p1");
  EXPECT_FALSE(meta.records[1].patient_id.has_value());
}

TEST(LoadMeta, Errors) {
  auto code = [](const std::string& text) {
    try {
      parse_meta(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::IoError;
  };
  EXPECT_EQ(code("image_id,class_label,patient_id\na,benign,\na,malign,\n"), Errc::DuplicateImageId);
  EXPECT_EQ(code("image_id,patient_id\na,p\n"), Errc::MissingColumn);
  EXPECT_EQ(code(""), Errc::EmptyFile);
  EXPECT_EQ(code("image_id,class_label,patient_id\n"), Errc::EmptyFile);
}

TEST(LoadMeta, DatasetCardinality165) {
  TempDir dir;
  std::string text = "image_id,class_label,patient_id\r\n";
  for (int i = 0; i < 165; ++i)
    text += "img_" + std::to_string(i) + "," + (i % 3 ? "benign" : "malign") + ",p" +
            std::to_string(i % 16) + "\r\n";
  dpviz::testing::write_bytes(dir / "meta.csv", text);
  const auto meta = load_meta(dir / "meta.csv");
  EXPECT_EQ(meta.size(), 165u);
  EXPECT_EQ(meta.records[164].image_id, "img_164");
}
