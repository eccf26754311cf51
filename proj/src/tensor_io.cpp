#include "dpviz/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "dpviz/error.hpp"

namespace dpviz {

namespace {

constexpr unsigned char kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read in place; big-endian hosts need byte swapping");

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

// Minimal reader for the Python dict literal NPY headers use.
struct HeaderParser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                                 text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  }
  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c))
      throw Error(Errc::MalformedHeader, std::string("expected '") + c + "' in NPY header");
  }
  std::string quoted() {
    skip_ws();
    if (pos >= text.size() || (text[pos] != '\'' && text[pos] != '"'))
      throw Error(Errc::MalformedHeader, "expected string in NPY header");
    const char q = text[pos++];
    const auto end = text.find(q, pos);
    if (end == std::string_view::npos)
      throw Error(Errc::MalformedHeader, "unterminated string in NPY header");
    std::string s(text.substr(pos, end - pos));
    pos = end + 1;
    return s;
  }
  bool boolean() {
    skip_ws();
    if (text.substr(pos, 4) == "True") {
      pos += 4;
      return true;
    }
    if (text.substr(pos, 5) == "False") {
      pos += 5;
      return false;
    }
    throw Error(Errc::MalformedHeader, "expected True/False in NPY header");
  }
  std::vector<std::size_t> tuple() {
    expect('(');
    std::vector<std::size_t> out;
    while (!consume(')')) {
      skip_ws();
      std::size_t v = 0;
      bool any = false;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        v = v * 10 + static_cast<std::size_t>(text[pos] - '0');
        ++pos;
        any = true;
      }
      // numpy may write long suffixes on Python 2 era files
      if (pos < text.size() && text[pos] == 'L') ++pos;
      if (!any) throw Error(Errc::MalformedHeader, "bad shape entry in NPY header");
      out.push_back(v);
      if (!consume(',')) {
        expect(')');
        break;
      }
    }
    return out;
  }
};

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

NpyHeader parse_header(std::string_view text) {
  HeaderParser p{text};
  NpyHeader h;
  bool has_descr = false, has_order = false, has_shape = false;
  p.expect('{');
  while (!p.consume('}')) {
    const std::string key = p.quoted();
    p.expect(':');
    if (key == "descr") {
      h.descr = p.quoted();
      has_descr = true;
    } else if (key == "fortran_order") {
      h.fortran_order = p.boolean();
      has_order = true;
    } else if (key == "shape") {
      h.shape = p.tuple();
      has_shape = true;
    } else {
      throw Error(Errc::MalformedHeader, "unknown NPY header key '" + key + "'");
    }
    if (!p.consume(',')) {
      p.expect('}');
      break;
    }
  }
  if (!has_descr || !has_order || !has_shape)
    throw Error(Errc::MalformedHeader, "NPY header lacks descr/fortran_order/shape");
  return h;
}

}  // namespace

FeatureTensor::FeatureTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw Error(Errc::InvalidShape, "empty shape");
  if (shape_.size() != 2 && shape_.size() != 4)
    throw Error(Errc::ShapeRankUnsupported,
                "rank " + std::to_string(shape_.size()) + " (expected 2 or 4)");
  std::size_t count = 1;
  for (auto e : shape_) {
    if (e == 0) throw Error(Errc::InvalidShape, "zero extent in " + shape_string(shape_));
    count *= e;
  }
  if (count != data_.size())
    throw Error(Errc::InvalidShape, "shape " + shape_string(shape_) + " needs " +
                                        std::to_string(count) + " values, got " +
                                        std::to_string(data_.size()));
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i]))
      throw Error(Errc::NonFiniteData, "non-finite value at flat index " + std::to_string(i));
}

FeatureTensor parse_npy(std::span<const unsigned char> bytes) {
  if (bytes.size() < 10 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw Error(Errc::MagicMismatch, "not an NPY file");
  const unsigned major = bytes[6];
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = bytes[8] | (std::size_t{bytes[9]} << 8);
    offset = 10;
  } else if (major == 2) {
    if (bytes.size() < 12) throw Error(Errc::TruncatedData, "NPY v2 preamble truncated");
    header_len = bytes[8] | (std::size_t{bytes[9]} << 8) | (std::size_t{bytes[10]} << 16) |
                 (std::size_t{bytes[11]} << 24);
    offset = 12;
  } else {
    throw Error(Errc::UnsupportedVersion, "NPY major version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) throw Error(Errc::TruncatedData, "NPY header truncated");

  const std::string_view text(reinterpret_cast<const char*>(bytes.data() + offset), header_len);
  const NpyHeader h = parse_header(text);

  std::size_t width = 0;
  if (h.descr == "<f4") width = 4;
  else if (h.descr == "<f8") width = 8;
  else throw Error(Errc::UnsupportedDtype, "descr '" + h.descr + "'");
  if (h.fortran_order) throw Error(Errc::FortranOrderUnsupported, "fortran_order is True");
  if (h.shape.size() != 2 && h.shape.size() != 4)
    throw Error(Errc::ShapeRankUnsupported, "shape " + shape_string(h.shape));

  std::size_t count = 1;
  for (auto e : h.shape) count *= e;
  if (count == 0) throw Error(Errc::InvalidShape, "zero extent in " + shape_string(h.shape));

  const std::size_t payload = offset + header_len;
  if (bytes.size() - payload < count * width)
    throw Error(Errc::TruncatedData, "NPY payload has " + std::to_string(bytes.size() - payload) +
                                         " bytes, need " + std::to_string(count * width));

  std::vector<double> data(count);
  const unsigned char* src = bytes.data() + payload;
  if (width == 8) {
    std::memcpy(data.data(), src, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, src + 4 * i, 4);
      data[i] = static_cast<double>(f);
    }
  }
  return FeatureTensor(h.shape, std::move(data));
}

FeatureTensor load_npy(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_npy(bytes);
}

std::vector<unsigned char> encode_npy(const FeatureTensor& tensor, Dtype dtype) {
  if (tensor.rank() == 0) throw Error(Errc::InvalidShape, "empty shape");
  std::string header = "{'descr': '";
  header += dtype == Dtype::Float64 ? "<f8" : "<f4";
  header += "', 'fortran_order': False, 'shape': " + shape_string(tensor.shape()) + ", }";
  // preamble (10) + text + '\n' rounded up to a multiple of 64
  const std::size_t unpadded = 10 + header.size() + 1;
  const std::size_t total = (unpadded + 63) / 64 * 64;
  header.append(total - unpadded, ' ');
  header.push_back('\n');

  const std::size_t width = dtype == Dtype::Float64 ? 8 : 4;
  std::vector<unsigned char> out;
  out.reserve(total + tensor.size() * width);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<unsigned char>(header.size() & 0xff));
  out.push_back(static_cast<unsigned char>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());

  const auto data = tensor.data();
  const std::size_t base = out.size();
  out.resize(base + data.size() * width);
  if (dtype == Dtype::Float64) {
    std::memcpy(out.data() + base, data.data(), data.size() * 8);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const float f = static_cast<float>(data[i]);
      std::memcpy(out.data() + base + 4 * i, &f, 4);
    }
  }
  return out;
}

void save_npy(const FeatureTensor& tensor, const std::filesystem::path& path, Dtype dtype) {
  const auto bytes = encode_npy(tensor, dtype);
  write_file(path, bytes);
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                           : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

DatasetMeta parse_meta(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw Error(Errc::EmptyFile, "metadata CSV has no header");

  std::string header = lines.front();
  if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
  const auto columns = split_csv_line(header);
  auto find_col = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  };
  const auto id_col = find_col("image_id");
  const auto class_col = find_col("class_label");
  const auto patient_col = find_col("patient_id");
  if (!id_col) throw Error(Errc::MissingColumn, "image_id");
  if (!class_col) throw Error(Errc::MissingColumn, "class_label");
  if (lines.size() == 1) throw Error(Errc::EmptyFile, "metadata CSV has no data rows");

  DatasetMeta meta;
  std::unordered_set<std::string> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = split_csv_line(lines[li]);
    auto field = [&](std::size_t col) -> const std::string& {
      if (col >= fields.size())
        throw Error(Errc::MissingColumn, "row " + std::to_string(li) + " has " +
                                             std::to_string(fields.size()) + " fields");
      return fields[col];
    };
    MetaRecord rec;
    rec.image_id = field(*id_col);
    rec.class_label = field(*class_col);
    if (patient_col && *patient_col < fields.size() && !fields[*patient_col].empty())
      rec.patient_id = fields[*patient_col];
    if (!seen.insert(rec.image_id).second)
      throw Error(Errc::DuplicateImageId, rec.image_id);
    meta.records.push_back(std::move(rec));
  }
  return meta;
}

DatasetMeta load_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_meta(ss.str());
}

}  // namespace dpviz
