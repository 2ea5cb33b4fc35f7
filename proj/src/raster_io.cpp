#include "njcr/raster_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace njcr {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32" || dtype == "u32") return 4;
  if (dtype == "u8") return 1;
  throw IoError("unsupported dtype '" + dtype + "'");
}

struct RawRaster {
  RasterHeader header;
  std::string payload;
};

RasterHeader parse_header(const std::string& line, const fs::path& path) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError("malformed raster header in " + path.string() + ": " + e.what());
  }
  RasterHeader h;
  try {
    h.width = j.at("width").get<std::size_t>();
    h.height = j.at("height").get<std::size_t>();
    h.bands = j.at("bands").get<std::size_t>();
    h.dtype = j.at("dtype").get<std::string>();
    h.interleave = j.value("interleave", std::string("bsq"));
    h.byte_order = j.value("byte_order", std::string("little"));
  } catch (const json::exception& e) {
    throw IoError("malformed raster header in " + path.string() + ": " + e.what());
  }
  if (h.width == 0 || h.height == 0 || h.bands == 0) {
    throw IoError("raster header in " + path.string() + " declares an empty dimension");
  }
  if (h.byte_order != "little") throw IoError("unsupported byte order '" + h.byte_order + "'");
  if (h.interleave != "bsq" && h.interleave != "bip") {
    throw IoError("unsupported interleave '" + h.interleave + "'");
  }
  dtype_size(h.dtype);
  return h;
}

RawRaster read_raw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing raster header in " + path.string());
  RawRaster raw{parse_header(line, path), {}};
  raw.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  const std::size_t expected =
      raw.header.width * raw.header.height * raw.header.bands * dtype_size(raw.header.dtype);
  if (raw.payload.size() != expected) {
    throw IoError("payload of " + path.string() + " is " + std::to_string(raw.payload.size()) +
                  " bytes, header declares " + std::to_string(expected));
  }
  return raw;
}

void write_raw(const fs::path& path, const RasterHeader& h, const std::string& payload) {
  json j = {{"width", h.width},   {"height", h.height},         {"bands", h.bands},
            {"dtype", h.dtype},   {"interleave", h.interleave}, {"byte_order", h.byte_order}};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump() << '\n';
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

template <typename T>
std::vector<T> decode(const std::string& payload) {
  std::vector<T> out(payload.size() / sizeof(T));
  std::memcpy(out.data(), payload.data(), out.size() * sizeof(T));
  for (auto& v : out) v = to_little(v);
  return out;
}

template <typename T>
std::string encode(std::span<const T> values) {
  std::string payload(values.size() * sizeof(T), '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T v = to_little(values[i]);
    std::memcpy(payload.data() + i * sizeof(T), &v, sizeof(T));
  }
  return payload;
}

void expect_single_band(const RasterHeader& h, const std::string& dtype, const fs::path& path) {
  if (h.dtype != dtype) {
    throw IoError(path.string() + ": expected dtype " + dtype + ", found " + h.dtype);
  }
  if (h.bands != 1) throw IoError(path.string() + ": expected a single-band raster");
}

std::vector<double> floats_to_doubles(const std::vector<float>& f, const fs::path& path) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) throw IoError(path.string() + " contains non-finite values");
    out[i] = static_cast<double>(f[i]);
  }
  return out;
}

std::vector<float> doubles_to_floats(std::span<const double> d) {
  std::vector<float> out(d.size());
  std::transform(d.begin(), d.end(), out.begin(), [](double v) { return static_cast<float>(v); });
  return out;
}

}  // namespace

RasterHeader read_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing raster header in " + path.string());
  return parse_header(line, path);
}

HsiCube load_cube(const fs::path& path) {
  auto raw = read_raw(path);
  const auto& h = raw.header;
  if (h.dtype != "f32") throw IoError(path.string() + ": cube dtype must be f32");
  auto values = floats_to_doubles(decode<float>(raw.payload), path);
  if (h.interleave == "bip") {
    const std::size_t n = h.width * h.height;
    std::vector<double> bsq(values.size());
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t b = 0; b < h.bands; ++b) bsq[b * n + p] = values[p * h.bands + b];
    }
    values = std::move(bsq);
  }
  return HsiCube(h.width, h.height, h.bands, std::move(values));
}

void save_cube(const HsiCube& cube, const fs::path& path) {
  RasterHeader h{cube.width(), cube.height(), cube.bands(), "f32", "bsq", "little"};
  const auto floats = doubles_to_floats(cube.values());
  write_raw(path, h, encode<float>(floats));
}

GroundTruthMask load_mask(const fs::path& path) {
  auto raw = read_raw(path);
  expect_single_band(raw.header, "u8", path);
  return GroundTruthMask(raw.header.width, raw.header.height, decode<std::uint8_t>(raw.payload));
}

void save_mask(const GroundTruthMask& mask, const fs::path& path) {
  RasterHeader h{mask.width(), mask.height(), 1, "u8", "bsq", "little"};
  write_raw(path, h, encode<std::uint8_t>(mask.labels()));
}

ScoreMap load_scores(const fs::path& path) {
  auto raw = read_raw(path);
  expect_single_band(raw.header, "f32", path);
  return ScoreMap(raw.header.width, raw.header.height,
                  floats_to_doubles(decode<float>(raw.payload), path));
}

void save_scores(const ScoreMap& scores, const fs::path& path) {
  RasterHeader h{scores.width(), scores.height(), 1, "f32", "bsq", "little"};
  const auto floats = doubles_to_floats(scores.scores());
  write_raw(path, h, encode<float>(floats));
}

SuperpixelMap load_labels(const fs::path& path) {
  auto raw = read_raw(path);
  expect_single_band(raw.header, "u32", path);
  return SuperpixelMap(raw.header.width, raw.header.height, decode<std::uint32_t>(raw.payload));
}

void save_labels(const SuperpixelMap& labels, const fs::path& path) {
  RasterHeader h{labels.width(), labels.height(), 1, "u32", "bsq", "little"};
  write_raw(path, h, encode<std::uint32_t>(labels.labels()));
}

std::string scores_csv(const ScoreMap& scores) {
  std::ostringstream out;
  out.precision(17);
  out << "pixel_index,row,col,score\n";
  for (std::size_t i = 0; i < scores.pixel_count(); ++i) {
    out << i << ',' << i / scores.width() << ',' << i % scores.width() << ',' << scores[i] << '\n';
  }
  return out.str();
}

void write_scores_csv(const ScoreMap& scores, const fs::path& path) {
  write_text(path, scores_csv(scores));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace njcr
