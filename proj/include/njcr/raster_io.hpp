#ifndef NJCR_RASTER_IO_HPP
#define NJCR_RASTER_IO_HPP

// Raster files are a single JSON header line terminated by '\n' followed by
// the raw little-endian payload:
//
//   {"bands":3,"byte_order":"little","dtype":"f32","height":2,"interleave":"bsq","width":2}
//   <width*height*bands elements>
//
// Cubes are f32, masks u8, superpixel labels u32 and score maps f32, all with
// the same header scheme (bands == 1 for the single-layer rasters). The
// reader accepts "bsq" and "bip" interleave; the writers always emit "bsq".

#include "njcr/core.hpp"

#include <filesystem>
#include <string>

namespace njcr {

struct RasterHeader {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 0;
  std::string dtype;
  std::string interleave = "bsq";
  std::string byte_order = "little";
};

RasterHeader read_header(const std::filesystem::path& path);

HsiCube load_cube(const std::filesystem::path& path);
void save_cube(const HsiCube& cube, const std::filesystem::path& path);

GroundTruthMask load_mask(const std::filesystem::path& path);
void save_mask(const GroundTruthMask& mask, const std::filesystem::path& path);

ScoreMap load_scores(const std::filesystem::path& path);
void save_scores(const ScoreMap& scores, const std::filesystem::path& path);

SuperpixelMap load_labels(const std::filesystem::path& path);
void save_labels(const SuperpixelMap& labels, const std::filesystem::path& path);

/// `pixel_index,row,col,score` rows with LF endings.
void write_scores_csv(const ScoreMap& scores, const std::filesystem::path& path);
std::string scores_csv(const ScoreMap& scores);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace njcr

#endif  // NJCR_RASTER_IO_HPP
