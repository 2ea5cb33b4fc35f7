#ifndef NJCR_CORE_HPP
#define NJCR_CORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace njcr {

// Error taxonomy. The CLI maps each family onto a distinct exit code.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Raised only when non-convergence is requested to be fatal.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Column j holds the spectrum of pixel j (row-major pixel order), rows are bands.
using PixelMatrix = Eigen::MatrixXd;

/// Hyperspectral raster. Values are held band-sequentially: value(b, p) sits
/// at index b * pixel_count() + p, with p = row * width + col.
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(std::size_t width, std::size_t height, std::size_t bands,
          std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t bands() const { return bands_; }
  std::size_t pixel_count() const { return width_ * height_; }

  double value(std::size_t band, std::size_t pixel) const {
    return values_[band * pixel_count() + pixel];
  }
  std::span<const double> values() const { return values_; }
  Eigen::VectorXd pixel(std::size_t index) const;
  Eigen::VectorXd pixel(std::size_t row, std::size_t col) const {
    return pixel(row * width_ + col);
  }

  friend bool operator==(const HsiCube&, const HsiCube&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t bands_ = 0;
  std::vector<double> values_;
};

/// Binary per-pixel labels, 1 marks an anomaly.
class GroundTruthMask {
 public:
  GroundTruthMask() = default;
  GroundTruthMask(std::size_t width, std::size_t height,
                  std::vector<std::uint8_t> labels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  bool is_anomaly(std::size_t pixel) const { return labels_[pixel] != 0; }
  std::size_t anomaly_count() const;

  friend bool operator==(const GroundTruthMask&, const GroundTruthMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> labels_;
};

/// Per-pixel detector output; finite and nonnegative.
class ScoreMap {
 public:
  ScoreMap() = default;
  ScoreMap(std::size_t width, std::size_t height, std::vector<double> scores);
  ScoreMap(std::size_t width, std::size_t height, const Eigen::VectorXd& scores);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  std::span<const double> scores() const { return scores_; }
  double operator[](std::size_t i) const { return scores_[i]; }

  friend bool operator==(const ScoreMap&, const ScoreMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> scores_;
};

/// Superpixel labelling; labels are dense in [0, label_count()).
class SuperpixelMap {
 public:
  SuperpixelMap() = default;
  SuperpixelMap(std::size_t width, std::size_t height,
                std::vector<std::uint32_t> labels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  std::size_t label_count() const { return label_count_; }
  std::span<const std::uint32_t> labels() const { return labels_; }
  std::uint32_t operator[](std::size_t i) const { return labels_[i]; }

  /// Pixel indices of every superpixel, ascending within each group.
  std::vector<std::vector<std::size_t>> members() const;

  friend bool operator==(const SuperpixelMap&, const SuperpixelMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t label_count_ = 0;
  std::vector<std::uint32_t> labels_;
};

PixelMatrix flatten(const HsiCube& cube);
HsiCube unflatten(const PixelMatrix& matrix, std::size_t width, std::size_t height);

/// Min-max normalization onto [0, 1]. A constant map normalizes to all zeros.
ScoreMap normalize_scores(const ScoreMap& scores);
std::vector<double> normalize_scores(std::span<const double> scores);

}  // namespace njcr

#endif  // NJCR_CORE_HPP
