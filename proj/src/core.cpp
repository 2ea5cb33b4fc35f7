#include "njcr/core.hpp"

#include <algorithm>
#include <cmath>

namespace njcr {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(what) + " contains non-finite values");
    }
  }
}

}  // namespace

HsiCube::HsiCube(std::size_t width, std::size_t height, std::size_t bands,
                 std::vector<double> values)
    : width_(width), height_(height), bands_(bands), values_(std::move(values)) {
  if (bands_ == 0) throw ConfigError("cube must have at least one band");
  if (width_ == 0 || height_ == 0) throw ConfigError("cube must have at least one pixel");
  if (values_.size() != width_ * height_ * bands_) {
    throw ConfigError("cube payload length " + std::to_string(values_.size()) +
                      " does not match " + std::to_string(width_) + "x" +
                      std::to_string(height_) + "x" + std::to_string(bands_));
  }
  require_finite(values_, "cube");
}

Eigen::VectorXd HsiCube::pixel(std::size_t index) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(bands_));
  const std::size_t n = pixel_count();
  for (std::size_t b = 0; b < bands_; ++b) out(static_cast<Eigen::Index>(b)) = values_[b * n + index];
  return out;
}

GroundTruthMask::GroundTruthMask(std::size_t width, std::size_t height,
                                 std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width_ == 0 || height_ == 0) throw ConfigError("mask must have at least one pixel");
  if (labels_.size() != width_ * height_) throw ConfigError("mask size mismatch");
  for (auto& l : labels_) {
    if (l > 1) throw ConfigError("mask labels must be 0 or 1");
  }
}

std::size_t GroundTruthMask::anomaly_count() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), std::uint8_t{1}));
}

ScoreMap::ScoreMap(std::size_t width, std::size_t height, std::vector<double> scores)
    : width_(width), height_(height), scores_(std::move(scores)) {
  if (width_ == 0 || height_ == 0) throw ConfigError("score map must have at least one pixel");
  if (scores_.size() != width_ * height_) throw ConfigError("score map size mismatch");
  require_finite(scores_, "score map");
  for (double s : scores_) {
    if (s < 0.0) throw NumericError("score map contains negative scores");
  }
}

ScoreMap::ScoreMap(std::size_t width, std::size_t height, const Eigen::VectorXd& scores)
    : ScoreMap(width, height, std::vector<double>(scores.data(), scores.data() + scores.size())) {}

SuperpixelMap::SuperpixelMap(std::size_t width, std::size_t height,
                             std::vector<std::uint32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width_ == 0 || height_ == 0) throw ConfigError("superpixel map must have at least one pixel");
  if (labels_.size() != width_ * height_) throw ConfigError("superpixel map size mismatch");
  const std::uint32_t max_label = *std::max_element(labels_.begin(), labels_.end());
  label_count_ = static_cast<std::size_t>(max_label) + 1;
  std::vector<bool> seen(label_count_, false);
  for (auto l : labels_) seen[l] = true;
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ConfigError("superpixel labels must be dense (every label non-empty)");
  }
}

std::vector<std::vector<std::size_t>> SuperpixelMap::members() const {
  std::vector<std::vector<std::size_t>> groups(label_count_);
  for (std::size_t i = 0; i < labels_.size(); ++i) groups[labels_[i]].push_back(i);
  return groups;
}

PixelMatrix flatten(const HsiCube& cube) {
  const auto n = static_cast<Eigen::Index>(cube.pixel_count());
  const auto l = static_cast<Eigen::Index>(cube.bands());
  // The band-sequential buffer is exactly an L x N row-major matrix.
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cube.values().data(), l, n);
}

HsiCube unflatten(const PixelMatrix& matrix, std::size_t width, std::size_t height) {
  if (static_cast<std::size_t>(matrix.cols()) != width * height) {
    throw ConfigError("matrix column count does not match width*height");
  }
  std::vector<double> values(static_cast<std::size_t>(matrix.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), matrix.rows(), matrix.cols()) = matrix;
  return HsiCube(width, height, static_cast<std::size_t>(matrix.rows()), std::move(values));
}

std::vector<double> normalize_scores(std::span<const double> scores) {
  if (scores.empty()) throw ConfigError("cannot normalize an empty score set");
  require_finite(scores, "scores");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(scores.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out[i] = std::clamp((scores[i] - min) / range, 0.0, 1.0);
    }
  }
  return out;
}

ScoreMap normalize_scores(const ScoreMap& scores) {
  return ScoreMap(scores.width(), scores.height(), normalize_scores(scores.scores()));
}

}  // namespace njcr
