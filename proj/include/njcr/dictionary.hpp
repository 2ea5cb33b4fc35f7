#ifndef NJCR_DICTIONARY_HPP
#define NJCR_DICTIONARY_HPP

#include "njcr/core.hpp"

#include <string>
#include <vector>

namespace njcr {

enum class AtomSource { background, anomaly };

struct AtomProvenance {
  AtomSource source = AtomSource::background;
  std::size_t pixel_index = 0;
  std::size_t superpixel = 0;  // background atoms only
  std::size_t rank = 0;        // density-peak rank within the superpixel, or RX rank
};

struct SubDictionary {
  Eigen::MatrixXd atoms;  // bands x count, exact pixel copies
  std::vector<AtomProvenance> provenance;
};

/// D = [D_B D_A]: background atoms occupy the first k_background columns.
struct UnionDictionary {
  Eigen::MatrixXd atoms;
  std::size_t k_background = 0;
  std::size_t k_anomaly = 0;
  std::vector<AtomProvenance> provenance;
  /// Background atoms dropped because the same pixel was chosen for D_A.
  std::vector<AtomProvenance> dropped;

  std::size_t size() const { return k_background + k_anomaly; }
  auto background() const { return atoms.leftCols(static_cast<Eigen::Index>(k_background)); }
  auto anomaly() const { return atoms.rightCols(static_cast<Eigen::Index>(k_anomaly)); }
};

/// min(m, size) density-peak representatives per superpixel, ordered by
/// (superpixel id, rank).
SubDictionary build_background(const PixelMatrix& pixels, const SuperpixelMap& superpixels,
                               std::size_t m_per_superpixel, double d_c_quantile = 0.02);

/// The p highest-RX pixels in descending score order, ties by pixel index.
SubDictionary build_anomaly(const PixelMatrix& pixels, const ScoreMap& rx, std::size_t p);

/// Concatenates the sub-dictionaries; a pixel chosen by both stays in D_A only.
UnionDictionary make_union(const SubDictionary& background, const SubDictionary& anomaly);

/// A dictionary holding only background atoms (k_anomaly == 0).
UnionDictionary background_only(const SubDictionary& background);

std::string to_string(AtomSource source);

}  // namespace njcr

#endif  // NJCR_DICTIONARY_HPP
