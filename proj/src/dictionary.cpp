#include "njcr/dictionary.hpp"

#include "njcr/density_peaks.hpp"
#include "njcr/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace njcr {

namespace {

Eigen::MatrixXd gather(const PixelMatrix& pixels, const std::vector<AtomProvenance>& prov) {
  Eigen::MatrixXd out(pixels.rows(), static_cast<Eigen::Index>(prov.size()));
  for (std::size_t k = 0; k < prov.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = pixels.col(static_cast<Eigen::Index>(prov[k].pixel_index));
  }
  return out;
}

}  // namespace

SubDictionary build_background(const PixelMatrix& pixels, const SuperpixelMap& superpixels,
                               std::size_t m_per_superpixel, double d_c_quantile) {
  if (superpixels.pixel_count() == 0 || superpixels.label_count() == 0) {
    throw ConfigError("empty superpixel map");
  }
  if (static_cast<std::size_t>(pixels.cols()) != superpixels.pixel_count()) {
    throw ConfigError("superpixel map does not match the pixel matrix");
  }
  if (m_per_superpixel == 0) throw ConfigError("m_per_superpixel must be >= 1");
  const auto groups = superpixels.members();
  std::vector<std::vector<AtomProvenance>> picked(groups.size());
  parallel_for(0, groups.size(), [&](std::size_t s) {
    const auto& members = groups[s];
    Eigen::MatrixXd points(pixels.rows(), static_cast<Eigen::Index>(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k) {
      points.col(static_cast<Eigen::Index>(k)) = pixels.col(static_cast<Eigen::Index>(members[k]));
    }
    const std::size_t m = std::min(m_per_superpixel, members.size());
    const auto reps = select_representatives(points, m, d_c_quantile);
    for (std::size_t r = 0; r < reps.size(); ++r) {
      picked[s].push_back({AtomSource::background, members[reps[r]], s, r});
    }
  });
  SubDictionary out;
  for (auto& p : picked) out.provenance.insert(out.provenance.end(), p.begin(), p.end());
  out.atoms = gather(pixels, out.provenance);
  return out;
}

SubDictionary build_anomaly(const PixelMatrix& pixels, const ScoreMap& rx, std::size_t p) {
  const std::size_t n = rx.pixel_count();
  if (static_cast<std::size_t>(pixels.cols()) != n) throw ConfigError("RX map does not match the pixel matrix");
  if (p > n) throw ConfigError("anomaly atom count exceeds pixel count");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rx[a] > rx[b]; });
  SubDictionary out;
  for (std::size_t r = 0; r < p; ++r) out.provenance.push_back({AtomSource::anomaly, idx[r], 0, r});
  out.atoms = gather(pixels, out.provenance);
  return out;
}

UnionDictionary make_union(const SubDictionary& background, const SubDictionary& anomaly) {
  if (background.atoms.cols() > 0 && anomaly.atoms.cols() > 0 &&
      background.atoms.rows() != anomaly.atoms.rows()) {
    throw ConfigError("sub-dictionaries have different band counts");
  }
  std::unordered_set<std::size_t> anomaly_pixels;
  for (const auto& a : anomaly.provenance) anomaly_pixels.insert(a.pixel_index);

  UnionDictionary d;
  std::vector<Eigen::Index> keep;
  for (std::size_t k = 0; k < background.provenance.size(); ++k) {
    if (anomaly_pixels.count(background.provenance[k].pixel_index)) {
      d.dropped.push_back(background.provenance[k]);
    } else {
      keep.push_back(static_cast<Eigen::Index>(k));
      d.provenance.push_back(background.provenance[k]);
    }
  }
  d.k_background = keep.size();
  d.k_anomaly = anomaly.provenance.size();
  if (d.size() == 0) throw ConfigError("union dictionary would be empty");
  const Eigen::Index bands = background.atoms.cols() > 0 ? background.atoms.rows() : anomaly.atoms.rows();
  d.atoms.resize(bands, static_cast<Eigen::Index>(d.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) d.atoms.col(static_cast<Eigen::Index>(k)) = background.atoms.col(keep[k]);
  if (d.k_anomaly > 0) d.atoms.rightCols(static_cast<Eigen::Index>(d.k_anomaly)) = anomaly.atoms;
  d.provenance.insert(d.provenance.end(), anomaly.provenance.begin(), anomaly.provenance.end());
  return d;
}

UnionDictionary background_only(const SubDictionary& background) {
  if (background.provenance.empty()) throw ConfigError("background dictionary is empty");
  UnionDictionary d;
  d.atoms = background.atoms;
  d.k_background = background.provenance.size();
  d.provenance = background.provenance;
  return d;
}

std::string to_string(AtomSource source) {
  return source == AtomSource::background ? "background" : "anomaly";
}

}  // namespace njcr
