#ifndef NJCR_SYNTHETIC_HPP
#define NJCR_SYNTHETIC_HPP

#include "njcr/core.hpp"

#include <cstdint>
#include <vector>

namespace njcr {

struct BackgroundOptions {
  double noise_sigma = 0.01;       // additive Gaussian noise per band
  std::size_t regions_per_material = 3;  // Voronoi cells assigned to each material
  double dominant_min = 0.75;      // abundance range of a cell's own material
  double dominant_max = 0.95;
};

/// Background pixels are convex combinations of `materials` smooth endmember
/// spectra laid out in spatially clustered Voronoi cells, plus noise.
struct Background {
  HsiCube cube;
  Eigen::MatrixXd endmembers;          // bands x materials
  std::vector<std::uint32_t> dominant; // per-pixel index of the dominant material
};

Background generate_background(std::size_t width, std::size_t height, std::size_t bands,
                               std::size_t materials, std::uint64_t seed,
                               const BackgroundOptions& options = {});

/// Smooth positive spectra, one per column. Deterministic in the seed; the
/// first `count` columns for a given seed do not depend on `count`.
Eigen::MatrixXd make_endmembers(std::size_t count, std::size_t bands, std::uint64_t seed);

/// An endmember held out of the background mixture (column `materials` of the
/// seed's endmember stream), rescaled to the mean norm of the background ones.
Eigen::VectorXd held_out_target(std::size_t bands, std::size_t materials, std::uint64_t seed);

struct PanelSpec {
  int row_block = 1;                // 1-based row of the panel grid
  int panel_size = 1;               // pixels per side
  std::vector<double> abundances;   // one panel per entry, left to right
};

struct PanelLayout {
  std::size_t origin_row = 0;
  std::size_t origin_col = 0;
  std::size_t row_spacing = 0;
  std::size_t col_spacing = 0;
};

struct PanelPlacement {
  int row_block = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  int size = 0;
  double abundance = 0.0;
};

struct ImplantResult {
  HsiCube cube;
  GroundTruthMask mask;
  std::vector<PanelPlacement> placements;
};

/// The five-row target panel design: two rows of 2x2 panels then three rows
/// of single pixels, each row at abundances 1.00, 0.25, 0.50, 0.75, 0.95.
std::vector<PanelSpec> standard_panels();

/// Spreads the panel grid evenly over the image interior.
PanelLayout centered_layout(std::size_t width, std::size_t height,
                            const std::vector<PanelSpec>& panels);

/// Linear mixture x = f*t + (1-f)*b on every panel pixel.
ImplantResult implant_panels(const HsiCube& base, const Eigen::VectorXd& target,
                             const std::vector<PanelSpec>& panels, const PanelLayout& layout);

/// Adds independent N(0, sigma^2) noise to every sample.
HsiCube add_noise(const HsiCube& cube, double sigma, std::uint64_t seed);

struct SceneSpec {
  std::size_t width = 100;
  std::size_t height = 100;
  std::size_t bands = 50;
  std::size_t materials = 4;
  std::uint64_t seed = 7;
  BackgroundOptions background{.noise_sigma = 0.0};
  /// Applied after implantation so target pixels are as noisy as the rest.
  double sensor_noise = 0.01;
};

struct Scene {
  HsiCube cube;
  GroundTruthMask mask;
  std::vector<PanelPlacement> placements;
  Eigen::VectorXd target;
};

/// Background, standard panels in the centered layout, then sensor noise.
Scene make_scene(const SceneSpec& spec);

}  // namespace njcr

#endif  // NJCR_SYNTHETIC_HPP
