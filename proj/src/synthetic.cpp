#include "njcr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace njcr {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(channel), 0x6e6a6372u};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kEndmemberChannel = 1000;
constexpr std::uint64_t kLayoutChannel = 1;
constexpr std::uint64_t kNoiseChannel = 2;
constexpr std::uint64_t kSensorChannel = 3;

Eigen::VectorXd endmember(std::size_t index, std::size_t bands, std::uint64_t seed) {
  auto rng = stream(seed, kEndmemberChannel + index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = static_cast<double>(std::max<std::size_t>(bands, 2) - 1);
  const double baseline = 0.15 + 0.2 * unit(rng);
  const double slope = -0.1 + 0.2 * unit(rng);
  struct Bump {
    double center, width, amplitude;
  };
  std::vector<Bump> bumps(3);
  for (auto& b : bumps) {
    b.center = unit(rng);
    b.width = 0.05 + 0.15 * unit(rng);
    b.amplitude = (unit(rng) < 0.3 ? -1.0 : 1.0) * (0.05 + 0.25 * unit(rng));
  }
  Eigen::VectorXd s(static_cast<Eigen::Index>(bands));
  for (std::size_t k = 0; k < bands; ++k) {
    const double u = static_cast<double>(k) / span;
    double v = baseline + slope * (u - 0.5);
    for (const auto& b : bumps) {
      const double z = (u - b.center) / b.width;
      v += b.amplitude * std::exp(-0.5 * z * z);
    }
    s(static_cast<Eigen::Index>(k)) = std::max(v, 0.02);
  }
  return s;
}

}  // namespace

Eigen::MatrixXd make_endmembers(std::size_t count, std::size_t bands, std::uint64_t seed) {
  if (bands == 0) throw ConfigError("endmembers need at least one band");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) out.col(static_cast<Eigen::Index>(i)) = endmember(i, bands, seed);
  return out;
}

Eigen::VectorXd held_out_target(std::size_t bands, std::size_t materials, std::uint64_t seed) {
  if (materials == 0) throw ConfigError("materials must be >= 1");
  const Eigen::MatrixXd all = make_endmembers(materials + 1, bands, seed);
  const double mean_norm = all.leftCols(static_cast<Eigen::Index>(materials)).colwise().norm().mean();
  Eigen::VectorXd t = all.col(static_cast<Eigen::Index>(materials));
  return t * (mean_norm / t.norm());
}

Background generate_background(std::size_t width, std::size_t height, std::size_t bands,
                               std::size_t materials, std::uint64_t seed,
                               const BackgroundOptions& options) {
  if (width == 0 || height == 0 || bands == 0) throw ConfigError("background dimensions must be positive");
  if (materials == 0) throw ConfigError("materials must be >= 1");
  if (options.regions_per_material == 0) throw ConfigError("regions_per_material must be >= 1");
  if (width * height < materials) throw ConfigError("image too small for the number of materials");
  if (options.noise_sigma < 0.0) throw ConfigError("noise_sigma must be nonnegative");
  if (!(options.dominant_min > 0.0 && options.dominant_min <= options.dominant_max &&
        options.dominant_max <= 1.0)) {
    throw ConfigError("dominant abundance range must satisfy 0 < min <= max <= 1");
  }

  const Eigen::MatrixXd em = make_endmembers(materials, bands, seed);
  auto rng = stream(seed, kLayoutChannel);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Voronoi cells, each owned by one material; cell c belongs to material c % materials.
  const std::size_t cells = std::min(materials * options.regions_per_material, width * height);
  struct Cell {
    double row, col;
    Eigen::VectorXd weights;
  };
  std::vector<Cell> cell(cells);
  const auto m = static_cast<Eigen::Index>(materials);
  for (std::size_t c = 0; c < cells; ++c) {
    cell[c].row = unit(rng) * static_cast<double>(height);
    cell[c].col = unit(rng) * static_cast<double>(width);
    const auto own = static_cast<Eigen::Index>(c % materials);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    if (materials == 1) {
      w(0) = 1.0;
    } else {
      const double dom = options.dominant_min + (options.dominant_max - options.dominant_min) * unit(rng);
      Eigen::VectorXd minor(m);
      for (Eigen::Index k = 0; k < m; ++k) minor(k) = k == own ? 0.0 : unit(rng) + 1e-3;
      w = minor * ((1.0 - dom) / minor.sum());
      w(own) = dom;
    }
    cell[c].weights = w;
  }

  const std::size_t n = width * height;
  std::vector<std::uint32_t> dominant(n);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(n));
  auto noise_rng = stream(seed, kNoiseChannel);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t p = 0; p < n; ++p) {
    const double r = static_cast<double>(p / width) + 0.5;
    const double c = static_cast<double>(p % width) + 0.5;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cells; ++k) {
      const double d = (cell[k].row - r) * (cell[k].row - r) + (cell[k].col - c) * (cell[k].col - c);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    dominant[p] = static_cast<std::uint32_t>(best % materials);
    Eigen::VectorXd w = cell[best].weights;
    if (materials > 1) {
      // Per-pixel jitter of the dominant share, minor shares rescaled to keep the sum at one.
      const auto own = static_cast<Eigen::Index>(dominant[p]);
      const double dom = std::clamp(w(own) + 0.1 * (unit(rng) - 0.5), 0.0, 1.0);
      const double minor_sum = 1.0 - w(own);
      if (minor_sum > 0.0) w *= (1.0 - dom) / minor_sum;
      w(own) = dom;
    }
    auto col = X.col(static_cast<Eigen::Index>(p));
    col = em * w;
    if (options.noise_sigma > 0.0) {
      for (Eigen::Index b = 0; b < col.size(); ++b) col(b) += options.noise_sigma * gauss(noise_rng);
    }
  }
  return Background{unflatten(X, width, height), em, std::move(dominant)};
}

std::vector<PanelSpec> standard_panels() {
  const std::vector<double> abundances{1.00, 0.25, 0.50, 0.75, 0.95};
  return {{1, 2, abundances}, {2, 2, abundances}, {3, 1, abundances}, {4, 1, abundances},
          {5, 1, abundances}};
}

PanelLayout centered_layout(std::size_t width, std::size_t height,
                            const std::vector<PanelSpec>& panels) {
  int rows = 0;
  std::size_t cols = 0;
  for (const auto& p : panels) {
    rows = std::max(rows, p.row_block);
    cols = std::max(cols, p.abundances.size());
  }
  if (rows == 0 || cols == 0) throw ConfigError("empty panel specification");
  PanelLayout layout;
  layout.row_spacing = height / (static_cast<std::size_t>(rows) + 1);
  layout.col_spacing = width / (cols + 1);
  layout.origin_row = layout.row_spacing;
  layout.origin_col = layout.col_spacing;
  return layout;
}

ImplantResult implant_panels(const HsiCube& base, const Eigen::VectorXd& target,
                             const std::vector<PanelSpec>& panels, const PanelLayout& layout) {
  if (static_cast<std::size_t>(target.size()) != base.bands()) {
    throw ConfigError("target spectrum length does not match band count");
  }
  const std::size_t w = base.width();
  const std::size_t h = base.height();
  std::vector<std::uint8_t> mask(w * h, 0);
  std::vector<PanelPlacement> placements;
  for (const auto& spec : panels) {
    if (spec.row_block < 1) throw ConfigError("panel row_block must be >= 1");
    if (spec.panel_size < 1) throw ConfigError("panel size must be >= 1");
    for (std::size_t k = 0; k < spec.abundances.size(); ++k) {
      const double f = spec.abundances[k];
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("panel abundance must lie in (0, 1]");
      const std::size_t row = layout.origin_row + static_cast<std::size_t>(spec.row_block - 1) * layout.row_spacing;
      const std::size_t col = layout.origin_col + k * layout.col_spacing;
      const auto size = static_cast<std::size_t>(spec.panel_size);
      if (row + size > h || col + size > w) throw ConfigError("panel falls outside the image");
      for (std::size_t dr = 0; dr < size; ++dr) {
        for (std::size_t dc = 0; dc < size; ++dc) {
          auto& cell = mask[(row + dr) * w + col + dc];
          if (cell) throw ConfigError("panels overlap");
          cell = 1;
        }
      }
      placements.push_back({spec.row_block, row, col, spec.panel_size, f});
    }
  }

  PixelMatrix X = flatten(base);
  for (const auto& p : placements) {
    const auto size = static_cast<std::size_t>(p.size);
    for (std::size_t dr = 0; dr < size; ++dr) {
      for (std::size_t dc = 0; dc < size; ++dc) {
        const auto idx = static_cast<Eigen::Index>((p.row + dr) * w + p.col + dc);
        if (p.abundance == 1.0) {
          X.col(idx) = target;
        } else {
          X.col(idx) = p.abundance * target + (1.0 - p.abundance) * X.col(idx);
        }
      }
    }
  }
  return ImplantResult{unflatten(X, w, h), GroundTruthMask(w, h, std::move(mask)), std::move(placements)};
}

HsiCube add_noise(const HsiCube& cube, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be nonnegative");
  std::vector<double> values(cube.values().begin(), cube.values().end());
  if (sigma > 0.0) {
    auto rng = stream(seed, kSensorChannel);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : values) v += sigma * gauss(rng);
  }
  return HsiCube(cube.width(), cube.height(), cube.bands(), std::move(values));
}

Scene make_scene(const SceneSpec& spec) {
  const auto bg = generate_background(spec.width, spec.height, spec.bands, spec.materials, spec.seed,
                                      spec.background);
  Scene scene;
  scene.target = held_out_target(spec.bands, spec.materials, spec.seed);
  const auto panels = standard_panels();
  auto implanted = implant_panels(bg.cube, scene.target, panels, centered_layout(spec.width, spec.height, panels));
  scene.cube = add_noise(implanted.cube, spec.sensor_noise, spec.seed);
  scene.mask = std::move(implanted.mask);
  scene.placements = std::move(implanted.placements);
  return scene;
}

}  // namespace njcr
