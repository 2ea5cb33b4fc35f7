#ifndef NJCR_EVALUATION_HPP
#define NJCR_EVALUATION_HPP

#include "njcr/core.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace njcr {

/// ROC points at every unique score threshold. A pixel is detected when its
/// score is >= tau. The first point is tau = +inf with (pf, pd) = (0, 0); the
/// last threshold is the minimum score, where (pf, pd) = (1, 1).
struct RocReport {
  std::vector<double> thresholds;  // descending
  std::vector<double> pd;
  std::vector<double> pf;
  double auc_pd_pf = 0.0;
  /// Trapezoid of pf over min-max normalized thresholds on [0, 1].
  double auc_pf_tau = 0.0;
};

RocReport roc(std::span<const double> scores, std::span<const std::uint8_t> truth);
RocReport roc(const ScoreMap& scores, const GroundTruthMask& truth);

inline constexpr std::array<double, 5> kSeparabilityPercentiles{1.0, 10.0, 50.0, 90.0, 99.0};

struct SeparabilityStats {
  std::array<double, 5> background{};  // at kSeparabilityPercentiles
  std::array<double, 5> anomaly{};
  /// anomaly p10 - background p90; positive when the 10-90% boxes separate.
  double gap() const { return anomaly[1] - background[3]; }
};

/// Linear-interpolation percentile (p in [0, 100]) of an unsorted sample.
double percentile(std::vector<double> values, double p);

/// Class-conditional percentiles of already normalized scores.
SeparabilityStats separability(std::span<const double> normalized_scores,
                               std::span<const std::uint8_t> truth);
SeparabilityStats separability(const ScoreMap& normalized_scores, const GroundTruthMask& truth);

std::string roc_csv(const RocReport& report);
std::string separability_csv(const SeparabilityStats& stats);
/// ROC curve on the left, background/anomaly box ranges on the right.
std::string evaluation_svg(const RocReport& report, const SeparabilityStats& stats,
                           const std::string& title = "");

}  // namespace njcr

#endif  // NJCR_EVALUATION_HPP
