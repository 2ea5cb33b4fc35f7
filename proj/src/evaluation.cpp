#include "njcr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace njcr {

namespace {

void check_inputs(std::span<const double> scores, std::span<const std::uint8_t> truth) {
  if (scores.size() != truth.size()) throw ConfigError("scores and ground truth differ in size");
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("scores must be finite");
  }
  std::size_t positives = 0;
  for (auto t : truth) {
    if (t > 1) throw ConfigError("ground truth labels must be 0 or 1");
    positives += t;
  }
  if (positives == 0 || positives == truth.size()) {
    throw ConfigError("ground truth must contain both anomaly and background pixels");
  }
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

RocReport roc(std::span<const double> scores, std::span<const std::uint8_t> truth) {
  check_inputs(scores, truth);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double n_pos = 0.0;
  for (auto t : truth) n_pos += t;
  const double n_neg = static_cast<double>(n) - n_pos;

  RocReport r;
  r.thresholds.push_back(std::numeric_limits<double>::infinity());
  r.pd.push_back(0.0);
  r.pf.push_back(0.0);
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t k = 0; k < n;) {
    const double tau = scores[order[k]];
    while (k < n && scores[order[k]] == tau) {
      (truth[order[k]] ? tp : fp) += 1.0;
      ++k;
    }
    r.thresholds.push_back(tau);
    r.pd.push_back(tp / n_pos);
    r.pf.push_back(fp / n_neg);
  }

  for (std::size_t k = 1; k < r.pd.size(); ++k) {
    r.auc_pd_pf += 0.5 * (r.pf[k] - r.pf[k - 1]) * (r.pd[k] + r.pd[k - 1]);
  }

  const double hi = r.thresholds[1];
  const double lo = r.thresholds.back();
  if (hi > lo) {
    // Thresholds descend, so walk backwards for ascending normalized tau.
    for (std::size_t k = r.thresholds.size() - 1; k > 1; --k) {
      const double t0 = (r.thresholds[k] - lo) / (hi - lo);
      const double t1 = (r.thresholds[k - 1] - lo) / (hi - lo);
      r.auc_pf_tau += 0.5 * (t1 - t0) * (r.pf[k] + r.pf[k - 1]);
    }
  }
  return r;
}

RocReport roc(const ScoreMap& scores, const GroundTruthMask& truth) {
  if (scores.width() != truth.width() || scores.height() != truth.height()) {
    throw ConfigError("score map and ground truth dimensions differ");
  }
  return roc(scores.scores(), truth.labels());
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ConfigError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SeparabilityStats separability(std::span<const double> normalized_scores,
                               std::span<const std::uint8_t> truth) {
  check_inputs(normalized_scores, truth);
  std::vector<double> bg, an;
  for (std::size_t i = 0; i < truth.size(); ++i) (truth[i] ? an : bg).push_back(normalized_scores[i]);
  SeparabilityStats s;
  for (std::size_t k = 0; k < kSeparabilityPercentiles.size(); ++k) {
    s.background[k] = percentile(bg, kSeparabilityPercentiles[k]);
    s.anomaly[k] = percentile(an, kSeparabilityPercentiles[k]);
  }
  return s;
}

SeparabilityStats separability(const ScoreMap& normalized_scores, const GroundTruthMask& truth) {
  if (normalized_scores.width() != truth.width() || normalized_scores.height() != truth.height()) {
    throw ConfigError("score map and ground truth dimensions differ");
  }
  return separability(normalized_scores.scores(), truth.labels());
}

std::string roc_csv(const RocReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "tau,pf,pd\n";
  for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
    if (std::isinf(report.thresholds[k])) {
      out << "inf";
    } else {
      out << report.thresholds[k];
    }
    out << ',' << report.pf[k] << ',' << report.pd[k] << '\n';
  }
  return out.str();
}

std::string separability_csv(const SeparabilityStats& stats) {
  std::ostringstream out;
  out.precision(17);
  out << "class,p1,p10,p50,p90,p99\n";
  auto row = [&](const char* name, const std::array<double, 5>& v) {
    out << name;
    for (double x : v) out << ',' << x;
    out << '\n';
  };
  row("background", stats.background);
  row("anomaly", stats.anomaly);
  return out.str();
}

std::string evaluation_svg(const RocReport& report, const SeparabilityStats& stats, const std::string& title) {
  constexpr double kPlot = 300.0;
  constexpr double kMargin = 40.0;
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  const double width = 2 * kPlot + 3 * kMargin;
  const double height = kPlot + 2 * kMargin;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) out << "<text x=\"" << kMargin << "\" y=\"20\">" << xml_escape(title) << "</text>\n";

  // ROC panel: pf on x, pd on y.
  const double x0 = kMargin;
  const double y0 = kMargin + kPlot;
  out << "<rect x=\"" << x0 << "\" y=\"" << kMargin << "\" width=\"" << kPlot << "\" height=\"" << kPlot
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < report.pd.size(); ++k) {
    out << x0 + report.pf[k] * kPlot << ',' << y0 - report.pd[k] * kPlot << ' ';
  }
  out << "\"/>\n";
  out << "<text x=\"" << x0 + kPlot / 2 - 10 << "\" y=\"" << y0 + 25 << "\">P_F</text>\n";
  out << "<text x=\"" << x0 - 30 << "\" y=\"" << kMargin + kPlot / 2 << "\">P_D</text>\n";
  out << "<text x=\"" << x0 + 10 << "\" y=\"" << kMargin + 20 << "\">AUC(Pd,Pf)=" << std::setprecision(4)
      << report.auc_pd_pf << "</text>\n"
      << std::setprecision(2);

  // Box panel: 10-90% box, 1-99% whiskers, median line, one column per class.
  const double bx = 2 * kMargin + kPlot;
  out << "<rect x=\"" << bx << "\" y=\"" << kMargin << "\" width=\"" << kPlot << "\" height=\"" << kPlot
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  auto box = [&](const std::array<double, 5>& v, double cx, const char* color, const char* label) {
    auto y = [&](double s) { return y0 - s * kPlot; };
    out << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << y(v[0]) << "\" y2=\"" << y(v[4])
        << "\" stroke=\"" << color << "\"/>\n";
    out << "<rect x=\"" << cx - 25 << "\" y=\"" << y(v[3]) << "\" width=\"50\" height=\""
        << std::max(y(v[1]) - y(v[3]), 0.5) << "\" fill=\"" << color << "\" fill-opacity=\"0.4\" stroke=\""
        << color << "\"/>\n";
    out << "<line x1=\"" << cx - 25 << "\" x2=\"" << cx + 25 << "\" y1=\"" << y(v[2]) << "\" y2=\"" << y(v[2])
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << cx - 30 << "\" y=\"" << y0 + 25 << "\">" << label << "</text>\n";
  };
  box(stats.background, bx + kPlot / 3, "#1f77b4", "background");
  box(stats.anomaly, bx + 2 * kPlot / 3, "#d62728", "anomaly");
  out << "</svg>\n";
  return out.str();
}

}  // namespace njcr
