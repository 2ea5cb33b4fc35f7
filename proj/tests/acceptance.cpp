// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include "njcr/density_peaks.hpp"
#include "njcr/evaluation.hpp"
#include "njcr/pipeline.hpp"
#include "njcr/rx.hpp"
#include "njcr/segmentation.hpp"
#include "njcr/solver.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace njcr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SolverConfig solver_config(double lambda) {
  SolverConfig c;
  c.lambda = lambda;
  c.rho = 1.0;
  c.epsilon = 1e-4;
  c.max_iter = 1000;
  return c;
}

UnionDictionary as_union(const Eigen::MatrixXd& atoms) {
  UnionDictionary d;
  d.atoms = atoms;
  d.k_background = static_cast<std::size_t>(atoms.cols());
  d.provenance.resize(d.k_background);
  return d;
}

PixelGraph graph_from(const Eigen::MatrixXd& w) {
  std::vector<GraphEdge> edges;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < w.cols(); ++j) {
      if (w(i, j) > 0.0) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w(i, j)});
    }
  }
  return PixelGraph(static_cast<std::size_t>(w.rows()), std::move(edges));
}

Outcome feasibility() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<Eigen::Index> bands(10, 30), atoms(10, 60), pixels(50, 200);
  const double lambdas[] = {0.1, 0.5, 1.0};
  double worst_min = 0.0, worst_sum = 0.0;
  std::size_t unconverged = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 20; ++i) {
    const auto inst = fixture::random_instance(bands(rng), atoms(rng), pixels(rng), 500 + static_cast<std::uint64_t>(i));
    const auto res = solve_njcr(inst.pixels, inst.dictionary, solver_config(lambdas[i % 3]));
    unconverged += !res.report.converged;
    worst_min = std::min(worst_min, res.coefficients.minCoeff());
    worst_sum = std::max(worst_sum, (res.coefficients.colwise().sum().array() - 1.0).abs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  std::ostringstream s;
  s << "min entry " << worst_min << ", max |colsum-1| " << worst_sum << ", unconverged " << unconverged
    << "/20, " << secs << " s";
  return {unconverged == 0 && worst_min >= -1e-4 && worst_sum <= 1e-3 && secs < 10.0, s.str()};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  std::size_t columns = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Eigen::Index k = 3 + static_cast<Eigen::Index>(seed);  // 3..10, with 12 below
    for (Eigen::Index kk : {k, Eigen::Index{12}}) {
      const auto inst = fixture::random_instance(10, kk, 30, 600 + seed);
      const double lambda = seed % 2 ? 0.5 : 0.1;
      const auto res = solve_njcr(inst.pixels, inst.dictionary, solver_config(lambda));
      const Eigen::VectorXd obj = column_objectives(inst.pixels, inst.dictionary, res.coefficients, lambda);
      for (Eigen::Index j = 0; j < inst.pixels.cols(); ++j) {
        const Eigen::VectorXd a = oracle::simplex_qp(inst.dictionary, inst.pixels.col(j), lambda, 1e-8);
        const double ref = oracle::objective(inst.dictionary, inst.pixels.col(j), a, lambda);
        worst = std::max(worst, std::abs(obj(j) - ref) / ref);
        ++columns;
      }
    }
  }
  std::ostringstream s;
  s << "max relative objective gap " << worst << " over " << columns << " columns";
  return {worst <= 1e-3, s.str()};
}

Outcome kernel_identity() {
  double worst = 0.0;
  std::size_t iterates = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = fixture::random_instance(12, 8 + 4 * static_cast<Eigen::Index>(seed), 60, 700 + seed);
    SolverConfig c = solver_config(0.5);
    std::vector<Eigen::MatrixXd> plain;
    solve_njcr(inst.pixels, inst.dictionary, c, [&](const AdmmState& s) { plain.push_back(s.A); });
    c.kernel = KernelType::linear;
    std::size_t i = 0;
    solve_knjcr(inst.pixels, as_union(inst.dictionary), c, [&](const AdmmState& s) {
      if (i < plain.size()) worst = std::max(worst, (s.A - plain[i]).cwiseAbs().maxCoeff());
      ++i;
    });
    if (i != plain.size()) worst = std::numeric_limits<double>::infinity();
    iterates += i;
  }
  std::ostringstream s;
  s << "max entry difference " << worst << " over " << iterates << " iterates";
  return {worst <= 1e-10, s.str()};
}

Outcome stopping() {
  std::size_t worst_iter = 0;
  double worst_r = 0.0, worst_s = 0.0;
  bool all = true;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = fixture::random_instance(20, 25, 100, 800 + seed);
    const auto res = solve_njcr(inst.pixels, inst.dictionary, solver_config(0.5));
    all = all && res.report.converged && res.report.iterations < 1000;
    worst_iter = std::max(worst_iter, res.report.iterations);
    worst_r = std::max(worst_r, res.report.primal_residual);
    worst_s = std::max(worst_s, res.report.dual_residual);
  }
  std::ostringstream s;
  s << "max iterations " << worst_iter << ", max primal " << worst_r << ", max dual " << worst_s;
  return {all && worst_r <= 1e-4 && worst_s <= 1e-4, s.str()};
}

struct SceneRun {
  nlohmann::json summary;
  double seconds = 0.0;
};

PipelineConfig scene_config(const fs::path& dir) {
  PipelineConfig c;
  c.out_dir = dir;
  c.methods = {"rx", "njcr"};
  return c;
}

Outcome end_to_end(const fs::path& dir, SceneRun& run) {
  PipelineConfig c = scene_config(dir);
  c.cache = false;
  const auto t0 = Clock::now();
  run.summary = run_pipeline(c);
  run.seconds = seconds_since(t0);
  const double rx = run.summary["methods"]["rx"]["auc_pd_pf"];
  const double njcr = run.summary["methods"]["njcr"]["auc_pd_pf"];
  std::ostringstream s;
  s << "NJCR AUC " << njcr << " vs RX AUC " << rx << " (" << run.summary["anomaly_pixels"].get<int>()
    << " anomalous pixels, njcr iterations " << run.summary["methods"]["njcr"]["iterations"].get<int>() << "), "
    << run.seconds << " s";
  return {njcr > rx && njcr >= 0.90 && run.seconds < 60.0, s.str()};
}

Outcome ablations(const fs::path& dir, const SceneRun& full) {
  const double njcr = full.summary["methods"]["njcr"]["auc_pd_pf"];
  struct Variant {
    const char* name;
    std::function<void(AblationConfig&)> set;
  };
  const Variant variants[] = {
      {"background-only", [](AblationConfig& a) { a.background_only = true; }},
      {"no-nonneg", [](AblationConfig& a) { a.nonnegative = false; }},
      {"no-sum-to-one", [](AblationConfig& a) { a.sum_to_one = false; }},
  };
  bool pass = true;
  std::ostringstream s;
  s << "full " << njcr;
  for (const auto& v : variants) {
    PipelineConfig c = scene_config(dir);
    c.methods = {"njcr"};
    v.set(c.ablation);
    const double auc = run_pipeline(c)["methods"]["njcr"]["auc_pd_pf"];
    pass = pass && njcr >= auc;
    s << ", " << v.name << " " << auc;
  }
  return {pass, s.str()};
}

Outcome rx_correctness() {
  double worst = 0.0;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PixelMatrix x(8, 400);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index b = 0; b < 8; ++b) x(b, j) = g(rng);
    }
    const Eigen::MatrixXd t = oracle::random_matrix(8, 8, 900 + seed) + 3.0 * Eigen::MatrixXd::Identity(8, 8);
    const Eigen::VectorXd off = oracle::random_matrix(8, 1, 950 + seed, -4.0, 4.0);
    const PixelMatrix y = (t * x).colwise() + off;
    const Eigen::VectorXd rx = rx_scores(x, fit_stats(x, 0.0));
    const Eigen::VectorXd ry = rx_scores(y, fit_stats(y, 0.0));
    worst = std::max(worst, ((rx - ry).array().abs() / rx.array().abs().max(1e-300)).maxCoeff());
  }
  // C = diag(2, 1) from symmetric pairs about the mean; x - mu = (2, 3).
  PixelMatrix d(2, 4);
  d << std::sqrt(3.0), -std::sqrt(3.0), 0.0, 0.0, 0.0, 0.0, std::sqrt(1.5), -std::sqrt(1.5);
  const auto stats = fit_stats(d, 0.0);
  PixelMatrix probe = stats.mean() + Eigen::Vector2d(2.0, 3.0);
  const double diag_err = std::abs(rx_scores(probe, stats)(0) - 11.0);
  std::ostringstream s;
  s << "affine max relative change " << worst << ", diagonal case error " << diag_err;
  return {worst <= 1e-8 && diag_err <= 1e-12, s.str()};
}

Outcome ncut_correctness() {
  double worst = 0.0;
  std::size_t splits = 0;
  bool inf_ok = true;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Eigen::MatrixXd w = oracle::random_weights(n, 1000 + 10 * n + seed, seed % 3 == 2 ? 0.6 : 0.0);
      const auto graph = graph_from(w);
      for (std::uint64_t bits = 1; bits + 1 < (std::uint64_t{1} << n); ++bits) {
        const auto in_a = oracle::mask_bits(bits, n);
        std::vector<std::size_t> a;
        for (std::size_t i = 0; i < n; ++i) {
          if (in_a[i]) a.push_back(i);
        }
        const double ref = oracle::ncut(w, in_a);
        const double got = ncut_value(graph, a);
        if (std::isinf(ref) || std::isinf(got)) {
          inf_ok = inf_ok && std::isinf(ref) && std::isinf(got);
        } else {
          worst = std::max(worst, std::abs(got - ref) / std::max(ref, 1e-300));
        }
        ++splits;
      }
    }
  }
  // Planted halves of distinct spectra.
  const Eigen::MatrixXd em = make_endmembers(2, 8, 3);
  PixelMatrix x(8, 24 * 20);
  for (std::size_t r = 0; r < 20; ++r) {
    for (std::size_t c = 0; c < 24; ++c) x.col(static_cast<Eigen::Index>(r * 24 + c)) = em.col(c < 12 ? 0 : 1);
  }
  SegmentationOptions opts;
  opts.target_count = 2;
  const auto labels = segment(add_noise(unflatten(x, 24, 20), 0.01, 3), opts);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < 480; ++i) agree += (labels[i] == labels[i - i % 24]) == (i % 24 < 12);
  const double agreement = static_cast<double>(agree) / 480.0;
  std::ostringstream s;
  s << splits << " bipartitions, max relative ncut difference " << worst << " (summation order only)"
    << ", planted agreement " << agreement;
  return {inf_ok && worst <= 1e-12 && agreement >= 0.99, s.str()};
}

Outcome density_correctness() {
  double worst = 0.0;
  for (Eigen::Index n : {1, 2, 5, 10, 20, 35, 50}) {
    const Eigen::MatrixXd p = oracle::random_matrix(6, n, 1100 + static_cast<std::uint64_t>(n));
    const Eigen::MatrixXd d = pairwise_distances(p);
    const Eigen::MatrixXd d_ref = oracle::distances(p);
    worst = std::max(worst, (d - d_ref).cwiseAbs().maxCoeff());
    const Eigen::VectorXd g = local_density(d, 0.9);
    worst = std::max(worst, (g - oracle::gamma(d, 0.9)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (min_higher_density_distance(d, g) - oracle::delta(d, g)).cwiseAbs().maxCoeff());
  }
  std::size_t planted_ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Eigen::MatrixXd p = oracle::random_matrix(4, 10, 1200 + seed, -0.05, 0.05);
    p.rightCols(5).array() += 3.0;
    const auto reps = select_representatives(p, 2);
    planted_ok += (reps[0] < 5) != (reps[1] < 5);
  }
  std::ostringstream s;
  s << "max gamma/delta/distance error " << worst << ", planted clusters split " << planted_ok << "/10";
  return {worst <= 1e-12 && planted_ok == 10, s.str()};
}

Outcome roc_correctness() {
  bool ok = true;
  std::size_t cases = 0;
  auto compare = [&](const std::vector<double>& s, const std::vector<int>& t) {
    const std::vector<std::uint8_t> truth(t.begin(), t.end());
    const auto r = roc(s, truth);
    const auto ref = oracle::roc(s, t);
    ok = ok && r.thresholds == ref.tau && r.pd == ref.pd && r.pf == ref.pf &&
         std::abs(r.auc_pd_pf - ref.auc) <= 1e-14 && std::abs(r.auc_pd_pf - oracle::auc_pairs(s, t)) <= 1e-12;
    ++cases;
  };
  compare({1, 2, 3, 4, 5, 6}, {0, 0, 0, 0, 1, 1});
  compare({1, 2, 3, 4, 5, 6}, {0, 0, 1, 0, 0, 1});
  compare({0.3, 0.3, 0.3, 0.3}, {0, 1, 0, 1});
  compare({0.5, 0.1, 0.5, 0.9, 0.1}, {1, 0, 0, 1, 0});
  const bool hand = ok && roc(std::vector<double>{1, 2, 3, 4, 5, 6}, std::vector<std::uint8_t>{0, 0, 1, 0, 0, 1})
                                  .auc_pd_pf == 0.75;

  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> level(0, 25);
  bool invariant = true;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(120), e(120), c(120);
    std::vector<std::uint8_t> t(120);
    for (std::size_t i = 0; i < 120; ++i) {
      s[i] = 0.2 * level(rng);
      e[i] = std::exp(s[i]);
      c[i] = s[i] * s[i] * s[i] - 4.0;
      t[i] = i % 6 == 0;
    }
    const auto base = roc(s, t);
    for (const auto* v : {&e, &c}) {
      const auto r = roc(*v, t);
      invariant = invariant && r.auc_pd_pf == base.auc_pd_pf && r.pd == base.pd && r.pf == base.pf;
    }
  }
  std::ostringstream s;
  s << cases << " staircases vs exhaustive enumeration " << (ok ? "match" : "differ") << ", hand AUC "
    << (hand ? "ok" : "wrong") << ", monotone invariance " << (invariant ? "exact" : "broken");
  return {ok && hand && invariant, s.str()};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "njcr_acceptance";
  fs::remove_all(dir);
  SceneRun scene;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"constraint feasibility", feasibility},
      {"oracle equivalence", oracle_equivalence},
      {"kernel reduction identity", kernel_identity},
      {"stopping behavior", stopping},
      {"end-to-end synthetic reproduction", [&] { return end_to_end(dir, scene); }},
      {"ablation directionality", [&] { return ablations(dir, scene); }},
      {"RX correctness", rx_correctness},
      {"NCut correctness", ncut_correctness},
      {"density peaks", density_correctness},
      {"ROC/AUC", roc_correctness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
