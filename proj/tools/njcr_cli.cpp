// Batch front end: synth -> segment -> dict -> detect -> eval, or all at once with run.

#include "njcr/parallel.hpp"
#include "njcr/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using njcr::PipelineConfig;
namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
  kNotConverged = 5,
};

// Flags that override config fields; unset flags leave the config untouched.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  // scene
  std::optional<std::size_t> width, height, bands, materials;
  std::optional<std::uint64_t> scene_seed;
  std::optional<double> noise;
  // segmentation
  std::optional<std::size_t> superpixels;
  std::optional<double> sigma_g;
  std::optional<std::uint64_t> seg_seed;
  std::optional<int> connectivity;
  // dictionary
  std::optional<std::size_t> m, p;
  std::optional<double> dc_quantile, ridge_eps;
  // solver
  std::optional<double> lambda, rho, eps, sigma;
  std::optional<std::size_t> max_iter;
  std::optional<std::string> kernel;
  bool no_nonneg = false;
  bool no_sum_to_one = false;
  bool background_only = false;
  bool strict = false;
  bool no_cache = false;
  std::vector<std::string> methods;
  std::optional<std::string> cube, mask;
};

template <typename T, typename U>
void apply(const std::optional<T>& flag, U& field) {
  if (flag) field = static_cast<U>(*flag);
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c = o.config ? njcr::load_config(*o.config) : PipelineConfig{};
  if (o.out) c.out_dir = *o.out;
  apply(o.threads, c.threads);
  apply(o.width, c.scene.width);
  apply(o.height, c.scene.height);
  apply(o.bands, c.scene.bands);
  apply(o.materials, c.scene.materials);
  apply(o.scene_seed, c.scene.seed);
  apply(o.noise, c.scene.sensor_noise);
  apply(o.superpixels, c.segmentation.target_count);
  apply(o.sigma_g, c.segmentation.sigma_g);
  apply(o.seg_seed, c.segmentation.seed);
  apply(o.connectivity, c.segmentation.connectivity);
  apply(o.m, c.dictionary.m_per_superpixel);
  apply(o.p, c.dictionary.p_anomaly);
  apply(o.dc_quantile, c.dictionary.d_c_quantile);
  apply(o.ridge_eps, c.dictionary.rx_ridge_eps);
  apply(o.lambda, c.solver.lambda);
  apply(o.rho, c.solver.rho);
  apply(o.eps, c.solver.epsilon);
  apply(o.sigma, c.solver.sigma);
  apply(o.max_iter, c.solver.max_iter);
  if (o.kernel) c.solver.kernel = njcr::parse_kernel(*o.kernel);
  if (o.no_nonneg) c.ablation.nonnegative = false;
  if (o.no_sum_to_one) c.ablation.sum_to_one = false;
  if (o.background_only) c.ablation.background_only = true;
  if (o.strict) c.strict = true;
  if (o.no_cache) c.cache = false;
  if (!o.methods.empty()) c.methods = o.methods;
  if (o.cube) c.cube = *o.cube;
  if (o.mask) c.mask = *o.mask;
  return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON pipeline config; flags override its fields");
  cmd->add_option("-o,--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker thread cap (0 = all cores)");
}

void add_scene(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--width", o.width, "Scene width in pixels");
  cmd->add_option("--height", o.height, "Scene height in pixels");
  cmd->add_option("--bands", o.bands, "Spectral bands");
  cmd->add_option("--materials", o.materials, "Background endmember count");
  cmd->add_option("--seed", o.scene_seed, "Scene seed");
  cmd->add_option("--noise", o.noise, "Sensor noise standard deviation");
}

void add_segmentation(CLI::App* cmd, Overrides& o, const char* seed_flag) {
  cmd->add_option("-S,--superpixels", o.superpixels, "Target superpixel count");
  cmd->add_option("--sigma-g", o.sigma_g, "Graph weight scale (<= 0: median adjacent distance)");
  cmd->add_option(seed_flag, o.seg_seed, "Eigensolver seed");
  cmd->add_option("--connectivity", o.connectivity, "Pixel graph connectivity (4 or 8)");
}

void add_dictionary(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-m,--per-superpixel", o.m, "Background atoms per superpixel");
  cmd->add_option("-p,--anomaly-atoms", o.p, "Anomaly atoms taken from the RX ranking");
  cmd->add_option("--dc-quantile", o.dc_quantile, "Density-peaks cutoff quantile");
  cmd->add_option("--ridge-eps", o.ridge_eps, "Relative RX covariance ridge");
}

void add_solver(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--lambda", o.lambda, "Frobenius penalty weight");
  cmd->add_option("--rho", o.rho, "ADMM penalty parameter");
  cmd->add_option("--eps", o.eps, "Residual tolerance");
  cmd->add_option("--max-iter", o.max_iter, "ADMM iteration cap");
  cmd->add_option("--sigma", o.sigma, "RBF kernel width");
  cmd->add_option("--kernel", o.kernel, "Kernel for knjcr")->check(CLI::IsMember({"rbf", "linear"}));
  cmd->add_flag("--no-nonneg", o.no_nonneg, "Ablation: drop the nonnegativity constraint");
  cmd->add_flag("--no-sum-to-one", o.no_sum_to_one, "Ablation: drop the sum-to-one constraint");
  cmd->add_flag("--background-only", o.background_only, "Ablation: represent with background atoms only");
  cmd->add_flag("--strict", o.strict, "Treat non-convergence as an error (exit 5)");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Nonnegative-constrained joint collaborative representation anomaly detection"};
  app.require_subcommand(1);
  Overrides o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with implanted target panels");
  add_common(synth, o);
  add_scene(synth, o);

  auto* seg = app.add_subcommand("segment", "Normalized-cut superpixel segmentation");
  add_common(seg, o);
  std::string seg_cube;
  bool no_svg = false;
  seg->add_option("--cube", seg_cube, "Input cube")->required();
  add_segmentation(seg, o, "--seed");
  seg->add_flag("--no-svg", no_svg, "Skip the boundary SVG");

  auto* dict = app.add_subcommand("dict", "Build the background/anomaly union dictionary");
  add_common(dict, o);
  std::string dict_cube, dict_labels;
  dict->add_option("--cube", dict_cube, "Input cube")->required();
  dict->add_option("--labels", dict_labels, "Superpixel label raster")->required();
  add_dictionary(dict, o);

  auto* detect = app.add_subcommand("detect", "Score every pixel with rx, njcr or knjcr");
  add_common(detect, o);
  std::string method, det_cube, det_dict, det_prov;
  detect->add_option("--method", method, "Detector")->required()->check(CLI::IsMember({"rx", "njcr", "knjcr"}));
  detect->add_option("--cube", det_cube, "Input cube")->required();
  detect->add_option("--dict", det_dict, "Dictionary atoms raster (njcr, knjcr)");
  detect->add_option("--provenance", det_prov, "Dictionary provenance JSON (default: atoms path with .json)");
  add_solver(detect, o);
  detect->add_option("--ridge-eps", o.ridge_eps, "Relative RX covariance ridge");

  auto* eval = app.add_subcommand("eval", "ROC, AUC and separability of a score raster");
  add_common(eval, o);
  std::string ev_scores, ev_mask, title;
  eval->add_option("--scores", ev_scores, "Score raster")->required();
  eval->add_option("--mask", ev_mask, "Ground-truth mask raster")->required();
  eval->add_option("--title", title, "Plot title");

  auto* run = app.add_subcommand("run", "Full pipeline with stage caching and a summary");
  add_common(run, o);
  add_scene(run, o);
  add_segmentation(run, o, "--seg-seed");
  add_dictionary(run, o);
  add_solver(run, o);
  run->add_option("--method", o.methods, "Detectors to run (repeatable)")
      ->check(CLI::IsMember({"rx", "njcr", "knjcr"}));
  run->add_option("--cube", o.cube, "Existing cube instead of a synthetic scene");
  run->add_option("--mask", o.mask, "Ground-truth mask for --cube");
  run->add_flag("--no-cache", o.no_cache, "Recompute every stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  PipelineConfig c = resolve(o);
  c.validate();
  njcr::set_max_threads(c.threads);
  const fs::path out = c.out_dir;

  if (*synth) {
    const auto files = njcr::synth_stage(c.scene, out);
    std::cout << files.cube.string() << '\n' << files.mask.string() << '\n' << files.sidecar.string() << '\n';
  } else if (*seg) {
    std::cout << njcr::segment_stage(seg_cube, c.segmentation, out, !no_svg).string() << '\n';
  } else if (*dict) {
    const auto files = njcr::dict_stage(dict_cube, dict_labels, c.dictionary, out);
    std::cout << files.atoms.string() << '\n' << files.provenance.string() << '\n';
  } else if (*detect) {
    njcr::DictionaryFiles files;
    if (method != "rx") {
      if (det_dict.empty()) throw njcr::ConfigError("--dict is required for " + method);
      files.atoms = det_dict;
      files.provenance = det_prov.empty() ? fs::path(det_dict).replace_extension(".json") : fs::path(det_prov);
    }
    const auto res = njcr::detect_stage(method, det_cube, files, c, out);
    std::cout << res.scores.string() << '\n';
    if (!res.report.empty()) {
      std::cout << "converged=" << (res.convergence.converged ? "true" : "false")
                << " iterations=" << res.convergence.iterations << " primal=" << res.convergence.primal_residual
                << " dual=" << res.convergence.dual_residual << '\n';
    }
  } else if (*eval) {
    const auto res = njcr::eval_stage(ev_scores, ev_mask, out, title);
    std::cout << "auc_pd_pf=" << res.roc.auc_pd_pf << " auc_pf_tau=" << res.roc.auc_pf_tau
              << " gap=" << res.separability.gap() << '\n';
  } else if (*run) {
    const auto summary = njcr::run_pipeline(c);
    std::cout << summary["methods"].dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const njcr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const njcr::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const njcr::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const njcr::ConvergenceError& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}
