#ifndef NJCR_PIPELINE_HPP
#define NJCR_PIPELINE_HPP

// Stage functions behind the CLI and the single-shot run. Every stage reads
// and writes the raster formats of raster_io.hpp, so a stage-by-stage session
// and run() produce the same files.

#include "njcr/core.hpp"
#include "njcr/dictionary.hpp"
#include "njcr/evaluation.hpp"
#include "njcr/segmentation.hpp"
#include "njcr/solver.hpp"
#include "njcr/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace njcr {

struct DictionaryConfig {
  std::size_t m_per_superpixel = 5;
  std::size_t p_anomaly = 50;
  double d_c_quantile = 0.02;
  double rx_ridge_eps = 1e-6;
};

/// Switches for the ablation variants of the detector.
struct AblationConfig {
  bool nonnegative = true;
  bool sum_to_one = true;
  bool background_only = false;
};

struct PipelineConfig {
  std::filesystem::path out_dir = "njcr_out";
  // Existing inputs; when cube is empty the scene is synthesized.
  std::filesystem::path cube;
  std::filesystem::path mask;
  SceneSpec scene;
  SegmentationOptions segmentation;
  DictionaryConfig dictionary;
  // rho = 20 converges on 100x100 scenes well inside max_iter; rho = 1 does not.
  SolverConfig solver{.rho = 20.0};
  AblationConfig ablation;
  std::vector<std::string> methods{"rx", "njcr", "knjcr"};
  bool strict = false;  // non-convergence becomes a ConvergenceError
  bool cache = true;
  std::size_t threads = 0;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

/// Solver configuration with the ablation switches applied.
SolverConfig effective_solver(const PipelineConfig& config);

/// Method names accepted by detect: rx, njcr, knjcr.
void validate_method(const std::string& method);

// --- stages ------------------------------------------------------------

struct SceneFiles {
  std::filesystem::path cube;
  std::filesystem::path mask;
  std::filesystem::path sidecar;
};
/// Background plus the standard target panels; writes cube, mask and a JSON
/// sidecar with the seed, mixture rule and panel coordinates.
SceneFiles synth_stage(const SceneSpec& scene, const std::filesystem::path& out_dir);

std::filesystem::path segment_stage(const std::filesystem::path& cube,
                                    const SegmentationOptions& options,
                                    const std::filesystem::path& out_dir, bool write_svg = true);

struct DictionaryFiles {
  std::filesystem::path atoms;       // K x 1 x L cube
  std::filesystem::path provenance;  // JSON
};
DictionaryFiles dict_stage(const std::filesystem::path& cube, const std::filesystem::path& labels,
                           const DictionaryConfig& config, const std::filesystem::path& out_dir);

void save_dictionary(const UnionDictionary& dictionary, const DictionaryFiles& files);
UnionDictionary load_dictionary(const DictionaryFiles& files);

struct DetectResult {
  std::filesystem::path scores;
  std::filesystem::path csv;
  std::filesystem::path report;  // convergence JSON, solver methods only
  ConvergenceReport convergence;
};
DetectResult detect_stage(const std::string& method, const std::filesystem::path& cube,
                          const DictionaryFiles& dictionary, const PipelineConfig& config,
                          const std::filesystem::path& out_dir);

struct EvalResult {
  RocReport roc;
  SeparabilityStats separability;
};
/// Writes roc.json, roc.csv, separability.csv and evaluation.svg under out_dir.
EvalResult eval_stage(const std::filesystem::path& scores, const std::filesystem::path& mask,
                      const std::filesystem::path& out_dir, const std::string& title = "");

nlohmann::json convergence_json(const ConvergenceReport& report);
nlohmann::json roc_json(const RocReport& report, const SeparabilityStats& stats);

/// The whole chain. Returns the summary also written to out_dir/summary.json;
/// its "timings" member is the only part that varies between identical runs.
nlohmann::json run_pipeline(const PipelineConfig& config);

/// 64-bit FNV-1a, used for stage cache keys.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace njcr

#endif  // NJCR_PIPELINE_HPP
