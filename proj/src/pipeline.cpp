#include "njcr/pipeline.hpp"

#include "njcr/parallel.hpp"
#include "njcr/raster_io.hpp"
#include "njcr/rx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace njcr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads members of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError("unknown config key " + where_ + "." + item.key());
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t file_hash(const fs::path& path) { return fnv1a(read_text(path)); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string prefixed(const std::string& stage, const char* what) { return "stage '" + stage + "': " + what; }

// Runs f, re-raising any failure with the stage name while keeping its type.
template <typename F>
auto in_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(prefixed(stage, e.what()));
  } catch (const IoError& e) {
    throw IoError(prefixed(stage, e.what()));
  } catch (const NumericError& e) {
    throw NumericError(prefixed(stage, e.what()));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(prefixed(stage, e.what()));
  } catch (const fs::filesystem_error& e) {
    throw IoError(prefixed(stage, e.what()));
  } catch (const json::exception& e) {
    throw IoError(prefixed(stage, e.what()));
  }
}

json provenance_json(const AtomProvenance& p) {
  json j = {{"source", to_string(p.source)}, {"pixel_index", p.pixel_index}, {"rank", p.rank}};
  if (p.source == AtomSource::background) j["superpixel"] = p.superpixel;
  return j;
}

AtomProvenance provenance_from_json(const json& j) {
  AtomProvenance p;
  const auto source = j.at("source").get<std::string>();
  if (source == "background") {
    p.source = AtomSource::background;
    p.superpixel = j.at("superpixel").get<std::size_t>();
  } else if (source == "anomaly") {
    p.source = AtomSource::anomaly;
  } else {
    throw IoError("unknown atom source '" + source + "'");
  }
  p.pixel_index = j.at("pixel_index").get<std::size_t>();
  p.rank = j.at("rank").get<std::size_t>();
  return p;
}

ConvergenceReport convergence_from_json(const json& j) {
  ConvergenceReport r;
  r.iterations = j.at("iterations").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  r.primal_residual = j.at("primal_residual").get<double>();
  r.dual_residual = j.at("dual_residual").get<double>();
  r.closed_form = j.at("closed_form").get<bool>();
  r.primal_history = j.at("primal_history").get<std::vector<double>>();
  r.dual_history = j.at("dual_history").get<std::vector<double>>();
  return r;
}

UnionDictionary background_part(const UnionDictionary& d) {
  UnionDictionary out;
  out.atoms = d.background();
  out.k_background = d.k_background;
  out.provenance.assign(d.provenance.begin(),
                        d.provenance.begin() + static_cast<std::ptrdiff_t>(d.k_background));
  out.dropped = d.dropped;
  return out;
}

fs::path scores_path(const fs::path& dir, const std::string& method) { return dir / ("scores_" + method + ".bin"); }

DictionaryFiles dictionary_files(const fs::path& dir) {
  return {dir / "dictionary.bin", dir / "dictionary.json"};
}

// A stage result is reusable when its stamp matches the key and every output exists.
class StageCache {
 public:
  StageCache(const fs::path& out_dir, bool enabled) : dir_(out_dir / "cache"), enabled_(enabled) {}

  bool hit(const std::string& stage, std::uint64_t key, const std::vector<fs::path>& outputs) const {
    if (!enabled_) return false;
    const fs::path stamp = dir_ / (stage + ".key");
    if (!fs::exists(stamp)) return false;
    for (const auto& p : outputs) {
      if (!fs::exists(p)) return false;
    }
    return read_text(stamp) == hex(key);
  }

  void store(const std::string& stage, std::uint64_t key) const {
    if (enabled_) write_text(dir_ / (stage + ".key"), hex(key));
  }

 private:
  fs::path dir_;
  bool enabled_;
};

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void validate_method(const std::string& method) {
  if (method != "rx" && method != "njcr" && method != "knjcr") {
    throw ConfigError("unknown method '" + method + "' (expected rx, njcr or knjcr)");
  }
}

void PipelineConfig::validate() const {
  if (scene.width == 0 || scene.height == 0 || scene.bands == 0) throw ConfigError("scene dimensions must be positive");
  if (scene.materials == 0) throw ConfigError("scene.materials must be >= 1");
  if (!(scene.sensor_noise >= 0.0)) throw ConfigError("scene.sensor_noise must be >= 0");
  if (!(scene.background.noise_sigma >= 0.0)) throw ConfigError("scene.noise_sigma must be >= 0");
  if (segmentation.target_count == 0) throw ConfigError("segmentation.target_count must be >= 1");
  if (segmentation.connectivity != 4 && segmentation.connectivity != 8) {
    throw ConfigError("segmentation.connectivity must be 4 or 8");
  }
  if (dictionary.m_per_superpixel == 0) throw ConfigError("dictionary.m_per_superpixel must be >= 1");
  if (dictionary.p_anomaly == 0) throw ConfigError("dictionary.p_anomaly must be >= 1");
  if (!(dictionary.d_c_quantile > 0.0 && dictionary.d_c_quantile <= 1.0)) {
    throw ConfigError("dictionary.d_c_quantile must lie in (0, 1]");
  }
  if (!(dictionary.rx_ridge_eps >= 0.0)) throw ConfigError("dictionary.rx_ridge_eps must be >= 0");
  effective_solver(*this).validate();
  if (methods.empty()) throw ConfigError("methods must not be empty");
  for (const auto& m : methods) validate_method(m);
  if (!cube.empty() && mask.empty()) throw ConfigError("an input cube needs a ground-truth mask");
  if (cube.empty() && !mask.empty()) throw ConfigError("a mask was given without a cube");
}

SolverConfig effective_solver(const PipelineConfig& config) {
  SolverConfig s = config.solver;
  s.nonnegative = config.ablation.nonnegative;
  s.sum_to_one = config.ablation.sum_to_one;
  return s;
}

json to_json(const PipelineConfig& c) {
  const auto& bg = c.scene.background;
  const auto& sg = c.segmentation;
  return {
      {"out_dir", c.out_dir.string()},
      {"cube", c.cube.string()},
      {"mask", c.mask.string()},
      {"scene",
       {{"width", c.scene.width},
        {"height", c.scene.height},
        {"bands", c.scene.bands},
        {"materials", c.scene.materials},
        {"seed", c.scene.seed},
        {"sensor_noise", c.scene.sensor_noise},
        {"noise_sigma", bg.noise_sigma},
        {"regions_per_material", bg.regions_per_material},
        {"dominant_min", bg.dominant_min},
        {"dominant_max", bg.dominant_max}}},
      {"segmentation",
       {{"target_count", sg.target_count},
        {"sigma_g", sg.sigma_g},
        {"seed", sg.seed},
        {"connectivity", sg.connectivity},
        {"pca_components", sg.pca_components},
        {"lanczos_steps", sg.lanczos_steps},
        {"dense_limit", sg.dense_limit}}},
      {"dictionary",
       {{"m_per_superpixel", c.dictionary.m_per_superpixel},
        {"p_anomaly", c.dictionary.p_anomaly},
        {"d_c_quantile", c.dictionary.d_c_quantile},
        {"rx_ridge_eps", c.dictionary.rx_ridge_eps}}},
      {"solver",
       {{"lambda", c.solver.lambda},
        {"rho", c.solver.rho},
        {"epsilon", c.solver.epsilon},
        {"max_iter", c.solver.max_iter},
        {"kernel", to_string(c.solver.kernel)},
        {"sigma", c.solver.sigma},
        {"record_history", c.solver.record_history}}},
      {"ablation",
       {{"nonnegative", c.ablation.nonnegative},
        {"sum_to_one", c.ablation.sum_to_one},
        {"background_only", c.ablation.background_only}}},
      {"methods", c.methods},
      {"strict", c.strict},
      {"cache", c.cache},
      {"threads", c.threads},
  };
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  ObjectReader root(j, "config");
  std::string out_dir = c.out_dir.string(), cube, mask;
  root.get("out_dir", out_dir);
  root.get("cube", cube);
  root.get("mask", mask);
  c.out_dir = out_dir;
  c.cube = cube;
  c.mask = mask;
  if (const json* s = root.child("scene")) {
    ObjectReader r(*s, "scene");
    r.get("width", c.scene.width);
    r.get("height", c.scene.height);
    r.get("bands", c.scene.bands);
    r.get("materials", c.scene.materials);
    r.get("seed", c.scene.seed);
    r.get("sensor_noise", c.scene.sensor_noise);
    r.get("noise_sigma", c.scene.background.noise_sigma);
    r.get("regions_per_material", c.scene.background.regions_per_material);
    r.get("dominant_min", c.scene.background.dominant_min);
    r.get("dominant_max", c.scene.background.dominant_max);
    r.finish();
  }
  if (const json* s = root.child("segmentation")) {
    ObjectReader r(*s, "segmentation");
    r.get("target_count", c.segmentation.target_count);
    r.get("sigma_g", c.segmentation.sigma_g);
    r.get("seed", c.segmentation.seed);
    r.get("connectivity", c.segmentation.connectivity);
    r.get("pca_components", c.segmentation.pca_components);
    r.get("lanczos_steps", c.segmentation.lanczos_steps);
    r.get("dense_limit", c.segmentation.dense_limit);
    r.finish();
  }
  if (const json* s = root.child("dictionary")) {
    ObjectReader r(*s, "dictionary");
    r.get("m_per_superpixel", c.dictionary.m_per_superpixel);
    r.get("p_anomaly", c.dictionary.p_anomaly);
    r.get("d_c_quantile", c.dictionary.d_c_quantile);
    r.get("rx_ridge_eps", c.dictionary.rx_ridge_eps);
    r.finish();
  }
  if (const json* s = root.child("solver")) {
    ObjectReader r(*s, "solver");
    std::string kernel = to_string(c.solver.kernel);
    r.get("lambda", c.solver.lambda);
    r.get("rho", c.solver.rho);
    r.get("epsilon", c.solver.epsilon);
    r.get("max_iter", c.solver.max_iter);
    r.get("kernel", kernel);
    r.get("sigma", c.solver.sigma);
    r.get("record_history", c.solver.record_history);
    r.finish();
    c.solver.kernel = parse_kernel(kernel);
  }
  if (const json* s = root.child("ablation")) {
    ObjectReader r(*s, "ablation");
    r.get("nonnegative", c.ablation.nonnegative);
    r.get("sum_to_one", c.ablation.sum_to_one);
    r.get("background_only", c.ablation.background_only);
    r.finish();
  }
  root.get("methods", c.methods);
  root.get("strict", c.strict);
  root.get("cache", c.cache);
  root.get("threads", c.threads);
  root.finish();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

SceneFiles synth_stage(const SceneSpec& spec, const fs::path& out_dir) {
  const Scene scene = make_scene(spec);
  SceneFiles files{out_dir / "cube.bin", out_dir / "mask.bin", out_dir / "scene.json"};
  save_cube(scene.cube, files.cube);
  save_mask(scene.mask, files.mask);
  json panels = json::array();
  for (const auto& p : scene.placements) {
    panels.push_back({{"row_block", p.row_block}, {"row", p.row}, {"col", p.col}, {"size", p.size},
                      {"abundance", p.abundance}});
  }
  const std::vector<double> target(scene.target.data(), scene.target.data() + scene.target.size());
  write_json(files.sidecar, {{"seed", spec.seed},
                             {"width", spec.width},
                             {"height", spec.height},
                             {"bands", spec.bands},
                             {"materials", spec.materials},
                             {"mixture", "linear"},
                             {"sensor_noise", spec.sensor_noise},
                             {"background_noise", spec.background.noise_sigma},
                             {"anomaly_pixels", scene.mask.anomaly_count()},
                             {"panels", panels},
                             {"target", target}});
  return files;
}

fs::path segment_stage(const fs::path& cube_path, const SegmentationOptions& options, const fs::path& out_dir,
                       bool write_svg) {
  const HsiCube cube = load_cube(cube_path);
  const SuperpixelMap labels = segment(cube, options);
  const fs::path out = out_dir / "labels.bin";
  save_labels(labels, out);
  if (write_svg) write_text(out_dir / "superpixels.svg", superpixel_svg(labels));
  return out;
}

void save_dictionary(const UnionDictionary& d, const DictionaryFiles& files) {
  if (d.size() == 0) throw ConfigError("cannot save an empty dictionary");
  save_cube(unflatten(d.atoms, d.size(), 1), files.atoms);
  json atoms = json::array();
  for (const auto& p : d.provenance) atoms.push_back(provenance_json(p));
  json dropped = json::array();
  for (const auto& p : d.dropped) dropped.push_back(provenance_json(p));
  write_json(files.provenance, {{"k_background", d.k_background},
                                {"k_anomaly", d.k_anomaly},
                                {"bands", d.atoms.rows()},
                                {"atoms", atoms},
                                {"dropped", dropped}});
}

UnionDictionary load_dictionary(const DictionaryFiles& files) {
  const HsiCube cube = load_cube(files.atoms);
  const json j = read_json(files.provenance);
  UnionDictionary d;
  try {
    d.k_background = j.at("k_background").get<std::size_t>();
    d.k_anomaly = j.at("k_anomaly").get<std::size_t>();
    for (const auto& a : j.at("atoms")) d.provenance.push_back(provenance_from_json(a));
    for (const auto& a : j.at("dropped")) d.dropped.push_back(provenance_from_json(a));
  } catch (const json::exception& e) {
    throw IoError("malformed dictionary provenance " + files.provenance.string() + ": " + e.what());
  }
  if (cube.height() != 1 || cube.width() != d.size() || d.provenance.size() != d.size()) {
    throw IoError("dictionary atoms and provenance disagree on the atom count");
  }
  d.atoms = flatten(cube);
  return d;
}

DictionaryFiles dict_stage(const fs::path& cube_path, const fs::path& labels_path, const DictionaryConfig& config,
                           const fs::path& out_dir) {
  const HsiCube cube = load_cube(cube_path);
  const SuperpixelMap labels = load_labels(labels_path);
  if (labels.width() != cube.width() || labels.height() != cube.height()) {
    throw ConfigError("superpixel map and cube dimensions differ");
  }
  const PixelMatrix X = flatten(cube);
  const auto stats = fit_stats(X, config.rx_ridge_eps);
  const ScoreMap rx = rx_scores(cube, stats);
  const auto background = build_background(X, labels, config.m_per_superpixel, config.d_c_quantile);
  const auto anomaly = build_anomaly(X, rx, config.p_anomaly);
  const auto files = dictionary_files(out_dir);
  save_dictionary(make_union(background, anomaly), files);
  return files;
}

json convergence_json(const ConvergenceReport& r) {
  return {{"iterations", r.iterations},          {"converged", r.converged},
          {"primal_residual", r.primal_residual}, {"dual_residual", r.dual_residual},
          {"closed_form", r.closed_form},        {"primal_history", r.primal_history},
          {"dual_history", r.dual_history}};
}

DetectResult detect_stage(const std::string& method, const fs::path& cube_path, const DictionaryFiles& dictionary,
                          const PipelineConfig& config, const fs::path& out_dir) {
  validate_method(method);
  const HsiCube cube = load_cube(cube_path);
  const PixelMatrix X = flatten(cube);
  DetectResult out;
  out.scores = scores_path(out_dir, method);
  out.csv = out_dir / ("scores_" + method + ".csv");

  Eigen::VectorXd scores;
  if (method == "rx") {
    scores = rx_scores(X, fit_stats(X, config.dictionary.rx_ridge_eps));
  } else {
    const SolverConfig cfg = effective_solver(config);
    cfg.validate();
    UnionDictionary d = load_dictionary(dictionary);
    if (config.ablation.background_only) d = background_part(d);
    if (d.atoms.rows() != X.rows()) throw ConfigError("dictionary and cube band counts differ");
    SolveResult res;
    if (method == "njcr") {
      res = solve_njcr(X, d, cfg);
      scores = score_njcr(X, d, res.coefficients);
    } else {
      const KernelCache cache = build_kernel_cache(X, d.atoms, cfg.kernel, cfg.sigma);
      res = solve_knjcr(cache, cfg);
      scores = score_knjcr(cache, d.k_background, res.coefficients);
    }
    out.convergence = res.report;
    out.report = out_dir / ("convergence_" + method + ".json");
    write_json(out.report, convergence_json(res.report));
  }
  save_scores(ScoreMap(cube.width(), cube.height(), scores), out.scores);
  // The CSV mirrors the persisted single-precision values.
  write_scores_csv(load_scores(out.scores), out.csv);
  if (config.strict && !out.report.empty() && !out.convergence.converged) {
    throw ConvergenceError(method + " did not converge within " + std::to_string(config.solver.max_iter) +
                           " iterations");
  }
  return out;
}

json roc_json(const RocReport& r, const SeparabilityStats& s) {
  json tau = json::array();
  for (double t : r.thresholds) {
    if (std::isinf(t)) {
      tau.push_back("inf");
    } else {
      tau.push_back(t);
    }
  }
  return {{"auc_pd_pf", r.auc_pd_pf},
          {"auc_pf_tau", r.auc_pf_tau},
          {"thresholds", tau},
          {"pf", r.pf},
          {"pd", r.pd},
          {"separability",
           {{"percentiles", kSeparabilityPercentiles},
            {"background", s.background},
            {"anomaly", s.anomaly},
            {"gap", s.gap()}}}};
}

EvalResult eval_stage(const fs::path& scores_file, const fs::path& mask_file, const fs::path& out_dir,
                      const std::string& title) {
  const ScoreMap scores = load_scores(scores_file);
  const GroundTruthMask mask = load_mask(mask_file);
  EvalResult out;
  out.roc = roc(scores, mask);
  out.separability = separability(normalize_scores(scores), mask);
  write_json(out_dir / "roc.json", roc_json(out.roc, out.separability));
  write_text(out_dir / "roc.csv", roc_csv(out.roc));
  write_text(out_dir / "separability.csv", separability_csv(out.separability));
  write_text(out_dir / "evaluation.svg", evaluation_svg(out.roc, out.separability, title));
  return out;
}

json run_pipeline(const PipelineConfig& config) {
  config.validate();
  const fs::path& dir = config.out_dir;
  const fs::path failed = dir / "FAILED";
  fs::create_directories(dir);
  fs::remove(failed);
  set_max_threads(config.threads);
  const StageCache cache(dir, config.cache);
  const json cfg = to_json(config);

  json summary;
  json timings = json::object();
  std::string stage;
  auto timed = [&](const std::string& name, bool cached, auto&& body) {
    stage = name;
    const auto t0 = std::chrono::steady_clock::now();
    if (!cached) in_stage(name, body);
    timings[name] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                     {"cached", cached}};
  };

  try {
    // Inputs: given files or a synthesized scene.
    fs::path cube_path = config.cube;
    fs::path mask_path = config.mask;
    if (cube_path.empty()) {
      cube_path = dir / "cube.bin";
      mask_path = dir / "mask.bin";
      const std::uint64_t key = fnv1a(cfg["scene"].dump());
      const bool hit = cache.hit("synth", key, {cube_path, mask_path, dir / "scene.json"});
      timed("synth", hit, [&] {
        synth_stage(config.scene, dir);
        cache.store("synth", key);
      });
    } else {
      stage = "inputs";
      in_stage(stage, [&] {
        if (!fs::exists(cube_path)) throw IoError("cube " + cube_path.string() + " does not exist");
        if (!fs::exists(mask_path)) throw IoError("mask " + mask_path.string() + " does not exist");
      });
    }
    const std::uint64_t cube_key = in_stage("inputs", [&] { return file_hash(cube_path); });

    const bool needs_dictionary =
        std::any_of(config.methods.begin(), config.methods.end(), [](const auto& m) { return m != "rx"; });
    const DictionaryFiles dict_files = dictionary_files(dir);
    std::uint64_t dict_key = 0;
    if (needs_dictionary) {
      const fs::path labels_path = dir / "labels.bin";
      const std::uint64_t seg_key = fnv1a(cfg["segmentation"].dump(), cube_key);
      timed("segment", cache.hit("segment", seg_key, {labels_path}), [&] {
        segment_stage(cube_path, config.segmentation, dir);
        cache.store("segment", seg_key);
      });
      dict_key = fnv1a(cfg["dictionary"].dump(), seg_key);
      timed("dict", cache.hit("dict", dict_key, {dict_files.atoms, dict_files.provenance}), [&] {
        dict_stage(cube_path, labels_path, config.dictionary, dir);
        cache.store("dict", dict_key);
      });
      const UnionDictionary d = in_stage("dict", [&] { return load_dictionary(dict_files); });
      summary["superpixels"] = in_stage("segment", [&] { return load_labels(labels_path).label_count(); });
      summary["dictionary"] = {
          {"k_background", d.k_background}, {"k_anomaly", d.k_anomaly}, {"dropped", d.dropped.size()}};
    }

    json methods = json::object();
    for (const auto& method : config.methods) {
      const std::string detect_name = "detect_" + method;
      std::uint64_t key = fnv1a(method, cube_key);
      if (method == "rx") {
        key = fnv1a(json(config.dictionary.rx_ridge_eps).dump(), key);
      } else {
        key = fnv1a(cfg["solver"].dump() + cfg["ablation"].dump() + json(config.strict).dump(), key ^ dict_key);
      }
      std::vector<fs::path> outputs{scores_path(dir, method)};
      if (method != "rx") outputs.push_back(dir / ("convergence_" + method + ".json"));
      ConvergenceReport report;
      timed(detect_name, cache.hit(detect_name, key, outputs), [&] {
        report = detect_stage(method, cube_path, dict_files, config, dir).convergence;
        cache.store(detect_name, key);
      });
      if (method != "rx" && timings[detect_name]["cached"].get<bool>()) {
        report = in_stage(detect_name, [&] { return convergence_from_json(read_json(outputs[1])); });
        if (config.strict && !report.converged) {
          throw ConvergenceError(prefixed(detect_name, (method + " did not converge").c_str()));
        }
      }

      EvalResult ev;
      timed("eval_" + method, false, [&] {
        ev = eval_stage(scores_path(dir, method), mask_path, dir / ("eval_" + method), method);
      });
      json entry = {{"auc_pd_pf", ev.roc.auc_pd_pf},
                    {"auc_pf_tau", ev.roc.auc_pf_tau},
                    {"separability_gap", ev.separability.gap()}};
      if (method != "rx") {
        entry["converged"] = report.converged;
        entry["iterations"] = report.iterations;
        entry["primal_residual"] = report.primal_residual;
        entry["dual_residual"] = report.dual_residual;
      }
      methods[method] = entry;
    }
    summary["methods"] = methods;
    if (methods.contains("rx")) summary["rx_baseline_auc"] = methods["rx"]["auc_pd_pf"];
    summary["config"] = cfg;
    summary["anomaly_pixels"] = in_stage("inputs", [&] { return load_mask(mask_path).anomaly_count(); });
    summary["timings"] = timings;
    stage = "summary";
    in_stage(stage, [&] { write_json(dir / "summary.json", summary); });
  } catch (const std::exception& e) {
    try {
      write_text(failed, stage + "\n" + e.what() + "\n");
    } catch (...) {
      // The original error is the one worth reporting.
    }
    throw;
  }
  return summary;
}

}  // namespace njcr
