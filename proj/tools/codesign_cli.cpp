// Configuration-driven experiment runner. Subcommands:
//   match-material  fit a two-material pattern on a 50x50 grid
//   sample-shapes   expressiveness analysis of a shape embedding
//   optimize        co-design a jumper or swimmer with CMA-ES
//   replay          re-simulate a saved best design
// Exit codes: 0 ok, 2 usage error, 3 config error, 4 runtime error.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "codesign/errors.hpp"
#include "codesign/experiments.hpp"

using json = nlohmann::json;
using namespace codesign;

namespace {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = all cores

  int resolved_workers() const {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }
};

// Returns the raw file contents alongside the parsed JSON so the manifest
// hash covers the exact bytes.
json load_config(const std::string& path, std::string& raw) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  raw.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  try {
    return json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& section) {
  if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("unknown config key '" + section + key + "'");
}

void write_loss_csv(const std::filesystem::path& path, const RunHistory& hist) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw ConfigError("cannot write " + path.string());
  std::fprintf(f, "generation,best_loss,mean_loss,sigma\n");
  for (const auto& row : hist.rows)
    std::fprintf(f, "%d,%.17g,%.17g,%.17g\n", row.generation, row.best_loss, row.mean_loss,
                 row.sigma);
  std::fclose(f);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw ConfigError("cannot write " + path.string());
  std::fprintf(f, "step,time,node_id,x,y\n");
  for (size_t s = 0; s < traj.positions.size(); ++s)
    for (long i = 0; i < traj.positions[s].rows(); ++i)
      std::fprintf(f, "%zu,%.17g,%ld,%.17g,%.17g\n", s, traj.times[s], i,
                   traj.positions[s](i, 0), traj.positions[s](i, 1));
  std::fclose(f);
}

void write_pgm(const std::filesystem::path& path, const std::vector<int>& labels,
               const std::vector<int>& dims) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw ConfigError("cannot write " + path.string());
  const int nx = dims[0], ny = dims[1];
  std::fprintf(f, "P5\n%d %d\n255\n", nx, ny);
  // element index is x-major with y fastest; PGM rows run top to bottom
  for (int iy = ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < nx; ++ix) {
      const unsigned char pix =
          static_cast<unsigned char>(labels[static_cast<size_t>(ix * ny + iy)]);
      std::fwrite(&pix, 1, 1, f);
    }
  std::fclose(f);
}

void write_manifest(const Common& common, const std::string& raw_config,
                    const std::vector<std::string>& artifacts, const json& extra) {
  json manifest;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(raw_config)));
  manifest["config_hash"] = hash;
  manifest["seed"] = common.seed;
  manifest["artifacts"] = artifacts;
  for (const auto& [key, value] : extra.items()) manifest[key] = value;
  std::ofstream out(std::filesystem::path(common.out_dir) / "manifest.json");
  out << manifest.dump(2) << "\n";
}

int run_match_material(const Common& common) {
  std::string raw;
  const json cfg = load_config(common.config_path, raw);
  check_keys(cfg, {"target", "n_phi_axis", "lambda", "generations", "sigma0"}, "");
  if (!cfg.contains("target")) throw ConfigError("missing config key 'target'");
  const std::string target = cfg["target"].get<std::string>();
  if (target != "torus" && target != "cross")
    throw ConfigError("config key 'target' must be 'torus' or 'cross'");
  const int n_phi_axis = cfg.value("n_phi_axis", 8);
  const int lambda = cfg.value("lambda", 50);
  const int generations = cfg.value("generations", 200);
  const double sigma0 = cfg.value("sigma0", 0.3);

  const MaterialMatchingResult result = run_material_matching(
      target, n_phi_axis, lambda, generations, sigma0, common.seed,
      common.resolved_workers());

  const std::filesystem::path out(common.out_dir);
  std::filesystem::create_directories(out);
  write_loss_csv(out / "loss.csv", result.history);
  write_pgm(out / "labels.pgm", result.labels, result.grid_dims);
  write_manifest(common, raw, {"loss.csv", "labels.pgm"},
                 {{"mismatch_fraction", result.mismatch_fraction}});
  std::printf("target=%s n_phi=%d mismatch_fraction=%.6f\n", target.c_str(),
              n_phi_axis * n_phi_axis, result.mismatch_fraction);
  return 0;
}

int run_sample_shapes(const Common& common) {
  std::string raw;
  const json cfg = load_config(common.config_path, raw);
  check_keys(cfg, {"encoder", "level", "n_samples", "cloud_size"}, "");
  const std::string encoder = cfg.value("encoder", "basis");
  if (encoder != "basis" && encoder != "neural")
    throw ConfigError("config key 'encoder' must be 'basis' or 'neural'");
  const int level = cfg.value("level", 0);
  if (level < 0 || level > 2) throw ConfigError("config key 'level' must be 0, 1, or 2");
  const int n_samples = cfg.value("n_samples", 600);
  const int cloud_size = cfg.value("cloud_size", 200);

  const Eigen::MatrixXd sphere = build_sphere_cloud(cloud_size, 1.0);
  const AnalysisPreset preset = encoder == "basis" ? analysis_basis_preset(level, sphere)
                                                   : analysis_neural_preset(level, sphere);

  const ExpressivenessResult result = analyze_sampler(
      preset.sampler, preset.param_count, n_samples, common.seed, common.resolved_workers());

  const std::filesystem::path out(common.out_dir);
  std::filesystem::create_directories(out);
  {
    std::FILE* f = std::fopen((out / "eigenvalues.csv").string().c_str(), "wb");
    if (!f) throw ConfigError("cannot write eigenvalues.csv");
    std::fprintf(f, "index,eigenvalue,cumulative_fraction\n");
    for (long i = 0; i < result.mds.eigenvalues.size(); ++i)
      std::fprintf(f, "%ld,%.17g,%.17g\n", i, result.mds.eigenvalues[i],
                   result.mds.cumulative[i]);
    std::fclose(f);
  }
  {
    std::FILE* f = std::fopen((out / "novelty.csv").string().c_str(), "wb");
    if (!f) throw ConfigError("cannot write novelty.csv");
    std::fprintf(f, "sample_id,novelty\n");
    for (long i = 0; i < result.novelty.size(); ++i)
      std::fprintf(f, "%ld,%.17g\n", i, result.novelty[i]);
    std::fclose(f);
  }
  write_manifest(common, raw, {"eigenvalues.csv", "novelty.csv"},
                 {{"d95", result.mds.d95},
                  {"median_novelty", result.median_novelty},
                  {"param_count", preset.param_count}});
  std::printf("encoder=%s params=%d d95=%d median_novelty=%.6g\n", encoder.c_str(),
              preset.param_count, result.mds.d95, result.median_novelty);
  return 0;
}

TaskKind parse_task(const std::string& name) {
  if (name == "swim") return TaskKind::swim;
  if (name == "jump") return TaskKind::jump;
  throw CLI::ValidationError("--task", "unknown task '" + name + "' (use swim or jump)");
}

EncoderKind parse_encoder(const std::string& name) {
  if (name == "basis") return EncoderKind::basis;
  if (name == "neural") return EncoderKind::neural;
  if (name == "voxel") return EncoderKind::voxel;
  throw CLI::ValidationError("--encoder",
                             "unknown encoder '" + name + "' (use basis, neural, or voxel)");
}

int run_optimize(const Common& common, const std::string& task_name,
                 const std::string& encoder_name, const std::string& schedule_name) {
  const TaskKind task = parse_task(task_name);
  const EncoderKind encoder = parse_encoder(encoder_name);
  if (schedule_name != "joint" && schedule_name != "sequential")
    throw CLI::ValidationError("--schedule", "unknown schedule '" + schedule_name + "'");

  std::string raw = "{}";
  json cfg = json::object();
  if (!common.config_path.empty()) cfg = load_config(common.config_path, raw);
  check_keys(cfg, {"lambda", "generations", "sigma0"}, "");
  const int lambda = cfg.value("lambda", 50);
  const int generations = cfg.value("generations", 200);
  const double sigma0 = cfg.value("sigma0", 0.3);

  TaskSetup setup;
  try {
    setup = make_task(task, encoder);
  } catch (const InvalidSpecError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  const RunHistory hist =
      optimize_task(setup, schedule_name == "sequential", generations, lambda, sigma0,
                    common.seed, common.resolved_workers());

  const std::filesystem::path out(common.out_dir);
  std::filesystem::create_directories(out);
  write_loss_csv(out / "loss.csv", hist);

  json design;
  design["task"] = task_name;
  design["encoder"] = encoder_name;
  design["best_loss"] = hist.best_value;
  design["vector"] = std::vector<double>(hist.best_vector.data(),
                                         hist.best_vector.data() + hist.best_vector.size());
  {
    std::ofstream f(out / "best_design.json");
    f << design.dump(2) << "\n";
  }

  std::vector<std::string> artifacts = {"loss.csv", "best_design.json"};
  try {
    const DecodedDesign decoded = setup.decode(hist.best_vector);
    const Trajectory traj = task == TaskKind::jump
                                ? simulate_jumper(decoded, setup.mesh, setup.sim)
                                : simulate_swimmer(decoded, setup.mesh, setup.sim);
    write_trajectory_csv(out / "trajectory.csv", traj);
    artifacts.push_back("trajectory.csv");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "warning: best design does not simulate (%s)\n", e.what());
  }

  write_manifest(common, raw, artifacts,
                 {{"best_loss", hist.best_value}, {"evaluations", hist.evaluations}});
  std::printf("task=%s encoder=%s schedule=%s best_loss=%.6f evaluations=%lld\n",
              task_name.c_str(), encoder_name.c_str(), schedule_name.c_str(),
              hist.best_value, hist.evaluations);
  return 0;
}

int run_replay(const Common& common) {
  std::string raw;
  const json cfg = load_config(common.config_path, raw);
  check_keys(cfg, {"task", "encoder", "best_loss", "vector"}, "");
  for (const char* key : {"task", "encoder", "vector"})
    if (!cfg.contains(key)) throw ConfigError(std::string("missing config key '") + key + "'");

  const TaskKind task = parse_task(cfg["task"].get<std::string>());
  const EncoderKind encoder = parse_encoder(cfg["encoder"].get<std::string>());
  const std::vector<double> values = cfg["vector"].get<std::vector<double>>();

  const TaskSetup setup = make_task(task, encoder);
  if (static_cast<int>(values.size()) != setup.param_count)
    throw ConfigError("design vector length does not match the task encoder");
  const Eigen::VectorXd c =
      Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));

  const DecodedDesign decoded = setup.decode(c);
  const Trajectory traj = task == TaskKind::jump
                              ? simulate_jumper(decoded, setup.mesh, setup.sim)
                              : simulate_swimmer(decoded, setup.mesh, setup.sim);

  const std::filesystem::path out(common.out_dir);
  std::filesystem::create_directories(out);
  write_trajectory_csv(out / "trajectory.csv", traj);
  const TrajectoryMetrics m = trajectory_metrics(traj, decoded);
  const double loss = task == TaskKind::jump ? jump_loss(m, setup.weights)
                                             : swim_loss(m, setup.weights);
  write_manifest(common, raw, {"trajectory.csv"}, {{"replay_loss", loss}});
  std::printf("replay_loss=%.6f\n", loss);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft-robot co-design toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string task_name, encoder_name, schedule_name = "joint";

  auto add_common = [&common](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", common.config_path, "JSON config file");
    if (config_required) opt->required();
    cmd->add_option("--seed", common.seed, "random seed");
    cmd->add_option("--workers", common.workers, "worker threads (default: all cores)");
    cmd->add_option("--out", common.out_dir, "output directory");
  };

  CLI::App* match = app.add_subcommand("match-material", "fit a 50x50 material pattern");
  add_common(match, true);

  CLI::App* sample = app.add_subcommand("sample-shapes", "embedding expressiveness analysis");
  add_common(sample, true);

  CLI::App* optimize = app.add_subcommand("optimize", "co-design a robot with CMA-ES");
  add_common(optimize, false);
  optimize->add_option("--task", task_name, "swim or jump")->required();
  optimize->add_option("--encoder", encoder_name, "basis, neural, or voxel")->required();
  optimize->add_option("--schedule", schedule_name, "joint or sequential");

  CLI::App* replay = app.add_subcommand("replay", "re-simulate a saved design");
  add_common(replay, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (match->parsed()) return run_match_material(common);
    if (sample->parsed()) return run_sample_shapes(common);
    if (optimize->parsed()) return run_optimize(common, task_name, encoder_name, schedule_name);
    if (replay->parsed()) return run_replay(common);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 4;
  }
  return 2;
}
