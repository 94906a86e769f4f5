#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "codesign/analysis.hpp"
#include "codesign/baselines.hpp"
#include "codesign/cma_es.hpp"
#include "codesign/encoding.hpp"
#include "codesign/objectives.hpp"
#include "codesign/simulators.hpp"

namespace codesign {

// Objective value substituted for empty or diverged designs.
inline constexpr double kPenaltyLoss = 1e3;

enum class TaskKind { swim, jump };
enum class EncoderKind { basis, neural, voxel };

// Procedural reference patterns on a grid mesh, labels in {1,2}.
// Torus: annulus with radii 0.22-0.38 of grid width; cross: arms 0.2 of
// grid width through the center.
std::vector<int> make_torus_target(const Mesh& grid);
std::vector<int> make_cross_target(const Mesh& grid);

struct MaterialMatchingResult {
  RunHistory history;
  std::vector<int> labels;  // final hard labels
  std::vector<int> target;
  double mismatch_fraction = 0.0;
  std::vector<int> grid_dims;
};

// Fits K=2 score fields on a 50x50 grid to the named target ("torus" or
// "cross") with an n_phi_axis x n_phi_axis RBF grid.
MaterialMatchingResult run_material_matching(const std::string& target_name,
                                             int n_phi_axis, int lambda, int generations,
                                             double sigma0, std::uint64_t seed,
                                             int workers = 1);

// A fully assembled optimization task: mesh, simulator, loss, and a decode
// function for the selected encoder.
struct TaskSetup {
  TaskKind task;
  EncoderKind encoder;
  Mesh mesh;
  SimulatorConfig sim;
  LossWeights weights;
  int param_count = 0;
  std::function<DecodedDesign(const Eigen::VectorXd&)> decode;
  std::vector<bool> actuation_coords;  // true where the coordinate is actuation
};

TaskSetup make_task(TaskKind task, EncoderKind encoder);

// Simulate + score one design vector; penalty on empty/diverged designs.
double evaluate_task(const TaskSetup& setup, const Eigen::VectorXd& c);

// Joint: one run over all coordinates. Sequential: morphology phase with
// actuation frozen, then actuation alone, splitting total_gens 3:1.
RunHistory optimize_task(const TaskSetup& setup, bool sequential, int total_gens,
                         int lambda, double sigma0, std::uint64_t seed, int workers = 1);

struct ExpressivenessResult {
  MdsResult mds;
  Eigen::VectorXd novelty;
  double median_novelty = 0.0;
};

ExpressivenessResult analyze_sampler(const ShapeSampler& sampler, int param_count,
                                     int n_samples, std::uint64_t seed, int workers = 1);

// The three basis morph grids (2/4/6 per axis on the sphere bounding box)
// and the three neural architectures used in the expressiveness study.
RbfGridSpec analysis_basis_grid(int per_axis);
MlpSpec analysis_neural_spec(int level);  // level 0,1,2

// Ready-made samplers for the three resolution levels of each encoder family,
// with the per-level morph bounds the expressiveness study uses.
struct AnalysisPreset {
  ShapeSampler sampler;
  int param_count = 0;
};
AnalysisPreset analysis_basis_preset(int level, const Eigen::MatrixXd& reference_cloud);
AnalysisPreset analysis_neural_preset(int level, const Eigen::MatrixXd& reference_cloud);

double median(Eigen::VectorXd v);

}  // namespace codesign
