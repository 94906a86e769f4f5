#include "codesign/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "codesign/errors.hpp"

namespace codesign {

namespace {

RbfGridSpec square_grid(int per_axis, double lo, double hi) {
  RbfGridSpec spec;
  spec.dims = {per_axis, per_axis};
  spec.lo = Eigen::Vector2d(lo, lo);
  spec.hi = Eigen::Vector2d(hi, hi);
  return spec;
}

}  // namespace

std::vector<int> make_torus_target(const Mesh& grid) {
  const double w = grid.dims[0] * grid.cell_size;
  const Eigen::Vector2d center(0.5 * w, 0.5 * w);
  std::vector<int> target(static_cast<size_t>(grid.num_elements()), 1);
  for (int j = 0; j < grid.num_elements(); ++j) {
    const double r = (grid.element_centers.row(j).transpose().head<2>() - center).norm();
    if (r >= 0.22 * w && r <= 0.38 * w) target[static_cast<size_t>(j)] = 2;
  }
  return target;
}

std::vector<int> make_cross_target(const Mesh& grid) {
  const double w = grid.dims[0] * grid.cell_size;
  std::vector<int> target(static_cast<size_t>(grid.num_elements()), 1);
  for (int j = 0; j < grid.num_elements(); ++j) {
    const double x = grid.element_centers(j, 0) - 0.5 * w;
    const double y = grid.element_centers(j, 1) - 0.5 * w;
    if (std::abs(x) <= 0.1 * w || std::abs(y) <= 0.1 * w) target[static_cast<size_t>(j)] = 2;
  }
  return target;
}

MaterialMatchingResult run_material_matching(const std::string& target_name,
                                             int n_phi_axis, int lambda, int generations,
                                             double sigma0, std::uint64_t seed,
                                             int workers) {
  const Mesh grid = build_grid_mesh({50, 50}, 1.0 / 50.0);

  EncoderConfig config;
  config.K = 2;
  config.material_spec = square_grid(n_phi_axis, 0.0, 1.0);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(grid.element_centers, config.material_spec);

  MaterialMatchingResult out;
  out.grid_dims = grid.dims;
  if (target_name == "torus")
    out.target = make_torus_target(grid);
  else if (target_name == "cross")
    out.target = make_cross_target(grid);
  else
    throw InvalidSpecError("run_material_matching: unknown target '" + target_name + "'");

  auto objective = [&](const Eigen::VectorXd& c) {
    return material_match_loss(c, out.target, B, layout, config.tau);
  };

  out.history = run_schedule(objective, layout.total, joint_schedule(generations), lambda,
                             sigma0, seed, Eigen::VectorXd::Zero(layout.total), workers);

  out.labels = decode_material_labels(out.history.best_vector, B, layout);
  int mismatch = 0;
  for (size_t j = 0; j < out.target.size(); ++j)
    if (out.labels[j] != out.target[j]) ++mismatch;
  out.mismatch_fraction = static_cast<double>(mismatch) / static_cast<double>(out.target.size());
  return out;
}

namespace {

TaskSetup make_jumper(EncoderKind encoder) {
  TaskSetup setup;
  setup.task = TaskKind::jump;
  setup.encoder = encoder;
  setup.mesh = build_grid_mesh({7, 7}, 0.1);

  setup.sim.dt = 1e-3;
  setup.sim.n_steps = 1500;
  setup.sim.gravity = 9.81;

  ActuationSpec act;
  act.kind = ActuationKind::gaussian_pulse;
  act.groups = 1;
  act.peak_lo = 0.1;
  act.peak_hi = 1.0;
  act.width_lo = 0.02;
  act.width_hi = 0.3;

  if (encoder == EncoderKind::voxel) {
    VoxelEncoderSpec voxel;
    voxel.actuation = act;
    const Mesh mesh = setup.mesh;
    setup.param_count = voxel.param_count(mesh.num_elements());
    setup.decode = [voxel, mesh](const Eigen::VectorXd& c) {
      return decode_per_voxel(c, voxel, mesh);
    };
    setup.actuation_coords.assign(static_cast<size_t>(setup.param_count), false);
    for (int i = mesh.num_elements(); i < setup.param_count; ++i)
      setup.actuation_coords[static_cast<size_t>(i)] = true;
    return setup;
  }

  EncoderConfig config;
  config.K = 2;
  config.material_spec = square_grid(3, 0.0, 0.7);
  config.occupancy_mode = OccupancyMode::sum_of_materials;
  config.actuation = act;

  auto ctx = std::make_shared<EncoderContext>(make_encoder_context(config, setup.mesh));
  setup.param_count = ctx->layout.total;
  setup.decode = [ctx](const Eigen::VectorXd& c) { return decode_design(c, *ctx); };
  setup.actuation_coords.assign(static_cast<size_t>(setup.param_count), false);
  for (int i = 0; i < ctx->layout.actuation.len; ++i)
    setup.actuation_coords[static_cast<size_t>(ctx->layout.actuation.offset + i)] = true;
  return setup;
}

TaskSetup make_swimmer(EncoderKind encoder) {
  TaskSetup setup;
  setup.task = TaskKind::swim;
  setup.encoder = encoder;

  const Mesh full = build_grid_mesh({12, 4}, 0.5);  // 6 x 2 body box
  const Eigen::Vector2d center(3.0, 1.0);
  setup.mesh = mask_mesh(full, [&center](const Eigen::VectorXd& x) {
    const double ex = (x[0] - center[0]) / 3.0;
    const double ey = (x[1] - center[1]) / 1.0;
    return ex * ex + ey * ey <= 1.0;
  });

  setup.sim.dt = 1e-3;
  setup.sim.n_steps = 2000;
  setup.sim.gravity = 0.0;

  ActuationSpec act;
  act.kind = ActuationKind::squared_periodic;
  act.groups = 2;
  act.freq_lo = 0.5;
  act.freq_hi = 3.0;

  // muscle labels only in the upper/lower bands: |y - 1| >= 0.4 * half height
  std::vector<std::vector<bool>> masks(3);
  std::vector<bool> band(static_cast<size_t>(setup.mesh.num_elements()));
  for (int j = 0; j < setup.mesh.num_elements(); ++j)
    band[static_cast<size_t>(j)] = std::abs(setup.mesh.element_centers(j, 1) - 1.0) >= 0.4;
  masks[1] = band;
  masks[2] = band;

  if (encoder == EncoderKind::neural) {
    NeuralFieldConfig nf;
    nf.K = 3;
    nf.material_net.layers = {2, 4, 3};
    nf.morph_net = MlpSpec{{2, 6, 2}};
    nf.actuation = act;
    nf.muscle_region_masks = masks;
    const Mesh mesh = setup.mesh;
    setup.param_count = nf.param_count();
    setup.decode = [nf, mesh](const Eigen::VectorXd& c) {
      return decode_neural_field(c, nf, mesh);
    };
    setup.actuation_coords.assign(static_cast<size_t>(setup.param_count), false);
    for (int i = setup.param_count - act.param_count(); i < setup.param_count; ++i)
      setup.actuation_coords[static_cast<size_t>(i)] = true;
    return setup;
  }

  EncoderConfig config;
  config.K = 3;
  config.material_spec = RbfGridSpec{{6, 2}, Eigen::Vector2d(0.0, 0.0),
                                     Eigen::Vector2d(6.0, 2.0), 1.0};
  config.morph_spec = config.material_spec;
  config.actuation = act;
  config.muscle_region_masks = masks;

  auto ctx = std::make_shared<EncoderContext>(make_encoder_context(config, setup.mesh));
  setup.param_count = ctx->layout.total;
  setup.decode = [ctx](const Eigen::VectorXd& c) { return decode_design(c, *ctx); };
  setup.actuation_coords.assign(static_cast<size_t>(setup.param_count), false);
  for (int i = 0; i < ctx->layout.actuation.len; ++i)
    setup.actuation_coords[static_cast<size_t>(ctx->layout.actuation.offset + i)] = true;
  return setup;
}

}  // namespace

TaskSetup make_task(TaskKind task, EncoderKind encoder) {
  if (task == TaskKind::jump) {
    if (encoder == EncoderKind::neural)
      throw InvalidSpecError("make_task: neural encoder is paired with the swim task");
    return make_jumper(encoder);
  }
  if (encoder == EncoderKind::voxel)
    throw InvalidSpecError("make_task: voxel encoder is paired with the jump task");
  return make_swimmer(encoder);
}

double evaluate_task(const TaskSetup& setup, const Eigen::VectorXd& c) {
  DecodedDesign design;
  try {
    design = setup.decode(c);
    if (design.empty) return kPenaltyLoss;
    const Trajectory traj = setup.task == TaskKind::jump
                                ? simulate_jumper(design, setup.mesh, setup.sim)
                                : simulate_swimmer(design, setup.mesh, setup.sim);
    const TrajectoryMetrics m = trajectory_metrics(traj, design);
    return setup.task == TaskKind::jump ? jump_loss(m, setup.weights)
                                        : swim_loss(m, setup.weights);
  } catch (const EmptyDesignError&) {
    return kPenaltyLoss;
  } catch (const SimulationDivergedError&) {
    return kPenaltyLoss;
  } catch (const DegenerateGeometryError&) {
    return kPenaltyLoss;
  }
}

RunHistory optimize_task(const TaskSetup& setup, bool sequential, int total_gens,
                         int lambda, double sigma0, std::uint64_t seed, int workers) {
  OptimizationSchedule schedule;
  if (!sequential) {
    schedule = joint_schedule(total_gens);
  } else {
    schedule.mode = OptimizationSchedule::Mode::sequential;
    const int phase2 = total_gens / 4;
    schedule.phase_gens = {total_gens - phase2, phase2};
    std::vector<bool> morphology(setup.actuation_coords);
    morphology.flip();
    schedule.unfrozen = {morphology, setup.actuation_coords};
  }

  auto objective = [&setup](const Eigen::VectorXd& c) { return evaluate_task(setup, c); };
  return run_schedule(objective, setup.param_count, schedule, lambda, sigma0, seed,
                      Eigen::VectorXd::Zero(setup.param_count), workers);
}

ExpressivenessResult analyze_sampler(const ShapeSampler& sampler, int param_count,
                                     int n_samples, std::uint64_t seed, int workers) {
  ExpressivenessResult out;
  const DistanceMatrix D = sample_design_distances(sampler, param_count, n_samples, seed, workers);
  out.mds = classical_mds(D);
  out.novelty = novelty_scores(D);
  out.median_novelty = median(out.novelty);
  return out;
}

RbfGridSpec analysis_basis_grid(int per_axis) {
  RbfGridSpec spec;
  spec.dims = {per_axis, per_axis, per_axis};
  spec.lo = Eigen::Vector3d(-1.0, -1.0, -1.0);
  spec.hi = Eigen::Vector3d(1.0, 1.0, 1.0);
  return spec;
}

MlpSpec analysis_neural_spec(int level) {
  switch (level) {
    case 0: return MlpSpec{{3, 4, 3}};
    case 1: return MlpSpec{{3, 6, 12, 6, 3}};
    case 2: return MlpSpec{{3, 8, 16, 16, 8, 3}};
    default: throw InvalidSpecError("analysis_neural_spec: level must be 0..2");
  }
}

AnalysisPreset analysis_basis_preset(int level, const Eigen::MatrixXd& reference_cloud) {
  if (level < 0 || level > 2) throw InvalidSpecError("analysis_basis_preset: level must be 0..2");
  // The morph bound grows at the finest level: gradient magnitudes scale
  // inversely with kernel width, so a fixed bound would crush the fine grid's
  // displacement amplitudes and mask its added resolution.
  static constexpr double kGamma[3] = {5.0, 5.0, 12.0};
  const RbfGridSpec spec = analysis_basis_grid(2 * (level + 1));
  AnalysisPreset preset;
  preset.param_count = 3 * spec.num_centers();
  preset.sampler = basis_shape_sampler(spec, kGamma[level], reference_cloud);
  return preset;
}

AnalysisPreset analysis_neural_preset(int level, const Eigen::MatrixXd& reference_cloud) {
  const MlpSpec net = analysis_neural_spec(level);
  AnalysisPreset preset;
  preset.param_count = net.param_count();
  preset.sampler = neural_shape_sampler(net, 0.3, reference_cloud);
  return preset;
}

double median(Eigen::VectorXd v) {
  if (v.size() == 0) throw InvalidSpecError("median: empty vector");
  std::sort(v.data(), v.data() + v.size());
  const long n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace codesign
