#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "codesign/encoding.hpp"
#include "codesign/errors.hpp"

using namespace codesign;

namespace {

RbfGridSpec grid3d(int nx, int ny, int nz, double lo = 0.0, double hi = 1.0) {
  RbfGridSpec spec;
  spec.dims = {nx, ny, nz};
  spec.lo = Eigen::Vector3d::Constant(lo);
  spec.hi = Eigen::Vector3d::Constant(hi);
  return spec;
}

RbfGridSpec grid2d(int nx, int ny, double lo = 0.0, double hi = 1.0) {
  RbfGridSpec spec;
  spec.dims = {nx, ny};
  spec.lo = Eigen::Vector2d::Constant(lo);
  spec.hi = Eigen::Vector2d::Constant(hi);
  return spec;
}

EncoderConfig swimmer_style_config() {
  EncoderConfig config;
  config.K = 3;
  config.material_spec = grid3d(4, 3, 2);  // 24 centers
  config.morph_spec = config.material_spec;
  ActuationSpec act;
  act.kind = ActuationKind::squared_periodic;
  act.groups = 2;
  config.actuation = act;
  return config;
}

EncoderConfig jumper_style_config() {
  EncoderConfig config;
  config.K = 2;
  config.material_spec = grid3d(3, 3, 3);  // 27 centers
  config.occupancy_mode = OccupancyMode::sum_of_materials;
  ActuationSpec act;
  act.kind = ActuationKind::gaussian_pulse;
  act.groups = 1;
  config.actuation = act;
  return config;
}

Eigen::VectorXd random_vector(int n, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

}  // namespace

TEST_CASE("layout totals for the reference configurations") {
  const DesignVectorLayout swim = build_layout(swimmer_style_config());
  CHECK(swim.material.len == 72);
  CHECK(swim.morph.len == 72);
  CHECK(swim.actuation.len == 3);
  CHECK(swim.total == 147);

  const DesignVectorLayout jump = build_layout(jumper_style_config());
  CHECK(jump.material.len == 54);
  CHECK(jump.occupancy.len == 0);  // derived from material fields, no extra block
  CHECK(jump.actuation.len == 3);
  CHECK(jump.total == 57);

  EncoderConfig minimal;
  minimal.K = 1;
  minimal.material_spec = grid2d(4, 4);
  CHECK(build_layout(minimal).total == 16);
}

TEST_CASE("layout blocks are contiguous, ordered, and non-overlapping") {
  const DesignVectorLayout layout = build_layout(swimmer_style_config());
  CHECK(layout.material.offset == 0);
  CHECK(layout.morph.offset == layout.material.offset + layout.material.len);
  CHECK(layout.occupancy.offset == layout.morph.offset + layout.morph.len);
  CHECK(layout.actuation.offset == layout.occupancy.offset + layout.occupancy.len);
  CHECK(layout.external.offset == layout.actuation.offset + layout.actuation.len);
  CHECK(layout.external.offset + layout.external.len == layout.total);
}

TEST_CASE("layout round-trip reproduces the design vector exactly") {
  const DesignVectorLayout layout = build_layout(swimmer_style_config());
  const Eigen::VectorXd c = random_vector(layout.total, 11);
  Eigen::VectorXd rebuilt(layout.total);
  rebuilt.segment(layout.material.offset, layout.material.len) = layout.block(c, layout.material);
  rebuilt.segment(layout.morph.offset, layout.morph.len) = layout.block(c, layout.morph);
  rebuilt.segment(layout.actuation.offset, layout.actuation.len) = layout.block(c, layout.actuation);
  CHECK((rebuilt - c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("actuation parameter counts per kind") {
  ActuationSpec act;
  act.kind = ActuationKind::squared_periodic;
  act.groups = 2;
  CHECK(act.param_count() == 3);
  act.groups = 4;
  CHECK(act.param_count() == 7);
  act.kind = ActuationKind::gaussian_pulse;
  act.groups = 1;
  CHECK(act.param_count() == 3);
  act.kind = ActuationKind::schedule;
  act.groups = 2;
  act.schedule_knots = 4;
  CHECK(act.param_count() == 8);
}

TEST_CASE("softmax weights are row-stochastic and uniform at c = 0") {
  const Mesh mesh = build_grid_mesh({5, 5}, 0.2);
  EncoderConfig config;
  config.K = 3;
  config.material_spec = grid2d(3, 3);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);

  const Eigen::MatrixXd w0 = decode_material_weights(
      Eigen::VectorXd::Zero(layout.total), B, layout, 1.0);
  CHECK((w0.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-12);

  const Eigen::MatrixXd w = decode_material_weights(random_vector(layout.total, 3), B, layout, 1.0);
  for (long j = 0; j < w.rows(); ++j)
    CHECK(std::abs(w.row(j).sum() - 1.0) < 1e-12);
}

TEST_CASE("low-temperature softmax argmax matches hard labels") {
  const Mesh mesh = build_grid_mesh({6, 6}, 0.2);
  EncoderConfig config;
  config.K = 3;
  config.material_spec = grid2d(3, 3, 0.0, 1.2);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);

  const Eigen::VectorXd c = random_vector(layout.total, 7);
  const Eigen::MatrixXd w = decode_material_weights(c, B, layout, 1e-3);
  const std::vector<int> labels = decode_material_labels(c, B, layout);
  for (long j = 0; j < w.rows(); ++j) {
    int arg = 0;
    w.row(j).maxCoeff(&arg);
    CHECK(arg + 1 == labels[static_cast<size_t>(j)]);
  }
}

TEST_CASE("labels: ties go to material 1, dominance flips everything") {
  const Mesh mesh = build_grid_mesh({4, 4}, 0.25);
  EncoderConfig config;
  config.K = 2;
  config.material_spec = grid2d(3, 3);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);

  for (int label : decode_material_labels(Eigen::VectorXd::Zero(layout.total), B, layout))
    CHECK(label == 1);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.total);
  c.segment(layout.n_phi, layout.n_phi).setConstant(0.9);
  for (int label : decode_material_labels(c, B, layout))
    CHECK(label == 2);
}

TEST_CASE("muscle region masks force disallowed elements back to material 1") {
  const Mesh mesh = build_grid_mesh({4, 4}, 0.25);
  EncoderConfig config;
  config.K = 2;
  config.material_spec = grid2d(3, 3);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.total);
  c.segment(layout.n_phi, layout.n_phi).setConstant(0.9);  // material 2 dominates

  std::vector<std::vector<bool>> masks(2);
  std::vector<bool> allowed(static_cast<size_t>(mesh.num_elements()), false);
  allowed[3] = true;
  masks[1] = allowed;

  const std::vector<int> labels = decode_material_labels(c, B, layout, masks);
  for (size_t j = 0; j < labels.size(); ++j)
    CHECK(labels[j] == (j == 3 ? 2 : 1));
}

TEST_CASE("argmax and softmax are invariant to a shared score-field shift") {
  const Mesh mesh = build_grid_mesh({5, 5}, 0.2);
  EncoderConfig config;
  config.K = 3;
  config.material_spec = grid2d(3, 3);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);

  const Eigen::VectorXd c = random_vector(layout.total, 13, 0.4);
  const Eigen::VectorXd g = random_vector(layout.n_phi, 17, 0.4);
  Eigen::VectorXd shifted = c;
  for (int k = 0; k < 3; ++k)
    shifted.segment(k * layout.n_phi, layout.n_phi) += g;

  CHECK(decode_material_labels(c, B, layout) == decode_material_labels(shifted, B, layout));
  const Eigen::MatrixXd w1 = decode_material_weights(c, B, layout, 1.0);
  const Eigen::MatrixXd w2 = decode_material_weights(shifted, B, layout, 1.0);
  CHECK((w1 - w2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("softmax scale covariance: (s*c, s*tau) leaves weights unchanged") {
  const Mesh mesh = build_grid_mesh({5, 5}, 0.2);
  EncoderConfig config;
  config.K = 2;
  config.material_spec = grid2d(3, 3);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);

  const Eigen::VectorXd c = random_vector(layout.total, 19);
  const double s = 0.37;  // keeps s*c inside the clamp box
  const Eigen::MatrixXd w1 = decode_material_weights(s * c, B, layout, s * 1.0);
  const Eigen::MatrixXd w2 = decode_material_weights(c, B, layout, 1.0);
  CHECK((w1 - w2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("occupancy: inclusive threshold and saturated-negative field") {
  const Mesh mesh = build_grid_mesh({4, 4}, 0.25);

  EncoderConfig sum_cfg;
  sum_cfg.K = 2;
  sum_cfg.material_spec = grid2d(3, 3);
  sum_cfg.occupancy_mode = OccupancyMode::sum_of_materials;
  const DesignVectorLayout sum_layout = build_layout(sum_cfg);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, sum_cfg.material_spec);
  for (bool occ : decode_occupancy(Eigen::VectorXd::Zero(sum_layout.total), B,
                                   std::nullopt, sum_layout, sum_cfg))
    CHECK(occ);

  EncoderConfig ind_cfg;
  ind_cfg.K = 1;
  ind_cfg.material_spec = grid2d(3, 3);
  ind_cfg.occupancy_mode = OccupancyMode::independent;
  ind_cfg.occupancy_spec = grid2d(3, 3);
  const DesignVectorLayout ind_layout = build_layout(ind_cfg);
  const Eigen::MatrixXd B_occ =
      assemble_scalar_basis_matrix(mesh.element_centers, *ind_cfg.occupancy_spec);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(ind_layout.total);
  c.segment(ind_layout.occupancy.offset, ind_layout.occupancy.len).setConstant(-10.0);
  for (bool occ : decode_occupancy(c, B, B_occ, ind_layout, ind_cfg))
    CHECK_FALSE(occ);
}

TEST_CASE("occupancy agrees with a direct field-evaluation oracle") {
  const Mesh mesh = build_grid_mesh({6, 6}, 0.2);
  EncoderConfig config;
  config.K = 1;
  config.material_spec = grid2d(3, 3, 0.0, 1.2);
  config.occupancy_mode = OccupancyMode::independent;
  config.occupancy_spec = grid2d(3, 3, 0.0, 1.2);
  const DesignVectorLayout layout = build_layout(config);
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);
  const Eigen::MatrixXd B_occ =
      assemble_scalar_basis_matrix(mesh.element_centers, *config.occupancy_spec);
  const RbfBasis basis = place_rbf_centers(*config.occupancy_spec);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.total);
  Eigen::VectorXd c_occ = Eigen::VectorXd::Zero(layout.occupancy.len);
  c_occ.setConstant(-0.15);
  c_occ[4] = 1.0;  // one positive bump in the middle
  c.segment(layout.occupancy.offset, layout.occupancy.len) = c_occ;

  const std::vector<bool> mask = decode_occupancy(c, B, B_occ, layout, config);
  int occupied = 0;
  for (int j = 0; j < mesh.num_elements(); ++j) {
    double field = 0.0;
    for (int i = 0; i < basis.centers.rows(); ++i)
      field += c_occ[i] * eval_scalar_basis(mesh.element_centers.row(j),
                                            basis.centers.row(i), basis.sigma);
    CHECK(mask[static_cast<size_t>(j)] == (field >= 0.0));
    occupied += mask[static_cast<size_t>(j)] ? 1 : 0;
  }
  CHECK(occupied > 0);
  CHECK(occupied < mesh.num_elements());
}

TEST_CASE("morph: identity at q = 0, linearity below the clamp") {
  const Mesh mesh = build_grid_mesh({5, 5}, 0.2);
  const RbfGridSpec spec = grid2d(3, 3);
  const Eigen::MatrixXd A = assemble_vector_basis_matrix(mesh.nodes, spec, 2);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(A.cols());
  CHECK((decode_morph(zero, A, spec, 0.3, mesh.nodes, mesh.nodes) - mesh.nodes)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  const Eigen::VectorXd q = random_vector(static_cast<int>(A.cols()), 23, 0.01);
  const Eigen::MatrixXd d1 = decode_morph(q, A, spec, 0.3, mesh.nodes, mesh.nodes) - mesh.nodes;
  const Eigen::MatrixXd d2 =
      decode_morph(2.0 * q, A, spec, 0.3, mesh.nodes, mesh.nodes) - mesh.nodes;
  CHECK((d2 - 2.0 * d1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("morph clamp: rescaled coefficients sit exactly at the gradient cap") {
  const Mesh mesh = build_grid_mesh({5, 5}, 0.2);
  const RbfGridSpec spec = grid2d(3, 3);
  const Eigen::MatrixXd A = assemble_vector_basis_matrix(mesh.nodes, spec, 2);
  const double gamma = 0.3;

  for (unsigned seed = 0; seed < 8; ++seed) {
    Eigen::VectorXd q = random_vector(static_cast<int>(A.cols()), 100 + seed, 5.0);
    const Eigen::VectorXd qc = q.cwiseMax(-1.0).cwiseMin(1.0);
    const double est = sup_gradient_estimate(spec, qc, mesh.nodes);
    const Eigen::MatrixXd morphed = decode_morph(q, A, spec, gamma, mesh.nodes, mesh.nodes);
    if (est > gamma) {
      const Eigen::VectorXd scaled = (gamma / est) * qc;
      CHECK(sup_gradient_estimate(spec, scaled, mesh.nodes) <= gamma + 1e-9);
      const Eigen::VectorXd v = A * scaled;
      Eigen::MatrixXd expect = mesh.nodes;
      for (int a = 0; a < 2; ++a)
        expect.col(a) += v.segment(static_cast<long>(a) * mesh.num_nodes(), mesh.num_nodes());
      CHECK((morphed - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("morph safety: no quad inversion for random clamped coefficients") {
  const Mesh mesh = build_grid_mesh({7, 7}, 0.1);
  const RbfGridSpec spec = grid2d(3, 3, 0.0, 0.7);
  const Eigen::MatrixXd A = assemble_vector_basis_matrix(mesh.nodes, spec, 2);
  Eigen::MatrixXd samples(mesh.num_nodes() + mesh.num_elements(), 2);
  samples.topRows(mesh.num_nodes()) = mesh.nodes;
  samples.bottomRows(mesh.num_elements()) = mesh.element_centers;

  for (unsigned seed = 0; seed < 200; ++seed) {
    const Eigen::VectorXd q = random_vector(static_cast<int>(A.cols()), 1000 + seed, 3.0);
    const Eigen::MatrixXd morphed = decode_morph(q, A, spec, 0.3, mesh.nodes, samples);
    for (const auto& elem : mesh.elements) {
      double area = 0.0;
      for (size_t v = 0; v < 4; ++v) {
        const auto& p = morphed.row(elem[v]);
        const auto& n = morphed.row(elem[(v + 1) % 4]);
        area += p[0] * n[1] - n[0] * p[1];
      }
      CHECK(area > 0.0);
    }
  }
}

TEST_CASE("eval_actuation closed forms") {
  ActuationSpec pulse;
  pulse.kind = ActuationKind::gaussian_pulse;
  pulse.groups = 1;
  Eigen::Vector3d p(0.7, 0.4, 0.1);  // amp, peak, width
  CHECK(eval_actuation(pulse, p, 0.4)[0] == doctest::Approx(0.7));
  CHECK(eval_actuation(pulse, p, 0.5)[0] == doctest::Approx(0.7 * std::exp(-0.5)));
  CHECK(eval_actuation(pulse, p, 0.3)[0] == doctest::Approx(0.7 * std::exp(-0.5)));

  ActuationSpec periodic;
  periodic.kind = ActuationKind::squared_periodic;
  periodic.groups = 2;
  Eigen::Vector3d fp(2.0, 1.0, 0.5);  // f1, f2, delta phi
  CHECK(eval_actuation(periodic, fp, 0.0)[0] == doctest::Approx(0.0));
  const double s = std::sin(0.5);
  CHECK(eval_actuation(periodic, fp, 0.0)[1] == doctest::Approx(s * s));
  const double s2 = std::sin(3.14159265358979323846 * 2.0 * 0.25);
  CHECK(eval_actuation(periodic, fp, 0.25)[0] == doctest::Approx(s2 * s2));
}

TEST_CASE("actuation raw-to-physical map hits midpoints and bounds") {
  ActuationSpec pulse;
  pulse.kind = ActuationKind::gaussian_pulse;
  pulse.groups = 1;
  pulse.amp_lo = 0.0;
  pulse.amp_hi = 1.0;
  pulse.peak_lo = 0.1;
  pulse.peak_hi = 1.0;
  pulse.width_lo = 0.02;
  pulse.width_hi = 0.3;

  const Eigen::VectorXd mid = actuation_params_from_raw(pulse, Eigen::Vector3d::Zero());
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[1] == doctest::Approx(0.55));
  CHECK(mid[2] == doctest::Approx(0.16));

  const Eigen::VectorXd hi = actuation_params_from_raw(pulse, Eigen::Vector3d::Constant(7.0));
  CHECK(hi[0] == doctest::Approx(1.0));  // clamped to the upper bound
  CHECK(hi[1] == doctest::Approx(1.0));
  CHECK(hi[2] == doctest::Approx(0.3));
}

TEST_CASE("decode_design: zero vector gives a full passive body at midpoints") {
  EncoderConfig config = jumper_style_config();
  config.material_spec = grid2d(3, 3, 0.0, 0.7);
  const Mesh mesh = build_grid_mesh({7, 7}, 0.1);
  const EncoderContext ctx = make_encoder_context(config, mesh);

  const DecodedDesign design = decode_design(Eigen::VectorXd::Zero(ctx.layout.total), ctx);
  CHECK_FALSE(design.empty);
  CHECK(design.num_occupied() == 49);
  for (int label : design.labels) CHECK(label == 1);
  CHECK((design.morphed_nodes - mesh.nodes).cwiseAbs().maxCoeff() == 0.0);
  CHECK(design.actuation_params[0] == doctest::Approx(0.5));
  CHECK(design.actuation_params[1] == doctest::Approx(0.55));
  CHECK(design.actuation_params[2] == doctest::Approx(0.16));
}

TEST_CASE("decode_design at the 147-parameter reference dimensions") {
  const EncoderConfig config = swimmer_style_config();
  const Mesh mesh = build_grid_mesh({4, 4, 4}, 0.25);
  const EncoderContext ctx = make_encoder_context(config, mesh);
  CHECK(ctx.layout.total == 147);

  const DecodedDesign design = decode_design(random_vector(147, 31), ctx);
  CHECK(static_cast<int>(design.labels.size()) == mesh.num_elements());
  for (int label : design.labels) {
    CHECK(label >= 1);
    CHECK(label <= 3);
  }
  CHECK(design.morphed_nodes.rows() == mesh.num_nodes());
  CHECK(design.actuation_params.size() == 3);
}

TEST_CASE("decode_design: labels live exactly on occupied elements") {
  EncoderConfig config;
  config.K = 2;
  config.material_spec = grid2d(3, 3, 0.0, 1.2);
  config.occupancy_mode = OccupancyMode::sum_of_materials;
  const Mesh mesh = build_grid_mesh({6, 6}, 0.2);
  const EncoderContext ctx = make_encoder_context(config, mesh);

  for (unsigned seed = 0; seed < 300; ++seed) {
    const DecodedDesign design = decode_design(random_vector(ctx.layout.total, seed), ctx);
    CHECK(design.occupancy.size() == design.labels.size());
    bool any = false;
    for (size_t j = 0; j < design.occupancy.size(); ++j) {
      if (design.occupancy[j]) {
        any = true;
        CHECK(design.labels[j] >= 1);
        CHECK(design.labels[j] <= 2);
      } else {
        CHECK(design.labels[j] == 1);  // fallback value, never a muscle
      }
    }
    CHECK(design.empty == !any);
  }
}

TEST_CASE("decode_design is deterministic") {
  const EncoderConfig config = swimmer_style_config();
  const Mesh mesh = build_grid_mesh({3, 3, 3}, 0.3);
  const EncoderContext ctx = make_encoder_context(config, mesh);
  const Eigen::VectorXd c = random_vector(ctx.layout.total, 41);

  const DecodedDesign a = decode_design(c, ctx);
  const DecodedDesign b = decode_design(c, ctx);
  CHECK(a.labels == b.labels);
  CHECK(a.occupancy == b.occupancy);
  CHECK((a.morphed_nodes - b.morphed_nodes).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.actuation_params - b.actuation_params).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("config validation rejects malformed setups") {
  EncoderConfig config;
  config.K = 0;
  config.material_spec = grid2d(3, 3);
  CHECK_THROWS_AS(build_layout(config), InvalidSpecError);

  config.K = 2;
  config.tau = 0.0;
  CHECK_THROWS_AS(build_layout(config), InvalidSpecError);

  config.tau = 1.0;
  config.occupancy_mode = OccupancyMode::independent;  // missing occupancy_spec
  CHECK_THROWS_AS(build_layout(config), InvalidSpecError);
}
