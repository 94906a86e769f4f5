#include "codesign/encoding.hpp"

#include <cmath>

#include "codesign/errors.hpp"

namespace codesign {

int ActuationSpec::param_count() const {
  switch (kind) {
    case ActuationKind::squared_periodic:
      return 2 * groups - 1;
    case ActuationKind::gaussian_pulse:
      return 3 * groups;
    case ActuationKind::schedule:
      return schedule_knots * groups;
  }
  return 0;
}

void EncoderConfig::validate() const {
  if (K < 1) throw InvalidSpecError("EncoderConfig: K must be >= 1");
  material_spec.validate();
  if (morph_spec) morph_spec->validate();
  if (occupancy_mode == OccupancyMode::independent && !occupancy_spec)
    throw InvalidSpecError("EncoderConfig: independent occupancy requires occupancy_spec");
  if (occupancy_spec) occupancy_spec->validate();
  if (!(tau > 0.0)) throw InvalidSpecError("EncoderConfig: tau must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw InvalidSpecError("EncoderConfig: gamma must be in (0,1)");
  if (external_count < 0) throw InvalidSpecError("EncoderConfig: external_count < 0");
  if (actuation && actuation->groups < 1)
    throw InvalidSpecError("EncoderConfig: actuation groups must be >= 1");
}

Eigen::VectorXd DesignVectorLayout::block(const Eigen::VectorXd& c,
                                          const Block& b) const {
  return c.segment(b.offset, b.len);
}

Eigen::VectorXd DesignVectorLayout::material_coeffs(const Eigen::VectorXd& c,
                                                    int k) const {
  return c.segment(material.offset + (k - 1) * n_phi, n_phi);
}

DesignVectorLayout build_layout(const EncoderConfig& config) {
  config.validate();
  DesignVectorLayout layout;
  layout.K = config.K;
  layout.n_phi = config.material_spec.num_centers();

  int offset = 0;
  auto add = [&offset](DesignVectorLayout::Block& b, int len) {
    b.offset = offset;
    b.len = len;
    offset += len;
  };
  add(layout.material, config.K * layout.n_phi);
  add(layout.morph, config.morph_spec
                        ? config.morph_spec->dim() * config.morph_spec->num_centers()
                        : 0);
  add(layout.occupancy, config.occupancy_mode == OccupancyMode::independent
                            ? config.occupancy_spec->num_centers()
                            : 0);
  add(layout.actuation, config.actuation ? config.actuation->param_count() : 0);
  add(layout.external, config.external_count);
  layout.total = offset;
  return layout;
}

namespace {

Eigen::VectorXd clamp_unit(Eigen::VectorXd v) {
  return v.cwiseMax(-1.0).cwiseMin(1.0);
}

Eigen::MatrixXd score_fields(const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
                             const DesignVectorLayout& layout) {
  Eigen::MatrixXd phi(B.rows(), layout.K);
  for (int k = 1; k <= layout.K; ++k)
    phi.col(k - 1) = B * clamp_unit(layout.material_coeffs(c, k));
  return phi;
}

}  // namespace

Eigen::MatrixXd decode_material_weights(const Eigen::VectorXd& c,
                                        const Eigen::MatrixXd& B,
                                        const DesignVectorLayout& layout,
                                        double tau) {
  if (!(tau > 0.0)) throw InvalidSpecError("decode_material_weights: tau must be > 0");
  Eigen::MatrixXd w = score_fields(c, B, layout) / tau;
  for (long j = 0; j < w.rows(); ++j) {
    const double m = w.row(j).maxCoeff();
    w.row(j) = (w.row(j).array() - m).exp();
    w.row(j) /= w.row(j).sum();
  }
  return w;
}

std::vector<int> decode_material_labels(
    const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
    const DesignVectorLayout& layout,
    const std::optional<std::vector<std::vector<bool>>>& masks) {
  const Eigen::MatrixXd phi = score_fields(c, B, layout);
  std::vector<int> labels(phi.rows(), 1);
  for (long j = 0; j < phi.rows(); ++j) {
    int best = 1;
    double best_score = phi(j, 0);
    for (int k = 2; k <= layout.K; ++k) {
      const bool allowed =
          !masks || (*masks)[k - 1].empty() || (*masks)[k - 1][static_cast<size_t>(j)];
      if (allowed && phi(j, k - 1) > best_score) {
        best = k;
        best_score = phi(j, k - 1);
      }
    }
    // material 1 may also be masked in principle, but it is the fallback
    labels[static_cast<size_t>(j)] = best;
  }
  return labels;
}

std::vector<bool> decode_occupancy(const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
                                   const std::optional<Eigen::MatrixXd>& B_occ,
                                   const DesignVectorLayout& layout,
                                   const EncoderConfig& config) {
  if (config.occupancy_mode == OccupancyMode::none)
    throw InvalidSpecError("decode_occupancy: occupancy_mode is none");

  Eigen::VectorXd field;
  if (config.occupancy_mode == OccupancyMode::independent) {
    if (!B_occ) throw InvalidSpecError("decode_occupancy: missing occupancy basis");
    field = *B_occ * clamp_unit(layout.block(c, layout.occupancy));
  } else {
    field = score_fields(c, B, layout).rowwise().sum();
  }
  std::vector<bool> mask(field.size());
  for (long j = 0; j < field.size(); ++j) mask[static_cast<size_t>(j)] = field[j] >= config.theta;
  return mask;
}

Eigen::MatrixXd decode_morph(const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                             const RbfGridSpec& morph_spec, double gamma,
                             const Eigen::MatrixXd& reference_nodes,
                             const Eigen::MatrixXd& gradient_samples) {
  const Eigen::VectorXd qc = clamp_unit(q);
  double scale = 1.0;
  const double est = sup_gradient_estimate(morph_spec, qc, gradient_samples);
  if (est > gamma) scale = gamma / est;

  const Eigen::VectorXd v = A * (scale * qc);
  const int d = static_cast<int>(reference_nodes.cols());
  const int n_n = static_cast<int>(reference_nodes.rows());
  Eigen::MatrixXd morphed = reference_nodes;
  for (int a = 0; a < d; ++a)
    morphed.col(a) += v.segment(static_cast<long>(a) * n_n, n_n);
  return morphed;
}

Eigen::VectorXd actuation_params_from_raw(const ActuationSpec& spec,
                                          const Eigen::VectorXd& raw) {
  if (raw.size() != spec.param_count())
    throw InvalidSpecError("actuation_params_from_raw: size mismatch");
  const Eigen::VectorXd r = clamp_unit(raw);
  auto affine = [](double v, double lo, double hi) {
    return lo + 0.5 * (v + 1.0) * (hi - lo);
  };
  Eigen::VectorXd p(r.size());
  int i = 0;
  switch (spec.kind) {
    case ActuationKind::squared_periodic:
      for (int g = 0; g < spec.groups; ++g) p[i] = affine(r[i], spec.freq_lo, spec.freq_hi), ++i;
      for (int g = 1; g < spec.groups; ++g) p[i] = affine(r[i], spec.phase_lo, spec.phase_hi), ++i;
      break;
    case ActuationKind::gaussian_pulse:
      for (int g = 0; g < spec.groups; ++g) {
        p[i] = affine(r[i], spec.amp_lo, spec.amp_hi), ++i;
        p[i] = affine(r[i], spec.peak_lo, spec.peak_hi), ++i;
        p[i] = affine(r[i], spec.width_lo, spec.width_hi), ++i;
      }
      break;
    case ActuationKind::schedule:
      for (; i < r.size(); ++i) p[i] = affine(r[i], 0.0, 1.0);
      break;
  }
  return p;
}

Eigen::VectorXd eval_actuation(const ActuationSpec& spec, const Eigen::VectorXd& params,
                               double t) {
  if (params.size() != spec.param_count())
    throw InvalidSpecError("eval_actuation: param size mismatch");
  Eigen::VectorXd u(spec.groups);
  constexpr double pi = 3.14159265358979323846;
  switch (spec.kind) {
    case ActuationKind::squared_periodic:
      for (int g = 0; g < spec.groups; ++g) {
        const double f = params[g];
        const double phase = (g == 0) ? 0.0 : params[spec.groups + g - 1];
        const double s = std::sin(pi * f * t + phase);
        u[g] = s * s;
      }
      break;
    case ActuationKind::gaussian_pulse:
      for (int g = 0; g < spec.groups; ++g) {
        const double amp = params[3 * g], peak = params[3 * g + 1], w = params[3 * g + 2];
        const double z = (t - peak) / w;
        u[g] = amp * std::exp(-0.5 * z * z);
      }
      break;
    case ActuationKind::schedule:
      for (int g = 0; g < spec.groups; ++g) {
        const double frac = std::clamp(t / spec.schedule_horizon, 0.0, 1.0);
        int knot = std::min(spec.schedule_knots - 1,
                            static_cast<int>(frac * spec.schedule_knots));
        u[g] = params[g * spec.schedule_knots + knot];
      }
      break;
  }
  return u;
}

int DecodedDesign::num_occupied() const {
  int n = 0;
  for (bool b : occupancy) n += b ? 1 : 0;
  return n;
}

EncoderContext make_encoder_context(const EncoderConfig& config, const Mesh& mesh) {
  config.validate();
  EncoderContext ctx;
  ctx.config = config;
  ctx.layout = build_layout(config);
  ctx.mesh = mesh;
  ctx.B_material = assemble_scalar_basis_matrix(mesh.element_centers, config.material_spec);
  if (config.occupancy_mode == OccupancyMode::independent)
    ctx.B_occupancy = assemble_scalar_basis_matrix(mesh.element_centers, *config.occupancy_spec);
  if (config.morph_spec)
    ctx.A_morph = assemble_vector_basis_matrix(mesh.nodes, *config.morph_spec, mesh.dim());

  ctx.gradient_samples.resize(mesh.num_nodes() + mesh.num_elements(), mesh.dim());
  ctx.gradient_samples.topRows(mesh.num_nodes()) = mesh.nodes;
  ctx.gradient_samples.bottomRows(mesh.num_elements()) = mesh.element_centers;
  return ctx;
}

DecodedDesign decode_design(const Eigen::VectorXd& c, const EncoderContext& ctx) {
  if (c.size() != ctx.layout.total)
    throw InvalidSpecError("decode_design: design vector length mismatch");

  DecodedDesign out;
  const int n_e = ctx.mesh.num_elements();

  if (ctx.config.occupancy_mode == OccupancyMode::none)
    out.occupancy.assign(static_cast<size_t>(n_e), true);
  else
    out.occupancy = decode_occupancy(c, ctx.B_material, ctx.B_occupancy, ctx.layout, ctx.config);

  const std::vector<int> labels =
      decode_material_labels(c, ctx.B_material, ctx.layout, ctx.config.muscle_region_masks);
  out.labels.assign(static_cast<size_t>(n_e), 1);
  bool any = false;
  for (int j = 0; j < n_e; ++j) {
    if (out.occupancy[static_cast<size_t>(j)]) {
      out.labels[static_cast<size_t>(j)] = labels[static_cast<size_t>(j)];
      any = true;
    }
  }
  out.empty = !any;

  if (ctx.config.morph_spec)
    out.morphed_nodes =
        decode_morph(ctx.layout.block(c, ctx.layout.morph), *ctx.A_morph,
                     *ctx.config.morph_spec, ctx.config.gamma, ctx.mesh.nodes,
                     ctx.gradient_samples);
  else
    out.morphed_nodes = ctx.mesh.nodes;

  if (ctx.config.actuation) {
    out.actuation = ctx.config.actuation;
    out.actuation_params = actuation_params_from_raw(
        *ctx.config.actuation, ctx.layout.block(c, ctx.layout.actuation));
  }
  out.external = ctx.layout.block(c, ctx.layout.external);
  return out;
}

}  // namespace codesign
