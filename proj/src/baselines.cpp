#include "codesign/baselines.hpp"

#include <cmath>

#include "codesign/errors.hpp"

namespace codesign {

int MlpSpec::param_count() const {
  if (layers.size() < 2) throw InvalidSpecError("MlpSpec: need >= 2 layers");
  int n = 0;
  for (size_t l = 0; l + 1 < layers.size(); ++l)
    n += layers[l] * layers[l + 1] + layers[l + 1];
  return n;
}

Eigen::VectorXd mlp_forward(const MlpSpec& spec, const Eigen::VectorXd& weights,
                            const Eigen::VectorXd& x) {
  if (weights.size() != spec.param_count())
    throw InvalidSpecError("mlp_forward: weight length mismatch");
  if (x.size() != spec.layers.front())
    throw InvalidSpecError("mlp_forward: input size mismatch");

  Eigen::VectorXd h = x;
  int pos = 0;
  for (size_t l = 0; l + 1 < spec.layers.size(); ++l) {
    const int n_in = spec.layers[l], n_out = spec.layers[l + 1];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        W(weights.data() + pos, n_out, n_in);
    pos += n_in * n_out;
    Eigen::Map<const Eigen::VectorXd> b(weights.data() + pos, n_out);
    pos += n_out;
    h = W * h + b;
    if (l + 2 < spec.layers.size()) h = h.array().tanh();
  }
  return h;
}

int NeuralFieldConfig::param_count() const {
  int n = material_net.param_count();
  if (morph_net) n += morph_net->param_count();
  if (actuation) n += actuation->param_count();
  return n;
}

namespace {

// Map mesh coordinates into [-1,1]^d.
Eigen::VectorXd normalize_point(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& extent) {
  Eigen::VectorXd z(x.size());
  for (long a = 0; a < x.size(); ++a)
    z[a] = extent[a] > 0.0 ? 2.0 * (x[a] - lo[a]) / extent[a] - 1.0 : 0.0;
  return z;
}

}  // namespace

DecodedDesign decode_neural_field(const Eigen::VectorXd& weights,
                                  const NeuralFieldConfig& config, const Mesh& mesh) {
  if (weights.size() != config.param_count())
    throw InvalidSpecError("decode_neural_field: weight length mismatch");
  const Eigen::VectorXd w = weights.cwiseMax(-1.0).cwiseMin(1.0);

  const Eigen::VectorXd lo = mesh.nodes.colwise().minCoeff();
  const Eigen::VectorXd hi = mesh.nodes.colwise().maxCoeff();
  const Eigen::VectorXd extent = hi - lo;
  const double domain_scale = 0.5 * extent.maxCoeff();

  int pos = 0;
  const Eigen::VectorXd w_mat = w.segment(pos, config.material_net.param_count());
  pos += config.material_net.param_count();

  DecodedDesign out;
  out.occupancy.assign(static_cast<size_t>(mesh.num_elements()), true);
  out.labels.resize(static_cast<size_t>(mesh.num_elements()));
  for (int j = 0; j < mesh.num_elements(); ++j) {
    const Eigen::VectorXd scores = mlp_forward(
        config.material_net, w_mat,
        normalize_point(mesh.element_centers.row(j), lo, extent));
    int best = 1;
    double best_score = scores[0];
    for (int k = 2; k <= config.K; ++k) {
      const bool allowed = !config.muscle_region_masks ||
                           (*config.muscle_region_masks)[k - 1].empty() ||
                           (*config.muscle_region_masks)[k - 1][static_cast<size_t>(j)];
      if (allowed && scores[k - 1] > best_score) {
        best = k;
        best_score = scores[k - 1];
      }
    }
    out.labels[static_cast<size_t>(j)] = best;
  }

  out.morphed_nodes = mesh.nodes;
  if (config.morph_net) {
    const Eigen::VectorXd w_morph = w.segment(pos, config.morph_net->param_count());
    pos += config.morph_net->param_count();
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      const Eigen::VectorXd disp = mlp_forward(
          *config.morph_net, w_morph, normalize_point(mesh.nodes.row(i), lo, extent));
      out.morphed_nodes.row(i) +=
          (config.gamma * domain_scale) * disp.array().tanh().matrix().transpose();
    }
  }

  if (config.actuation) {
    out.actuation = config.actuation;
    out.actuation_params = actuation_params_from_raw(
        *config.actuation, w.segment(pos, config.actuation->param_count()));
  }
  out.external.resize(0);
  return out;
}

int VoxelEncoderSpec::param_count(int n_elements) const {
  return n_elements + (actuation ? actuation->param_count() : 0);
}

DecodedDesign decode_per_voxel(const Eigen::VectorXd& values,
                               const VoxelEncoderSpec& spec, const Mesh& mesh) {
  const int n_e = mesh.num_elements();
  if (values.size() != spec.param_count(n_e))
    throw InvalidSpecError("decode_per_voxel: value length mismatch");
  if (!(spec.theta_remove < spec.theta_muscle))
    throw InvalidSpecError("decode_per_voxel: theta_remove must be < theta_muscle");

  const Eigen::VectorXd v = values.cwiseMax(-1.0).cwiseMin(1.0);

  DecodedDesign out;
  out.occupancy.resize(static_cast<size_t>(n_e));
  out.labels.assign(static_cast<size_t>(n_e), 1);
  bool any = false;
  for (int j = 0; j < n_e; ++j) {
    const double val = v[j];
    bool occ = true;
    int label = 1;
    if (spec.includes_occupancy) {
      if (val < spec.theta_remove)
        occ = false;
      else if (val >= spec.theta_muscle)
        label = 2;
    } else {
      label = val >= 0.0 ? 2 : 1;
    }
    out.occupancy[static_cast<size_t>(j)] = occ;
    if (occ) {
      out.labels[static_cast<size_t>(j)] = label;
      any = true;
    }
  }
  out.empty = !any;
  out.morphed_nodes = mesh.nodes;

  if (spec.actuation) {
    out.actuation = spec.actuation;
    out.actuation_params =
        actuation_params_from_raw(*spec.actuation, v.segment(n_e, spec.actuation->param_count()));
  }
  out.external.resize(0);
  return out;
}

}  // namespace codesign
