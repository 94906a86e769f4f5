#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "codesign/encoding.hpp"
#include "codesign/geometry.hpp"

namespace codesign {

// Coordinate MLP: tanh hidden layers, linear output. Weight layout per
// layer: W row-major (out x in), then biases.
struct MlpSpec {
  std::vector<int> layers;

  int param_count() const;
};

Eigen::VectorXd mlp_forward(const MlpSpec& spec, const Eigen::VectorXd& weights,
                            const Eigen::VectorXd& x);

// Neural-field baseline: a material net (d -> ... -> K) sampled at element
// centers and an optional morph net (d -> ... -> d) sampled at nodes, with
// the same actuation block as the basis encoder.
struct NeuralFieldConfig {
  int K = 1;
  MlpSpec material_net;
  std::optional<MlpSpec> morph_net;
  std::optional<ActuationSpec> actuation;
  double gamma = 0.3;
  std::optional<std::vector<std::vector<bool>>> muscle_region_masks;

  int param_count() const;
};

DecodedDesign decode_neural_field(const Eigen::VectorXd& weights,
                                  const NeuralFieldConfig& config, const Mesh& mesh);

// One material value per element; thresholds split remove/passive/muscle.
struct VoxelEncoderSpec {
  double theta_remove = -0.25;
  double theta_muscle = 0.25;
  bool includes_occupancy = true;
  std::optional<ActuationSpec> actuation;

  int param_count(int n_elements) const;
};

DecodedDesign decode_per_voxel(const Eigen::VectorXd& values,
                               const VoxelEncoderSpec& spec, const Mesh& mesh);

}  // namespace codesign
