#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "codesign/basis.hpp"
#include "codesign/geometry.hpp"

namespace codesign {

enum class OccupancyMode { none, independent, sum_of_materials };

enum class ActuationKind { squared_periodic, gaussian_pulse, schedule };

// Open-loop actuation parameterization. Parameter counts per kind:
//   squared_periodic: one frequency per group + one relative phase per
//                     group after the first (phase of group 1 is 0)
//   gaussian_pulse:   (amplitude, peak time, width) per group
//   schedule:         piecewise-constant knot levels per group
struct ActuationSpec {
  ActuationKind kind = ActuationKind::gaussian_pulse;
  int groups = 1;
  double freq_lo = 0.5, freq_hi = 3.0;        // Hz
  double phase_lo = -3.14159265358979323846, phase_hi = 3.14159265358979323846;
  double amp_lo = 0.0, amp_hi = 1.0;
  double peak_lo = 0.1, peak_hi = 1.0;        // s
  double width_lo = 0.02, width_hi = 0.3;     // s
  int schedule_knots = 4;
  double schedule_horizon = 1.0;              // s

  int param_count() const;
};

struct EncoderConfig {
  int K = 1;
  RbfGridSpec material_spec;
  std::optional<RbfGridSpec> morph_spec;
  OccupancyMode occupancy_mode = OccupancyMode::none;
  std::optional<RbfGridSpec> occupancy_spec;
  double theta = 0.0;
  double tau = 1.0;
  double gamma = 0.3;
  std::optional<ActuationSpec> actuation;
  int external_count = 0;
  // allowed[k-1][j]: material k may be assigned to element j. Elements where
  // a material is disallowed fall back to material 1.
  std::optional<std::vector<std::vector<bool>>> muscle_region_masks;

  void validate() const;
};

struct DesignVectorLayout {
  struct Block {
    int offset = 0;
    int len = 0;
  };
  int total = 0;
  Block material;   // K * N_phi
  Block morph;      // N_psi = d * N_rbf,morph
  Block occupancy;  // N_phi,occ or 0
  Block actuation;  // N_a
  Block external;   // N_p
  int K = 1;
  int n_phi = 0;

  Eigen::VectorXd material_coeffs(const Eigen::VectorXd& c, int k) const;  // k in 1..K
  Eigen::VectorXd block(const Eigen::VectorXd& c, const Block& b) const;
};

DesignVectorLayout build_layout(const EncoderConfig& config);

struct DecodedDesign {
  std::vector<bool> occupancy;       // per element
  std::vector<int> labels;           // per element, 1..K; meaningful where occupied
  Eigen::MatrixXd morphed_nodes;     // N_n x d
  Eigen::VectorXd actuation_params;  // physical units, per ActuationSpec layout
  std::optional<ActuationSpec> actuation;
  Eigen::VectorXd external;
  bool empty = false;

  int num_occupied() const;
};

// Row-stochastic softmax weights of the K score fields at each element.
Eigen::MatrixXd decode_material_weights(const Eigen::VectorXd& c,
                                        const Eigen::MatrixXd& B,
                                        const DesignVectorLayout& layout, double tau);

// Per-element argmax labels (ties to the lowest index); masked-out
// materials fall back to material 1.
std::vector<int> decode_material_labels(
    const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
    const DesignVectorLayout& layout,
    const std::optional<std::vector<std::vector<bool>>>& masks = std::nullopt);

std::vector<bool> decode_occupancy(const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
                                   const std::optional<Eigen::MatrixXd>& B_occ,
                                   const DesignVectorLayout& layout,
                                   const EncoderConfig& config);

// x_i + (A q)_i with q rescaled so the sup-gradient estimate never exceeds
// gamma. Returns morphed nodes; sample set for the estimate is supplied by
// the caller (mesh nodes plus element centers in decode_design).
Eigen::MatrixXd decode_morph(const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                             const RbfGridSpec& morph_spec, double gamma,
                             const Eigen::MatrixXd& reference_nodes,
                             const Eigen::MatrixXd& gradient_samples);

// Per-group signal values in [0,1] at time t, from physical parameters.
Eigen::VectorXd eval_actuation(const ActuationSpec& spec,
                               const Eigen::VectorXd& params, double t);

// Map raw actuation block (clamped to [-1,1]) affinely into physical bounds.
Eigen::VectorXd actuation_params_from_raw(const ActuationSpec& spec,
                                          const Eigen::VectorXd& raw);

// Precomputed basis matrices for one (config, mesh) pair.
struct EncoderContext {
  EncoderConfig config;
  DesignVectorLayout layout;
  Mesh mesh;
  Eigen::MatrixXd B_material;               // element centers x N_phi
  std::optional<Eigen::MatrixXd> B_occupancy;
  std::optional<Eigen::MatrixXd> A_morph;   // d*N_n x N_psi
  Eigen::MatrixXd gradient_samples;         // mesh nodes + element centers
};

EncoderContext make_encoder_context(const EncoderConfig& config, const Mesh& mesh);

DecodedDesign decode_design(const Eigen::VectorXd& c, const EncoderContext& ctx);

}  // namespace codesign
