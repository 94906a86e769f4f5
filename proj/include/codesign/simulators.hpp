#pragma once

#include <Eigen/Dense>
#include <vector>

#include "codesign/encoding.hpp"
#include "codesign/geometry.hpp"

namespace codesign {

struct SimulatorConfig {
  double dt = 1e-3;              // s
  int n_steps = 1500;
  double gravity = 9.81;         // m/s^2, jumper only
  double stiffness_passive = 500.0;   // N/m
  double stiffness_muscle = 800.0;    // N/m
  double damping = 2.0;          // N s/m, along spring axis
  double node_mass = 0.01;       // kg
  double contact_stiffness = 2e4;     // N/m, jumper ground penalty
  double contact_damping = 10.0;      // N s/m
  double friction = 0.5;         // Coulomb coefficient
  double friction_eps = 1e-3;    // m/s, tangential regularization
  double drag_coeff = 5.0;       // N s/m^2 per unit edge length, swimmer
  double contraction = 0.3;      // kappa, rest-length modulation gain

  void validate() const;
};

struct Trajectory {
  std::vector<Eigen::MatrixXd> positions;  // n_steps+1 entries of N_n x d
  std::vector<double> times;
};

// 2D mass-spring lattice with cross-braced cells, penalty ground contact at
// y=0, gravity, and vertically actuated muscle cells. Deterministic.
Trajectory simulate_jumper(const DecodedDesign& design, const Mesh& mesh,
                           const SimulatorConfig& cfg);

// 2D mass-spring body without gravity; boundary edges receive normal drag
// forces; muscle groups drive longitudinal springs. Deterministic.
Trajectory simulate_swimmer(const DecodedDesign& design, const Mesh& mesh,
                            const SimulatorConfig& cfg);

// Elements of the largest 4-connected occupied component (edge adjacency).
std::vector<bool> largest_connected_component(const DecodedDesign& design,
                                              const Mesh& mesh);

}  // namespace codesign
