#pragma once

#include <Eigen/Dense>
#include <array>

#include "codesign/encoding.hpp"
#include "codesign/simulators.hpp"

namespace codesign {

struct TrajectoryMetrics {
  double disp = 0.0;         // delta x_com / L
  double drift = 0.0;        // |delta y_com| / L
  double rot = 0.0;          // accumulated |delta theta|, unwrapped, rad
  double jump = 0.0;         // max relative COM height gain
  double muscle_frac = 0.0;  // muscle elements / occupied elements
};

struct LossWeights {
  std::array<double, 4> alpha = {6.0, 0.2, 1.0, 1.0};
  std::array<double, 3> beta = {12.0, 1.0, 1.0};
};

// L = initial body-frame length; theta tracked per step with shortest-angle
// unwrapping modulo pi.
TrajectoryMetrics trajectory_metrics(const Trajectory& traj, const DecodedDesign& design);

// -a1*disp + a2*drift + a3*rot + a4*muscle_frac
double swim_loss(const TrajectoryMetrics& m, const LossWeights& w);

// -b1*jump - b2*rot + b3*muscle_frac
double jump_loss(const TrajectoryMetrics& m, const LossWeights& w);

// Mean cross-entropy of the softmax weights against per-cell target labels.
double material_match_loss(const Eigen::VectorXd& c, const std::vector<int>& target,
                           const Eigen::MatrixXd& B, const DesignVectorLayout& layout,
                           double tau);

}  // namespace codesign
