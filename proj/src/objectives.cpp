#include "codesign/objectives.hpp"

#include <cmath>
#include <numbers>

#include "codesign/errors.hpp"
#include "codesign/geometry.hpp"

namespace codesign {

TrajectoryMetrics trajectory_metrics(const Trajectory& traj, const DecodedDesign& design) {
  if (traj.positions.empty()) throw InvalidSpecError("trajectory_metrics: empty trajectory");

  const BodyFrame frame0 = body_frame_metrics(traj.positions.front());
  const double L = frame0.length;
  if (!(L > 0.0)) throw DegenerateGeometryError("trajectory_metrics: zero body length");

  TrajectoryMetrics m;
  const Eigen::VectorXd com0 = frame0.com;
  double prev_theta = frame0.orientation;
  double max_dy = 0.0;
  Eigen::VectorXd com_last = com0;

  constexpr double pi = std::numbers::pi;
  for (size_t s = 1; s < traj.positions.size(); ++s) {
    const BodyFrame bf = body_frame_metrics(traj.positions[s]);
    // orientation lives mod pi; take the shortest step
    double dtheta = bf.orientation - prev_theta;
    while (dtheta > pi / 2.0) dtheta -= pi;
    while (dtheta < -pi / 2.0) dtheta += pi;
    m.rot += std::abs(dtheta);
    prev_theta = bf.orientation;
    max_dy = std::max(max_dy, bf.com[1] - com0[1]);
    com_last = bf.com;
  }

  m.disp = (com_last[0] - com0[0]) / L;
  m.drift = std::abs(com_last[1] - com0[1]) / L;
  m.jump = max_dy / L;

  int occ = 0, muscle = 0;
  for (size_t j = 0; j < design.occupancy.size(); ++j) {
    if (!design.occupancy[j]) continue;
    ++occ;
    if (design.labels[j] >= 2) ++muscle;
  }
  m.muscle_frac = occ > 0 ? static_cast<double>(muscle) / occ : 0.0;
  return m;
}

double swim_loss(const TrajectoryMetrics& m, const LossWeights& w) {
  return -w.alpha[0] * m.disp + w.alpha[1] * m.drift + w.alpha[2] * m.rot +
         w.alpha[3] * m.muscle_frac;
}

double jump_loss(const TrajectoryMetrics& m, const LossWeights& w) {
  return -w.beta[0] * m.jump - w.beta[1] * m.rot + w.beta[2] * m.muscle_frac;
}

double material_match_loss(const Eigen::VectorXd& c, const std::vector<int>& target,
                           const Eigen::MatrixXd& B, const DesignVectorLayout& layout,
                           double tau) {
  if (static_cast<long>(target.size()) != B.rows())
    throw InvalidSpecError("material_match_loss: target size mismatch");
  const Eigen::MatrixXd w = decode_material_weights(c, B, layout, tau);
  double loss = 0.0;
  for (long j = 0; j < w.rows(); ++j) {
    const int k = target[static_cast<size_t>(j)];
    if (k < 1 || k > layout.K)
      throw InvalidSpecError("material_match_loss: label out of range");
    loss += -std::log(std::max(w(j, k - 1), 1e-300));
  }
  return loss / static_cast<double>(w.rows());
}

}  // namespace codesign
