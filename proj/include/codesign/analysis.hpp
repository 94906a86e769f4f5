#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "codesign/basis.hpp"
#include "codesign/baselines.hpp"

namespace codesign {

struct DistanceMatrix {
  Eigen::MatrixXd values;  // symmetric, zero diagonal
  int n = 0;
};

// Symmetric Chamfer distance: 0.5 * (mean_P NN(P->Q) + mean_Q NN(Q->P)),
// Euclidean, non-squared. Nearest neighbors via a uniform spatial grid.
double chamfer_distance(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q);

// Nearest-neighbor distances from each row of P to the set Q, grid-accelerated.
Eigen::VectorXd nearest_neighbor_distances(const Eigen::MatrixXd& P,
                                           const Eigen::MatrixXd& Q);

DistanceMatrix pairwise_chamfer(const std::vector<Eigen::MatrixXd>& clouds,
                                int workers = 1);

// Decodes one parameter vector into a morphed copy of a reference cloud.
using ShapeSampler = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// Draws c ~ Uniform[-1,1]^param_count, decodes shapes, returns all pairwise
// Chamfer distances. Deterministic under fixed seed.
DistanceMatrix sample_design_distances(const ShapeSampler& sampler, int param_count,
                                       int n_samples, std::uint64_t seed,
                                       int workers = 1);

// Basis-function morpher: clamped RBF deformation of a reference cloud.
ShapeSampler basis_shape_sampler(const RbfGridSpec& morph_spec, double gamma,
                                 const Eigen::MatrixXd& reference_cloud);

// Neural-field morpher: gamma * tanh(net(x)) * domain-scale displacement.
ShapeSampler neural_shape_sampler(const MlpSpec& net, double gamma,
                                  const Eigen::MatrixXd& reference_cloud);

struct MdsResult {
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::VectorXd cumulative;   // cumulative positive-variance fractions
  int d95 = 0;
};

// Eigendecomposition of -1/2 J D.^2 J; negative eigenvalues are excluded
// from the variance totals.
MdsResult classical_mds(const DistanceMatrix& D);

int d95_from_eigenvalues(const Eigen::VectorXd& descending_eigenvalues);

// nu_i = min_{j != i} D_ij
Eigen::VectorXd novelty_scores(const DistanceMatrix& D);

}  // namespace codesign
