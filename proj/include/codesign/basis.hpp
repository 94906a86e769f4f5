#pragma once

#include <Eigen/Dense>
#include <vector>

namespace codesign {

// Uniform grid of Gaussian RBF centers inside an axis-aligned box.
struct RbfGridSpec {
  std::vector<int> dims;  // centers per axis
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  double overlap = 1.0;  // width multiplier on the largest axis spacing

  int dim() const { return static_cast<int>(dims.size()); }
  int num_centers() const;
  void validate() const;  // throws InvalidSpecError
};

struct RbfBasis {
  Eigen::MatrixXd centers;  // N_rbf x d
  double sigma;
};

// Centers at cell midpoints of a uniform partition; sigma = overlap * max spacing.
RbfBasis place_rbf_centers(const RbfGridSpec& spec);

// exp(-|x-center|^2 / (2 sigma^2))
double eval_scalar_basis(const Eigen::VectorXd& x, const Eigen::VectorXd& center,
                         double sigma);

// B with B(j,i) = b_i(points.row(j)); entries in (0,1].
Eigen::MatrixXd assemble_scalar_basis_matrix(const Eigen::MatrixXd& points,
                                             const RbfGridSpec& spec);

// A with axis-major blocks: row (alpha*N_n + i), column (alpha*N_rbf + j)
// holds b_j(node_i), zero off the diagonal blocks. A*q stacks per-axis
// displacements, axis-major.
Eigen::MatrixXd assemble_vector_basis_matrix(const Eigen::MatrixXd& nodes,
                                             const RbfGridSpec& spec, int d);

// Max over samples of the inf-operator norm (max absolute row sum) of the
// analytic Jacobian of v(x;q) = sum_j q_(j,alpha) b_j(x) e_alpha.
double sup_gradient_estimate(const RbfGridSpec& spec, const Eigen::VectorXd& q,
                             const Eigen::MatrixXd& samples);

}  // namespace codesign
