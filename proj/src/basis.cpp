#include "codesign/basis.hpp"

#include <cmath>

#include "codesign/errors.hpp"

namespace codesign {

int RbfGridSpec::num_centers() const {
  int n = 1;
  for (int d : dims) n *= d;
  return n;
}

void RbfGridSpec::validate() const {
  if (dims.empty()) throw InvalidSpecError("RbfGridSpec: no axes");
  for (int d : dims)
    if (d < 1) throw InvalidSpecError("RbfGridSpec: dims must be >= 1");
  if (lo.size() != dim() || hi.size() != dim())
    throw InvalidSpecError("RbfGridSpec: domain size mismatch");
  for (int a = 0; a < dim(); ++a)
    if (!(hi[a] - lo[a] > 0.0))
      throw InvalidSpecError("RbfGridSpec: zero-volume domain");
  if (!(overlap > 0.0)) throw InvalidSpecError("RbfGridSpec: overlap must be > 0");
}

RbfBasis place_rbf_centers(const RbfGridSpec& spec) {
  spec.validate();
  const int d = spec.dim();
  const int n = spec.num_centers();

  Eigen::VectorXd spacing(d);
  for (int a = 0; a < d; ++a) spacing[a] = (spec.hi[a] - spec.lo[a]) / spec.dims[a];

  RbfBasis out;
  out.centers.resize(n, d);
  std::vector<int> idx(d, 0);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a)
      out.centers(i, a) = spec.lo[a] + (idx[a] + 0.5) * spacing[a];
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < spec.dims[a]) break;
      idx[a] = 0;
    }
  }
  out.sigma = spec.overlap * spacing.maxCoeff();
  return out;
}

double eval_scalar_basis(const Eigen::VectorXd& x, const Eigen::VectorXd& center,
                         double sigma) {
  const double r2 = (x - center).squaredNorm();
  return std::exp(-r2 / (2.0 * sigma * sigma));
}

Eigen::MatrixXd assemble_scalar_basis_matrix(const Eigen::MatrixXd& points,
                                             const RbfGridSpec& spec) {
  if (points.rows() == 0) throw InvalidSpecError("assemble_scalar_basis_matrix: empty points");
  const RbfBasis basis = place_rbf_centers(spec);
  const int n_pts = static_cast<int>(points.rows());
  const int n_rbf = static_cast<int>(basis.centers.rows());
  const double inv2s2 = 1.0 / (2.0 * basis.sigma * basis.sigma);

  Eigen::MatrixXd B(n_pts, n_rbf);
  for (int j = 0; j < n_pts; ++j)
    for (int i = 0; i < n_rbf; ++i) {
      const double r2 = (points.row(j) - basis.centers.row(i)).squaredNorm();
      B(j, i) = std::exp(-r2 * inv2s2);
    }
  return B;
}

Eigen::MatrixXd assemble_vector_basis_matrix(const Eigen::MatrixXd& nodes,
                                             const RbfGridSpec& spec, int d) {
  if (nodes.cols() != d)
    throw InvalidSpecError("assemble_vector_basis_matrix: dimension mismatch");
  const Eigen::MatrixXd B = assemble_scalar_basis_matrix(nodes, spec);
  const int n_n = static_cast<int>(B.rows());
  const int n_rbf = static_cast<int>(B.cols());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<long>(d) * n_n,
                                            static_cast<long>(d) * n_rbf);
  for (int a = 0; a < d; ++a)
    A.block(static_cast<long>(a) * n_n, static_cast<long>(a) * n_rbf, n_n, n_rbf) = B;
  return A;
}

double sup_gradient_estimate(const RbfGridSpec& spec, const Eigen::VectorXd& q,
                             const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) throw InvalidSpecError("sup_gradient_estimate: empty samples");
  const RbfBasis basis = place_rbf_centers(spec);
  const int d = spec.dim();
  const int n_rbf = static_cast<int>(basis.centers.rows());
  const double inv_s2 = 1.0 / (basis.sigma * basis.sigma);

  double sup = 0.0;
  Eigen::MatrixXd jac(d, d);
  for (int s = 0; s < samples.rows(); ++s) {
    const Eigen::VectorXd x = samples.row(s);
    jac.setZero();
    for (int j = 0; j < n_rbf; ++j) {
      const Eigen::VectorXd diff = x - basis.centers.row(j).transpose();
      const double b = std::exp(-diff.squaredNorm() * 0.5 * inv_s2);
      // d b_j / d x_beta = -(x_beta - mu_beta)/sigma^2 * b_j
      for (int alpha = 0; alpha < d; ++alpha) {
        const double qj = q[static_cast<long>(alpha) * n_rbf + j];
        if (qj == 0.0) continue;
        for (int beta = 0; beta < d; ++beta)
          jac(alpha, beta) += qj * (-diff[beta] * inv_s2) * b;
      }
    }
    const double norm = jac.cwiseAbs().rowwise().sum().maxCoeff();
    sup = std::max(sup, norm);
  }
  return sup;
}

}  // namespace codesign
