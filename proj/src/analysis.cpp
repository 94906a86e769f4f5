#include "codesign/analysis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "codesign/cma_es.hpp"
#include "codesign/errors.hpp"

namespace codesign {

namespace {

// Uniform bucket grid over a point set for exact nearest-neighbor queries.
// Small or high-dimensional point sets use a vectorized linear scan instead:
// below a few hundred points the scan is faster than ring bookkeeping, and in
// high dimension the grid would be all boundary anyway. Both paths evaluate
// the same squared-distance expression, so results are bit-identical.
class PointGrid {
 public:
  static constexpr int kMaxGridDim = 4;
  static constexpr int kLinearScanCutoff = 256;

  explicit PointGrid(const Eigen::MatrixXd& pts) : pts_(pts), d_(static_cast<int>(pts.cols())) {
    if (d_ > kMaxGridDim || pts.rows() <= kLinearScanCutoff) return;
    lo_ = pts.colwise().minCoeff();
    const Eigen::VectorXd extent = pts.colwise().maxCoeff().transpose() - lo_;
    const double target = std::pow(static_cast<double>(pts.rows()), 1.0 / d_);
    h_ = std::max(extent.maxCoeff() / std::max(1.0, target), 1e-12);
    long total = 1;
    for (int a = 0; a < d_; ++a) {
      ncells_[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / h_)) + 1);
      total *= ncells_[a];
    }
    // counting-sort points into a CSR bucket layout
    offsets_.assign(static_cast<size_t>(total) + 1, 0);
    std::vector<int> cell_idx(static_cast<size_t>(pts.rows()));
    for (int i = 0; i < pts.rows(); ++i) {
      Cell c;
      cell_of(pts.row(i), c);
      cell_idx[static_cast<size_t>(i)] = static_cast<int>(flat(c));
      ++offsets_[static_cast<size_t>(cell_idx[static_cast<size_t>(i)]) + 1];
    }
    for (size_t k = 1; k < offsets_.size(); ++k) offsets_[k] += offsets_[k - 1];
    members_.resize(static_cast<size_t>(pts.rows()));
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (int i = 0; i < pts.rows(); ++i)
      members_[static_cast<size_t>(cursor[static_cast<size_t>(cell_idx[static_cast<size_t>(i)])]++)] = i;
  }

  double nearest_distance(const Eigen::VectorXd& p) const {
    if (d_ > kMaxGridDim || pts_.rows() <= kLinearScanCutoff) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < pts_.rows(); ++i)
        best = std::min(best, (pts_.row(i).transpose() - p).squaredNorm());
      return std::sqrt(best);
    }
    // clamp the start cell: projecting onto the grid box only shrinks the
    // distance to any in-grid cell, so the ring lower bound stays valid
    Cell c0;
    cell_of(p, c0);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0;; ++r) {
      if (std::isfinite(best) && (r - 1) * h_ >= std::sqrt(best)) break;
      bool any_cell = scan_ring(p, c0, r, best);
      // once outside every grid cell and a hit exists, the bound terminates;
      // keep expanding while no in-range cell was touched only if none found yet
      if (!any_cell && std::isfinite(best)) break;
      if (r > 4 * max_cells() + 8) break;  // unreachable safety stop
    }
    return std::sqrt(best);
  }

 private:
  using Cell = std::array<int, kMaxGridDim>;

  int max_cells() const {
    int m = 0;
    for (int a = 0; a < d_; ++a) m = std::max(m, ncells_[a]);
    return m;
  }

  void cell_of(const Eigen::VectorXd& p, Cell& c) const {
    for (int a = 0; a < d_; ++a) {
      const int v = static_cast<int>(std::floor((p[a] - lo_[a]) / h_));
      c[static_cast<size_t>(a)] = std::clamp(v, 0, ncells_[a] - 1);
    }
  }

  size_t flat(const Cell& c) const {
    long idx = 0;
    for (int a = 0; a < d_; ++a) idx = idx * ncells_[a] + c[static_cast<size_t>(a)];
    return static_cast<size_t>(idx);
  }

  void visit_cell(const Eigen::VectorXd& p, const Cell& c, double& best) const {
    const size_t k = flat(c);
    for (int m = offsets_[k]; m < offsets_[k + 1]; ++m) {
      const double d2 = (pts_.row(members_[static_cast<size_t>(m)]).transpose() - p).squaredNorm();
      if (d2 < best) best = d2;
    }
  }

  bool scan_ring(const Eigen::VectorXd& p, const Cell& c0, int r, double& best) const {
    bool any = false;
    Cell c{};
    Cell off;
    off.fill(-r);
    while (true) {
      int cheb = 0;
      for (int a = 0; a < d_; ++a) cheb = std::max(cheb, std::abs(off[static_cast<size_t>(a)]));
      if (cheb == r) {
        bool in_range = true;
        for (int a = 0; a < d_; ++a) {
          c[static_cast<size_t>(a)] = c0[static_cast<size_t>(a)] + off[static_cast<size_t>(a)];
          if (c[static_cast<size_t>(a)] < 0 || c[static_cast<size_t>(a)] >= ncells_[a])
            in_range = false;
        }
        if (in_range) {
          any = true;
          visit_cell(p, c, best);
        }
      }
      int a = d_ - 1;
      for (; a >= 0; --a) {
        if (++off[static_cast<size_t>(a)] <= r) break;
        off[static_cast<size_t>(a)] = -r;
      }
      if (a < 0) break;
    }
    return any;
  }

  const Eigen::MatrixXd& pts_;
  int d_;
  Eigen::VectorXd lo_;
  double h_ = 1.0;
  std::array<int, kMaxGridDim> ncells_{};
  std::vector<int> offsets_;
  std::vector<int> members_;
};

}  // namespace

namespace {

double mean_nearest(const Eigen::MatrixXd& P, const PointGrid& grid_q) {
  double sum = 0.0;
  for (int i = 0; i < P.rows(); ++i) sum += grid_q.nearest_distance(P.row(i));
  return sum / static_cast<double>(P.rows());
}

}  // namespace

Eigen::VectorXd nearest_neighbor_distances(const Eigen::MatrixXd& P,
                                           const Eigen::MatrixXd& Q) {
  if (P.rows() == 0 || Q.rows() == 0)
    throw InvalidSpecError("nearest_neighbor_distances: empty point set");
  PointGrid grid(Q);
  Eigen::VectorXd out(P.rows());
  for (int i = 0; i < P.rows(); ++i) out[i] = grid.nearest_distance(P.row(i));
  return out;
}

double chamfer_distance(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
  if (P.rows() == 0 || Q.rows() == 0)
    throw InvalidSpecError("chamfer_distance: empty point set");
  const double fwd = mean_nearest(P, PointGrid(Q));
  const double bwd = mean_nearest(Q, PointGrid(P));
  return 0.5 * (fwd + bwd);
}

DistanceMatrix pairwise_chamfer(const std::vector<Eigen::MatrixXd>& clouds, int workers) {
  const int n = static_cast<int>(clouds.size());
  DistanceMatrix D;
  D.n = n;
  D.values = Eigen::MatrixXd::Zero(n, n);

  // one bucket grid per cloud, built once and shared across all pairs
  std::vector<PointGrid> grids;
  grids.reserve(static_cast<size_t>(n));
  for (const auto& cloud : clouds) {
    if (cloud.rows() == 0) throw InvalidSpecError("pairwise_chamfer: empty point set");
    grids.emplace_back(cloud);
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  auto compute = [&](size_t begin, size_t end) {
    for (size_t k = begin; k < end; ++k) {
      const auto [i, j] = pairs[k];
      const auto& ci = clouds[static_cast<size_t>(i)];
      const auto& cj = clouds[static_cast<size_t>(j)];
      const double d = 0.5 * (mean_nearest(ci, grids[static_cast<size_t>(j)]) +
                              mean_nearest(cj, grids[static_cast<size_t>(i)]));
      D.values(i, j) = d;
      D.values(j, i) = d;
    }
  };

  if (workers <= 1) {
    compute(0, pairs.size());
  } else {
    std::atomic<size_t> next{0};
    constexpr size_t chunk = 256;
    auto work = [&] {
      for (size_t b = next.fetch_add(chunk); b < pairs.size(); b = next.fetch_add(chunk))
        compute(b, std::min(b + chunk, pairs.size()));
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return D;
}

DistanceMatrix sample_design_distances(const ShapeSampler& sampler, int param_count,
                                       int n_samples, std::uint64_t seed, int workers) {
  if (n_samples < 2) throw InvalidSpecError("sample_design_distances: need >= 2 samples");
  GaussianRng rng(seed);
  std::vector<Eigen::MatrixXd> clouds;
  clouds.reserve(static_cast<size_t>(n_samples));
  Eigen::VectorXd c(param_count);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < param_count; ++i) c[i] = 2.0 * rng.uniform() - 1.0;
    clouds.push_back(sampler(c));
  }
  return pairwise_chamfer(clouds, workers);
}

ShapeSampler basis_shape_sampler(const RbfGridSpec& morph_spec, double gamma,
                                 const Eigen::MatrixXd& reference_cloud) {
  const Eigen::MatrixXd A =
      assemble_vector_basis_matrix(reference_cloud, morph_spec,
                                   static_cast<int>(reference_cloud.cols()));
  return [morph_spec, gamma, reference_cloud, A](const Eigen::VectorXd& q) {
    return decode_morph(q, A, morph_spec, gamma, reference_cloud, reference_cloud);
  };
}

ShapeSampler neural_shape_sampler(const MlpSpec& net, double gamma,
                                  const Eigen::MatrixXd& reference_cloud) {
  const Eigen::VectorXd lo = reference_cloud.colwise().minCoeff();
  const Eigen::VectorXd hi = reference_cloud.colwise().maxCoeff();
  const Eigen::VectorXd extent = hi - lo;
  const double domain_scale = 0.5 * extent.maxCoeff();
  return [net, gamma, reference_cloud, lo, extent, domain_scale](const Eigen::VectorXd& w) {
    Eigen::MatrixXd out = reference_cloud;
    const Eigen::VectorXd wc = w.cwiseMax(-1.0).cwiseMin(1.0);
    for (int i = 0; i < reference_cloud.rows(); ++i) {
      Eigen::VectorXd z(reference_cloud.cols());
      for (long a = 0; a < z.size(); ++a)
        z[a] = extent[a] > 0.0 ? 2.0 * (reference_cloud(i, a) - lo[a]) / extent[a] - 1.0 : 0.0;
      const Eigen::VectorXd disp = mlp_forward(net, wc, z);
      out.row(i) += (gamma * domain_scale) * disp.array().tanh().matrix().transpose();
    }
    return out;
  };
}

MdsResult classical_mds(const DistanceMatrix& D) {
  const int n = D.n;
  if (n < 2) throw InvalidSpecError("classical_mds: need >= 2 samples");
  const Eigen::MatrixXd D2 = D.values.array().square();
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd M = -0.5 * J * D2 * J;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  Eigen::VectorXd evals = es.eigenvalues().reverse();

  MdsResult out;
  out.eigenvalues = evals;
  double total = 0.0;
  for (long i = 0; i < evals.size(); ++i) total += std::max(evals[i], 0.0);
  out.cumulative.resize(evals.size());
  double run = 0.0;
  for (long i = 0; i < evals.size(); ++i) {
    run += std::max(evals[i], 0.0);
    out.cumulative[i] = total > 0.0 ? run / total : 0.0;
  }
  if (total > 0.0) out.d95 = d95_from_eigenvalues(evals);
  return out;
}

int d95_from_eigenvalues(const Eigen::VectorXd& descending_eigenvalues) {
  double total = 0.0;
  for (long i = 0; i < descending_eigenvalues.size(); ++i)
    total += std::max(descending_eigenvalues[i], 0.0);
  if (!(total > 0.0))
    throw DegenerateGeometryError("d95: no positive eigenvalues");
  double run = 0.0;
  for (long i = 0; i < descending_eigenvalues.size(); ++i) {
    run += std::max(descending_eigenvalues[i], 0.0);
    if (run / total >= 0.95) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(descending_eigenvalues.size());
}

Eigen::VectorXd novelty_scores(const DistanceMatrix& D) {
  if (D.n < 2) throw InvalidSpecError("novelty_scores: need >= 2 samples");
  Eigen::VectorXd nu(D.n);
  for (int i = 0; i < D.n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < D.n; ++j)
      if (j != i) best = std::min(best, D.values(i, j));
    nu[i] = best;
  }
  return nu;
}

}  // namespace codesign
