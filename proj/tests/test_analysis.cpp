#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "codesign/analysis.hpp"
#include "codesign/baselines.hpp"
#include "codesign/errors.hpp"
#include "codesign/geometry.hpp"

using namespace codesign;

namespace {

Eigen::MatrixXd random_cloud(int n, int d, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd pts(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) pts(i, j) = dist(gen);
  return pts;
}

Eigen::VectorXd brute_force_nn(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
  Eigen::VectorXd out(P.rows());
  for (int i = 0; i < P.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < Q.rows(); ++j)
      best = std::min(best, (P.row(i) - Q.row(j)).norm());
    out[i] = best;
  }
  return out;
}

}  // namespace

TEST_CASE("chamfer distance hand cases") {
  Eigen::MatrixXd p(1, 1), q(1, 1);
  p << 0.0;
  q << 3.0;
  CHECK(chamfer_distance(p, q) == doctest::Approx(3.0));

  const Eigen::MatrixXd cloud = random_cloud(40, 2, 1);
  CHECK(chamfer_distance(cloud, cloud) == 0.0);

  const Eigen::MatrixXd other = random_cloud(25, 2, 2);
  CHECK(chamfer_distance(cloud, other) == doctest::Approx(chamfer_distance(other, cloud)));
  CHECK(chamfer_distance(cloud, other) >= 0.0);

  Eigen::MatrixXd empty(0, 2);
  CHECK_THROWS_AS(chamfer_distance(empty, cloud), InvalidSpecError);
}

TEST_CASE("chamfer matches a two-sided mean-of-nearest oracle") {
  Eigen::MatrixXd p(3, 1), q(2, 1);
  p << 0.0, 1.0, 5.0;
  q << 1.0, 4.0;
  // P->Q nearest: 1, 0, 1 (mean 2/3); Q->P nearest: 0, 1 (mean 1/2)
  CHECK(chamfer_distance(p, q) == doctest::Approx(0.5 * (2.0 / 3.0 + 0.5)));
}

TEST_CASE("grid-accelerated nearest neighbors equal brute force exactly") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const int d = 2 + static_cast<int>(seed % 2);
    const Eigen::MatrixXd P = random_cloud(120, d, 10 + seed, 2.0);
    const Eigen::MatrixXd Q = random_cloud(90, d, 50 + seed, 2.0);
    const Eigen::VectorXd fast = nearest_neighbor_distances(P, Q);
    const Eigen::VectorXd slow = brute_force_nn(P, Q);
    CHECK((fast - slow).cwiseAbs().maxCoeff() == 0.0);
  }
  // larger target sets take the bucket-grid path instead of the linear scan
  for (unsigned seed = 0; seed < 3; ++seed) {
    const int d = 2 + static_cast<int>(seed % 2);
    const Eigen::MatrixXd P = random_cloud(150, d, 200 + seed, 2.0);
    const Eigen::MatrixXd Q = random_cloud(500, d, 300 + seed, 2.0);
    CHECK((nearest_neighbor_distances(P, Q) - brute_force_nn(P, Q)).cwiseAbs().maxCoeff() ==
          0.0);
  }
  // degenerate spreads: collinear targets and queries far outside the grid
  Eigen::MatrixXd line(5, 2);
  line << 0, 0, 1, 0, 2, 0, 3, 0, 4, 0;
  Eigen::MatrixXd far(2, 2);
  far << -10.0, 7.0, 14.0, -3.0;
  CHECK((nearest_neighbor_distances(far, line) - brute_force_nn(far, line))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("pairwise chamfer matrix: symmetric, zero diagonal, worker invariant") {
  std::vector<Eigen::MatrixXd> clouds;
  for (unsigned seed = 0; seed < 12; ++seed) clouds.push_back(random_cloud(30, 2, 100 + seed));
  const DistanceMatrix serial = pairwise_chamfer(clouds, 1);
  CHECK(serial.n == 12);
  CHECK((serial.values - serial.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(serial.values.diagonal().cwiseAbs().maxCoeff() == 0.0);
  const DistanceMatrix parallel = pairwise_chamfer(clouds, 4);
  CHECK((serial.values - parallel.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("classical MDS: equilateral triangle and collinear points") {
  DistanceMatrix tri;
  tri.n = 3;
  tri.values = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  const MdsResult r = classical_mds(tri);
  CHECK(r.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(r.eigenvalues[2]) < 1e-9);
  CHECK(r.d95 == 2);

  DistanceMatrix line;
  line.n = 3;
  line.values.resize(3, 3);
  line.values << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const MdsResult rl = classical_mds(line);
  int positive = 0;
  for (long i = 0; i < rl.eigenvalues.size(); ++i)
    if (rl.eigenvalues[i] > 1e-9) ++positive;
  CHECK(positive == 1);
  CHECK(rl.d95 == 1);
}

TEST_CASE("MDS round-trip: Euclidean distances are reproduced and variance matches") {
  const Eigen::MatrixXd X = random_cloud(15, 4, 77);
  DistanceMatrix D;
  D.n = 15;
  D.values = Eigen::MatrixXd::Zero(15, 15);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) D.values(i, j) = (X.row(i) - X.row(j)).norm();

  const MdsResult r = classical_mds(D);
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const double variance = Xc.squaredNorm();
  double positive_sum = 0.0;
  for (long i = 0; i < r.eigenvalues.size(); ++i)
    positive_sum += std::max(r.eigenvalues[i], 0.0);
  CHECK(positive_sum == doctest::Approx(variance).epsilon(1e-9));

  CHECK(r.cumulative[0] <= 1.0 + 1e-12);
  for (long i = 1; i < r.cumulative.size(); ++i)
    CHECK(r.cumulative[i] >= r.cumulative[i - 1] - 1e-12);
  CHECK(r.cumulative[r.cumulative.size() - 1] == doctest::Approx(1.0));
}

TEST_CASE("d95 arithmetic") {
  Eigen::Vector3d a(0.5, 0.5, 0.0);
  CHECK(d95_from_eigenvalues(a) == 2);
  Eigen::VectorXd b(1);
  b << 2.7;
  CHECK(d95_from_eigenvalues(b) == 1);
  Eigen::Vector2d c(0.96, 0.04);
  CHECK(d95_from_eigenvalues(c) == 1);
  // appending zeros never changes d95
  Eigen::Vector4d padded(0.96, 0.04, 0.0, 0.0);
  CHECK(d95_from_eigenvalues(padded) == 1);
  Eigen::Vector2d none(-1.0, 0.0);
  CHECK_THROWS_AS(d95_from_eigenvalues(none), DegenerateGeometryError);
}

TEST_CASE("novelty scores hand case and min property") {
  DistanceMatrix D;
  D.n = 3;
  D.values.resize(3, 3);
  D.values << 0, 1, 3, 1, 0, 2, 3, 2, 0;
  const Eigen::VectorXd nu = novelty_scores(D);
  CHECK(nu[0] == 1.0);
  CHECK(nu[1] == 1.0);
  CHECK(nu[2] == 2.0);

  // a duplicated shape has zero novelty
  std::vector<Eigen::MatrixXd> clouds;
  clouds.push_back(random_cloud(20, 2, 5));
  clouds.push_back(clouds.front());
  clouds.push_back(random_cloud(20, 2, 6));
  const Eigen::VectorXd dup = novelty_scores(pairwise_chamfer(clouds, 1));
  CHECK(dup[0] == 0.0);
  CHECK(dup[1] == 0.0);
  CHECK(dup[2] > 0.0);
}

TEST_CASE("sampled design distances: determinism, symmetry, worker invariance") {
  const Eigen::MatrixXd sphere = build_sphere_cloud(60, 1.0);
  RbfGridSpec spec;
  spec.dims = {2, 2, 2};
  spec.lo = Eigen::Vector3d::Constant(-1.0);
  spec.hi = Eigen::Vector3d::Constant(1.0);
  const ShapeSampler sampler = basis_shape_sampler(spec, 0.3, sphere);
  const int params = 3 * 8;

  const DistanceMatrix a = sample_design_distances(sampler, params, 20, 9, 1);
  const DistanceMatrix b = sample_design_distances(sampler, params, 20, 9, 3);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.values - a.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.values.diagonal().cwiseAbs().maxCoeff() == 0.0);
  // off-diagonal distances should be non-trivial for a morphing sampler
  CHECK(a.values.maxCoeff() > 0.0);
}

TEST_CASE("neural sampler stays within the displacement budget") {
  const Eigen::MatrixXd sphere = build_sphere_cloud(50, 1.0);
  const MlpSpec net{{3, 4, 3}};
  const ShapeSampler sampler = neural_shape_sampler(net, 0.3, sphere);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd w(net.param_count());
  for (long i = 0; i < w.size(); ++i) w[i] = dist(gen);
  const Eigen::MatrixXd out = sampler(w);
  CHECK(out.rows() == sphere.rows());
  CHECK((out - sphere).cwiseAbs().maxCoeff() <= 0.3 * 1.0 + 1e-12);
}
