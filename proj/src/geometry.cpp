#include "codesign/geometry.hpp"

#include <cmath>
#include <numbers>

#include "codesign/errors.hpp"

namespace codesign {

namespace {

// Flat node index for grid coordinates, last axis fastest.
int node_index(const std::vector<int>& npa, const std::vector<int>& coord) {
  int idx = 0;
  for (size_t a = 0; a < npa.size(); ++a) idx = idx * npa[a] + coord[a];
  return idx;
}

}  // namespace

Mesh build_grid_mesh(const std::vector<int>& dims, double cell_size) {
  const int d = static_cast<int>(dims.size());
  if (d < 1 || d > 3) throw InvalidSpecError("build_grid_mesh: 1-3 axes supported");
  for (int v : dims)
    if (v < 1) throw InvalidSpecError("build_grid_mesh: dims must be >= 1");
  if (!(cell_size > 0.0)) throw InvalidSpecError("build_grid_mesh: cell_size must be > 0");

  std::vector<int> npa(dims.begin(), dims.end());
  for (int& v : npa) ++v;

  int n_nodes = 1, n_elems = 1;
  for (int a = 0; a < d; ++a) {
    n_nodes *= npa[a];
    n_elems *= dims[a];
  }

  Mesh mesh;
  mesh.dims = dims;
  mesh.cell_size = cell_size;
  mesh.nodes.resize(n_nodes, d);
  {
    std::vector<int> c(d, 0);
    for (int i = 0; i < n_nodes; ++i) {
      for (int a = 0; a < d; ++a) mesh.nodes(i, a) = c[a] * cell_size;
      for (int a = d - 1; a >= 0; --a) {
        if (++c[a] < npa[a]) break;
        c[a] = 0;
      }
    }
  }

  mesh.elements.reserve(n_elems);
  mesh.element_centers.resize(n_elems, d);
  std::vector<int> e(d, 0);
  for (int i = 0; i < n_elems; ++i) {
    std::vector<int> corners;
    if (d == 1) {
      corners = {node_index(npa, {e[0]}), node_index(npa, {e[0] + 1})};
    } else if (d == 2) {
      // CCW: bl, br, tr, tl
      corners = {node_index(npa, {e[0], e[1]}), node_index(npa, {e[0] + 1, e[1]}),
                 node_index(npa, {e[0] + 1, e[1] + 1}), node_index(npa, {e[0], e[1] + 1})};
    } else {
      for (int oz : {0, 1})
        for (auto [ox, oy] : {std::pair{0, 0}, {1, 0}, {1, 1}, {0, 1}})
          corners.push_back(node_index(npa, {e[0] + ox, e[1] + oy, e[2] + oz}));
    }
    Eigen::VectorXd center = Eigen::VectorXd::Zero(d);
    for (int c : corners) center += mesh.nodes.row(c);
    mesh.element_centers.row(i) = center / static_cast<double>(corners.size());
    mesh.elements.push_back(std::move(corners));

    for (int a = d - 1; a >= 0; --a) {
      if (++e[a] < dims[a]) break;
      e[a] = 0;
    }
  }
  return mesh;
}

Mesh mask_mesh(const Mesh& mesh,
               const std::function<bool(const Eigen::VectorXd&)>& keep) {
  Mesh out;
  out.dims = mesh.dims;
  out.cell_size = mesh.cell_size;

  std::vector<int> remap(mesh.num_nodes(), -1);
  std::vector<int> kept_elems;
  for (int i = 0; i < mesh.num_elements(); ++i)
    if (keep(mesh.element_centers.row(i))) kept_elems.push_back(i);
  if (kept_elems.empty()) throw EmptyDesignError("mask_mesh: no elements kept");

  int next = 0;
  for (int i : kept_elems)
    for (int c : mesh.elements[i])
      if (remap[c] < 0) remap[c] = next++;

  out.nodes.resize(next, mesh.dim());
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (remap[i] >= 0) out.nodes.row(remap[i]) = mesh.nodes.row(i);

  out.element_centers.resize(static_cast<long>(kept_elems.size()), mesh.dim());
  for (size_t k = 0; k < kept_elems.size(); ++k) {
    std::vector<int> corners = mesh.elements[kept_elems[k]];
    for (int& c : corners) c = remap[c];
    out.elements.push_back(std::move(corners));
    out.element_centers.row(static_cast<long>(k)) = mesh.element_centers.row(kept_elems[k]);
  }
  return out;
}

Eigen::MatrixXd build_sphere_cloud(int n, double radius) {
  if (n < 4) throw InvalidSpecError("build_sphere_cloud: n must be >= 4");
  if (!(radius > 0.0)) throw InvalidSpecError("build_sphere_cloud: radius must be > 0");

  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Eigen::MatrixXd pts(n, 3);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts(i, 0) = radius * r * std::cos(phi);
    pts(i, 1) = radius * r * std::sin(phi);
    pts(i, 2) = radius * z;
  }
  return pts;
}

BodyFrame body_frame_metrics(const Eigen::MatrixXd& nodes) {
  if (nodes.rows() < 2) throw DegenerateGeometryError("body_frame_metrics: need >= 2 nodes");

  BodyFrame bf;
  bf.com = nodes.colwise().mean();

  Eigen::MatrixXd centered = nodes.rowwise() - bf.com.transpose();
  if (centered.rowwise().norm().maxCoeff() == 0.0)
    throw DegenerateGeometryError("body_frame_metrics: all nodes coincident");

  const Eigen::VectorXd cx = centered.col(0);
  const Eigen::VectorXd cy = centered.col(1);
  const double sxx = cx.dot(cx), syy = cy.dot(cy), sxy = cx.dot(cy);

  double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (angle < 0.0) angle += std::numbers::pi;
  if (angle >= std::numbers::pi) angle -= std::numbers::pi;
  bf.orientation = angle;

  const Eigen::VectorXd proj = cx * std::cos(angle) + cy * std::sin(angle);
  bf.length = proj.maxCoeff() - proj.minCoeff();
  return bf;
}

}  // namespace codesign
