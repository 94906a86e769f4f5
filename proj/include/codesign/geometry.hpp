#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace codesign {

// Uniform grid mesh: quads in 2D, hexes in 3D. Node/element ordering is
// row-major over the grid axes (last axis fastest).
struct Mesh {
  Eigen::MatrixXd nodes;                    // N_n x d
  std::vector<std::vector<int>> elements;   // corner node indices per element
  Eigen::MatrixXd element_centers;          // N_e x d
  std::vector<int> dims;                    // elements per axis (as built)
  double cell_size = 0.0;

  int dim() const { return static_cast<int>(nodes.cols()); }
  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
};

Mesh build_grid_mesh(const std::vector<int>& dims, double cell_size);

// Keep elements whose center satisfies the predicate; nodes are compacted
// and renumbered. Used to carve the swimmer ellipse out of a grid.
Mesh mask_mesh(const Mesh& mesh,
               const std::function<bool(const Eigen::VectorXd&)>& keep);

// Deterministic Fibonacci-spiral layout of n points on a sphere surface.
Eigen::MatrixXd build_sphere_cloud(int n, double radius);

struct BodyFrame {
  Eigen::VectorXd com;
  double orientation = 0.0;  // principal-axis angle in [0, pi), 2D
  double length = 0.0;       // extent along the principal axis
};

// Principal-axis frame from the centered second-moment matrix of the first
// two coordinates. Eigenvalue ties break toward angle 0.
BodyFrame body_frame_metrics(const Eigen::MatrixXd& nodes);

}  // namespace codesign
