#include "codesign/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "codesign/errors.hpp"

namespace codesign {

void SimulatorConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidSpecError("SimulatorConfig: dt must be > 0");
  if (n_steps < 1) throw InvalidSpecError("SimulatorConfig: n_steps must be >= 1");
  if (!(stiffness_passive > 0.0 && stiffness_muscle > 0.0))
    throw InvalidSpecError("SimulatorConfig: stiffnesses must be > 0");
  if (!(node_mass > 0.0)) throw InvalidSpecError("SimulatorConfig: node_mass must be > 0");
}

std::vector<bool> largest_connected_component(const DecodedDesign& design,
                                              const Mesh& mesh) {
  const int n_e = mesh.num_elements();
  std::vector<bool> out(static_cast<size_t>(n_e), false);

  // edge (sorted node pair) -> elements using it
  std::map<std::pair<int, int>, std::vector<int>> edge_elems;
  auto add_edge = [&edge_elems](int a, int b, int e) {
    edge_elems[{std::min(a, b), std::max(a, b)}].push_back(e);
  };
  for (int e = 0; e < n_e; ++e) {
    if (!design.occupancy[static_cast<size_t>(e)]) continue;
    const auto& c = mesh.elements[e];
    const int m = static_cast<int>(c.size());
    for (int i = 0; i < m; ++i) add_edge(c[i], c[(i + 1) % m], e);
  }

  std::vector<std::vector<int>> adj(static_cast<size_t>(n_e));
  for (const auto& [edge, elems] : edge_elems)
    for (size_t i = 0; i < elems.size(); ++i)
      for (size_t j = i + 1; j < elems.size(); ++j) {
        adj[static_cast<size_t>(elems[i])].push_back(elems[j]);
        adj[static_cast<size_t>(elems[j])].push_back(elems[i]);
      }

  std::vector<int> comp(static_cast<size_t>(n_e), -1);
  int best_comp = -1, best_size = 0, n_comps = 0;
  for (int s = 0; s < n_e; ++s) {
    if (!design.occupancy[static_cast<size_t>(s)] || comp[static_cast<size_t>(s)] >= 0)
      continue;
    std::vector<int> stack{s};
    comp[static_cast<size_t>(s)] = n_comps;
    int size = 0;
    while (!stack.empty()) {
      const int e = stack.back();
      stack.pop_back();
      ++size;
      for (int nb : adj[static_cast<size_t>(e)])
        if (comp[static_cast<size_t>(nb)] < 0) {
          comp[static_cast<size_t>(nb)] = n_comps;
          stack.push_back(nb);
        }
    }
    if (size > best_size) {
      best_size = size;
      best_comp = n_comps;
    }
    ++n_comps;
  }
  for (int e = 0; e < n_e; ++e)
    out[static_cast<size_t>(e)] =
        best_comp >= 0 && comp[static_cast<size_t>(e)] == best_comp;
  return out;
}

namespace {

struct Spring {
  int a, b;
  double rest;
  double stiffness;
  int muscle_group = -1;  // -1 passive
};

struct BoundaryEdge {
  int a, b;
  double chirality;  // +-1, fixes the outward side of perp(b-a)
};

enum class Axis { horizontal, vertical, diagonal };

struct SimBody {
  Eigen::MatrixXd x0;  // active nodes, rest positions
  std::vector<Spring> springs;
  std::vector<BoundaryEdge> boundary;
};

// Build the active mass-spring system from the retained component.
// muscle_axis selects which cell edges a muscle cell actuates.
SimBody build_body(const DecodedDesign& design, const Mesh& mesh, Axis muscle_axis,
                   const SimulatorConfig& cfg, bool want_boundary) {
  if (mesh.dim() != 2) throw InvalidSpecError("simulators are 2D");
  const std::vector<bool> keep = largest_connected_component(design, mesh);
  int n_keep = 0;
  for (bool b : keep) n_keep += b ? 1 : 0;
  if (n_keep == 0) throw EmptyDesignError("simulate: empty design");

  // compact active nodes
  std::vector<int> remap(static_cast<size_t>(mesh.num_nodes()), -1);
  int next = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (!keep[static_cast<size_t>(e)]) continue;
    for (int c : mesh.elements[e])
      if (remap[static_cast<size_t>(c)] < 0) remap[static_cast<size_t>(c)] = next++;
  }

  SimBody body;
  body.x0.resize(next, 2);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (remap[static_cast<size_t>(i)] >= 0)
      body.x0.row(remap[static_cast<size_t>(i)]) = design.morphed_nodes.row(i);

  auto axis_of = [&](int ci, int cj) {
    // corner indices within the quad (bl, br, tr, tl)
    const bool horiz = (ci == 0 && cj == 1) || (ci == 3 && cj == 2);
    const bool vert = (ci == 1 && cj == 2) || (ci == 0 && cj == 3);
    return horiz ? Axis::horizontal : (vert ? Axis::vertical : Axis::diagonal);
  };

  std::map<std::pair<int, int>, int> spring_of;       // sorted active pair -> index
  std::map<std::pair<int, int>, int> edge_use_count;  // perimeter edges only
  std::map<std::pair<int, int>, int> edge_owner;      // -> element

  auto add_spring = [&](int ga, int gb, int group) {
    const int a = remap[static_cast<size_t>(ga)], b = remap[static_cast<size_t>(gb)];
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto it = spring_of.find(key);
    if (it == spring_of.end()) {
      Spring s;
      s.a = key.first;
      s.b = key.second;
      s.rest = (body.x0.row(s.a) - body.x0.row(s.b)).norm();
      s.muscle_group = group;
      s.stiffness = group >= 0 ? cfg.stiffness_muscle : cfg.stiffness_passive;
      spring_of.emplace(key, static_cast<int>(body.springs.size()));
      body.springs.push_back(s);
    } else if (group >= 0 && body.springs[static_cast<size_t>(it->second)].muscle_group < 0) {
      body.springs[static_cast<size_t>(it->second)].muscle_group = group;
      body.springs[static_cast<size_t>(it->second)].stiffness = cfg.stiffness_muscle;
    }
  };

  static constexpr int quad_pairs[6][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}};
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (!keep[static_cast<size_t>(e)]) continue;
    const auto& c = mesh.elements[e];
    const int label = design.labels[static_cast<size_t>(e)];
    const int group = label >= 2 ? label - 2 : -1;
    for (const auto& [ci, cj] : quad_pairs) {
      const Axis ax = axis_of(ci, cj);
      const int g = (group >= 0 && ax == muscle_axis) ? group : -1;
      add_spring(c[ci], c[cj], g);
      if (want_boundary && ax != Axis::diagonal) {
        const int a = remap[static_cast<size_t>(c[ci])], b = remap[static_cast<size_t>(c[cj])];
        const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        if (++edge_use_count[key] == 1) edge_owner[key] = e;
      }
    }
  }

  if (want_boundary) {
    for (const auto& [key, count] : edge_use_count) {
      if (count != 1) continue;
      const int e = edge_owner[key];
      BoundaryEdge be;
      be.a = key.first;
      be.b = key.second;
      const Eigen::Vector2d xa = body.x0.row(be.a), xb = body.x0.row(be.b);
      const Eigen::Vector2d perp(-(xb - xa).y(), (xb - xa).x());
      const Eigen::Vector2d mid = 0.5 * (xa + xb);
      const Eigen::Vector2d cc = mesh.element_centers.row(e).head<2>();
      be.chirality = perp.dot(mid - cc) >= 0.0 ? 1.0 : -1.0;
      body.boundary.push_back(be);
    }
  }
  return body;
}

Trajectory integrate(const SimBody& body, const DecodedDesign& design,
                     const SimulatorConfig& cfg, bool jumper) {
  const int n = static_cast<int>(body.x0.rows());
  Eigen::MatrixXd x = body.x0;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd f(n, 2);

  Trajectory traj;
  traj.positions.reserve(static_cast<size_t>(cfg.n_steps) + 1);
  traj.times.reserve(static_cast<size_t>(cfg.n_steps) + 1);
  traj.positions.push_back(x);
  traj.times.push_back(0.0);

  const int groups = design.actuation ? design.actuation->groups : 0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(std::max(groups, 1));

  // Validity guards. The explicit integrator only resolves spring dynamics
  // while per-step travel stays well below the shortest (possibly contracted)
  // rest length; beyond that, nodes tunnel past each other and the aliased
  // force direction injects unphysical momentum.
  double min_rest = std::numeric_limits<double>::infinity();
  for (const Spring& s : body.springs) min_rest = std::min(min_rest, s.rest);
  const double v_cap =
      std::min(1e4, 0.5 * (1.0 - cfg.contraction) * min_rest / cfg.dt);

  // Energy audit: every physical force here either conserves (springs,
  // gravity), dissipates (damping, drag, friction, contact), or injects a
  // bounded amount of work (muscle rest-length modulation). Mechanical energy
  // above the initial energy plus accumulated muscle work can only come from
  // discretization error, so sustained excess marks an unresolved state. The
  // margin absorbs the bounded shadow-energy noise of resolved runs (contact
  // bounces are the largest legitimate source).
  constexpr double kEnergyMargin = 20.0;
  auto rest_of = [&](const Spring& s, const Eigen::VectorXd& act) {
    double rest = s.rest;
    if (s.muscle_group >= 0 && s.muscle_group < groups)
      rest *= 1.0 - cfg.contraction * act[s.muscle_group];
    return rest;
  };
  double energy_budget = 0.0;  // initial KE and spring PE are zero
  if (jumper) energy_budget += cfg.node_mass * cfg.gravity * x.col(1).sum();
  Eigen::VectorXd u_prev = u;
  if (design.actuation)
    u_prev = eval_actuation(*design.actuation, design.actuation_params, 0.0);

  for (int step = 0; step < cfg.n_steps; ++step) {
    const double t = step * cfg.dt;
    if (design.actuation) u = eval_actuation(*design.actuation, design.actuation_params, t);

    f.setZero();
    if (jumper) f.col(1).array() -= cfg.node_mass * cfg.gravity;

    double pe = 0.0;
    for (const Spring& s : body.springs) {
      const Eigen::Vector2d d = x.row(s.b) - x.row(s.a);
      const double len = d.norm();
      if (len < 1e-12) continue;
      const Eigen::Vector2d dir = d / len;
      const double rest = rest_of(s, u);
      pe += 0.5 * s.stiffness * (len - rest) * (len - rest);
      if (s.muscle_group >= 0 && s.muscle_group < groups) {
        const double rest_prev = rest_of(s, u_prev);
        energy_budget += 0.5 * s.stiffness *
                         ((len - rest) * (len - rest) -
                          (len - rest_prev) * (len - rest_prev));
      }
      const double vrel = (v.row(s.b) - v.row(s.a)).dot(dir);
      const double fmag = s.stiffness * (len - rest) + cfg.damping * vrel;
      f.row(s.a) += fmag * dir;
      f.row(s.b) -= fmag * dir;
    }

    double energy = pe + 0.5 * cfg.node_mass * v.squaredNorm();
    if (jumper) energy += cfg.node_mass * cfg.gravity * x.col(1).sum();
    if (energy > energy_budget + kEnergyMargin)
      throw SimulationDivergedError("simulate: energy budget exceeded");
    u_prev = u;

    if (jumper) {
      for (int i = 0; i < n; ++i) {
        const double y = x(i, 1);
        if (y < 0.0) {
          double fn = -cfg.contact_stiffness * y - cfg.contact_damping * v(i, 1);
          fn = std::max(fn, 0.0);
          f(i, 1) += fn;
          const double slip = std::clamp(v(i, 0) / cfg.friction_eps, -1.0, 1.0);
          f(i, 0) -= cfg.friction * fn * slip;
        }
      }
    } else {
      for (const BoundaryEdge& be : body.boundary) {
        const Eigen::Vector2d xa = x.row(be.a), xb = x.row(be.b);
        const Eigen::Vector2d edge = xb - xa;
        const double len = edge.norm();
        if (len < 1e-12) continue;
        const Eigen::Vector2d nrm = be.chirality * Eigen::Vector2d(-edge.y(), edge.x()) / len;
        const Eigen::Vector2d vmid = 0.5 * (v.row(be.a) + v.row(be.b));
        const Eigen::Vector2d force = -cfg.drag_coeff * vmid.dot(nrm) * len * nrm;
        f.row(be.a) += 0.5 * force;
        f.row(be.b) += 0.5 * force;
      }
    }

    v += (cfg.dt / cfg.node_mass) * f;
    x += cfg.dt * v;

    if (!x.allFinite() || !v.allFinite() || v.cwiseAbs().maxCoeff() > v_cap)
      throw SimulationDivergedError("simulate: non-finite or unresolved state");
    traj.positions.push_back(x);
    traj.times.push_back((step + 1) * cfg.dt);
  }
  return traj;
}

}  // namespace

Trajectory simulate_jumper(const DecodedDesign& design, const Mesh& mesh,
                           const SimulatorConfig& cfg) {
  cfg.validate();
  if (design.empty) throw EmptyDesignError("simulate_jumper: empty design");
  const SimBody body = build_body(design, mesh, Axis::vertical, cfg, false);
  return integrate(body, design, cfg, true);
}

Trajectory simulate_swimmer(const DecodedDesign& design, const Mesh& mesh,
                            const SimulatorConfig& cfg) {
  cfg.validate();
  if (design.empty) throw EmptyDesignError("simulate_swimmer: empty design");
  const SimBody body = build_body(design, mesh, Axis::horizontal, cfg, true);
  return integrate(body, design, cfg, false);
}

}  // namespace codesign
