#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ulap/errors.hpp"
#include "ulap/heat.hpp"
#include "ulap/model.hpp"
#include "ulap/spectral.hpp"
#include "ulap/wavelets.hpp"

// Boundary value problems on leaf regions.  For a region S the vertex
// boundary collects the outside leaves that the generator couples to S, the
// edge boundary the corresponding ordered pairs.  Initial data spanned by
// basis functions supported inside S evolves without ever leaving S, so both
// the homogeneous Dirichlet condition and the flux (von Neumann) form
//   sum_{y in S} L(x, y) (u(y) - u(x)) mu(y) = 0   for x in the boundary
// hold along the flow; data outside that span is rejected.

namespace ulap {

enum class BoundaryCondition { Dirichlet, VonNeumann };

struct Region {
  std::vector<char> member;  // one flag per leaf
  std::vector<int> leaves;
};

inline Region region_from_leaves(const Model& model, const std::vector<int>& leaves) {
  Region r;
  r.member.assign(model.n_leaves(), 0);
  for (int x : leaves) {
    if (x < 0 || x >= model.n_leaves()) {
      throw ConfigError("region leaf " + std::to_string(x) + " out of range");
    }
    if (!r.member[x]) {
      r.member[x] = 1;
      r.leaves.push_back(x);
    }
  }
  if (r.leaves.empty()) throw ConfigError("region is empty");
  return r;
}

// Region of all leaves under the tree vertex whose physical disc matches the
// given center and radius exponent.
inline Region region_from_subtree(const Model& model, int comp,
                                  const Rational& center, const Rational& rho) {
  if (comp < 0 || comp >= model.n_components()) {
    throw ConfigError("region component out of range");
  }
  const Component& c = model.component(comp);
  const OrbitTree& tree = c.trees[0];
  const Disc target{center, rho, model.prime()};
  for (int v = 0; v < tree.n_vertices(); ++v) {
    if (tree.vertex_disc(v).equal_as_set(target)) {
      return region_from_leaves(model, leaves_under(model, comp, v));
    }
  }
  throw ConfigError("no tree vertex matches disc " + target.str());
}

// Leaves outside S that feel S through the generator.
inline std::vector<int> vertex_boundary(const Operator& op, const Region& r) {
  const int n = static_cast<int>(op.mu.size());
  std::vector<int> out;
  for (int x = 0; x < n; ++x) {
    if (r.member[x]) continue;
    for (int y : r.leaves) {
      if (op.M(x, y) > 0) {
        out.push_back(x);
        break;
      }
    }
  }
  return out;
}

// Ordered coupling pairs (x in S, y outside S).
inline std::vector<std::pair<int, int>> edge_boundary(const Operator& op,
                                                      const Region& r) {
  const int n = static_cast<int>(op.mu.size());
  std::vector<std::pair<int, int>> out;
  for (int x : r.leaves) {
    for (int y = 0; y < n; ++y) {
      if (r.member[y]) continue;
      if (op.M(x, y) > 0) out.emplace_back(x, y);
    }
  }
  return out;
}

struct BoundaryCheckResult {
  double max_residual = 0;
  bool ok = false;
};

// Homogeneous Dirichlet data on the vertex boundary.
inline BoundaryCheckResult check_dirichlet(const Operator& op, const Region& r,
                                           const Eigen::VectorXd& u,
                                           double tol = 1e-10) {
  BoundaryCheckResult out;
  for (int x : vertex_boundary(op, r)) {
    out.max_residual = std::max(out.max_residual, std::abs(u(x)));
  }
  out.ok = out.max_residual <= tol;
  return out;
}

// Flux form at the vertex boundary: sum_{y in S} M[x][y] (u(y) - u(x)).
inline BoundaryCheckResult check_von_neumann(const Operator& op, const Region& r,
                                             const Eigen::VectorXd& u,
                                             double tol = 1e-10) {
  BoundaryCheckResult out;
  for (int x : vertex_boundary(op, r)) {
    double res = 0;
    for (int y : r.leaves) res += op.M(x, y) * (u(y) - u(x));
    out.max_residual = std::max(out.max_residual, std::abs(res));
  }
  out.ok = out.max_residual <= tol;
  return out;
}

struct BvpSolution {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;
  std::vector<double> confinement;  // max |u| outside S per time
  std::vector<BoundaryCheckResult> boundary;
  std::vector<int> admissible_columns;
  double projection_residual = 0;
};

// Evolves initial data spanned by decomposition columns supported inside S.
// Throws UnsupportedInitialData when u0 has mass outside that span.
inline BvpSolution solve_bvp(const Model& model, const Decomposition& dec,
                             const Operator& op, const Region& r,
                             const Eigen::VectorXd& u0,
                             const std::vector<double>& times,
                             BoundaryCondition condition, double tol = 1e-10) {
  if (!dec.analytic) {
    throw PreconditionError("solve_bvp needs the analytic decomposition");
  }
  const int n = static_cast<int>(dec.mu.size());
  BvpSolution out;

  // Columns fully supported inside S.
  std::vector<int> cols;
  for (int k = 0; k < n; ++k) {
    bool inside = true;
    for (int x = 0; x < n && inside; ++x) {
      if (!r.member[x] && dec.phi(x, k) != 0.0) inside = false;
    }
    if (inside) cols.push_back(k);
  }
  out.admissible_columns = cols;

  Eigen::VectorXd c = spectral_coefficients(dec, u0);
  Eigen::VectorXd projected = Eigen::VectorXd::Zero(n);
  for (int k : cols) projected += c(k) * dec.phi.col(k);
  const double scale = std::max(1.0, u0.cwiseAbs().maxCoeff());
  out.projection_residual = (u0 - projected).cwiseAbs().maxCoeff();
  if (out.projection_residual > tol * scale) {
    throw UnsupportedInitialData(
        "initial data is not spanned by basis functions supported in the region "
        "(residual " + std::to_string(out.projection_residual) + ")");
  }

  for (double t : times) {
    if (t < 0) throw NegativeTimeError("negative evolution time");
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (int k : cols) u += std::exp(dec.lambda[k] * t) * c(k) * dec.phi.col(k);
    double outside = 0;
    for (int x = 0; x < n; ++x) {
      if (!r.member[x]) outside = std::max(outside, std::abs(u(x)));
    }
    out.times.push_back(t);
    out.confinement.push_back(outside);
    out.boundary.push_back(condition == BoundaryCondition::Dirichlet
                               ? check_dirichlet(op, r, u, tol)
                               : check_von_neumann(op, r, u, tol));
    out.values.push_back(std::move(u));
  }
  return out;
}

}  // namespace ulap
