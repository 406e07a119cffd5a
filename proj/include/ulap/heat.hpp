#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "ulap/errors.hpp"
#include "ulap/model.hpp"
#include "ulap/spectral.hpp"
#include "ulap/wavelets.hpp"

// Heat semigroup e^{tL} on leaf functions.  Two routes produce a
// mu-orthonormal eigendecomposition: the analytic route assembles real
// anchor bases with their closed-form eigenvalues plus the constant block,
// the matrix route symmetrises D^(1/2) M D^(-1/2) and solves numerically.
// The Cauchy solution is u(t) = sum_k e^{lambda_k t} <u0, phi_k>_mu phi_k,
// the transition kernel P_t(x, y) = sum_k e^{lambda_k t} phi_k(x) phi_k(y)
// mu(y), and the pointwise heat kernel drops the mu factor.  On the
// diagonal the kernel is a sum of shells over anchor depths; for small t
// the shells grow and the partition-level sum diagnoses divergence.

namespace ulap {

struct Decomposition {
  std::vector<double> lambda;
  Eigen::MatrixXd phi;           // columns, mu-orthonormal
  std::vector<double> mu;
  std::vector<int> col_comp;     // component, -1 for constant block columns
  std::vector<int> col_anchor;   // anchor vertex id, or block index
  std::vector<double> col_tail;  // eigenvalue truncation bound
  bool analytic = false;
};

inline Decomposition analytic_decomposition(const Model& model) {
  model.require_single_tree();
  const int n = model.n_leaves();
  Decomposition dec;
  dec.analytic = true;
  dec.phi = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) dec.mu.push_back(model.leaf(a).mass);
  int col = 0;
  for (int i = 0; i < model.n_components(); ++i) {
    const Component& c = model.component(i);
    const OrbitTree& tree = c.trees[0];
    const ZEigenvalue z = eigenvalue_Z(model, i);
    bool checked = false;
    for (int v = 0; v < tree.n_vertices(); ++v) {
      if (tree.is_leaf(v)) continue;
      const EigenvalueInfo ev =
          eigenvalue_delta(model, i, v, model.spec().lambda_mode, !checked);
      checked = true;
      const auto basis = real_anchor_basis(model, i, v);
      const TreeVertex& tv = tree.vertex(v);
      for (const auto& child_values : basis) {
        for (std::size_t k = 0; k < tv.children.size(); ++k) {
          for (int leaf : leaves_under(model, i, tv.children[k])) {
            dec.phi(leaf, col) = child_values[k];
          }
        }
        dec.lambda.push_back(ev.value + z.truncated);
        dec.col_comp.push_back(i);
        dec.col_anchor.push_back(v);
        dec.col_tail.push_back(ev.tail + z.tail);
        ++col;
      }
    }
  }
  const ConstBlock cb = constant_block(model);
  for (int k = 0; k < cb.evals.size(); ++k) {
    for (int i = 0; i < model.n_components(); ++i) {
      const Component& c = model.component(i);
      for (int b = 0; b < c.n_leaves; ++b) {
        dec.phi(c.leaf_offset + b, col) = cb.evecs(i, k);
      }
    }
    dec.lambda.push_back(cb.evals(k));
    dec.col_comp.push_back(-1);
    dec.col_anchor.push_back(k);
    dec.col_tail.push_back(cb.tail);
    ++col;
  }
  if (col != n) {
    throw PreconditionError("analytic basis is not complete: " +
                            std::to_string(col) + " of " + std::to_string(n));
  }
  return dec;
}

inline Decomposition matrix_decomposition(const Model& model, const Operator& op) {
  const int n = static_cast<int>(op.mu.size());
  Eigen::MatrixXd B(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      B(a, b) = std::sqrt(op.mu[a]) * op.M(a, b) / std::sqrt(op.mu[b]);
    }
  }
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
  if (solver.info() != Eigen::Success) {
    throw PreconditionError("eigensolver failed on the symmetrised generator");
  }
  Decomposition dec;
  dec.analytic = false;
  dec.phi = solver.eigenvectors();
  for (int a = 0; a < n; ++a) {
    for (int k = 0; k < n; ++k) dec.phi(a, k) /= std::sqrt(op.mu[a]);
  }
  for (int k = 0; k < n; ++k) {
    dec.lambda.push_back(solver.eigenvalues()(k));
    dec.col_comp.push_back(-2);
    dec.col_anchor.push_back(-2);
    dec.col_tail.push_back(op.row_tail.empty() ? 0.0 : op.row_tail[0]);
  }
  dec.mu = op.mu;
  return dec;
}

// Spectral coefficients <u, phi_k>_mu.
inline Eigen::VectorXd spectral_coefficients(const Decomposition& dec,
                                             const Eigen::VectorXd& u) {
  const Eigen::VectorXd mu =
      Eigen::Map<const Eigen::VectorXd>(dec.mu.data(), dec.mu.size());
  return dec.phi.transpose() * (u.array() * mu.array()).matrix();
}

inline Eigen::VectorXd evolve(const Decomposition& dec, const Eigen::VectorXd& u0,
                              double t) {
  if (t < 0) throw NegativeTimeError("negative evolution time");
  Eigen::VectorXd c = spectral_coefficients(dec, u0);
  for (int k = 0; k < c.size(); ++k) c(k) *= std::exp(dec.lambda[k] * t);
  return dec.phi * c;
}

// Markov transition matrix P_t with rows indexed by the starting leaf.
inline Eigen::MatrixXd transition_matrix(const Decomposition& dec, double t) {
  if (t < 0) throw NegativeTimeError("negative evolution time");
  const int n = static_cast<int>(dec.mu.size());
  Eigen::VectorXd e(n);
  for (int k = 0; k < n; ++k) e(k) = std::exp(dec.lambda[k] * t);
  Eigen::MatrixXd P = dec.phi * e.asDiagonal() * dec.phi.transpose();
  for (int y = 0; y < n; ++y) P.col(y) *= dec.mu[y];
  return P;
}

struct FellerCheck {
  double min_entry = 0;
  double max_row_sum_error = 0;
  bool ok = false;
};

inline FellerCheck check_feller(const Eigen::MatrixXd& P, double tol = 1e-8) {
  FellerCheck out;
  out.min_entry = P.minCoeff();
  out.max_row_sum_error = (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
  out.ok = out.min_entry >= -tol && out.max_row_sum_error <= tol;
  return out;
}

struct HeatKernelValue {
  double value = 0;
  bool diverged = false;
  std::vector<double> shells;  // per anchor depth, diagonal evaluation only
};

// Pointwise heat kernel p_t(x, y) = sum_k e^{lambda_k t} phi_k(x) phi_k(y).
// Only columns whose anchor contains both points contribute: the constant
// block always, wavelet anchors exactly those above join(x, y).  On the
// diagonal the anchors along the full root-to-leaf path contribute one shell
// per depth; the kernel of the unpartitioned boundary diverges when the
// shells grow, which the trailing shell ratios detect.
inline HeatKernelValue heat_kernel(const Model& model, const Decomposition& dec,
                                   double t, int x, int y) {
  if (!dec.analytic) {
    throw PreconditionError("heat_kernel needs the analytic decomposition");
  }
  if (t < 0) throw NegativeTimeError("negative evolution time");
  HeatKernelValue out;
  const Leaf& lx = model.leaf(x);
  const Leaf& ly = model.leaf(y);
  double const_part = 0;
  for (std::size_t k = 0; k < dec.lambda.size(); ++k) {
    if (dec.col_comp[k] == -1) {
      const_part += std::exp(dec.lambda[k] * t) * dec.phi(x, k) * dec.phi(y, k);
    }
  }
  out.value = const_part;
  if (lx.comp != ly.comp) return out;

  const Component& c = model.component(lx.comp);
  const OrbitTree& tree = c.trees[0];
  const int top = tree.join(lx.vertex, ly.vertex);
  // Anchors from the join upward to the root.
  std::vector<int> path;
  for (int v = (x == y) ? tree.vertex(lx.vertex).parent : top; v >= 0;
       v = tree.vertex(v).parent) {
    path.push_back(v);
  }
  std::vector<double> shell(path.size(), 0.0);
  for (std::size_t k = 0; k < dec.lambda.size(); ++k) {
    if (dec.col_comp[k] != lx.comp) continue;
    for (std::size_t d = 0; d < path.size(); ++d) {
      if (dec.col_anchor[k] == path[d]) {
        shell[d] += std::exp(dec.lambda[k] * t) * dec.phi(x, k) * dec.phi(y, k);
        break;
      }
    }
  }
  for (double s : shell) out.value += s;
  if (x == y) {
    // path runs leaf-parent .. root; report shells root-first and test the
    // trailing shell ratios for growth.
    out.shells.assign(shell.rbegin(), shell.rend());
    const std::size_t m = out.shells.size();
    if (m >= 2) {
      const std::size_t probe = std::min<std::size_t>(3, m - 1);
      for (std::size_t i = m - probe; i < m; ++i) {
        if (out.shells[i - 1] > 0 && out.shells[i] >= out.shells[i - 1]) {
          out.diverged = true;
        }
      }
    }
  }
  return out;
}

}  // namespace ulap
