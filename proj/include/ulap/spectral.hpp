#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ulap/errors.hpp"
#include "ulap/model.hpp"
#include "ulap/padic.hpp"
#include "ulap/rational.hpp"

// Spectral layer: explicit wavelet eigenvalues, the coupling eigenvalue, the
// assembled jump generator on leaf functions, and the full spectrum.
//
// For a wavelet anchored at A the eigenvalue in operator form is
//   lambda(A) = -mu(F)^-1 [ sum_{B not under A} d(A,B)^-a mu(B)
//                           + diam(A)^-a mu(A)
//                           + sum_{1<=l(g)<=L} p^-al sum_{all B} |x - g x_B|^-a mu(B) ],
// truncated at the same L as the matrix, so M psi = lambda psi holds to
// rounding.  The display form replaces the translate structure by
// per-translate off-support integrals plus mu(A)^(1-a).  The truncation tail
// is bounded by tail(series) * delta^-a with delta the translate separation.

namespace ulap {

struct EigenvalueInfo {
  double value = 0;
  double tail = 0;
  bool exact = false;
  Rational value_q;
};

namespace detail {

// Translate part sum_B sum_{l(g)>=1} p^-al |rep - g x_B|^-a mu(B), evaluated
// literally at a given reference point.
inline void translate_mass_sum(const Model& model, int comp, const Rational& rep,
                               double& out, Rational& out_q, bool exact) {
  const Component& c = model.component(comp);
  out = 0;
  out_q = 0;
  for (int b = 0; b < c.n_leaves; ++b) {
    const Leaf& lb = model.leaf(c.leaf_offset + b);
    for (const Translate& tr : c.translates) {
      const Rational image = tr.map.apply_finite(lb.kcenter);
      const PAbs d = dist_p(rep, image, model.prime());
      if (d.is_zero()) throw ZeroDistanceError("translate hits the reference point");
      const PAbs term =
          PAbs::power(model.prime(),
                      -c.alpha * Rational(static_cast<long>(tr.length))) *
          d.pow(-c.alpha);
      if (exact) {
        out_q += term.to_rational() * lb.mass_q;
      } else {
        out += term.to_double() * lb.mass;
      }
    }
  }
  if (exact) out = out_q.get_d();
}

// Cached component-wide translate part, from the precomputed per-leaf sums
// anchored at the pulled tree root center.
inline void translate_mass_total(const Component& c, const Model& model,
                                 double& out, Rational& out_q, bool exact) {
  out = 0;
  out_q = 0;
  for (int b = 0; b < c.n_leaves; ++b) {
    const Leaf& lb = model.leaf(c.leaf_offset + b);
    const KernelCoeff& kc = c.translate_kernel.at(b);
    if (exact) {
      out_q += kc.value_q * lb.mass_q;
    } else {
      out += kc.value * lb.mass;
    }
  }
  if (exact) out = out_q.get_d();
}

}  // namespace detail

// Eigenvalue of the mean-zero child space anchored at the given internal
// vertex.  check_x re-evaluates the translate part at two distinct leaf
// representatives and demands exact (or 1e-10 relative) agreement.
inline EigenvalueInfo eigenvalue_delta(const Model& model, int comp, int anchor,
                                       LambdaMode mode, bool check_x = true) {
  model.require_single_tree();
  const Component& c = model.component(comp);
  const OrbitTree& tree = c.trees[0];
  if (tree.is_leaf(anchor)) {
    throw DegenerateVertexError("anchor " + std::to_string(anchor) + " is a leaf");
  }
  model.series_alpha(comp);  // convergence precondition
  const bool exact = c.alpha_integral;
  const long prime = model.prime();
  const OrbitTree& ktree = c.ktrees[0];

  // Off-support identity part: distances are tree distances in the pulled
  // geometry, constant over the anchor.
  double off = 0;
  Rational off_q(0);
  Rational under_mass_q(0);
  double trans_under = 0;
  Rational trans_under_q(0);
  for (int b = 0; b < c.n_leaves; ++b) {
    const Leaf& lb = model.leaf(c.leaf_offset + b);
    const int j = ktree.join(anchor, lb.vertex);
    if (j == anchor) {
      under_mass_q += lb.mass_q;
      const KernelCoeff& kc = c.translate_kernel.at(b);
      if (exact) trans_under_q += kc.value_q * lb.mass_q;
      else trans_under += kc.value * lb.mass;
      continue;
    }
    const PAbs d = ktree.vertex_diameter(j).pow(-c.alpha);
    if (exact) off_q += d.to_rational() * lb.mass_q;
    else off += d.to_double() * lb.mass;
  }

  double trans_total = 0;
  Rational trans_total_q(0);
  detail::translate_mass_total(c, model, trans_total, trans_total_q, exact);

  if (check_x && !c.translates.empty()) {
    // Literal re-evaluation at two leaf representatives.
    const Rational rep1 = model.leaf(c.leaf_offset).kcenter;
    const Rational rep2 = model.leaf(c.leaf_offset + c.n_leaves - 1).kcenter;
    double t1 = 0, t2 = 0;
    Rational t1q(0), t2q(0);
    detail::translate_mass_sum(model, comp, rep1, t1, t1q, exact);
    detail::translate_mass_sum(model, comp, rep2, t2, t2q, exact);
    bool ok;
    if (exact) {
      ok = (t1q == t2q) && (t1q == trans_total_q);
    } else {
      const double scale = std::max({1.0, std::abs(t1), std::abs(t2)});
      ok = std::abs(t1 - t2) <= 1e-10 * scale &&
           std::abs(t1 - trans_total) <= 1e-10 * scale;
    }
    if (!ok) {
      throw XDependenceError("translate sum depends on the evaluation point at "
                             "anchor " + std::to_string(anchor));
    }
  }

  EigenvalueInfo info;
  info.exact = exact;
  const PAbs diam_pow = ktree.vertex_diameter(anchor).pow(-c.alpha);
  if (mode == LambdaMode::Operator) {
    if (exact) {
      const Rational total = off_q + diam_pow.to_rational() * under_mass_q +
                             trans_total_q;
      info.value_q = -total / c.mu_total_q;
      info.value = info.value_q.get_d();
    } else {
      const double total = off + diam_pow.to_double() * under_mass_q.get_d() +
                           trans_total;
      info.value = -total / c.mu_total;
    }
    info.tail = model.kernel_tail(comp);
  } else {
    // Display form: off-support part for every translate, on-support
    // mu(A)^(1-a) per translate, summed against the truncated series.
    const PAbs mu_anchor = PAbs::of(under_mass_q, prime);
    const LengthSeries& s = model.series_alpha(comp);
    if (exact) {
      const Rational on = mu_anchor.pow(1 - c.alpha).to_rational();
      const Rational total =
          off_q + (trans_total_q - trans_under_q) + s.truncated_q * on;
      info.value_q = -total / c.mu_total_q;
      info.value = info.value_q.get_d();
    } else {
      const double on = mu_anchor.pow(1 - c.alpha).to_double();
      info.value =
          -(off + (trans_total - trans_under) + s.truncated * on) / c.mu_total;
    }
    info.tail = model.kernel_tail(comp) +
                s.tail * mu_anchor.pow(1 - c.alpha).to_double() / c.mu_total;
  }
  return info;
}

inline EigenvalueInfo eigenvalue_delta(const Model& model, int comp, int anchor) {
  return eigenvalue_delta(model, comp, anchor, model.spec().lambda_mode);
}

// Coupling eigenvalue of functions supported on component i with mean zero,
// and of the constant block: -sum_{j != i} w_ij S_i S_j mu(F_j), with the
// series either truncated at L (matching the matrix) or in closed form.
struct ZEigenvalue {
  double truncated = 0;
  double full = 0;
  double tail = 0;
  bool exact = false;
  Rational truncated_q, full_q;
};

inline ZEigenvalue eigenvalue_Z(const Model& model, int comp) {
  ZEigenvalue out;
  out.exact = is_integer(model.effective_alpha_z());
  Rational trunc_q(0), full_q(0);
  double trunc = 0, full = 0;
  for (int j = 0; j < model.n_components(); ++j) {
    if (j == comp) continue;
    const Rational w = model.weight(comp, j);
    if (w == 0) continue;
    const LengthSeries& si = model.series_z(comp);
    const LengthSeries& sj = model.series_z(j);
    const Component& cj = model.component(j);
    if (out.exact) {
      trunc_q += w * si.truncated_q * sj.truncated_q * cj.mu_total_q;
      full_q += w * si.full_q * sj.full_q * cj.mu_total_q;
    } else {
      trunc += w.get_d() * si.truncated * sj.truncated * cj.mu_total;
      full += w.get_d() * si.full * sj.full * cj.mu_total;
    }
  }
  if (out.exact) {
    out.truncated_q = -trunc_q;
    out.full_q = -full_q;
    out.truncated = out.truncated_q.get_d();
    out.full = out.full_q.get_d();
  } else {
    out.truncated = -trunc;
    out.full = -full;
  }
  out.tail = std::abs(out.full - out.truncated);
  return out;
}

// Literal two-point kernel p^(-a l(red(beta^-1 gamma))) |beta x - gamma y|^-a,
// optionally normalised by mu(F).
inline double kernel_H(const Model& model, int comp, const Word& beta, int leaf_x,
                       const Word& gamma, int leaf_y, bool normalised = true) {
  const Component& c = model.component(comp);
  const Leaf& lx = model.leaf(leaf_x);
  const Leaf& ly = model.leaf(leaf_y);
  if (lx.comp != comp || ly.comp != comp) {
    throw PreconditionError("kernel_H arguments must lie in the given component");
  }
  const Word rel = beta.inverse().concat(gamma);
  const Rational bx = c.group.word_mobius(beta).apply_finite(lx.kcenter);
  const Rational gy = c.group.word_mobius(gamma).apply_finite(ly.kcenter);
  const PAbs d = dist_p(bx, gy, model.prime());
  if (d.is_zero()) {
    throw ZeroDistanceError("kernel_H evaluated at coinciding points");
  }
  const PAbs val = PAbs::power(model.prime(),
                               -c.alpha * Rational(static_cast<long>(rel.length()))) *
                   d.pow(-c.alpha);
  double out = val.to_double();
  if (normalised) out /= c.mu_total;
  return out;
}

// Assembled jump generator on leaf functions: row-sum-zero matrix with
//   M[A][B] = mu(F_i)^-1 (d(A,B)^-a + translate_kernel(B)) mu(B)   same comp,
//   M[A][B] = w_ij S_i S_j mu(B)                                   cross comp,
// where the series factors are truncated at the same L as the eigenvalue
// formulas.  The exact path is populated when every exponent is integral.
struct Operator {
  Eigen::MatrixXd M;
  std::vector<double> mu;
  std::vector<Rational> mu_q;
  std::vector<double> row_tail;
  bool exact = false;
  std::vector<std::vector<Rational>> M_q;
};

inline Operator assemble_matrix(const Model& model, int threads = 1) {
  model.require_single_tree();
  const int n = model.n_leaves();
  Operator op;
  op.M = Eigen::MatrixXd::Zero(n, n);
  op.exact = true;
  for (int i = 0; i < model.n_components(); ++i) {
    model.series_alpha(i);  // convergence precondition per component
    if (!model.component(i).alpha_integral) op.exact = false;
  }
  if (model.coupled() && !is_integer(model.effective_alpha_z())) op.exact = false;
  for (int a = 0; a < n; ++a) {
    op.mu_q.push_back(model.leaf(a).mass_q);
    op.mu.push_back(model.leaf(a).mass);
  }
  if (op.exact) op.M_q.assign(n, std::vector<Rational>(n, Rational(0)));

  const auto fill_row = [&](int a) {
    const Leaf& la = model.leaf(a);
    const Component& ca = model.component(la.comp);
    Rational diag_q(0);
    double diag = 0;
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const Leaf& lb = model.leaf(b);
      Rational e_q(0);
      double e = 0;
      if (lb.comp == la.comp) {
        const PAbs d = model.leaf_pair_distance(a, b).pow(-ca.alpha);
        const KernelCoeff& kc = ca.translate_kernel.at(b - ca.leaf_offset);
        if (op.exact) {
          e_q = (d.to_rational() + kc.value_q) * lb.mass_q / ca.mu_total_q;
          e = e_q.get_d();
        } else {
          e = (d.to_double() + kc.value) * lb.mass / ca.mu_total;
        }
      } else {
        const Rational w = model.weight(la.comp, lb.comp);
        if (w != 0) {
          const LengthSeries& si = model.series_z(la.comp);
          const LengthSeries& sj = model.series_z(lb.comp);
          if (op.exact) {
            e_q = w * si.truncated_q * sj.truncated_q * lb.mass_q;
            e = e_q.get_d();
          } else {
            e = w.get_d() * si.truncated * sj.truncated * lb.mass;
          }
        }
      }
      op.M(a, b) = e;
      diag += e;
      if (op.exact) {
        op.M_q[a][b] = e_q;
        diag_q += e_q;
      }
    }
    op.M(a, a) = -diag;
    if (op.exact) {
      op.M_q[a][a] = -diag_q;
      op.M(a, a) = op.M_q[a][a].get_d();
    }
  };

  if (threads <= 1 || n < 128) {
    for (int a = 0; a < n; ++a) fill_row(a);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int a = next.fetch_add(1); a < n; a = next.fetch_add(1)) fill_row(a);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (int a = 0; a < n; ++a) {
    const Leaf& la = model.leaf(a);
    double tail = model.kernel_tail(la.comp);
    for (int j = 0; j < model.n_components(); ++j) {
      if (j == la.comp) continue;
      const Rational w = model.weight(la.comp, j);
      if (w == 0) continue;
      const LengthSeries& si = model.series_z(la.comp);
      const LengthSeries& sj = model.series_z(j);
      tail += w.get_d() * (si.full * sj.full - si.truncated * sj.truncated) *
              model.component(j).mu_total;
    }
    op.row_tail.push_back(tail);
  }
  return op;
}

// Detailed-balance residual max |mu_a M(a,b) - mu_b M(b,a)|; the generator is
// reversible for the boundary measure, so this is a pure rounding check.
inline double reversibility_residual(const Operator& op) {
  double worst = 0;
  const int n = static_cast<int>(op.mu.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      worst = std::max(worst,
                       std::abs(op.mu[a] * op.M(a, b) - op.mu[b] * op.M(b, a)));
    }
  }
  return worst;
}

// Constant block: the N x N generator on component indicators,
// Q[i][j] = w_ij S_i S_j mu(F_j) off the diagonal, row sums zero.  It is
// reversible for the masses mu(F_i); eigenpairs come from the symmetrised
// D^(1/2) Q D^(-1/2).
struct ConstBlock {
  Eigen::MatrixXd Q;
  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;  // columns, mu-orthonormal leaf-free representation
  std::vector<double> muF;
  double tail = 0;
};

inline ConstBlock constant_block(const Model& model) {
  const int nc = model.n_components();
  ConstBlock cb;
  cb.Q = Eigen::MatrixXd::Zero(nc, nc);
  for (int i = 0; i < nc; ++i) cb.muF.push_back(model.component(i).mu_total);
  double tail = 0;
  for (int i = 0; i < nc; ++i) {
    double diag = 0;
    for (int j = 0; j < nc; ++j) {
      if (j == i) continue;
      const Rational w = model.weight(i, j);
      if (w == 0) continue;
      const LengthSeries& si = model.series_z(i);
      const LengthSeries& sj = model.series_z(j);
      cb.Q(i, j) = w.get_d() * si.truncated * sj.truncated * cb.muF[j];
      diag += cb.Q(i, j);
      tail = std::max(tail, w.get_d() * (si.full * sj.full - si.truncated * sj.truncated) *
                                cb.muF[j]);
    }
    cb.Q(i, i) = -diag;
  }
  cb.tail = 2.0 * tail * nc;
  Eigen::MatrixXd B(nc, nc);
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nc; ++j) {
      B(i, j) = std::sqrt(cb.muF[i]) * cb.Q(i, j) / std::sqrt(cb.muF[j]);
    }
  }
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
  cb.evals = solver.eigenvalues();
  cb.evecs = solver.eigenvectors();
  for (int j = 0; j < nc; ++j) {
    for (int i = 0; i < nc; ++i) cb.evecs(i, j) /= std::sqrt(cb.muF[i]);
  }
  return cb;
}

struct SpectrumEntry {
  int comp = 0;    // -1 for the constant block
  int anchor = 0;  // vertex id, or block index for the constant block
  int depth = 0;   // -1 for the constant block
  double value = 0;
  double tail = 0;
  bool exact = false;
  Rational value_q;
  long multiplicity = 1;
};

struct Spectrum {
  std::vector<SpectrumEntry> entries;  // one entry per anchor and per block index
  ConstBlock const_block;
};

// Wavelet eigenvalues for every anchor (shifted by the coupling eigenvalue of
// the component) plus the constant-block eigenvalues.
inline Spectrum full_spectrum(const Model& model) {
  model.require_single_tree();
  Spectrum out;
  for (int i = 0; i < model.n_components(); ++i) {
    const Component& c = model.component(i);
    const OrbitTree& tree = c.trees[0];
    const ZEigenvalue z = eigenvalue_Z(model, i);
    bool checked = false;
    for (int v = 0; v < tree.n_vertices(); ++v) {
      if (tree.is_leaf(v)) continue;
      EigenvalueInfo ev =
          eigenvalue_delta(model, i, v, model.spec().lambda_mode, !checked);
      checked = true;
      SpectrumEntry e;
      e.comp = i;
      e.anchor = v;
      e.depth = tree.vertex(v).depth;
      e.exact = ev.exact && (!model.coupled() || z.exact);
      e.value = ev.value + z.truncated;
      if (e.exact) e.value_q = ev.value_q + z.truncated_q;
      e.tail = ev.tail + z.tail;
      e.multiplicity = static_cast<long>(tree.vertex(v).children.size()) - 1;
      out.entries.push_back(std::move(e));
    }
  }
  out.const_block = constant_block(model);
  for (int k = 0; k < out.const_block.evals.size(); ++k) {
    SpectrumEntry e;
    e.comp = -1;
    e.anchor = k;
    e.depth = -1;
    e.value = out.const_block.evals(k);
    e.tail = out.const_block.tail;
    e.exact = false;
    e.multiplicity = 1;
    out.entries.push_back(std::move(e));
  }
  return out;
}

// Aggregates entries that share an eigenvalue (exact equality when both are
// exact, a 1e-12 bucket otherwise) and sorts by descending eigenvalue.
inline std::vector<SpectrumEntry> aggregate_spectrum(const Spectrum& spec) {
  std::vector<SpectrumEntry> rows;
  for (const SpectrumEntry& e : spec.entries) {
    bool merged = false;
    for (SpectrumEntry& r : rows) {
      if (r.comp == -1 || e.comp == -1) {
        if (!(r.comp == -1 && e.comp == -1)) continue;
      }
      const bool same = (r.exact && e.exact)
                            ? r.value_q == e.value_q
                            : std::abs(r.value - e.value) <= 1e-12;
      if (same) {
        r.multiplicity += e.multiplicity;
        r.tail = std::max(r.tail, e.tail);
        merged = true;
        break;
      }
    }
    if (!merged) rows.push_back(e);
  }
  std::sort(rows.begin(), rows.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.comp != b.comp) return a.comp < b.comp;
    return a.anchor < b.anchor;
  });
  return rows;
}

// Dirichlet form <-Mu, v>_mu of the generator.
inline double dirichlet_form(const Operator& op, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& v) {
  const Eigen::VectorXd mu =
      Eigen::Map<const Eigen::VectorXd>(op.mu.data(), op.mu.size());
  return (-(op.M * u).array() * v.array() * mu.array()).sum();
}

}  // namespace ulap
