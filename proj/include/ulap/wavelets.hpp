#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ulap/errors.hpp"
#include "ulap/model.hpp"

// Wavelet bases on tree boundaries.  A wavelet is anchored at an internal
// vertex A with children c_0..c_{m-1}: it is constant on each child, has
// mean zero against the measure, and vanishes outside A.  When the children
// carry equal masses the characters
//   psi_j(c_k) = exp(2 pi i j k / m) / sqrt(mu(A)),  j = 1..m-1,
// give an orthonormal family; otherwise a deterministic Gram-Schmidt run
// over the mean-zero child space replaces them.  Together with one constant
// function per component the wavelets span all leaf functions, and each
// anchor's mean-zero child space is an eigenspace of the operator.

namespace ulap {

struct Wavelet {
  int comp = 0;
  int anchor = 0;  // vertex id in tree 0 of the component
  int index = 1;   // 1..m-1
  bool character = false;
  std::vector<int> child_vertices;
  std::vector<std::complex<double>> child_values;
};

namespace detail {

inline bool equal_child_masses(const Component& c, int anchor) {
  const TreeVertex& tv = c.trees[0].vertex(anchor);
  for (std::size_t k = 1; k < tv.children.size(); ++k) {
    if (c.masses[0].mass[tv.children[k]] != c.masses[0].mass[tv.children[0]]) {
      return false;
    }
  }
  return true;
}

// Deterministic Gram-Schmidt of the mean-zero child space in the mu-inner
// product; returns m-1 real orthonormal child-value vectors.
inline std::vector<std::vector<double>> gram_child_basis(
    const std::vector<double>& child_mass) {
  const std::size_t m = child_mass.size();
  double total = 0;
  for (double w : child_mass) total += w;
  std::vector<std::vector<double>> basis;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    // Indicator of child k, centred to mean zero.
    std::vector<double> v(m, -child_mass[k] / total);
    v[k] += 1.0;
    for (const auto& prev : basis) {
      double proj = 0;
      for (std::size_t a = 0; a < m; ++a) proj += v[a] * prev[a] * child_mass[a];
      for (std::size_t a = 0; a < m; ++a) v[a] -= proj * prev[a];
    }
    double norm2 = 0;
    for (std::size_t a = 0; a < m; ++a) norm2 += v[a] * v[a] * child_mass[a];
    if (!(norm2 > 0)) throw DegenerateVertexError("degenerate child masses");
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace detail

// All wavelets of one component (single orbit tree), ordered by anchor id.
inline std::vector<Wavelet> wavelet_basis(const Model& model, int comp) {
  model.require_single_tree();
  const Component& c = model.component(comp);
  const OrbitTree& tree = c.trees[0];
  std::vector<Wavelet> out;
  for (int v = 0; v < tree.n_vertices(); ++v) {
    const TreeVertex& tv = tree.vertex(v);
    const std::size_t m = tv.children.size();
    if (m < 2) continue;
    const double mu_anchor = c.masses[0].mass[v].to_rational().get_d();
    if (detail::equal_child_masses(c, v)) {
      const double s = 1.0 / std::sqrt(mu_anchor);
      for (std::size_t j = 1; j < m; ++j) {
        Wavelet w;
        w.comp = comp;
        w.anchor = v;
        w.index = static_cast<int>(j);
        w.character = true;
        w.child_vertices = tv.children;
        for (std::size_t k = 0; k < m; ++k) {
          const std::size_t r = j * k % m;
          if (r == 0) {
            w.child_values.emplace_back(s, 0.0);
          } else if (2 * r == m) {
            // Half turn: keep the value exactly real.
            w.child_values.emplace_back(-s, 0.0);
          } else {
            const double arg =
                2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(m);
            w.child_values.push_back(std::polar(s, arg));
          }
        }
        out.push_back(std::move(w));
      }
    } else {
      std::vector<double> child_mass;
      for (int ch : tv.children) {
        child_mass.push_back(c.masses[0].mass[ch].to_rational().get_d());
      }
      const auto basis = detail::gram_child_basis(child_mass);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        Wavelet w;
        w.comp = comp;
        w.anchor = v;
        w.index = static_cast<int>(j + 1);
        w.character = false;
        w.child_vertices = tv.children;
        for (double x : basis[j]) w.child_values.emplace_back(x, 0.0);
        out.push_back(std::move(w));
      }
    }
  }
  return out;
}

// Real orthonormal basis of the anchor's mean-zero child space, used by the
// analytic decomposition (an eigenbasis of the same eigenspace the complex
// characters span).
inline std::vector<std::vector<double>> real_anchor_basis(const Model& model,
                                                          int comp, int anchor) {
  const Component& c = model.component(comp);
  const TreeVertex& tv = c.trees[0].vertex(anchor);
  if (tv.children.size() < 2) {
    throw DegenerateVertexError("anchor has fewer than two children");
  }
  std::vector<double> child_mass;
  for (int ch : tv.children) {
    child_mass.push_back(c.masses[0].mass[ch].to_rational().get_d());
  }
  return detail::gram_child_basis(child_mass);
}

// Expands child values to a global leaf vector (zero outside the anchor).
inline Eigen::VectorXcd wavelet_leaf_vector(const Model& model, const Wavelet& w) {
  const Component& c = model.component(w.comp);
  const OrbitTree& tree = c.trees[0];
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(model.n_leaves());
  for (int b = 0; b < c.n_leaves; ++b) {
    const Leaf& lf = model.leaf(c.leaf_offset + b);
    // Walk up from the leaf to see whether it sits under one of the children.
    int v = lf.vertex;
    while (v >= 0) {
      const int parent = tree.vertex(v).parent;
      if (parent == w.anchor) {
        for (std::size_t k = 0; k < w.child_vertices.size(); ++k) {
          if (w.child_vertices[k] == v) {
            out[c.leaf_offset + b] = w.child_values[k];
            break;
          }
        }
        break;
      }
      v = parent;
    }
  }
  return out;
}

// Leaf ids (global) below a vertex of the component's tree.
inline std::vector<int> leaves_under(const Model& model, int comp, int vertex) {
  const Component& c = model.component(comp);
  const OrbitTree& tree = c.trees[0];
  std::vector<int> out;
  for (int b = 0; b < c.n_leaves; ++b) {
    int v = model.leaf(c.leaf_offset + b).vertex;
    while (v >= 0 && v != vertex) v = tree.vertex(v).parent;
    if (v == vertex) out.push_back(c.leaf_offset + b);
  }
  return out;
}

// Values of a wavelet pushed through a group translate: the translated
// wavelet lives on gamma(anchor) with the same child values.
struct TranslatedWavelet {
  std::vector<Rational> centers;  // image centers of the anchor children
  std::vector<std::complex<double>> values;
};

inline TranslatedWavelet extend_wavelet(const Model& model, const Wavelet& w,
                                        const Word& gamma) {
  const Component& c = model.component(w.comp);
  const Mobius m = c.group.word_mobius(gamma);
  TranslatedWavelet out;
  for (std::size_t k = 0; k < w.child_vertices.size(); ++k) {
    out.centers.push_back(m.apply_finite(c.ktrees[0].vertex(w.child_vertices[k]).center));
    out.values.push_back(w.child_values[k]);
  }
  return out;
}

}  // namespace ulap
