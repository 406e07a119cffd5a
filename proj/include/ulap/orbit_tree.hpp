#pragma once

#include <string>
#include <vector>

#include "ulap/disc.hpp"
#include "ulap/errors.hpp"
#include "ulap/mobius.hpp"
#include "ulap/padic.hpp"
#include "ulap/rational.hpp"

// Rooted disc trees.  A vertex is a closed disc D(center, p^rho); its
// children partition it into the p sub-discs of radius p^(rho-1), whose
// centers are center + k p^(-rho) for k = 0..p-1 (note |p^(-rho)|_p = p^rho,
// so distinct children sit at pairwise distance exactly p^rho).  Leaves of
// depth D form the partition on which operators are assembled; the boundary
// of the tree carries the measure.

namespace ulap {

struct TreeVertex {
  int parent = -1;
  std::vector<int> children;
  Rational center;
  Rational rho;
  int depth = 0;
};

class OrbitTree {
 public:
  // Canonical p-regular refinement of D(center, p^rho_root) to the given depth.
  static OrbitTree regular(long prime, const Rational& center, long rho_root,
                           int depth) {
    if (depth < 0) throw DepthError("tree depth must be nonnegative");
    if (depth > 24) throw DepthError("tree depth " + std::to_string(depth) + " too large");
    OrbitTree t;
    t.prime_ = prime;
    t.depth_ = depth;
    t.vertices_.push_back(TreeVertex{-1, {}, center, Rational(rho_root), 0});
    int level_begin = 0;
    for (int d = 0; d < depth; ++d) {
      const int level_end = static_cast<int>(t.vertices_.size());
      for (int v = level_begin; v < level_end; ++v) {
        const Rational step = pow_int(Rational(prime), -t.vertices_[v].rho.get_num().get_si());
        for (long k = 0; k < prime; ++k) {
          TreeVertex child;
          child.parent = v;
          child.center = t.vertices_[v].center + Rational(k) * step;
          child.rho = t.vertices_[v].rho - 1;
          child.depth = d + 1;
          t.vertices_[v].children.push_back(static_cast<int>(t.vertices_.size()));
          t.vertices_.push_back(std::move(child));
        }
      }
      level_begin = level_end;
    }
    for (int v = 0; v < static_cast<int>(t.vertices_.size()); ++v) {
      if (t.vertices_[v].children.empty()) t.leaves_.push_back(v);
    }
    return t;
  }

  long prime() const { return prime_; }
  int depth() const { return depth_; }
  int root() const { return 0; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  const TreeVertex& vertex(int v) const { return vertices_.at(v); }
  const std::vector<int>& leaves() const { return leaves_; }
  bool is_leaf(int v) const { return vertices_.at(v).children.empty(); }

  Disc vertex_disc(int v) const {
    const TreeVertex& tv = vertices_.at(v);
    return Disc{tv.center, tv.rho, prime_};
  }

  PAbs vertex_diameter(int v) const {
    return PAbs::power(prime_, vertices_.at(v).rho);
  }

  // Deepest common ancestor.
  int join(int u, int v) const {
    while (u != v) {
      if (vertices_.at(u).depth >= vertices_.at(v).depth) {
        u = vertices_.at(u).parent;
      } else {
        v = vertices_.at(v).parent;
      }
      if (u < 0 || v < 0) throw PreconditionError("join walked past the root");
    }
    return u;
  }

  // diam(join(u, v)); zero for u = v.
  PAbs vertex_distance(int u, int v) const {
    if (u == v) return PAbs::zero(prime_);
    return vertex_diameter(join(u, v));
  }

  // Rigid image under a Moebius map with pole outside the root disc.  The
  // combinatorial structure is preserved; centers move, rho shifts by the
  // constant scaling exponent.
  OrbitTree transformed(const Mobius& m) const {
    OrbitTree t = *this;
    const Disc root_disc = vertex_disc(0);
    const ProjectivePoint pole = m.pole();
    if (!pole.at_infinity && root_disc.contains_point(pole.z)) {
      throw PoleError("frame pole lies in tree root " + root_disc.str());
    }
    for (TreeVertex& tv : t.vertices_) {
      const PAbs scale = m.derivative_abs(tv.center);
      tv.center = m.apply_finite(tv.center);
      tv.rho = tv.rho + scale.exponent();
    }
    return t;
  }

  // Exact structural checks: radii shrink along edges, children lie in the
  // parent and sit at pairwise distance equal to the parent diameter, leaf
  // center differences reproduce the tree metric.
  void validate_geometry() const {
    for (int v = 0; v < n_vertices(); ++v) {
      const TreeVertex& tv = vertices_[v];
      const PAbs diam = vertex_diameter(v);
      for (std::size_t i = 0; i < tv.children.size(); ++i) {
        const TreeVertex& ci = vertices_[tv.children[i]];
        if (!(ci.rho < tv.rho)) {
          throw DegenerateVertexError("child radius does not shrink at vertex " +
                                      std::to_string(v));
        }
        if (dist_p(ci.center, tv.center, prime_) > diam) {
          throw DegenerateVertexError("child escapes parent disc at vertex " +
                                      std::to_string(v));
        }
        for (std::size_t j = i + 1; j < tv.children.size(); ++j) {
          const TreeVertex& cj = vertices_[tv.children[j]];
          if (dist_p(ci.center, cj.center, prime_) != diam) {
            throw DegenerateVertexError("children of vertex " + std::to_string(v) +
                                        " are not at full diameter");
          }
        }
      }
    }
    for (std::size_t a = 0; a < leaves_.size(); ++a) {
      for (std::size_t b = a + 1; b < leaves_.size(); ++b) {
        const PAbs by_centers = dist_p(vertices_[leaves_[a]].center,
                                       vertices_[leaves_[b]].center, prime_);
        if (by_centers != vertex_distance(leaves_[a], leaves_[b])) {
          throw DegenerateVertexError("tree metric disagrees with center distances");
        }
      }
    }
  }

 private:
  long prime_ = 0;
  int depth_ = 0;
  std::vector<TreeVertex> vertices_;
  std::vector<int> leaves_;
};

}  // namespace ulap
