#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ulap/disc.hpp"
#include "ulap/errors.hpp"
#include "ulap/measure.hpp"
#include "ulap/mobius.hpp"
#include "ulap/orbit_tree.hpp"
#include "ulap/padic.hpp"
#include "ulap/rational.hpp"
#include "ulap/schottky.hpp"
#include "ulap/words.hpp"

// Assembled experiment model.  Each component carries a Schottky group with a
// good fundamental domain, measured orbit trees inside the domain, a kernel
// exponent alpha, and an optional frame word: the shipped trees and domain are
// pulled back through the inverse frame before any kernel geometry is
// evaluated, so frame-translated configurations reproduce the reference
// spectrum exactly.  Masses are taken on the shipped (physical) discs.
//
// Translate separation: for each letter l the set of all images gamma(model)
// over reduced words gamma starting with l is contained in
//   T_l = l(tree roots) u { l(closed D_j) : j != ingress(l) },
// a finite family of interior discs.  Their minimal distance delta to the
// tree roots is positive for a valid configuration and controls every
// truncation tail through |x - gamma y| >= delta.

namespace ulap {

enum class LambdaMode { Operator, Display };

struct ComponentSpec {
  std::vector<Mobius> generators;
  std::vector<PDisc> fd_discs;
  std::vector<Disc> tree_roots;
  OmegaForm form;
  Rational alpha = 2;
  Word frame;
  bool probability_normalisation = false;
};

struct CouplingSpec {
  Rational alpha_z = 1;
  std::vector<std::vector<Rational>> weights;  // empty means fully decoupled
  bool statement_exponent = false;             // p^-(l+l') instead of p^-alpha_z(l+l')
};

struct ModelSpec {
  long prime = 2;
  std::vector<ComponentSpec> components;
  CouplingSpec coupling;
  int depth = 3;
  std::size_t l_max = 12;
  LambdaMode lambda_mode = LambdaMode::Operator;
  std::size_t word_budget = 2000000;
};

struct Translate {
  Word word;
  std::size_t length;
  Mobius map;
};

struct Leaf {
  int comp = 0;
  int tree = 0;
  int vertex = 0;
  Rational kcenter;  // pulled-back center used for all kernel distances
  Rational krho;
  Rational mass_q;
  double mass = 0;
};

// Sum over nonidentity translates of p^(-alpha l) |x_root - gamma x_B|^(-alpha),
// exact over Q when alpha is a positive integer.
struct KernelCoeff {
  double value = 0;
  Rational value_q;
  bool exact = false;
};

struct Component {
  SchottkyGroup group;
  GoodFundamentalDomain fd;   // as shipped
  GoodFundamentalDomain kfd;  // pulled through the inverse frame
  FdReport fd_report;
  std::vector<OrbitTree> trees;   // physical
  std::vector<OrbitTree> ktrees;  // pulled
  std::vector<TreeMasses> masses;
  OmegaForm form;
  Rational alpha;
  bool alpha_integral = false;
  Word frame;
  Mobius frame_map, frame_inv;
  bool probability_normalisation = false;
  std::vector<Translate> translates;
  PAbs separation;
  std::optional<LengthSeries> series_alpha;  // at alpha, absent if divergent
  std::optional<LengthSeries> series_z;      // at the effective coupling exponent
  bool sharp_condition = false;              // 2g < p^alpha
  Rational mu_total_q;
  double mu_total = 0;
  int leaf_offset = 0;
  int n_leaves = 0;
  std::vector<KernelCoeff> translate_kernel;  // per component leaf, single tree only

  Component(SchottkyGroup g, Mobius fm, Mobius fi)
      : group(std::move(g)), frame_map(std::move(fm)), frame_inv(std::move(fi)),
        separation(PAbs::zero(group.prime())) {}
};

class Model {
 public:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {
    if (spec_.prime < 2) throw ConfigError("prime must be at least 2");
    if (spec_.components.empty()) throw ConfigError("at least one component required");
    if (spec_.depth < 1) throw ConfigError("depth must be at least 1");
    if (spec_.l_max < 1) throw ConfigError("l_max must be at least 1");
    validate_weights();
    for (std::size_t i = 0; i < spec_.components.size(); ++i) {
      build_component(static_cast<int>(i));
    }
    if (n_leaves() > 4096) {
      throw ConfigError("partition has " + std::to_string(n_leaves()) +
                        " leaves, exceeding the budget of 4096");
    }
  }

  const ModelSpec& spec() const { return spec_; }
  long prime() const { return spec_.prime; }
  int n_components() const { return static_cast<int>(comps_.size()); }
  const Component& component(int i) const { return comps_.at(i); }
  int n_leaves() const { return static_cast<int>(leaves_.size()); }
  const Leaf& leaf(int i) const { return leaves_.at(i); }

  Rational effective_alpha_z() const {
    return spec_.coupling.statement_exponent ? Rational(1) : spec_.coupling.alpha_z;
  }

  bool coupled() const {
    for (const auto& row : spec_.coupling.weights) {
      for (const Rational& w : row) {
        if (w != 0) return true;
      }
    }
    return false;
  }

  Rational weight(int i, int j) const {
    if (spec_.coupling.weights.empty()) return Rational(0);
    return spec_.coupling.weights.at(i).at(j);
  }

  // Kernel distance between distinct leaves of one component, from the
  // pulled-back centers.  Throws for cross-component pairs.
  PAbs leaf_pair_distance(int a, int b) const {
    const Leaf& la = leaves_.at(a);
    const Leaf& lb = leaves_.at(b);
    if (la.comp != lb.comp) {
      throw PreconditionError("no kernel distance across components");
    }
    if (a == b) return PAbs::zero(spec_.prime);
    return dist_p(la.kcenter, lb.kcenter, spec_.prime);
  }

  // Operators act on a single orbit tree per component.
  void require_single_tree() const {
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      if (comps_[i].trees.size() != 1) {
        throw ConfigError("component " + std::to_string(i) +
                          " has " + std::to_string(comps_[i].trees.size()) +
                          " orbit trees; operator assembly requires exactly one");
      }
    }
  }

  const LengthSeries& series_alpha(int comp) const {
    const Component& c = comps_.at(comp);
    if (!c.series_alpha) {
      throw DivergenceError("length series at alpha diverges for component " +
                            std::to_string(comp));
    }
    return *c.series_alpha;
  }

  const LengthSeries& series_z(int comp) const {
    const Component& c = comps_.at(comp);
    if (!c.series_z) {
      throw DivergenceError("length series at the coupling exponent diverges "
                            "for component " + std::to_string(comp));
    }
    return *c.series_z;
  }

  // Per-row truncation tail of the translate sum, relative to mu(F): the
  // discarded words contribute at most tail(series) * delta^-alpha.
  double kernel_tail(int comp) const {
    const Component& c = comps_.at(comp);
    return series_alpha(comp).tail *
           c.separation.pow(-c.alpha).to_double();
  }

 private:
  void validate_weights() {
    auto& w = spec_.coupling.weights;
    const std::size_t n = spec_.components.size();
    if (w.empty()) {
      w.assign(n, std::vector<Rational>(n, Rational(0)));
    }
    if (w.size() != n) throw ConfigError("coupling weight matrix must be NxN");
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i].size() != n) throw ConfigError("coupling weight matrix must be NxN");
      if (w[i][i] != 0) throw ConfigError("coupling weights must vanish on the diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        if (w[i][j] < 0) throw ConfigError("coupling weights must be nonnegative");
        if (w[i][j] != w[j][i]) throw ConfigError("coupling weights must be symmetric");
      }
    }
  }

  void build_component(int idx) {
    const ComponentSpec& cs = spec_.components.at(idx);
    SchottkyGroup group(spec_.prime, cs.generators);
    Mobius frame_map = Mobius::identity(spec_.prime);
    try {
      frame_map = group.word_mobius(cs.frame);
    } catch (const PreconditionError& e) {
      throw ConfigError("component " + std::to_string(idx) + ": bad frame word: " +
                        e.what());
    }
    Component c(std::move(group), frame_map, frame_map.inverse());
    c.form = cs.form;
    c.alpha = cs.alpha;
    if (c.alpha <= 0) throw ConfigError("alpha must be positive");
    c.alpha_integral = is_integer(c.alpha);
    c.frame = cs.frame;
    c.probability_normalisation = cs.probability_normalisation;

    // Fundamental domain, shipped and pulled.
    c.fd.discs = cs.fd_discs;
    c.fd_report = validate_fundamental_domain(c.group, c.fd);
    if (!c.fd_report.ok) {
      throw ConfigError("component " + std::to_string(idx) +
                        ": fundamental domain fails: " + first_failure(c.fd_report));
    }
    if (c.frame.empty()) {
      c.kfd = c.fd;
    } else {
      for (const PDisc& d : c.fd.discs) c.kfd.discs.push_back(pdisc_image(c.frame_inv, d));
      const FdReport kreport = validate_fundamental_domain(c.group, c.kfd);
      if (!kreport.ok) {
        throw ConfigError("component " + std::to_string(idx) +
                          ": pulled fundamental domain fails: " +
                          first_failure(kreport));
      }
    }

    // Trees: physical build, pulled copy, exact geometry checks.
    if (cs.tree_roots.empty()) {
      throw ConfigError("component " + std::to_string(idx) + " has no orbit tree");
    }
    for (const Disc& root : cs.tree_roots) {
      if (!is_integer(root.rho)) {
        throw ConfigError("tree root radius exponent must be an integer");
      }
      OrbitTree t = OrbitTree::regular(spec_.prime, root.center,
                                       root.rho.get_num().get_si(), spec_.depth);
      t.validate_geometry();
      OrbitTree kt = c.frame.empty() ? t : t.transformed(c.frame_inv);
      if (!c.frame.empty()) kt.validate_geometry();
      c.trees.push_back(std::move(t));
      c.ktrees.push_back(std::move(kt));
    }

    // Pulled roots sit in the pulled fundamental domain and avoid each other.
    for (std::size_t ti = 0; ti < c.ktrees.size(); ++ti) {
      const Disc root = c.ktrees[ti].vertex_disc(0);
      for (const PDisc& d : c.kfd.discs) {
        if (open_pdisc_meets_disc(d, root)) {
          throw ConfigError("component " + std::to_string(idx) + ": tree root " +
                            root.str() + " meets open domain disc " + d.str());
        }
      }
      for (std::size_t tj = ti + 1; tj < c.ktrees.size(); ++tj) {
        if (!root.disjoint_from(c.ktrees[tj].vertex_disc(0))) {
          throw ConfigError("component " + std::to_string(idx) +
                            ": orbit tree roots overlap");
        }
      }
    }

    // Masses on the physical discs.
    for (const OrbitTree& t : c.trees) {
      c.masses.push_back(tree_masses(t, c.form, c.probability_normalisation));
    }

    // Word enumeration and translate maps.
    const auto by_length = enumerate_words(c.group.genus(), spec_.l_max,
                                           spec_.word_budget);
    for (std::size_t l = 1; l < by_length.size(); ++l) {
      for (const Word& w : by_length[l]) {
        c.translates.push_back(Translate{w, l, c.group.word_mobius(w)});
      }
    }

    // Separation of all nonidentity translates from the model.
    c.separation = compute_separation(c, idx);

    // Length series at the kernel exponent and at the coupling exponent.
    if (series_converges(c.group.genus(), spec_.prime, c.alpha)) {
      c.series_alpha = length_series(c.group.genus(), spec_.prime, c.alpha,
                                     spec_.l_max);
    }
    c.sharp_condition = sharp_series_condition(c.group.genus(), spec_.prime, c.alpha);
    const Rational az = effective_alpha_z();
    if (series_converges(c.group.genus(), spec_.prime, az)) {
      c.series_z = length_series(c.group.genus(), spec_.prime, az, spec_.l_max);
    } else if (coupled()) {
      throw DivergenceError("coupling series diverges for component " +
                            std::to_string(idx));
    }

    // Leaf table.
    c.leaf_offset = static_cast<int>(leaves_.size());
    c.mu_total_q = 0;
    for (std::size_t ti = 0; ti < c.trees.size(); ++ti) {
      const OrbitTree& kt = c.ktrees[ti];
      for (int v : c.trees[ti].leaves()) {
        Leaf lf;
        lf.comp = idx;
        lf.tree = static_cast<int>(ti);
        lf.vertex = v;
        lf.kcenter = kt.vertex(v).center;
        lf.krho = kt.vertex(v).rho;
        lf.mass_q = c.masses[ti].mass[v].to_rational();
        lf.mass = lf.mass_q.get_d();
        c.mu_total_q += lf.mass_q;
        leaves_.push_back(std::move(lf));
      }
    }
    c.n_leaves = static_cast<int>(leaves_.size()) - c.leaf_offset;
    c.mu_total = c.mu_total_q.get_d();

    // Translate kernel per leaf (single-tree components only; the reference
    // point |x - gamma y| is then independent of x across the whole tree).
    if (c.trees.size() == 1) {
      const Rational root_center = c.ktrees[0].vertex(0).center;
      for (int b = 0; b < c.n_leaves; ++b) {
        const Leaf& lb = leaves_[c.leaf_offset + b];
        KernelCoeff kc;
        kc.exact = c.alpha_integral;
        if (kc.exact) kc.value_q = 0;
        double acc = 0;
        Rational acc_q(0);
        for (const Translate& tr : c.translates) {
          const Rational image = tr.map.apply_finite(lb.kcenter);
          const PAbs d = dist_p(root_center, image, spec_.prime);
          if (d.is_zero()) {
            throw ZeroDistanceError("translate " + tr.word.str() +
                                    " collides with the tree root center");
          }
          const PAbs term = PAbs::power(spec_.prime,
                                        -c.alpha * Rational(static_cast<long>(tr.length))) *
                            d.pow(-c.alpha);
          if (kc.exact) {
            acc_q += term.to_rational();
          } else {
            acc += term.to_double();
          }
        }
        if (kc.exact) {
          kc.value_q = acc_q;
          kc.value = acc_q.get_d();
        } else {
          kc.value = acc;
        }
        c.translate_kernel.push_back(std::move(kc));
      }
    }

    comps_.push_back(std::move(c));
  }

  PAbs compute_separation(const Component& c, int idx) const {
    PAbs best = PAbs::zero(spec_.prime);
    bool first = true;
    for (Letter l : c.group.all_letters()) {
      const Mobius& m = c.group.letter_mobius(l);
      std::vector<PDisc> images;
      for (const OrbitTree& kt : c.ktrees) {
        const Disc root = kt.vertex_disc(0);
        images.push_back(pdisc_image(m, PDisc::interior_disc(root.center, root.rho,
                                                             spec_.prime)));
      }
      for (std::size_t j = 0; j < c.kfd.discs.size(); ++j) {
        if (static_cast<int>(j) == c.group.ingress_disc(l)) continue;
        images.push_back(pdisc_image(m, c.kfd.discs[j]));
      }
      for (const PDisc& t : images) {
        for (const OrbitTree& kt : c.ktrees) {
          const Disc root = kt.vertex_disc(0);
          const PAbs d = pdisc_distance(
              PDisc::interior_disc(root.center, root.rho, spec_.prime), t);
          if (d.is_zero()) {
            throw ConfigError("component " + std::to_string(idx) +
                              ": translate region " + t.str() +
                              " touches tree root " + root.str());
          }
          if (first || d < best) {
            best = d;
            first = false;
          }
        }
      }
    }
    return best;
  }

  static std::string first_failure(const FdReport& report) {
    for (const CheckItem& item : report.checks) {
      if (!item.ok) return item.name + " (" + item.detail + ")";
    }
    return "unknown check";
  }

  ModelSpec spec_;
  std::vector<Component> comps_;
  std::vector<Leaf> leaves_;
};

}  // namespace ulap
