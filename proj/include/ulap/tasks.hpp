#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ulap/bvp.hpp"
#include "ulap/config.hpp"
#include "ulap/errors.hpp"
#include "ulap/heat.hpp"
#include "ulap/io.hpp"
#include "ulap/model.hpp"
#include "ulap/sampling.hpp"
#include "ulap/spectral.hpp"
#include "ulap/wavelets.hpp"

// Command implementations behind the CLI.  Every command writes its data
// files, a report.json with the quantitative summary, and a manifest.json
// naming the config hash and the produced artifacts.  All writes are atomic.

namespace ulap {

struct TaskOptions {
  std::filesystem::path out_dir = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed_override;
  std::string config_path;
};

namespace detail {

inline json manifest_base(const ExperimentConfig& cfg, const TaskOptions& opt,
                          const std::string& command) {
  json m;
  m["tool"] = "ultralap";
  m["version"] = "1.0.0";
  m["command"] = command;
  m["config_path"] = opt.config_path;
  m["config_fnv1a64"] = hex64(fnv1a64(cfg.raw));
  m["threads"] = opt.threads;
  return m;
}

inline void write_manifest(json m, const TaskOptions& opt,
                           const std::vector<std::string>& outputs) {
  m["outputs"] = outputs;
  write_text_atomic(opt.out_dir / "manifest.json", m.dump(2) + "\n");
}

inline int find_anchor(const Model& model, int comp, const Rational& center,
                       const Rational& rho) {
  if (comp < 0 || comp >= model.n_components()) {
    throw ConfigError("wavelet selector component out of range");
  }
  const OrbitTree& tree = model.component(comp).trees[0];
  const Disc target{center, rho, model.prime()};
  for (int v = 0; v < tree.n_vertices(); ++v) {
    if (!tree.is_leaf(v) && tree.vertex_disc(v).equal_as_set(target)) return v;
  }
  throw ConfigError("no internal tree vertex matches disc " + target.str());
}

inline Eigen::VectorXd build_initial(const Model& model, const InitialData& init) {
  const int n = model.n_leaves();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  switch (init.kind) {
    case InitialData::Kind::Values: {
      if (static_cast<int>(init.values.size()) != n) {
        throw ConfigError("initial values: expected " + std::to_string(n) +
                          " entries, got " + std::to_string(init.values.size()));
      }
      for (int i = 0; i < n; ++i) u(i) = init.values[i];
      return u;
    }
    case InitialData::Kind::IndicatorLeaf: {
      if (init.leaf < 0 || init.leaf >= n) {
        throw ConfigError("initial indicator leaf out of range");
      }
      u(init.leaf) = 1.0;
      return u;
    }
    case InitialData::Kind::Wavelets: {
      for (const WaveletSelector& sel : init.wavelets) {
        const int anchor = find_anchor(model, sel.comp, sel.anchor_center,
                                       sel.anchor_rho);
        const auto basis = real_anchor_basis(model, sel.comp, anchor);
        if (sel.index < 1 || sel.index > static_cast<int>(basis.size())) {
          throw ConfigError("wavelet index out of range at anchor " +
                            std::to_string(anchor));
        }
        const auto& child_values = basis[sel.index - 1];
        const TreeVertex& tv = model.component(sel.comp).trees[0].vertex(anchor);
        for (std::size_t k = 0; k < tv.children.size(); ++k) {
          for (int leaf : leaves_under(model, sel.comp, tv.children[k])) {
            u(leaf) += sel.coeff * child_values[k];
          }
        }
      }
      return u;
    }
  }
  throw ConfigError("unhandled initial data kind");
}

inline json series_json(const LengthSeries& s) {
  json out;
  out["truncated"] = format_double(s.truncated);
  out["tail"] = format_double(s.tail);
  out["closed_form"] = format_double(s.full);
  out["exact"] = s.exact;
  if (s.exact) {
    out["truncated_rational"] = to_string(s.truncated_q);
    out["closed_form_rational"] = to_string(s.full_q);
  }
  return out;
}

inline json component_report(const Model& model, int i) {
  const Component& c = model.component(i);
  json out;
  out["genus"] = c.group.genus();
  out["alpha"] = to_string(c.alpha);
  out["n_trees"] = c.trees.size();
  out["n_leaves"] = c.n_leaves;
  out["mu_total"] = to_string(c.mu_total_q);
  out["separation"] = c.separation.str();
  out["series_alpha_converges"] = static_cast<bool>(c.series_alpha);
  if (c.series_alpha) out["series_alpha"] = series_json(*c.series_alpha);
  out["sharp_series_condition"] = c.sharp_condition;
  if (!c.sharp_condition) {
    out["warning"] =
        "2 genus < p^alpha fails; kernel estimates are outside the sharp regime";
  }
  json checks = json::array();
  for (const CheckItem& item : c.fd_report.checks) {
    checks.push_back({{"name", item.name}, {"ok", item.ok}, {"detail", item.detail}});
  }
  out["fundamental_domain"] = checks;
  out["frame_word"] = c.frame.str();
  return out;
}

}  // namespace detail

inline int cmd_validate(const ExperimentConfig& cfg, const TaskOptions& opt) {
  json report;
  report["command"] = "validate";
  try {
    Model model(cfg.model);
    report["ok"] = true;
    report["prime"] = model.prime();
    report["n_leaves"] = model.n_leaves();
    json comps = json::array();
    for (int i = 0; i < model.n_components(); ++i) {
      comps.push_back(detail::component_report(model, i));
    }
    report["components"] = comps;

    // Invariance diagnostic on the root and depth-1 discs of each tree.
    json inv = json::array();
    bool inv_ok = true;
    for (int i = 0; i < model.n_components(); ++i) {
      const Component& c = model.component(i);
      std::vector<Mobius> maps;
      for (int g = 0; g < c.group.genus(); ++g) maps.push_back(c.group.generator(g));
      std::vector<Disc> samples;
      for (const OrbitTree& t : c.trees) {
        samples.push_back(t.vertex_disc(0));
        for (int ch : t.vertex(0).children) samples.push_back(t.vertex_disc(ch));
      }
      const InvarianceReport r = check_invariance(c.form, maps, samples);
      inv_ok = inv_ok && r.ok;
      for (const InvarianceRow& row : r.rows) {
        inv.push_back({{"component", i},
                       {"disc", row.disc},
                       {"map", row.map},
                       {"mass", row.mass},
                       {"image_mass", row.image_mass},
                       {"skipped", row.skipped},
                       {"ok", row.ok}});
      }
    }
    report["invariance_ok"] = inv_ok;
    report["invariance"] = inv;
  } catch (const ConfigError& e) {
    report["ok"] = false;
    report["error"] = e.what();
    write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
    detail::write_manifest(detail::manifest_base(cfg, opt, "validate"), opt,
                           {"report.json"});
    return 2;
  } catch (const PreconditionError& e) {
    report["ok"] = false;
    report["error"] = e.what();
    write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
    detail::write_manifest(detail::manifest_base(cfg, opt, "validate"), opt,
                           {"report.json"});
    return 3;
  }
  write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
  detail::write_manifest(detail::manifest_base(cfg, opt, "validate"), opt,
                         {"report.json"});
  return 0;
}

inline int cmd_spectrum(const ExperimentConfig& cfg, const TaskOptions& opt) {
  Model model(cfg.model);
  const Spectrum spec = full_spectrum(model);
  const auto rows = aggregate_spectrum(spec);

  CsvWriter csv("component,anchor_id,depth,eigenvalue,multiplicity,tail_bound");
  for (const SpectrumEntry& e : rows) {
    csv.add_row({std::to_string(e.comp), std::to_string(e.anchor),
                 std::to_string(e.depth), format_double(e.value),
                 std::to_string(e.multiplicity), format_double(e.tail)});
  }
  write_text_atomic(opt.out_dir / "spectrum.csv", csv.str());

  // Cross-check against the assembled matrix.
  const Operator op = assemble_matrix(model, opt.threads);
  const Decomposition num = matrix_decomposition(model, op);
  std::vector<double> analytic;
  for (const SpectrumEntry& e : spec.entries) {
    for (long m = 0; m < e.multiplicity; ++m) analytic.push_back(e.value);
  }
  std::sort(analytic.begin(), analytic.end());
  double max_gap = 0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    max_gap = std::max(max_gap, std::abs(analytic[k] - num.lambda[k]));
  }

  json report;
  report["command"] = "spectrum";
  report["n_eigenvalues"] = analytic.size();
  report["matrix_vs_analytic_max_gap"] = format_double(max_gap);
  report["reversibility_residual"] = format_double(reversibility_residual(op));
  report["exact_matrix"] = op.exact;
  json comps = json::array();
  for (int i = 0; i < model.n_components(); ++i) {
    json jc = detail::component_report(model, i);
    const ZEigenvalue z = eigenvalue_Z(model, i);
    jc["coupling_eigenvalue"] = format_double(z.full);
    jc["coupling_eigenvalue_truncated"] = format_double(z.truncated);
    if (z.exact) jc["coupling_eigenvalue_rational"] = to_string(z.full_q);
    comps.push_back(std::move(jc));
  }
  report["components"] = comps;
  write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
  detail::write_manifest(detail::manifest_base(cfg, opt, "spectrum"), opt,
                         {"spectrum.csv", "report.json"});
  return 0;
}

inline int cmd_heat(const ExperimentConfig& cfg, const TaskOptions& opt) {
  if (!cfg.heat) throw ConfigError("config has no 'heat' section");
  Model model(cfg.model);
  const Decomposition dec = analytic_decomposition(model);
  const Eigen::VectorXd u0 = detail::build_initial(model, cfg.heat->initial);

  CsvWriter csv("time,leaf,value");
  json conservation = json::array();
  for (double t : cfg.heat->times) {
    const Eigen::VectorXd u = evolve(dec, u0, t);
    for (int x = 0; x < u.size(); ++x) {
      csv.add_row({format_double(t), std::to_string(x), format_double(u(x))});
    }
    double mass = 0;
    for (int x = 0; x < u.size(); ++x) mass += u(x) * dec.mu[x];
    conservation.push_back({{"time", format_double(t)},
                            {"mass", format_double(mass)}});
  }
  write_text_atomic(opt.out_dir / "heat.csv", csv.str());

  json report;
  report["command"] = "heat";
  report["times"] = cfg.heat->times;
  report["mass_history"] = conservation;
  write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
  detail::write_manifest(detail::manifest_base(cfg, opt, "heat"), opt,
                         {"heat.csv", "report.json"});
  return 0;
}

inline int cmd_kernel(const ExperimentConfig& cfg, const TaskOptions& opt) {
  if (!cfg.kernel) throw ConfigError("config has no 'kernel' section");
  Model model(cfg.model);
  const Decomposition dec = analytic_decomposition(model);
  const double t = cfg.kernel->t;

  std::vector<std::pair<int, int>> pairs = cfg.kernel->pairs;
  if (cfg.kernel->all_pairs) {
    for (int x = 0; x < model.n_leaves(); ++x) {
      for (int y = 0; y < model.n_leaves(); ++y) pairs.emplace_back(x, y);
    }
  }
  CsvWriter csv("t,x,y,value,diverged");
  int n_diverged = 0;
  for (const auto& [x, y] : pairs) {
    if (x < 0 || x >= model.n_leaves() || y < 0 || y >= model.n_leaves()) {
      throw ConfigError("kernel pair out of range");
    }
    const HeatKernelValue v = heat_kernel(model, dec, t, x, y);
    n_diverged += v.diverged ? 1 : 0;
    csv.add_row({format_double(t), std::to_string(x), std::to_string(y),
                 format_double(v.value), v.diverged ? "1" : "0"});
  }
  write_text_atomic(opt.out_dir / "kernel.csv", csv.str());

  json report;
  report["command"] = "kernel";
  report["t"] = format_double(t);
  report["n_pairs"] = pairs.size();
  report["n_diverged"] = n_diverged;
  // Shell diagnostics on the first diagonal point.
  const HeatKernelValue diag = heat_kernel(model, dec, t, 0, 0);
  json shells = json::array();
  for (double s : diag.shells) shells.push_back(format_double(s));
  report["diagonal_shells_leaf0"] = shells;
  report["diagonal_diverged_leaf0"] = diag.diverged;
  write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
  detail::write_manifest(detail::manifest_base(cfg, opt, "kernel"), opt,
                         {"kernel.csv", "report.json"});
  return 0;
}

inline int cmd_sample(const ExperimentConfig& cfg, const TaskOptions& opt) {
  if (!cfg.sample) throw ConfigError("config has no 'sample' section");
  Model model(cfg.model);
  const Operator op = assemble_matrix(model, opt.threads);
  const std::uint64_t seed =
      opt.seed_override ? *opt.seed_override : cfg.sample->seed;

  CsvWriter csv("path,jump,time,leaf");
  std::size_t total_jumps = 0;
  for (std::size_t k = 0; k < cfg.sample->paths; ++k) {
    const JumpPath path = sample_path(op, cfg.sample->initial_leaf,
                                      cfg.sample->horizon, seed, k);
    for (std::size_t j = 0; j < path.times.size(); ++j) {
      csv.add_row({std::to_string(k), std::to_string(j),
                   format_double(path.times[j]), std::to_string(path.states[j])});
    }
    total_jumps += path.times.size() - 1;
  }
  write_text_atomic(opt.out_dir / "paths.csv", csv.str());

  json report;
  report["command"] = "sample";
  report["seed"] = seed;
  report["paths"] = cfg.sample->paths;
  report["t_horizon"] = format_double(cfg.sample->horizon);
  report["initial_leaf"] = cfg.sample->initial_leaf;
  report["total_jumps"] = total_jumps;
  report["mean_jumps_per_path"] =
      format_double(static_cast<double>(total_jumps) /
                    static_cast<double>(cfg.sample->paths));
  write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
  json m = detail::manifest_base(cfg, opt, "sample");
  m["seed"] = seed;
  detail::write_manifest(std::move(m), opt, {"paths.csv", "report.json"});
  return 0;
}

inline int cmd_bvp(const ExperimentConfig& cfg, const TaskOptions& opt) {
  if (!cfg.bvp) throw ConfigError("config has no 'bvp' section");
  Model model(cfg.model);
  const Operator op = assemble_matrix(model, opt.threads);
  const Decomposition dec = analytic_decomposition(model);
  const Region region =
      cfg.bvp->region.subtree
          ? region_from_subtree(model, cfg.bvp->region.comp, cfg.bvp->region.center,
                                cfg.bvp->region.rho)
          : region_from_leaves(model, cfg.bvp->region.leaves);
  const Eigen::VectorXd u0 = detail::build_initial(model, cfg.bvp->initial);
  const BvpSolution sol =
      solve_bvp(model, dec, op, region, u0, cfg.bvp->times, cfg.bvp->condition);

  CsvWriter csv("time,leaf,value");
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    for (int x = 0; x < sol.values[k].size(); ++x) {
      csv.add_row({format_double(sol.times[k]), std::to_string(x),
                   format_double(sol.values[k](x))});
    }
  }
  write_text_atomic(opt.out_dir / "bvp.csv", csv.str());

  json report;
  report["command"] = "bvp";
  report["condition"] =
      cfg.bvp->condition == BoundaryCondition::Dirichlet ? "dirichlet" : "von_neumann";
  report["region_size"] = region.leaves.size();
  report["vertex_boundary_size"] = vertex_boundary(op, region).size();
  report["edge_boundary_size"] = edge_boundary(op, region).size();
  report["projection_residual"] = format_double(sol.projection_residual);
  json per_time = json::array();
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    per_time.push_back({{"time", format_double(sol.times[k])},
                        {"confinement", format_double(sol.confinement[k])},
                        {"boundary_residual", format_double(sol.boundary[k].max_residual)},
                        {"boundary_ok", sol.boundary[k].ok}});
  }
  report["evolution"] = per_time;
  write_text_atomic(opt.out_dir / "report.json", report.dump(2) + "\n");
  detail::write_manifest(detail::manifest_base(cfg, opt, "bvp"), opt,
                         {"bvp.csv", "report.json"});
  return 0;
}

}  // namespace ulap
