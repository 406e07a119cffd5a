#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ulap/bvp.hpp"
#include "ulap/errors.hpp"
#include "ulap/io.hpp"
#include "ulap/model.hpp"

// JSON experiment configuration.  Rational values are JSON integers or
// strings "a/b"; matrices are [[a, b], [c, d]]; discs are objects with
// "center", "radius_exp" and an optional "exterior" flag.  The model section
// (prime, components, coupling, numerics) is mandatory; per-command sections
// (heat, kernel, sample, bvp) are read only by the command that needs them.

namespace ulap {

using nlohmann::json;

namespace cfg {

inline Rational get_rational(const json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected an integer or a rational string");
}

inline const json& require(const json& j, const std::string& key,
                           const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(where + ": missing key '" + key + "'");
  }
  return j.at(key);
}

inline Mobius get_mobius(const json& j, long prime, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2) {
    throw ConfigError(where + ": expected a 2x2 matrix [[a,b],[c,d]]");
  }
  try {
    return Mobius(get_rational(j[0][0], where), get_rational(j[0][1], where),
                  get_rational(j[1][0], where), get_rational(j[1][1], where), prime);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline PDisc get_pdisc(const json& j, long prime, const std::string& where) {
  PDisc d;
  d.prime = prime;
  d.center = get_rational(require(j, "center", where), where + ".center");
  d.rho = get_rational(require(j, "radius_exp", where), where + ".radius_exp");
  d.exterior = j.value("exterior", false);
  return d;
}

inline std::vector<Rational> get_poly(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + ": expected a nonempty coefficient array");
  }
  std::vector<Rational> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(get_rational(j[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

}  // namespace cfg

struct WaveletSelector {
  int comp = 0;
  Rational anchor_center;
  Rational anchor_rho;
  int index = 1;
  double coeff = 1.0;
};

struct InitialData {
  enum class Kind { Values, IndicatorLeaf, Wavelets };
  Kind kind = Kind::IndicatorLeaf;
  std::vector<double> values;
  int leaf = 0;
  std::vector<WaveletSelector> wavelets;
};

struct HeatTask {
  std::vector<double> times;
  InitialData initial;
};

struct KernelTask {
  double t = 1.0;
  bool all_pairs = true;
  std::vector<std::pair<int, int>> pairs;
};

struct SampleTask {
  double horizon = 1.0;
  std::size_t paths = 100;
  int initial_leaf = 0;
  std::uint64_t seed = 0;
};

struct RegionSpec {
  bool subtree = false;
  int comp = 0;
  Rational center;
  Rational rho;
  std::vector<int> leaves;
};

struct BvpTask {
  BoundaryCondition condition = BoundaryCondition::Dirichlet;
  RegionSpec region;
  std::vector<double> times;
  InitialData initial;
};

struct ExperimentConfig {
  ModelSpec model;
  std::optional<HeatTask> heat;
  std::optional<KernelTask> kernel;
  std::optional<SampleTask> sample;
  std::optional<BvpTask> bvp;
  std::string raw;  // original bytes, hashed into the manifest
};

namespace cfg {

inline InitialData get_initial(const json& j, const std::string& where) {
  InitialData out;
  if (j.contains("values")) {
    out.kind = InitialData::Kind::Values;
    for (const auto& v : j.at("values")) out.values.push_back(v.get<double>());
    return out;
  }
  if (j.contains("indicator_leaf")) {
    out.kind = InitialData::Kind::IndicatorLeaf;
    out.leaf = j.at("indicator_leaf").get<int>();
    return out;
  }
  if (j.contains("wavelets")) {
    out.kind = InitialData::Kind::Wavelets;
    for (const auto& w : j.at("wavelets")) {
      WaveletSelector sel;
      sel.comp = w.value("component", 0);
      sel.anchor_center = get_rational(require(w, "anchor_center", where),
                                       where + ".anchor_center");
      sel.anchor_rho = get_rational(require(w, "anchor_radius_exp", where),
                                    where + ".anchor_radius_exp");
      sel.index = w.value("index", 1);
      sel.coeff = w.contains("coeff") ? w.at("coeff").get<double>() : 1.0;
      out.wavelets.push_back(std::move(sel));
    }
    if (out.wavelets.empty()) throw ConfigError(where + ": empty wavelet list");
    return out;
  }
  throw ConfigError(where + ": expected values, indicator_leaf, or wavelets");
}

}  // namespace cfg

inline ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig out;
  out.raw = text;

  ModelSpec& m = out.model;
  m.prime = cfg::require(root, "prime", "config").get<long>();
  const json& comps = cfg::require(root, "components", "config");
  if (!comps.is_array() || comps.empty()) {
    throw ConfigError("config.components must be a nonempty array");
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string where = "components[" + std::to_string(i) + "]";
    const json& jc = comps[i];
    ComponentSpec cs;
    for (const auto& g : cfg::require(jc, "generators", where)) {
      cs.generators.push_back(cfg::get_mobius(g, m.prime, where + ".generators"));
    }
    for (const auto& d : cfg::require(jc, "fundamental_domain", where)) {
      cs.fd_discs.push_back(cfg::get_pdisc(d, m.prime, where + ".fundamental_domain"));
    }
    for (const auto& t : cfg::require(jc, "trees", where)) {
      const PDisc pd = cfg::get_pdisc(t, m.prime, where + ".trees");
      if (pd.exterior) throw ConfigError(where + ": tree roots must be interior discs");
      cs.tree_roots.push_back(pd.as_disc());
    }
    if (jc.contains("omega")) {
      cs.form.num = cfg::get_poly(cfg::require(jc.at("omega"), "num", where + ".omega"),
                                  where + ".omega.num");
      cs.form.den = cfg::get_poly(cfg::require(jc.at("omega"), "den", where + ".omega"),
                                  where + ".omega.den");
    }
    cs.alpha = jc.contains("alpha")
                   ? cfg::get_rational(jc.at("alpha"), where + ".alpha")
                   : Rational(2);
    if (jc.contains("frame_word")) {
      std::vector<Letter> letters;
      for (const auto& l : jc.at("frame_word")) letters.push_back(l.get<int>());
      cs.frame = Word::from_letters(letters);
    }
    cs.probability_normalisation = jc.value("probability_normalisation", false);
    m.components.push_back(std::move(cs));
  }

  if (root.contains("coupling")) {
    const json& jc = root.at("coupling");
    if (jc.contains("alpha_z")) {
      m.coupling.alpha_z = cfg::get_rational(jc.at("alpha_z"), "coupling.alpha_z");
    }
    if (jc.contains("weights")) {
      for (const auto& row : jc.at("weights")) {
        std::vector<Rational> r;
        for (const auto& w : row) r.push_back(cfg::get_rational(w, "coupling.weights"));
        m.coupling.weights.push_back(std::move(r));
      }
    }
    m.coupling.statement_exponent = jc.value("statement_exponent", false);
  }

  if (root.contains("numerics")) {
    const json& jn = root.at("numerics");
    m.depth = jn.value("depth", 3);
    m.l_max = jn.value("l_max", static_cast<std::size_t>(12));
    const std::string mode = jn.value("lambda_integration_domain", std::string("operator"));
    if (mode == "operator") {
      m.lambda_mode = LambdaMode::Operator;
    } else if (mode == "display") {
      m.lambda_mode = LambdaMode::Display;
    } else {
      throw ConfigError("numerics.lambda_integration_domain must be 'operator' or 'display'");
    }
    m.word_budget = jn.value("word_budget", static_cast<std::size_t>(2000000));
  }

  if (root.contains("heat")) {
    const json& jh = root.at("heat");
    HeatTask task;
    for (const auto& t : cfg::require(jh, "times", "heat")) {
      task.times.push_back(t.get<double>());
    }
    task.initial = cfg::get_initial(cfg::require(jh, "initial", "heat"), "heat.initial");
    out.heat = std::move(task);
  }

  if (root.contains("kernel")) {
    const json& jk = root.at("kernel");
    KernelTask task;
    task.t = cfg::require(jk, "t", "kernel").get<double>();
    if (jk.contains("pairs")) {
      task.all_pairs = false;
      for (const auto& p : jk.at("pairs")) {
        if (!p.is_array() || p.size() != 2) {
          throw ConfigError("kernel.pairs entries must be [x, y]");
        }
        task.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
    }
    out.kernel = std::move(task);
  }

  if (root.contains("sample")) {
    const json& js = root.at("sample");
    SampleTask task;
    task.horizon = cfg::require(js, "t_horizon", "sample").get<double>();
    task.paths = js.value("paths", static_cast<std::size_t>(100));
    task.initial_leaf = js.value("initial_leaf", 0);
    task.seed = js.value("seed", static_cast<std::uint64_t>(0));
    out.sample = std::move(task);
  }

  if (root.contains("bvp")) {
    const json& jb = root.at("bvp");
    BvpTask task;
    const std::string cond = cfg::require(jb, "condition", "bvp").get<std::string>();
    if (cond == "dirichlet") {
      task.condition = BoundaryCondition::Dirichlet;
    } else if (cond == "von_neumann") {
      task.condition = BoundaryCondition::VonNeumann;
    } else {
      throw ConfigError("bvp.condition must be 'dirichlet' or 'von_neumann'");
    }
    const json& jr = cfg::require(jb, "region", "bvp");
    if (jr.contains("subtree")) {
      const json& js = jr.at("subtree");
      task.region.subtree = true;
      task.region.comp = js.value("component", 0);
      task.region.center = cfg::get_rational(cfg::require(js, "center", "bvp.region"),
                                             "bvp.region.center");
      task.region.rho = cfg::get_rational(cfg::require(js, "radius_exp", "bvp.region"),
                                          "bvp.region.radius_exp");
    } else if (jr.contains("leaves")) {
      for (const auto& l : jr.at("leaves")) task.region.leaves.push_back(l.get<int>());
    } else {
      throw ConfigError("bvp.region needs 'subtree' or 'leaves'");
    }
    for (const auto& t : cfg::require(jb, "times", "bvp")) {
      task.times.push_back(t.get<double>());
    }
    task.initial = cfg::get_initial(cfg::require(jb, "initial", "bvp"), "bvp.initial");
    out.bvp = std::move(task);
  }

  return out;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

}  // namespace ulap
