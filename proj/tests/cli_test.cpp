#include <gtest/gtest.h>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "ulap/io.hpp"

// End-to-end checks of the ultralap binary: exit codes, CSV shapes, report
// contents, and manifest bookkeeping.  The binary path comes from the build.

namespace ulap {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using test::config_path;

fs::path fresh_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() /
                     ("ulap_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += std::string("'") + ULAP_CLI_PATH + "' " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

json load_json(const fs::path& p) { return json::parse(read_file(p)); }

std::vector<std::string> csv_lines(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

fs::path write_patched_config(const std::string& base, const std::string& tag,
                              const std::function<void(json&)>& patch) {
  json j = json::parse(read_file(config_path(base)));
  patch(j);
  const fs::path dir = fresh_dir("cfg_" + tag);
  const fs::path file = dir / "config.json";
  std::ofstream(file) << j.dump(2);
  return file;
}

TEST(CliTest, ValidateAllShippedConfigs) {
  int i = 0;
  for (const char* name : {"tate_p2.json", "genus2_p3.json", "coupled_tates.json",
                           "decoupled_tates.json", "tate_p2_shifted.json"}) {
    const fs::path out = fresh_dir("validate" + std::to_string(i++));
    ASSERT_EQ(run_cli("validate --config " + quoted(config_path(name)) +
                      " --out " + quoted(out)),
              0)
        << name;
    const json report = load_json(out / "report.json");
    EXPECT_TRUE(report.at("ok").get<bool>()) << name;
    // The invariance spot check asks whether the supplied rational form has
    // group-invariant absolute value on the sampled discs.  A rational form
    // can only achieve that with zeros and poles at the limit points, which
    // is possible at genus 1 but never at higher genus, where the limit set
    // is infinite.  The genus 2 report therefore lists honest violations
    // (image masses scaled by |gamma'|) while the measure itself extends
    // invariantly by transport; the model only reads masses inside the tree.
    const bool invariant_form = std::string(name) != "genus2_p3.json";
    EXPECT_EQ(report.at("invariance_ok").get<bool>(), invariant_form) << name;
    if (!invariant_form) {
      bool any_violation = false;
      for (const auto& row : report.at("invariance")) {
        if (!row.at("ok").get<bool>() && !row.at("skipped").get<bool>()) {
          any_violation = true;
        }
      }
      EXPECT_TRUE(any_violation) << name;
    }
  }
}

TEST(CliTest, ValidateReportAndManifestContents) {
  const fs::path out = fresh_dir("validate_full");
  ASSERT_EQ(run_cli("validate --config " + quoted(config_path("tate_p2.json")) +
                    " --out " + quoted(out)),
            0);
  const json report = load_json(out / "report.json");
  EXPECT_EQ(report.at("n_leaves").get<int>(), 8);
  EXPECT_EQ(report.at("prime").get<long>(), 2);
  const json& comp = report.at("components").at(0);
  EXPECT_EQ(comp.at("genus").get<int>(), 1);
  EXPECT_EQ(comp.at("mu_total").get<std::string>(), "1");
  EXPECT_TRUE(comp.at("sharp_series_condition").get<bool>());
  for (const auto& item : comp.at("fundamental_domain")) {
    EXPECT_TRUE(item.at("ok").get<bool>());
  }
  const json manifest = load_json(out / "manifest.json");
  EXPECT_EQ(manifest.at("tool").get<std::string>(), "ultralap");
  EXPECT_EQ(manifest.at("command").get<std::string>(), "validate");
  EXPECT_EQ(manifest.at("outputs"), json::array({"report.json"}));
  const std::string raw = read_file(config_path("tate_p2.json"));
  EXPECT_EQ(manifest.at("config_fnv1a64").get<std::string>(), hex64(fnv1a64(raw)));
}

TEST(CliTest, SpectrumCsvShapeAndDeterminism) {
  const fs::path out = fresh_dir("spectrum_a");
  ASSERT_EQ(run_cli("spectrum --config " + quoted(config_path("tate_p2.json")) +
                    " --out " + quoted(out)),
            0);
  const auto lines = csv_lines(out / "spectrum.csv");
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "component,anchor_id,depth,eigenvalue,multiplicity,tail_bound");
  // Rows are sorted by descending eigenvalue; multiplicities sum to n_leaves.
  double prev = 1.0;
  long mult_sum = 0;
  const long expect_mult[4] = {1, 1, 2, 4};
  for (int r = 1; r <= 4; ++r) {
    const auto cells = split(lines[r]);
    ASSERT_EQ(cells.size(), 6u);
    const double value = std::stod(cells[3]);
    EXPECT_LT(value, prev);
    prev = value;
    EXPECT_EQ(std::stol(cells[4]), expect_mult[r - 1]);
    mult_sum += std::stol(cells[4]);
  }
  EXPECT_EQ(mult_sum, 8);
  EXPECT_EQ(split(lines[1])[0], "-1");  // constant block row on top

  const json report = load_json(out / "report.json");
  EXPECT_TRUE(report.at("exact_matrix").get<bool>());
  EXPECT_LE(std::stod(report.at("matrix_vs_analytic_max_gap").get<std::string>()),
            1e-9);

  const fs::path out2 = fresh_dir("spectrum_b");
  ASSERT_EQ(run_cli("spectrum --config " + quoted(config_path("tate_p2.json")) +
                    " --out " + quoted(out2)),
            0);
  EXPECT_EQ(read_file(out / "spectrum.csv"), read_file(out2 / "spectrum.csv"));
}

TEST(CliTest, HeatCsvAndMassConservation) {
  const fs::path out = fresh_dir("heat");
  ASSERT_EQ(run_cli("heat --config " + quoted(config_path("tate_p2.json")) +
                    " --out " + quoted(out)),
            0);
  const auto lines = csv_lines(out / "heat.csv");
  ASSERT_EQ(lines.size(), 1u + 3u * 8u);
  EXPECT_EQ(lines[0], "time,leaf,value");
  EXPECT_EQ(split(lines[1])[2], "1");  // u(0) is the leaf indicator
  const json report = load_json(out / "report.json");
  for (const auto& entry : report.at("mass_history")) {
    EXPECT_NEAR(std::stod(entry.at("mass").get<std::string>()), 0.125, 1e-12);
  }
}

TEST(CliTest, KernelPairsAndDivergenceFlags) {
  const fs::path out = fresh_dir("kernel_g2");
  ASSERT_EQ(run_cli("kernel --config " + quoted(config_path("genus2_p3.json")) +
                    " --out " + quoted(out)),
            0);
  const auto lines = csv_lines(out / "kernel.csv");
  ASSERT_EQ(lines.size(), 4u);
  for (int r = 1; r <= 3; ++r) EXPECT_EQ(split(lines[r])[4], "0");
  const json report = load_json(out / "report.json");
  EXPECT_EQ(report.at("n_diverged").get<int>(), 0);
  EXPECT_FALSE(report.at("diagonal_diverged_leaf0").get<bool>());

  // Early-time run on the Tate config: every diagonal entry diverges.
  const fs::path cfg = write_patched_config("tate_p2.json", "kernel_small_t",
                                            [](json& j) { j["kernel"]["t"] = 1e-3; });
  const fs::path out2 = fresh_dir("kernel_div");
  ASSERT_EQ(run_cli("kernel --config " + quoted(cfg) + " --out " + quoted(out2)), 0);
  const json rep2 = load_json(out2 / "report.json");
  EXPECT_TRUE(rep2.at("diagonal_diverged_leaf0").get<bool>());
  EXPECT_EQ(rep2.at("n_diverged").get<int>(), 8);  // the 8 diagonal pairs of 64

  // Decoupled components: the cross-component kernel value is exactly zero.
  const fs::path out3 = fresh_dir("kernel_dec");
  ASSERT_EQ(run_cli("kernel --config " + quoted(config_path("decoupled_tates.json")) +
                    " --out " + quoted(out3)),
            0);
  const auto dlines = csv_lines(out3 / "kernel.csv");
  ASSERT_EQ(dlines.size(), 4u);
  EXPECT_EQ(split(dlines[1])[3], "0");  // pair (0, 8) across components
}

TEST(CliTest, SampleSeededReproducibility) {
  const std::string base = "sample --config " + quoted(config_path("tate_p2.json"));
  const fs::path a = fresh_dir("sample_a");
  const fs::path b = fresh_dir("sample_b");
  const fs::path c = fresh_dir("sample_c");
  ASSERT_EQ(run_cli(base + " --out " + quoted(a) + " --seed 123"), 0);
  ASSERT_EQ(run_cli(base + " --out " + quoted(b) + " --seed 123"), 0);
  ASSERT_EQ(run_cli(base + " --out " + quoted(c) + " --seed 124"), 0);
  EXPECT_EQ(read_file(a / "paths.csv"), read_file(b / "paths.csv"));
  EXPECT_NE(read_file(a / "paths.csv"), read_file(c / "paths.csv"));
  const json manifest = load_json(a / "manifest.json");
  EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 123u);
  const json report = load_json(a / "report.json");
  EXPECT_EQ(report.at("paths").get<std::size_t>(), 400u);
  const auto lines = csv_lines(a / "paths.csv");
  EXPECT_EQ(lines[0], "path,jump,time,leaf");
  EXPECT_GE(lines.size(), 401u);  // every path contributes its start row

  // Without --seed the config seed applies.
  const fs::path d = fresh_dir("sample_d");
  ASSERT_EQ(run_cli(base + " --out " + quoted(d)), 0);
  EXPECT_EQ(load_json(d / "manifest.json").at("seed").get<std::uint64_t>(),
            20260823u);
}

TEST(CliTest, BvpRunAndReport) {
  const fs::path out = fresh_dir("bvp");
  ASSERT_EQ(run_cli("bvp --config " + quoted(config_path("tate_p2.json")) +
                    " --out " + quoted(out)),
            0);
  const auto lines = csv_lines(out / "bvp.csv");
  ASSERT_EQ(lines.size(), 1u + 3u * 8u);
  const json report = load_json(out / "report.json");
  EXPECT_EQ(report.at("region_size").get<int>(), 4);
  EXPECT_EQ(report.at("vertex_boundary_size").get<int>(), 4);
  EXPECT_EQ(report.at("edge_boundary_size").get<int>(), 16);
  for (const auto& step : report.at("evolution")) {
    EXPECT_TRUE(step.at("boundary_ok").get<bool>());
    EXPECT_EQ(step.at("confinement").get<std::string>(), "0");
  }
}

TEST(CliTest, ExitCodes) {
  const fs::path out = fresh_dir("codes");

  // Config errors: bad JSON path, missing flag, unknown flag, bad model.
  EXPECT_EQ(run_cli("spectrum --config /nonexistent.json --out " + quoted(out)), 2);
  EXPECT_EQ(run_cli("spectrum"), 2);
  EXPECT_EQ(run_cli("spectrum --config x --bogus"), 2);
  EXPECT_EQ(run_cli("--help"), 0);

  const fs::path bad_weights = write_patched_config(
      "coupled_tates.json", "asym",
      [](json& j) { j["coupling"]["weights"] = {{0, 1}, {0, 0}}; });
  EXPECT_EQ(run_cli("spectrum --config " + quoted(bad_weights) + " --out " +
                    quoted(out)),
            2);

  // Divergent series surfaces as a precondition failure.
  const fs::path divergent = write_patched_config(
      "genus2_p3.json", "diverge",
      [](json& j) { j["components"][0]["alpha"] = 1; });
  EXPECT_EQ(run_cli("spectrum --config " + quoted(divergent) + " --out " +
                    quoted(out)),
            3);

  // Initial data outside the admissible span of the region.
  const fs::path bad_initial = write_patched_config(
      "tate_p2.json", "badinit",
      [](json& j) { j["bvp"]["initial"] = {{"indicator_leaf", 0}}; });
  EXPECT_EQ(run_cli("bvp --config " + quoted(bad_initial) + " --out " + quoted(out)),
            4);

  // A broken geometry still writes a failure report through validate.
  const fs::path bad_geom = write_patched_config(
      "tate_p2.json", "badgeom", [](json& j) {
        j["components"][0]["trees"] = {{{"center", 0}, {"radius_exp", -3}}};
      });
  const fs::path out2 = fresh_dir("badgeom_out");
  EXPECT_EQ(run_cli("validate --config " + quoted(bad_geom) + " --out " +
                    quoted(out2)),
            2);
  const json report = load_json(out2 / "report.json");
  EXPECT_FALSE(report.at("ok").get<bool>());
  EXPECT_FALSE(report.at("error").get<std::string>().empty());
}

TEST(CliTest, ThreadsEnvFallback) {
  const fs::path out = fresh_dir("threads");
  ASSERT_EQ(run_cli("spectrum --config " + quoted(config_path("tate_p2.json")) +
                    " --out " + quoted(out),
                    "ULTRALAP_THREADS=2"),
            0);
  EXPECT_EQ(load_json(out / "manifest.json").at("threads").get<int>(), 2);
}

}  // namespace
}  // namespace ulap
