// ultralap: invariant ultrametric Laplacians on tree boundaries.
//
// Subcommands: validate, spectrum, heat, kernel, sample, bvp.  Each reads a
// JSON experiment config and writes CSV data plus report.json/manifest.json
// into --out.  Exit codes: 0 success, 2 config error, 3 precondition
// violation, 4 unsupported initial data, 5 internal error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "ulap/config.hpp"
#include "ulap/errors.hpp"
#include "ulap/tasks.hpp"

namespace {

int run(const std::string& command, const std::string& config_path,
        ulap::TaskOptions opt) {
  opt.config_path = config_path;
  const ulap::ExperimentConfig cfg = ulap::load_config(config_path);
  if (command == "validate") return ulap::cmd_validate(cfg, opt);
  if (command == "spectrum") return ulap::cmd_spectrum(cfg, opt);
  if (command == "heat") return ulap::cmd_heat(cfg, opt);
  if (command == "kernel") return ulap::cmd_kernel(cfg, opt);
  if (command == "sample") return ulap::cmd_sample(cfg, opt);
  if (command == "bvp") return ulap::cmd_bvp(cfg, opt);
  throw ulap::ConfigError("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invariant ultrametric Laplacians on tree boundaries"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;
  std::optional<std::uint64_t> seed;

  for (const char* name :
       {"validate", "spectrum", "heat", "kernel", "sample", "bvp"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = auto)");
    if (std::string(name) == "sample") {
      sub->add_option("--seed", seed, "override the config RNG seed");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ulap::TaskOptions opt;
  opt.out_dir = out_dir;
  opt.seed_override = seed;
  if (threads <= 0) {
    if (const char* env = std::getenv("ULTRALAP_THREADS")) {
      threads = std::atoi(env);
    }
  }
  opt.threads = threads > 0 ? threads : 1;

  try {
    return run(app.get_subcommands().front()->get_name(), config_path, opt);
  } catch (const ulap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ulap::PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 3;
  } catch (const ulap::UnsupportedInitialData& e) {
    std::cerr << "unsupported initial data: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
}
