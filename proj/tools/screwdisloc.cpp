// Command-line front end.
//
//   screwdisloc verify --config configs/qwz_xy.json --out out
//
// Exit codes: 0 success or agreement, 1 disagreement, 2 numerical failure,
// 3 configuration error.

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "screwdisloc/pipeline.hpp"

namespace fs = std::filesystem;
using namespace screwdisloc;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  unsigned threads = 1;
  std::optional<int> kz_count;
  std::optional<int> grid;
  std::optional<std::uint64_t> seed;
};

config::RunConfig effective_config(const Flags& f) {
  config::RunConfig cfg;
  fs::path base = ".";
  if (!f.config.empty()) {
    cfg = config::load(f.config);
    base = fs::path(f.config).parent_path();
  } else {
    cfg = config::parse(json::object());
  }
  if (f.kz_count) cfg = config::with_override(cfg, "numerics", "kz_count", *f.kz_count, base);
  if (f.grid) cfg = config::with_override(cfg, "numerics", "grid", *f.grid, base);
  if (f.seed) cfg = config::with_override(cfg, "numerics", "seed", *f.seed, base);
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.threads < 1) throw ConfigError("--threads: must be at least 1");
  cfg.threads = f.threads;
  return cfg;
}

bool wants(const config::RunConfig& cfg, const std::string& format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

int run(const std::string& subcommand, const Flags& flags,
        const std::function<pipeline::Outcome(const config::RunConfig&)>& body) {
  try {
    const config::RunConfig cfg = effective_config(flags);
    const fs::path out_dir = cfg.out_dir;
    io::RunLock lock(out_dir);
    const std::string hash = config::config_hash(cfg, subcommand);
    json report;
    int code = 0;
    if (auto cached = io::cache_lookup(out_dir, hash)) {
      report = std::move(*cached);
      code = report.value("exit_code", 0);
      std::cerr << "cache hit " << hash << "\n";
    } else {
      pipeline::Outcome outcome = body(cfg);
      outcome.report["exit_code"] = outcome.exit_code;
      report = outcome.report;
      code = outcome.exit_code;
      if (wants(cfg, "csv")) {
        for (const auto& [name, text] : outcome.tables) io::write_text(out_dir / name, text);
      }
      io::cache_store(out_dir, hash, report);
    }
    if (wants(cfg, "json")) io::write_text(out_dir / (subcommand + ".json"), report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pipeline::kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return pipeline::kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pipeline::kConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screw-dislocation weak topological insulator laboratory"};
  app.set_version_flag("--version", std::string(SCREWDISLOC_VERSION));
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory (overrides output.directory)");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--kz-count", flags.kz_count, "number of kz points");
    sub->add_option("--grid", flags.grid, "Brillouin-zone grid per direction");
    sub->add_option("--seed", flags.seed, "random seed (disorder and lift trials)");
    sub->callback([&chosen, name] { chosen = name; });
  };
  add("bulk-invariants", "weak Chern vector of the bulk model");
  add("dislocation-spectrum", "kz sweep, spectral flow, winding and sigma_screw");
  add("verify", "bulk, prediction and dislocation measurements with agreement flags");
  add("predict", "symbolic dislocation index from the weak vector and Burgers vector");
  add("lift-test", "random kernel lifts: norm bound and multiplicativity defect");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pipeline::kConfigError;
  }

  if (chosen == "bulk-invariants") return run(chosen, flags, pipeline::run_bulk);
  if (chosen == "dislocation-spectrum") return run(chosen, flags, pipeline::run_dislocation);
  if (chosen == "verify") return run(chosen, flags, pipeline::run_verify);
  if (chosen == "predict") return run(chosen, flags, pipeline::run_predict);
  return run(chosen, flags, pipeline::run_lift_test);
}
