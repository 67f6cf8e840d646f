#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
};

Invocation invoke(const std::string& args) {
  const std::string cmd = std::string(SCREWDISLOC_CLI) + " " + args + " 2>/dev/null";
  Invocation r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("screwdisloc_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, PredictFromKClass) {
  const fs::path d = scratch("predict");
  const auto cfg = write_config(d, {{"lattice", {{"burgers", {1, 0, 1}}}}, {"kclass", {{"yz", 2}, {"zx", 5}, {"xy", 3}}}});
  const Invocation r = invoke("predict --config " + cfg.string() + " --out " + (d / "out").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["predicted_index"], 5);
}

TEST(Cli, BulkInvariantsOfTrivialModel) {
  const fs::path d = scratch("bulk");
  const auto cfg = write_config(d, {{"model", {{"name", "trivial"}}}});
  const Invocation r = invoke("bulk-invariants --config " + cfg.string() + " --grid 12 --out " + (d / "out").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["weak_vector"], json({0, 0, 0}));
  EXPECT_EQ(slurp(d / "out" / "bulk_grid.csv").rfind("plane,k1,k2,berry_flux\n", 0), 0u);
}

TEST(Cli, MalformedConfigExitsThree) {
  const fs::path d = scratch("bad");
  const auto cfg = write_config(d, {{"lattice", {{"L", -4}}}});
  EXPECT_EQ(invoke("verify --config " + cfg.string() + " --out " + (d / "out").string()).code, 3);
  EXPECT_EQ(invoke("verify --threads 0").code, 3);
  EXPECT_EQ(invoke("no-such-subcommand").code, 3);
}

TEST(Cli, WindowOutsideGapExitsTwo) {
  const fs::path d = scratch("window");
  const auto cfg = write_config(d, {{"lattice", {{"L", 4}}}, {"numerics", {{"kz_count", 16}, {"window", {-1.5, 1.5}}}}});
  EXPECT_EQ(invoke("dislocation-spectrum --config " + cfg.string() + " --out " + (d / "out").string()).code, 2);
}

TEST(Cli, DislocationSpectrumCsvAndCache) {
  const fs::path d = scratch("spectrum");
  const auto cfg = write_config(d, {{"model", {{"name", "trivial"}}}, {"lattice", {{"L", 4}}}});
  const std::string args = "dislocation-spectrum --config " + cfg.string() + " --kz-count 16 --out " + (d / "out").string();
  const Invocation first = invoke(args);
  ASSERT_EQ(first.code, 0);
  EXPECT_EQ(json::parse(first.out)["spectral_flow"], 0);
  EXPECT_EQ(slurp(d / "out" / "spectra.csv").rfind("kz,state_index,energy,core_weight\n", 0), 0u);
  const std::string report = slurp(d / "out" / "dislocation-spectrum.json");
  const Invocation second = invoke(args);
  EXPECT_EQ(second.code, 0);
  EXPECT_EQ(second.out, first.out);
  EXPECT_EQ(slurp(d / "out" / "dislocation-spectrum.json"), report);
}

TEST(Cli, LockedDirectoryIsRefused) {
  const fs::path d = scratch("lock");
  fs::create_directories(d / "out");
  std::ofstream(d / "out" / ".lock") << "1\n";
  EXPECT_EQ(invoke("predict --out " + (d / "out").string()).code, 3);
}
