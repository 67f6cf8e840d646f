#include <gtest/gtest.h>

#include <filesystem>

#include "screwdisloc/config.hpp"
#include "screwdisloc/io.hpp"

using namespace screwdisloc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string config_error(const json& doc) {
  try {
    (void)config::parse(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = config::parse(json::object());
  EXPECT_EQ(cfg.numerics.kz_count, 64);
  EXPECT_EQ(cfg.lattice.L, 12);
  EXPECT_EQ(cfg.model.name, "qwz");
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error({{"lattice", {{"L", "twelve"}}}}).find("lattice.L"), std::string::npos);
  EXPECT_NE(config_error({{"numerics", {{"kz_cont", 3}}}}).find("numerics.kz_cont"), std::string::npos);
  EXPECT_NE(config_error({{"lattice", {{"burgers", {0, 0, 2}}}}}).find("lattice.burgers"), std::string::npos);
  EXPECT_NE(config_error({{"lattice", {{"boundary", "mobius"}}}}).find("lattice.boundary"), std::string::npos);
  EXPECT_NE(config_error({{"bogus", 1}}).find("bogus"), std::string::npos);
}

TEST(Config, HashIgnoresOutputButNotNumerics) {
  const auto a = config::parse({{"output", {{"directory", "x"}}}});
  const auto b = config::parse({{"output", {{"directory", "y"}}}});
  const auto c = config::parse({{"numerics", {{"kz_count", 32}}}});
  EXPECT_EQ(config::config_hash(a, "verify"), config::config_hash(b, "verify"));
  EXPECT_NE(config::config_hash(a, "verify"), config::config_hash(c, "verify"));
  EXPECT_NE(config::config_hash(a, "verify"), config::config_hash(a, "predict"));
}

TEST(Config, OverridesFlowIntoTheHash) {
  const auto a = config::parse(json::object());
  const auto b = config::with_override(a, "numerics", "seed", 9, ".");
  EXPECT_EQ(b.numerics.seed, 9u);
  EXPECT_NE(config::config_hash(a, "lift-test"), config::config_hash(b, "lift-test"));
}

TEST(Config, CustomModelRoundTrip) {
  const HoppingModel m = qwz_stack(-1.0, Plane::yz);
  const json doc = config::model_document(m);
  const HoppingModel back = config::parse_model_document(doc, "model.");
  ASSERT_EQ(back.hops.size(), m.hops.size());
  for (const auto& [r, A] : m.hops) EXPECT_EQ((back.hop(r) - A).norm(), 0.0);
}

TEST(Config, CustomModelRejectsBadShape) {
  json doc = {{"orbitals", 2}, {"hops", {{{"r", {0, 0, 0}}, {"A", {{1.0, 0.0}}}}}}};
  EXPECT_THROW(config::parse_model_document(doc, "model."), ConfigError);
}

TEST(Io, LatticeDocument) {
  const json d = io::lattice_document(build_lattice(2, Boundary::open()));
  EXPECT_EQ(d["version"], 1);
  EXPECT_EQ(d["sites"].size(), 25u);
  EXPECT_EQ(d["cut_bonds"].size(), 2u);
  EXPECT_EQ(d["frame"].size(), 3u);
}

TEST(Io, CacheAndLock) {
  const fs::path dir = fs::temp_directory_path() / "screwdisloc_io_test";
  fs::remove_all(dir);
  const json r = {{"a", 1.0 / 3.0}, {"b", {1, 2}}};
  EXPECT_FALSE(io::cache_lookup(dir, "abc").has_value());
  io::cache_store(dir, "abc", r);
  EXPECT_EQ(io::cache_lookup(dir, "abc").value(), r);
  {
    io::RunLock lock(dir);
    EXPECT_THROW(io::RunLock second(dir), ConfigError);
  }
  EXPECT_NO_THROW(io::RunLock again(dir));
  fs::remove_all(dir);
}

TEST(Io, NumbersRoundTrip) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::num(v)), v);
}
