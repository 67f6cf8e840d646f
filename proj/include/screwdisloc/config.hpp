#pragma once

// Run configuration: JSON parsing with field-path errors, validation, and the
// canonical hash that names cache entries.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "screwdisloc/errors.hpp"
#include "screwdisloc/kalgebra.hpp"
#include "screwdisloc/lattice.hpp"
#include "screwdisloc/models.hpp"

namespace screwdisloc::config {

using nlohmann::json;

struct ModelSpec {
  std::string name = "qwz";  // qwz | trivial | custom
  double m = -1.0;
  Plane plane = Plane::xy;
  int orbitals = 2;
  double gap = 1.0;
  std::optional<HoppingModel> custom;
};

struct LatticeSpec {
  int L = 12;
  BoundaryKind boundary = BoundaryKind::OpenSingleCore;
  int separation = 0;
  double R = 0.0;
  IntVec3 burgers{0, 0, 1};
};

struct Numerics {
  int kz_count = 64;
  int grid = 48;
  double mu = 0.0;
  double eps = 0.6;
  double rho = 4.0;
  double weight_threshold = 0.5;
  double window_lo = -0.4;
  double window_hi = 0.4;
  double ramp = 0.1;
  double disorder = 0.0;
  std::uint64_t seed = 1;
};

struct LiftSpec {
  int trials = 100;
  int L = 14;
  int max_R = 2;
  double kz = 1.0;
};

struct RunConfig {
  ModelSpec model;
  LatticeSpec lattice;
  Numerics numerics;
  LiftSpec lift;
  std::optional<std::array<long long, 3>> kclass;  // (c_yz, c_zx, c_xy) given directly
  std::string out_dir = "out";
  std::vector<std::string> formats{"json", "csv"};
  unsigned threads = 1;
  json source;  // the parsed document with overrides applied
};

// ---------------------------------------------------------------------------
// Field access with paths

namespace detail {

inline const json* find(const json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path, T fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  try {
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, long long> || std::is_same_v<T, std::uint64_t>) {
      if (!v->is_number_integer()) throw ConfigError(path + key + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) throw ConfigError(path + key + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) throw ConfigError(path + key + ": expected a string");
    }
    return v->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + key + ": " + e.what());
  }
}

inline std::array<long long, 3> int3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path + ": expected an array of three integers");
  std::array<long long, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number_integer()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected an integer");
    out[i] = v[i].get<long long>();
  }
  return out;
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError((path.empty() ? std::string("config") : path) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok) throw ConfigError(path + key + ": unknown field");
  }
}

}  // namespace detail

/// Hopping model from the model-file schema:
/// {"orbitals": N, "hops": [{"r": [n, m, l], "A": [[re, im], ...]}], "disorder": {...}}.
/// "A" lists the N*N entries in row-major order.
inline HoppingModel parse_model_document(const json& j, const std::string& path) {
  detail::reject_unknown(j, path, {"orbitals", "hops", "disorder", "name"});
  HoppingModel model;
  model.name = detail::get<std::string>(j, "name", path, "custom");
  model.orbitals = detail::get<int>(j, "orbitals", path, 0);
  if (model.orbitals < 1) throw ConfigError(path + "orbitals: must be a positive integer");
  const json* hops = detail::find(j, "hops");
  if (hops == nullptr || !hops->is_array()) throw ConfigError(path + "hops: expected an array");
  const int N = model.orbitals;
  for (std::size_t h = 0; h < hops->size(); ++h) {
    const std::string hp = path + "hops[" + std::to_string(h) + "].";
    const json& entry = (*hops)[h];
    detail::reject_unknown(entry, hp, {"r", "A"});
    const json* r = detail::find(entry, "r");
    if (r == nullptr) throw ConfigError(hp + "r: missing");
    const auto rv = detail::int3(*r, hp + "r");
    const json* a = detail::find(entry, "A");
    if (a == nullptr || !a->is_array() || a->size() != static_cast<std::size_t>(N * N)) {
      throw ConfigError(hp + "A: expected " + std::to_string(N * N) + " [re, im] pairs");
    }
    CMatrix A(N, N);
    for (int k = 0; k < N * N; ++k) {
      const json& z = (*a)[static_cast<std::size_t>(k)];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
        throw ConfigError(hp + "A[" + std::to_string(k) + "]: expected [re, im]");
      }
      A(k / N, k % N) = cplx(z[0].get<double>(), z[1].get<double>());
    }
    const Hop key{static_cast<int>(rv[0]), static_cast<int>(rv[1]), static_cast<int>(rv[2])};
    if (model.hops.contains(key)) throw ConfigError(hp + "r: duplicate hop vector");
    model.hops[key] = A;
  }
  if (const json* d = detail::find(j, "disorder")) {
    detail::reject_unknown(*d, path + "disorder.", {"strength", "seed"});
    model.disorder.strength = detail::get<double>(*d, "strength", path + "disorder.", 0.0);
    model.disorder.seed = detail::get<std::uint64_t>(*d, "seed", path + "disorder.", 0);
  }
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + "hops: " + e.what());
  }
  return model;
}

inline json model_document(const HoppingModel& model) {
  json hops = json::array();
  for (const auto& [r, A] : model.hops) {
    json entries = json::array();
    for (Index i = 0; i < A.rows(); ++i)
      for (Index k = 0; k < A.cols(); ++k) entries.push_back({A(i, k).real(), A(i, k).imag()});
    hops.push_back({{"r", {r[0], r[1], r[2]}}, {"A", entries}});
  }
  return {{"name", model.name},
          {"orbitals", model.orbitals},
          {"hops", hops},
          {"disorder", {{"strength", model.disorder.strength}, {"seed", model.disorder.seed}}}};
}

/// Parses and validates a configuration document. Relative model-file paths
/// are resolved against base_dir.
inline RunConfig parse(const json& doc, const std::filesystem::path& base_dir = ".") {
  RunConfig cfg;
  cfg.source = doc;
  detail::reject_unknown(doc, "", {"model", "lattice", "numerics", "lift_test", "kclass", "output"});

  if (const json* m = detail::find(doc, "model")) {
    const std::string p = "model.";
    if (const json* file = detail::find(*m, "file")) {
      detail::reject_unknown(*m, p, {"file"});
      if (!file->is_string()) throw ConfigError("model.file: expected a string");
      std::filesystem::path path = file->get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      std::ifstream in(path);
      if (!in) throw ConfigError("model.file: cannot open " + path.string());
      json inner;
      try {
        inner = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError("model.file: " + std::string(e.what()));
      }
      cfg.model.name = "custom";
      cfg.model.custom = parse_model_document(inner, "model.file:");
    } else if (detail::find(*m, "hops") != nullptr) {
      cfg.model.name = "custom";
      cfg.model.custom = parse_model_document(*m, p);
    } else {
      detail::reject_unknown(*m, p, {"name", "m", "plane", "orbitals", "gap"});
      cfg.model.name = detail::get<std::string>(*m, "name", p, "qwz");
      if (cfg.model.name == "qwz") {
        cfg.model.m = detail::get<double>(*m, "m", p, -1.0);
        try {
          cfg.model.plane = parse_plane(detail::get<std::string>(*m, "plane", p, "xy"));
        } catch (const std::invalid_argument& e) {
          throw ConfigError("model.plane: " + std::string(e.what()));
        }
        for (double bad : {0.0, 2.0, -2.0}) {
          if (std::abs(cfg.model.m - bad) < 1e-12) throw ConfigError("model.m: gapless mass");
        }
      } else if (cfg.model.name == "trivial") {
        cfg.model.orbitals = detail::get<int>(*m, "orbitals", p, 2);
        cfg.model.gap = detail::get<double>(*m, "gap", p, 1.0);
        if (cfg.model.orbitals < 1) throw ConfigError("model.orbitals: must be positive");
        if (cfg.model.gap <= 0.0) throw ConfigError("model.gap: must be positive");
      } else {
        throw ConfigError("model.name: unknown built-in model '" + cfg.model.name + "'");
      }
    }
  }

  if (const json* l = detail::find(doc, "lattice")) {
    const std::string p = "lattice.";
    detail::reject_unknown(*l, p, {"L", "boundary", "separation", "R", "burgers"});
    cfg.lattice.L = detail::get<int>(*l, "L", p, 12);
    const std::string b = detail::get<std::string>(*l, "boundary", p, "open");
    if (b == "open") cfg.lattice.boundary = BoundaryKind::OpenSingleCore;
    else if (b == "dipole") cfg.lattice.boundary = BoundaryKind::TorusDipole;
    else throw ConfigError("lattice.boundary: expected 'open' or 'dipole'");
    cfg.lattice.separation = detail::get<int>(*l, "separation", p, cfg.lattice.L);
    cfg.lattice.R = detail::get<double>(*l, "R", p, 0.0);
    if (const json* bv = detail::find(*l, "burgers")) cfg.lattice.burgers = detail::int3(*bv, "lattice.burgers");
    if (cfg.lattice.L < 2) throw ConfigError("lattice.L: must be at least 2");
    if (cfg.lattice.R < 0.0 || cfg.lattice.R >= cfg.lattice.L) throw ConfigError("lattice.R: must lie in [0, L)");
    if (cfg.lattice.boundary == BoundaryKind::TorusDipole &&
        (cfg.lattice.separation < 1 || cfg.lattice.separation >= 2 * cfg.lattice.L)) {
      throw ConfigError("lattice.separation: must lie in [1, 2L)");
    }
    try {
      (void)burgers_frame(cfg.lattice.burgers);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("lattice.burgers: " + std::string(e.what()));
    }
  }

  if (const json* n = detail::find(doc, "numerics")) {
    const std::string p = "numerics.";
    detail::reject_unknown(*n, p, {"kz_count", "grid", "mu", "eps", "rho", "weight_threshold", "window", "ramp",
                                   "disorder", "seed"});
    auto& x = cfg.numerics;
    x.kz_count = detail::get<int>(*n, "kz_count", p, x.kz_count);
    x.grid = detail::get<int>(*n, "grid", p, x.grid);
    x.mu = detail::get<double>(*n, "mu", p, x.mu);
    x.eps = detail::get<double>(*n, "eps", p, x.eps);
    x.rho = detail::get<double>(*n, "rho", p, x.rho);
    x.weight_threshold = detail::get<double>(*n, "weight_threshold", p, x.weight_threshold);
    x.ramp = detail::get<double>(*n, "ramp", p, x.ramp);
    x.disorder = detail::get<double>(*n, "disorder", p, x.disorder);
    x.seed = detail::get<std::uint64_t>(*n, "seed", p, x.seed);
    if (const json* w = detail::find(*n, "window")) {
      if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number() || !(*w)[1].is_number()) {
        throw ConfigError("numerics.window: expected [lo, hi]");
      }
      x.window_lo = (*w)[0].get<double>();
      x.window_hi = (*w)[1].get<double>();
    }
  }
  const auto& x = cfg.numerics;
  if (x.kz_count < 16) throw ConfigError("numerics.kz_count: must be at least 16");
  if (x.grid < 4) throw ConfigError("numerics.grid: must be at least 4");
  if (x.eps <= 0.0) throw ConfigError("numerics.eps: must be positive");
  if (x.rho < 0.0) throw ConfigError("numerics.rho: must be non-negative");
  if (x.weight_threshold <= 0.0 || x.weight_threshold >= 1.0) {
    throw ConfigError("numerics.weight_threshold: must lie in (0, 1)");
  }
  if (!(x.window_lo < x.window_hi)) throw ConfigError("numerics.window: lo must be below hi");
  if (x.ramp < 0.0) throw ConfigError("numerics.ramp: must be non-negative");
  if (x.disorder < 0.0) throw ConfigError("numerics.disorder: must be non-negative");

  if (const json* t = detail::find(doc, "lift_test")) {
    const std::string p = "lift_test.";
    detail::reject_unknown(*t, p, {"trials", "L", "max_R", "kz"});
    cfg.lift.trials = detail::get<int>(*t, "trials", p, cfg.lift.trials);
    cfg.lift.L = detail::get<int>(*t, "L", p, cfg.lift.L);
    cfg.lift.max_R = detail::get<int>(*t, "max_R", p, cfg.lift.max_R);
    cfg.lift.kz = detail::get<double>(*t, "kz", p, cfg.lift.kz);
    if (cfg.lift.trials < 1) throw ConfigError("lift_test.trials: must be positive");
    if (cfg.lift.max_R < 1) throw ConfigError("lift_test.max_R: must be positive");
    if (2 * cfg.lift.max_R >= cfg.lift.L) throw ConfigError("lift_test.L: must exceed 2 * max_R");
  }

  if (const json* k = detail::find(doc, "kclass")) {
    detail::reject_unknown(*k, "kclass.", {"yz", "zx", "xy"});
    cfg.kclass = std::array<long long, 3>{detail::get<long long>(*k, "yz", "kclass.", 0),
                                          detail::get<long long>(*k, "zx", "kclass.", 0),
                                          detail::get<long long>(*k, "xy", "kclass.", 0)};
  }

  if (const json* o = detail::find(doc, "output")) {
    detail::reject_unknown(*o, "output.", {"directory", "formats"});
    cfg.out_dir = detail::get<std::string>(*o, "directory", "output.", cfg.out_dir);
    if (const json* f = detail::find(*o, "formats")) {
      if (!f->is_array()) throw ConfigError("output.formats: expected an array");
      cfg.formats.clear();
      for (const auto& v : *f) {
        if (!v.is_string() || (v != "json" && v != "csv")) {
          throw ConfigError("output.formats: entries must be 'json' or 'csv'");
        }
        cfg.formats.push_back(v.get<std::string>());
      }
    }
  }
  return cfg;
}

inline RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse(doc, path.parent_path());
}

/// Applies a command-line override to the document, then re-parses.
inline RunConfig with_override(const RunConfig& cfg, const std::string& section, const std::string& key,
                               const json& value, const std::filesystem::path& base_dir = ".") {
  json doc = cfg.source;
  doc[section][key] = value;
  RunConfig out = parse(doc, base_dir);
  out.threads = cfg.threads;
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

/// Hash of the canonical (sorted-key, compact) dump of the effective
/// configuration for one subcommand. Output location and thread count do not
/// change results and are left out.
inline std::string config_hash(const RunConfig& cfg, const std::string& subcommand) {
  json canon = cfg.source;
  canon.erase("output");
  json keyed = {{"subcommand", subcommand}, {"config", canon}};
  if (cfg.model.custom) keyed["model_document"] = model_document(*cfg.model.custom);
  return hex64(fnv1a(keyed.dump()));
}

// ---------------------------------------------------------------------------
// Builders

inline HoppingModel build_model(const RunConfig& cfg) {
  HoppingModel model;
  if (cfg.model.custom) {
    model = *cfg.model.custom;
  } else if (cfg.model.name == "qwz") {
    model = qwz_stack(cfg.model.m, cfg.model.plane);
  } else {
    model = trivial(cfg.model.orbitals, cfg.model.gap);
  }
  if (cfg.numerics.disorder > 0.0) {
    model.disorder.strength = cfg.numerics.disorder;
    model.disorder.seed = cfg.numerics.seed;
  }
  return model;
}

inline DislocatedLattice build_lattice(const RunConfig& cfg) {
  const Boundary b = cfg.lattice.boundary == BoundaryKind::TorusDipole ? Boundary::dipole(cfg.lattice.separation)
                                                                       : Boundary::open();
  return screwdisloc::build_lattice(cfg.lattice.L, b, cfg.lattice.R, burgers_frame(cfg.lattice.burgers));
}

}  // namespace screwdisloc::config
