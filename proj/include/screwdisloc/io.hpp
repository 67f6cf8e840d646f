#pragma once

// Files: lattice documents, CSV tables, the report cache and the per-directory
// run lock.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "screwdisloc/dislocation.hpp"
#include "screwdisloc/errors.hpp"
#include "screwdisloc/invariants.hpp"
#include "screwdisloc/lattice.hpp"
#include "screwdisloc/operators.hpp"

namespace screwdisloc::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kLatticeSchemaVersion = 1;

inline json lattice_document(const DislocatedLattice& lat) {
  json sites = json::array();
  for (const Site& s : lat.sites()) sites.push_back({s.x, s.y});
  json removed = json::array();
  for (const Site& s : lat.removed_sites()) removed.push_back({s.x, s.y});
  json cuts = json::array();
  for (const CutBond& c : lat.cut_bonds()) cuts.push_back({c.from, c.to});
  json frame = json::array();
  for (const auto& row : lat.frame().T) frame.push_back({row[0], row[1], row[2]});
  json cores = json::array();
  for (const Point2& p : lat.cores()) cores.push_back({p.x, p.y});
  return {{"version", kLatticeSchemaVersion},
          {"half_width", lat.half_width()},
          {"boundary", lat.is_torus() ? "dipole" : "open"},
          {"separation", lat.boundary().separation},
          {"core_removal_radius", lat.core_removal_radius()},
          {"burgers", {lat.frame().b[0], lat.frame().b[1], lat.frame().b[2]}},
          {"frame", frame},
          {"cores", cores},
          {"sites", sites},
          {"removed_sites", removed},
          {"cut_bonds", cuts}};
}

/// Full precision, locale independent.
inline std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// kz,state_index,energy,core_weight for every state; the weight is the total
/// over all cores within the sweep radius.
inline std::string spectra_csv(const SpectralData& data) {
  std::ostringstream os;
  os << "kz,state_index,energy,core_weight\n";
  for (const KzSlice& s : data.slices) {
    for (Index i = 0; i < s.energies.size(); ++i) {
      double w = 0.0;
      for (const RVector& cw : s.core_weights) w += cw[i];
      os << num(s.kz) << ',' << i << ',' << num(s.energies[i]) << ',' << num(w) << '\n';
    }
  }
  return os.str();
}

/// plane,k1,k2,berry_flux per plaquette of the lattice Chern computation.
inline std::string bulk_grid_csv(const std::vector<ChernResult>& results) {
  std::ostringstream os;
  os << "plane,k1,k2,berry_flux\n";
  for (const ChernResult& r : results) {
    const double dk = kTwoPi / r.grid;
    for (std::size_t idx = 0; idx < r.plaquette_flux.size(); ++idx) {
      const auto i = static_cast<int>(idx) / r.grid;
      const auto j = static_cast<int>(idx) % r.grid;
      os << to_string(r.plane) << ',' << num(i * dk) << ',' << num(j * dk) << ',' << num(r.plaquette_flux[idx])
         << '\n';
    }
  }
  return os.str();
}

/// row,col,re,im for every stored entry.
inline std::string triplets_csv(const SparseC& m) {
  std::ostringstream os;
  os << "row,col,re,im\n";
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (SparseC::InnerIterator it(m, col); it; ++it) {
      os << it.row() << ',' << col << ',' << num(it.value().real()) << ',' << num(it.value().imag()) << '\n';
    }
  }
  return os.str();
}

inline fs::path cache_path(const fs::path& out_dir, const std::string& hash) {
  return out_dir / "cache" / (hash + ".json");
}

inline std::optional<json> cache_lookup(const fs::path& out_dir, const std::string& hash) {
  const fs::path p = cache_path(out_dir, hash);
  if (!fs::exists(p)) return std::nullopt;
  try {
    return json::parse(read_text(p));
  } catch (const json::exception&) {
    return std::nullopt;  // a damaged entry is recomputed
  }
}

inline void cache_store(const fs::path& out_dir, const std::string& hash, const json& report) {
  write_text(cache_path(out_dir, hash), report.dump(2) + "\n");
}

/// Exclusive lock on an output directory, released on destruction.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST) {
        throw ConfigError("output directory " + dir.string() + " is locked by another run (" + path_.string() + ")");
      }
      throw ConfigError("cannot create lock file " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    (void)!::write(fd_, pid.data(), pid.size());
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;
  ~RunLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

}  // namespace screwdisloc::io
