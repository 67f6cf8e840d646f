#pragma once

// End-to-end runs behind the command-line subcommands. Each run returns the
// report document, any CSV tables, and the exit status it implies.

#include <chrono>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "screwdisloc/coarselift.hpp"
#include "screwdisloc/config.hpp"
#include "screwdisloc/dislocation.hpp"
#include "screwdisloc/invariants.hpp"
#include "screwdisloc/io.hpp"
#include "screwdisloc/kalgebra.hpp"

#ifndef SCREWDISLOC_VERSION
#define SCREWDISLOC_VERSION "0.0.0"
#endif

namespace screwdisloc::pipeline {

using nlohmann::json;

enum ExitCode : int { kSuccess = 0, kDisagreement = 1, kNumericalFailure = 2, kConfigError = 3 };

struct Outcome {
  json report;
  std::map<std::string, std::string> tables;  // file name -> CSV text
  int exit_code = kSuccess;
};

/// Agreement threshold between a real-valued estimator and the flow.
inline constexpr double kEstimatorTolerance = 0.1;

namespace detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline json header(const config::RunConfig& cfg, const std::string& subcommand) {
  return {{"subcommand", subcommand},
          {"config_hash", config::config_hash(cfg, subcommand)},
          {"tool_version", SCREWDISLOC_VERSION},
          {"seed", cfg.numerics.seed}};
}

inline json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"nearest", e.nearest}, {"distance", e.distance}};
}

}  // namespace detail

inline Outcome run_bulk(const config::RunConfig& cfg) {
  detail::Stopwatch sw;
  const HoppingModel model = config::build_model(cfg);
  Outcome out;
  out.report = detail::header(cfg, "bulk-invariants");
  std::vector<ChernResult> lattice_results;
  json weil = json::array();
  for (Plane p : {Plane::yz, Plane::zx, Plane::xy}) {
    lattice_results.push_back(chern_lattice(model, p, cfg.numerics.mu, cfg.numerics.grid, cfg.threads));
    weil.push_back(chern_weil(model, p, cfg.numerics.mu, cfg.numerics.grid, cfg.threads).value_integral);
  }
  out.report["weak_vector"] = {lattice_results[0].value_integer, lattice_results[1].value_integer,
                               lattice_results[2].value_integer};
  out.report["chern_weil_integrals"] = weil;
  out.report["grid"] = cfg.numerics.grid;
  out.report["timings"] = {{"bulk", sw.lap()}};
  out.tables["bulk_grid.csv"] = io::bulk_grid_csv(lattice_results);
  return out;
}

inline std::array<long long, 3> weak_part(const config::RunConfig& cfg, unsigned threads) {
  if (cfg.kclass) return *cfg.kclass;
  return weak_vector(config::build_model(cfg), cfg.numerics.mu, cfg.numerics.grid, threads);
}

inline long long predicted_index(const std::array<long long, 3>& weak, const config::RunConfig& cfg) {
  const auto c = kalgebra::KClass::weak(weak[0], weak[1], weak[2]);
  return kalgebra::boundary_map(c, burgers_frame(cfg.lattice.burgers));
}

inline Outcome run_predict(const config::RunConfig& cfg) {
  detail::Stopwatch sw;
  Outcome out;
  out.report = detail::header(cfg, "predict");
  const auto weak = weak_part(cfg, cfg.threads);
  out.report["weak_vector"] = weak;
  out.report["burgers"] = cfg.lattice.burgers;
  out.report["predicted_index"] = predicted_index(weak, cfg);
  out.report["timings"] = {{"predict", sw.lap()}};
  return out;
}

struct DislocationResult {
  SpectralData data;
  FlowResult flow;
  Estimate winding;
  Estimate sigma;
};

inline DislocationResult measure_dislocation(const config::RunConfig& cfg, json& timings) {
  detail::Stopwatch sw;
  const HoppingModel model = config::build_model(cfg);
  const DislocatedLattice lat = config::build_lattice(cfg);
  SweepOptions so;
  so.kz_count = cfg.numerics.kz_count;
  so.mu = cfg.numerics.mu;
  so.rho = cfg.numerics.rho;
  so.threads = cfg.threads;
  DislocationResult r{kz_sweep(model, lat, so), {}, {}, {}};
  timings["sweep"] = sw.lap();
  FlowOptions fo;
  fo.rho = cfg.numerics.rho;
  fo.weight_threshold = cfg.numerics.weight_threshold;
  r.flow = spectral_flow_detail(r.data, fo);
  timings["flow"] = sw.lap();
  r.winding = localized_winding(r.data, ChiFunction{cfg.numerics.eps}, cfg.numerics.rho);
  if (r.winding.distance >= 0.25) {
    throw ConvergenceError("localized_winding: " + std::to_string(r.winding.value) + " is not near an integer");
  }
  timings["winding"] = sw.lap();
  r.sigma = sigma_screw(r.data, WindowFunction{cfg.numerics.window_lo, cfg.numerics.window_hi, cfg.numerics.ramp},
                        cfg.numerics.rho);
  timings["sigma_screw"] = sw.lap();
  return r;
}

inline void fill_dislocation(json& report, const DislocationResult& r) {
  report["spectral_flow"] = r.flow.per_core.at(0);
  report["core_flows"] = r.flow.per_core;
  report["unfiltered_flow"] = r.flow.unfiltered;
  report["localized_winding"] = detail::estimate_json(r.winding);
  report["sigma_screw"] = detail::estimate_json(r.sigma);
  report["gap_window"] = {r.data.gap_lo, r.data.gap_hi};
  report["kz_count"] = r.data.slices.size();
}

inline Outcome run_dislocation(const config::RunConfig& cfg) {
  Outcome out;
  out.report = detail::header(cfg, "dislocation-spectrum");
  json timings = json::object();
  const DislocationResult r = measure_dislocation(cfg, timings);
  fill_dislocation(out.report, r);
  out.report["timings"] = timings;
  out.tables["spectra.csv"] = io::spectra_csv(r.data);
  return out;
}

inline Outcome run_verify(const config::RunConfig& cfg) {
  Outcome out;
  out.report = detail::header(cfg, "verify");
  json timings = json::object();
  detail::Stopwatch sw;
  const auto weak = weak_vector(config::build_model(cfg), cfg.numerics.mu, cfg.numerics.grid, cfg.threads);
  timings["bulk"] = sw.lap();
  const long long predicted = predicted_index(weak, cfg);
  const DislocationResult r = measure_dislocation(cfg, timings);
  out.report["weak_vector"] = weak;
  out.report["predicted_index"] = predicted;
  fill_dislocation(out.report, r);
  const long long flow = r.flow.per_core.at(0);
  const bool winding_ok = std::abs(r.winding.value - static_cast<double>(flow)) < kEstimatorTolerance;
  const bool sigma_ok = std::abs(r.sigma.value - static_cast<double>(flow)) < kEstimatorTolerance;
  const bool predicted_ok = predicted == flow;
  const bool all = winding_ok && sigma_ok && predicted_ok;
  out.report["agreement"] = {{"localized_winding", winding_ok},
                             {"sigma_screw", sigma_ok},
                             {"predicted_index", predicted_ok},
                             {"all", all}};
  out.report["timings"] = timings;
  out.tables["spectra.csv"] = io::spectra_csv(r.data);
  out.exit_code = all ? kSuccess : kDisagreement;
  return out;
}

struct LiftStatistics {
  int trials = 0;
  int norm_failures = 0;
  int radius_failures = 0;
  double worst_norm_ratio = 0.0;  // ||lift|| / bound
  double worst_radius_excess = -1e300;  // radius - (R + S + 2)
  double max_radius = 0.0;
};

/// Random kernel pairs with propagation in [1, max_R] on the box of half-width L.
inline LiftStatistics lift_trials(int trials, int L, int max_R, double kz, std::uint64_t seed, unsigned threads) {
  const DislocatedLattice lat = screwdisloc::build_lattice(L, Boundary::open());
  struct Trial {
    double ratio = 0.0;
    bool norm_ok = true;
    double radius = 0.0;
    double excess = 0.0;
  };
  std::vector<Trial> res(static_cast<std::size_t>(trials));
  parallel_for(res.size(), threads, [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> pick(1, max_R);
    const int R = pick(rng);
    const int S = pick(rng);
    const auto K = coarselift::random_kernel(L, R, rng);
    const auto M = coarselift::random_kernel(L, S, rng);
    const auto nk = coarselift::norm_bound_check(K, lat, kz);
    const auto nm = coarselift::norm_bound_check(M, lat, kz);
    const auto d = coarselift::multiplicativity_defect(K, M, lat, kz);
    Trial& out = res[t];
    out.ratio = std::max(nk.lifted / nk.bound, nm.lifted / nm.bound);
    out.norm_ok = nk.holds() && nm.holds();
    out.radius = d.support_radius;
    out.excess = d.support_radius - static_cast<double>(R + S + 2);
  });
  LiftStatistics st;
  st.trials = trials;
  for (const Trial& t : res) {
    st.norm_failures += t.norm_ok ? 0 : 1;
    st.radius_failures += t.excess > 1e-12 ? 1 : 0;
    st.worst_norm_ratio = std::max(st.worst_norm_ratio, t.ratio);
    st.worst_radius_excess = std::max(st.worst_radius_excess, t.excess);
    st.max_radius = std::max(st.max_radius, t.radius);
  }
  return st;
}

inline Outcome run_lift_test(const config::RunConfig& cfg) {
  detail::Stopwatch sw;
  Outcome out;
  out.report = detail::header(cfg, "lift-test");
  const LiftStatistics st =
      lift_trials(cfg.lift.trials, cfg.lift.L, cfg.lift.max_R, cfg.lift.kz, cfg.numerics.seed, cfg.threads);
  out.report["trials"] = st.trials;
  out.report["L"] = cfg.lift.L;
  out.report["max_R"] = cfg.lift.max_R;
  out.report["norm_bound_failures"] = st.norm_failures;
  out.report["worst_norm_ratio"] = st.worst_norm_ratio;
  out.report["radius_contract_failures"] = st.radius_failures;
  out.report["worst_radius_excess"] = st.worst_radius_excess;
  out.report["max_defect_radius"] = st.max_radius;
  out.report["timings"] = {{"lift", sw.lap()}};
  out.exit_code = st.norm_failures == 0 && st.radius_failures == 0 ? kSuccess : kDisagreement;
  return out;
}

}  // namespace screwdisloc::pipeline
