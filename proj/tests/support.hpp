#pragma once
// Shared fixtures for the test suite: the benchmark scenario, random parameter
// draws, and small helpers.
#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include <tcar/controller.hpp>
#include <tcar/kernel.hpp>
#include <tcar/model.hpp>
#include <tcar/riemann.hpp>

namespace tsup {

inline tcar::ModelParams benchmark_params() {
  tcar::ModelParams p;
  p.V1 = 33.3;
  p.V2 = 25.0;
  p.gamma1 = 2.6;
  p.gamma2 = 1.8;
  p.AObar1 = 0.85;
  p.AObar2 = 0.80;
  p.tau1 = 40.0;
  p.tau2 = 60.0;
  p.a1 = 5.0;
  p.a2 = 12.0;
  p.W = 7.5;
  p.L = 1250.0;
  return p;
}

inline constexpr double bench_rho1 = 0.40;
inline constexpr double bench_rho2 = 0.18;

struct Pipeline {
  tcar::ModelParams params;
  tcar::EquilibriumState eq;
  tcar::CharacteristicBasis cb;
  tcar::RiemannSystem rs;
};

// Benchmark equilibrium diagonalized on a grid with the given node count.
inline Pipeline benchmark_pipeline(int nodes) {
  Pipeline p;
  p.params = benchmark_params();
  p.eq = tcar::equilibrium_from_densities(bench_rho1, bench_rho2, p.params);
  p.cb = tcar::characteristic_basis(p.eq);
  p.rs = tcar::build_riemann_system(p.eq, p.cb, tcar::SpatialGrid{p.params.L, nodes});
  return p;
}

inline std::mt19937_64 make_rng(std::uint64_t seed = 20260823ull) {
  return std::mt19937_64(seed);
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * ((rng() >> 11) * 0x1.0p-53);
}

struct Draw {
  tcar::ModelParams p;
  double rho1 = 0, rho2 = 0;
};

// One parameter draw from wide physically sensible ranges; the densities target
// a fraction of the tighter saturation occupancy so the state is feasible by
// construction, but the speed ordering can still fail and is not checked here.
inline Draw propose_draw(std::mt19937_64& rng) {
  Draw d;
  d.p.V1 = uniform(rng, 25, 40);
  d.p.V2 = d.p.V1 * uniform(rng, 0.55, 0.85);
  d.p.gamma1 = uniform(rng, 1.5, 3.5);
  d.p.gamma2 = uniform(rng, 1.3, 3.0);
  d.p.AObar1 = uniform(rng, 0.75, 0.95);
  d.p.AObar2 = uniform(rng, 0.70, 0.92);
  d.p.tau1 = uniform(rng, 30, 120);
  d.p.tau2 = uniform(rng, 30, 120);
  d.p.a1 = uniform(rng, 4, 8);
  d.p.a2 = uniform(rng, 10, 18);
  d.p.W = uniform(rng, 6, 12);
  d.p.L = uniform(rng, 800, 2000);
  const double ao = uniform(rng, 0.3, 0.8) * std::min(d.p.AObar1, d.p.AObar2);
  const double share = uniform(rng, 0.2, 0.8);
  d.rho1 = share * ao * d.p.W / d.p.a1;
  d.rho2 = (1 - share) * ao * d.p.W / d.p.a2;
  return d;
}

// Retries until the equilibrium exists (speed ordering can reject a proposal).
inline Draw valid_draw(std::mt19937_64& rng) {
  for (;;) {
    Draw d = propose_draw(rng);
    try {
      tcar::equilibrium_from_densities(d.rho1, d.rho2, d.p);
      return d;
    } catch (const tcar::validation_error&) {
    }
  }
}

// Retries until the equilibrium is congested (needed for the diagonal form).
inline Draw congested_draw(std::mt19937_64& rng) {
  for (;;) {
    Draw d = valid_draw(rng);
    const auto eq = tcar::equilibrium_from_densities(d.rho1, d.rho2, d.p);
    if (tcar::characteristic_basis(eq).regime == tcar::Regime::Congested) return d;
  }
}

// Runs f and returns the validation message it throws; fails the test if it
// does not throw.  Keeps message checks independent of the doctest version.
template <class E = tcar::validation_error, class F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

inline bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace tsup
