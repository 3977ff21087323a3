#pragma once
// Time integration of the linearized dynamics in Riemann coordinates:
// first-order upwind transport, explicit coupling terms, boundary feedback.
#include <vector>

#include <Eigen/Dense>

#include "tcar/controller.hpp"

namespace tcar {

enum class SimMode { OpenLoop, ClosedLoop, TargetSystem };

struct SimConfig {
  int N = 400;           // cells; the grid has N + 1 nodes
  double cfl = 0.9;      // in (0, 1]
  double tEnd = -1;      // <= 0 runs to 1.1 * tF
  SimMode mode = SimMode::OpenLoop;
  int outputStride = 0;  // steps between stored frames; 0 picks ~120 frames
};

struct SimResult {
  double tF = 0;
  double dtUsed = 0;
  // Per-step series including the initial state.  U holds the control in effect
  // at each time (zero in open loop); betaL tracks the transformed outlet value
  // when kernels are available.
  std::vector<double> stepTimes, U, supNorm, l2Norm, betaL;
  double beta0Sup = 0;  // sup |beta| of the initial state (when kernels are available)
  double betaLMax = 0;  // max |beta(L, t)| over every step with t > 0
  std::vector<double> frameTimes;
  std::vector<Eigen::Matrix4Xd> frames;     // absolute fields (rho1, v1, rho2, v2)
  std::vector<Eigen::VectorXd> betaFrames;  // TargetSystem profiles
};

Eigen::Matrix4Xd initial_profiles(const EquilibriumState& eq, const ModelParams& p,
                                  const SpatialGrid& grid);

// One explicit update of the w field; returns the applied control (0 when gains
// is null, which selects the open-loop outlet reflection).  Throws
// numerical_error if dt violates the CFL bound.
double step(Eigen::Matrix4Xd& w, const RiemannSystem& rs, const FeedbackGains* gains, double dt);

// Perturbation norms of an absolute state, fields scaled by their equilibrium values.
double sup_norm_rel(const Eigen::Matrix4Xd& state, const EquilibriumState& eq);
double l2_norm_rel(const Eigen::Matrix4Xd& state, const EquilibriumState& eq,
                   const SpatialGrid& grid);

// ks may be null in open loop (skips the beta diagnostics); ClosedLoop needs
// gains and ks, TargetSystem needs ks.
SimResult run(const SimConfig& cfg, const ModelParams& p, const EquilibriumState& eq,
              const RiemannSystem& rs, const KernelSolution* ks, const FeedbackGains* gains);

}  // namespace tcar
