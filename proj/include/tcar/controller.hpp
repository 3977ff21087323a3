#pragma once
// Full-state feedback through the kernel-weighted integral transform, and the
// transform itself for diagnostics.
#include <vector>

#include <Eigen/Dense>

#include "tcar/kernel.hpp"

namespace tcar {

struct FeedbackGains {
  SpatialGrid grid;                 // sample grid of the integral gain
  Eigen::RowVector4d boundaryGain;  // acts on the state at x = L
  std::vector<Eigen::RowVector4d> integralGain;  // per node, acts on the profile
  double tF = 0;    // finite settling horizon L / v2s + L / LambdaMinus
  double pref = 0;  // kappa / scale4(L): converts the scaled w-side input to U
};

FeedbackGains build_gains(const RiemannSystem& rs, const KernelSolution& ks);

// Control value for an absolute physical state (rows rho1, v1, rho2, v2) sampled
// on gains.grid.  The integral term uses the trapezoid rule on that grid.
double control_input(const FeedbackGains& g, const Eigen::Matrix4Xd& state,
                     const EquilibriumState& eq);

// w field -> (alpha, beta) on the given grid; beta subtracts the kernel-weighted
// integral of the profile up to each point.
void backstepping_transform(const Eigen::Matrix4Xd& w, const KernelSolution& ks,
                            const SpatialGrid& grid, Eigen::Matrix3Xd& alpha,
                            Eigen::VectorXd& beta);

}  // namespace tcar
