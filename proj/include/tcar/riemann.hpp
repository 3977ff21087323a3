#pragma once
// Diagonal (Riemann) coordinates for the linearized system: exponentially scaled
// characteristic variables, the resulting space-varying couplings, and the
// boundary reflection data.
#include <vector>

#include <Eigen/Dense>

#include "tcar/model.hpp"

namespace tcar {

struct SpatialGrid {
  double L = 0;
  int nodes = 0;  // uniformly spaced sample points including both ends
  double h() const { return L / (nodes - 1); }
  double x(int i) const { return i * h(); }
};

// w ordering: slots 1..3 move rightward with speeds (v2s, l3, v1s), slot 4 moves
// leftward with speed -LambdaMinus = l4 < 0.  The dynamics in these variables are
//   w_t + LambdaPlus w_x  = SigmaPP(x) w + SigmaPM(x) w4
//   w4_t - LambdaMinus w4_x = SigmaMP(x) w
// with w = D(x) Theta^-1 ztilde and D = diag(scale_diag).
struct RiemannSystem {
  SpatialGrid grid;
  EquilibriumState eq;
  Eigen::Vector4d lambdaW;      // (v2s, l3, v1s, l4)
  Eigen::Vector3d LambdaPlus;   // downstream speeds
  double LambdaMinus = 0;       // upstream speed magnitude, -l4
  Eigen::Matrix4d Theta, ThetaInv;
  Eigen::Matrix4d Jhat;
  Eigen::Vector4d JhatDiag;

  // Coupling coefficients sampled at the grid nodes; off-node queries use
  // linear interpolation via the accessors below.
  std::vector<Eigen::Matrix3d> SigmaPPs;
  std::vector<Eigen::Vector3d> SigmaPMs;
  std::vector<Eigen::RowVector3d> SigmaMPs;
  std::vector<Eigen::Vector4d> scales;  // scale_diag at the nodes

  Eigen::Vector3d Q0bar;       // inlet reflection w+(0) = Q0bar w4(0)
  Eigen::RowVector3d R1bar;    // outlet reflection w4(L) = R1bar w+(L) + scaled input
  double kappa = 0;            // actuation coefficient of the outlet flow condition

  Eigen::Vector4d scale_diag(double x) const;  // exact exponential scaling
  Eigen::Matrix3d sigma_pp(double x) const;
  Eigen::Vector3d sigma_pm(double x) const;
  Eigen::RowVector3d sigma_mp(double x) const;
  // Rows 1..3 and row 4 of D(x) Theta^-1: physical perturbation -> w at one point.
  Eigen::Matrix<double, 3, 4> Tu_inv(double x) const;
  Eigen::RowVector4d Tl_inv(double x) const;
};

struct BoundaryMatrices {
  Eigen::Vector3d Q0bar;
  Eigen::RowVector3d R1bar;
  double kappa = 0;
};

BoundaryMatrices boundary_matrices(const EquilibriumState& eq, const CharacteristicBasis& cb,
                                   double L);

RiemannSystem build_riemann_system(const EquilibriumState& eq, const CharacteristicBasis& cb,
                                   const SpatialGrid& grid);

// Fields are 4 x nodes; columns are grid points.  to_riemann takes the physical
// perturbation (absolute state minus equilibrium).
Eigen::Matrix4Xd to_riemann(const Eigen::Matrix4Xd& pert, const RiemannSystem& rs);
Eigen::Matrix4Xd from_riemann(const Eigen::Matrix4Xd& w, const RiemannSystem& rs);

}  // namespace tcar
