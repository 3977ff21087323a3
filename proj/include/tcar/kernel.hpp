#pragma once
// Goursat-type kernel equations on the triangle 0 <= xi <= x <= L, solved by
// marching along characteristics with Picard iteration on the coupling terms.
#include <vector>

#include <Eigen/Dense>

#include "tcar/riemann.hpp"

namespace tcar {

struct TriangularGrid {
  double L = 0;
  int nodes = 0;  // per edge; node (i, j) sits at (x_i, xi_j), j <= i
  double h() const { return L / (nodes - 1); }
  double x(int i) const { return i * h(); }
};

struct KernelSolution {
  TriangularGrid grid;
  // Storage by diagonal offset d = i - j: lineK[d] is 3 x (nodes - d) and its
  // column j holds the row kernel K at node (j + d, j); lineL11[d] likewise.
  std::vector<Eigen::Matrix3Xd> lineK;
  std::vector<Eigen::VectorXd> lineL11;
  int iterations = 0;
  double residual = 0;             // max change in the final Picard sweep
  std::vector<double> sweepDiffs;  // per-sweep max change

  Eigen::RowVector3d K_at(int i, int j) const { return lineK[i - j].col(j).transpose(); }
  double L11_at(int i, int j) const { return lineL11[i - j][j]; }
};

KernelSolution solve_kernels(const RiemannSystem& rs, const TriangularGrid& grid,
                             double tol = 1e-8, int max_iter = 200);

// Piecewise-linear (triangular barycentric) interpolation of the solution fields.
Eigen::RowVector3d kernel_K_interp(const KernelSolution& ks, double x, double xi);
double kernel_L11_interp(const KernelSolution& ks, double x, double xi);

// Kernels along the outlet edge x = L resampled onto a simulation grid.
struct TopRows {
  Eigen::Matrix3Xd K;   // 3 x nodes
  Eigen::VectorXd L11;  // nodes
};
TopRows sample_top_rows(const KernelSolution& ks, const SpatialGrid& grid);

// Max defect of the kernel transport equations, the diagonal compatibility
// condition, and the integral relation defining L11, evaluated on the solve grid
// refined `refine`-fold.
double kernel_residual(const KernelSolution& ks, const RiemannSystem& rs, int refine = 1);

}  // namespace tcar
