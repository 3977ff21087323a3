#include "tcar/controller.hpp"

namespace tcar {

FeedbackGains build_gains(const RiemannSystem& rs, const KernelSolution& ks) {
  FeedbackGains g;
  g.grid = rs.grid;
  const double L = rs.grid.L;
  g.pref = rs.kappa / rs.scale_diag(L)[3];
  g.tF = L / rs.lambdaW[0] + L / rs.LambdaMinus;

  g.boundaryGain = -g.pref * (rs.R1bar * rs.Tu_inv(L));

  const TopRows top = sample_top_rows(ks, rs.grid);
  g.integralGain.resize(rs.grid.nodes);
  for (int j = 0; j < rs.grid.nodes; ++j) {
    const double x = rs.grid.x(j);
    g.integralGain[j] =
        g.pref * (top.K.col(j).transpose() * rs.Tu_inv(x) + top.L11[j] * rs.Tl_inv(x));
  }
  return g;
}

double control_input(const FeedbackGains& g, const Eigen::Matrix4Xd& state,
                     const EquilibriumState& eq) {
  const int M = g.grid.nodes;
  if (state.cols() != M)
    throw validation_error("state has " + std::to_string(state.cols()) +
                           " columns but the gain grid has " + std::to_string(M) + " nodes");
  const Eigen::Vector4d zs(eq.rho1s, eq.v1s, eq.rho2s, eq.v2s);
  const double h = g.grid.h();
  double acc = 0;
  for (int j = 0; j < M; ++j) {
    const double wj = (j == 0 || j == M - 1) ? h / 2 : h;
    acc += wj * g.integralGain[j].dot(state.col(j) - zs);
  }
  return g.boundaryGain.dot(state.col(M - 1) - zs) + acc;
}

void backstepping_transform(const Eigen::Matrix4Xd& w, const KernelSolution& ks,
                            const SpatialGrid& grid, Eigen::Matrix3Xd& alpha,
                            Eigen::VectorXd& beta) {
  const int M = grid.nodes;
  if (w.cols() != M)
    throw validation_error("field has " + std::to_string(w.cols()) +
                           " columns but the grid has " + std::to_string(M) + " nodes");
  const double h = grid.h();
  alpha = w.topRows<3>();
  beta.resize(M);
  for (int i = 0; i < M; ++i) {
    double acc = 0;
    if (i > 0) {
      const double x = grid.x(i);
      for (int j = 0; j <= i; ++j) {
        const double wj = (j == 0 || j == i) ? h / 2 : h;
        const double xi = grid.x(j);
        acc += wj * (kernel_K_interp(ks, x, xi).dot(w.col(j).head<3>()) +
                     kernel_L11_interp(ks, x, xi) * w(3, j));
      }
    }
    beta[i] = w(3, i) - acc;
  }
}

}  // namespace tcar
