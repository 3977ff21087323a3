#include "tcar/riemann.hpp"

#include <cmath>
#include <sstream>

namespace tcar {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Linear interpolation of per-node samples on a uniform grid.
template <class T>
T lerp_samples(const std::vector<T>& s, const SpatialGrid& g, double x) {
  double t = x / g.h();
  if (t < 0) t = 0;
  if (t > g.nodes - 1) t = g.nodes - 1;
  int i = std::min(static_cast<int>(t), g.nodes - 2);
  const double f = t - i;
  return (1 - f) * s[i] + f * s[i + 1];
}

}  // namespace

Eigen::Vector4d RiemannSystem::scale_diag(double x) const {
  return (-JhatDiag.cwiseQuotient(lambdaW) * x).array().exp();
}

Eigen::Matrix3d RiemannSystem::sigma_pp(double x) const {
  return lerp_samples(SigmaPPs, grid, x);
}

Eigen::Vector3d RiemannSystem::sigma_pm(double x) const {
  return lerp_samples(SigmaPMs, grid, x);
}

Eigen::RowVector3d RiemannSystem::sigma_mp(double x) const {
  return lerp_samples(SigmaMPs, grid, x);
}

Eigen::Matrix<double, 3, 4> RiemannSystem::Tu_inv(double x) const {
  const Eigen::Vector4d s = scale_diag(x);
  return s.head<3>().asDiagonal() * ThetaInv.topRows<3>();
}

Eigen::RowVector4d RiemannSystem::Tl_inv(double x) const {
  return scale_diag(x)[3] * ThetaInv.row(3);
}

BoundaryMatrices boundary_matrices(const EquilibriumState& eq, const CharacteristicBasis& cb,
                                   double L) {
  BoundaryMatrices bm;
  const Eigen::RowVector4d c(eq.v1s, eq.rho1s, eq.v2s, eq.rho2s);

  // Inlet: rho1 = 0, rho2 = 0, and zero total flow perturbation on z(0) = Theta w(0).
  Eigen::Matrix<double, 3, 4> B0;
  B0 << 1, 0, 0, 0, 0, 0, 1, 0, c;
  const Eigen::Matrix<double, 3, 4> G = B0 * cb.Theta;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(G.leftCols<3>());
  if (!lu.isInvertible())
    throw numerical_error("inlet boundary system is singular");
  bm.Q0bar = lu.solve(-G.col(3));

  bm.kappa = c * cb.Theta.col(3);
  if (std::abs(bm.kappa) < 1e-12 * c.norm())
    throw validation_error("outlet flow condition cannot drive the upstream wave: kappa = " +
                           num(bm.kappa));

  // Outlet: the flow condition acts on z(L) = Theta diag(1/scale(L)) w(L).
  const Eigen::Vector4d lamW = cb.lambda_w();
  const Eigen::Vector4d sL =
      (-cb.Jhat.diagonal().cwiseQuotient(lamW) * L).array().exp();
  const Eigen::RowVector4d g = (c * cb.Theta).cwiseQuotient(sL.transpose());
  bm.R1bar = -g.head<3>() / g[3];
  return bm;
}

RiemannSystem build_riemann_system(const EquilibriumState& eq, const CharacteristicBasis& cb,
                                   const SpatialGrid& grid) {
  if (cb.regime == Regime::Degenerate)
    throw validation_error("characteristic speeds are degenerate; no diagonal form");
  if (cb.regime != Regime::Congested)
    throw validation_error("equilibrium not congested: lambda4 = " + num(cb.lambda[3]));
  if (grid.nodes < 2 || !(grid.L > 0))
    throw validation_error("spatial grid needs positive length and at least 2 nodes");

  RiemannSystem rs;
  rs.grid = grid;
  rs.eq = eq;
  rs.lambdaW = cb.lambda_w();
  rs.LambdaPlus = rs.lambdaW.head<3>();
  rs.LambdaMinus = -rs.lambdaW[3];
  rs.Theta = cb.Theta;
  rs.ThetaInv = cb.Theta.inverse();
  rs.Jhat = cb.Jhat;
  rs.JhatDiag = cb.Jhat.diagonal();

  rs.scales.resize(grid.nodes);
  rs.SigmaPPs.resize(grid.nodes);
  rs.SigmaPMs.resize(grid.nodes);
  rs.SigmaMPs.resize(grid.nodes);
  for (int j = 0; j < grid.nodes; ++j) {
    const Eigen::Vector4d s = rs.scale_diag(grid.x(j));
    rs.scales[j] = s;
    Eigen::Matrix4d F = rs.Jhat.cwiseProduct(s * s.cwiseInverse().transpose());
    F.diagonal().setZero();
    rs.SigmaPPs[j] = F.topLeftCorner<3, 3>();
    rs.SigmaPMs[j] = F.topRightCorner<3, 1>();
    rs.SigmaMPs[j] = F.bottomLeftCorner<1, 3>();
  }

  const BoundaryMatrices bm = boundary_matrices(eq, cb, grid.L);
  rs.Q0bar = bm.Q0bar;
  rs.R1bar = bm.R1bar;
  rs.kappa = bm.kappa;
  return rs;
}

Eigen::Matrix4Xd to_riemann(const Eigen::Matrix4Xd& pert, const RiemannSystem& rs) {
  if (pert.cols() != rs.grid.nodes)
    throw validation_error("field has " + std::to_string(pert.cols()) +
                           " columns but the grid has " + std::to_string(rs.grid.nodes) +
                           " nodes");
  Eigen::Matrix4Xd w(4, pert.cols());
  for (int j = 0; j < pert.cols(); ++j)
    w.col(j) = rs.scales[j].cwiseProduct(rs.ThetaInv * pert.col(j));
  return w;
}

Eigen::Matrix4Xd from_riemann(const Eigen::Matrix4Xd& w, const RiemannSystem& rs) {
  if (w.cols() != rs.grid.nodes)
    throw validation_error("field has " + std::to_string(w.cols()) +
                           " columns but the grid has " + std::to_string(rs.grid.nodes) +
                           " nodes");
  Eigen::Matrix4Xd z(4, w.cols());
  for (int j = 0; j < w.cols(); ++j)
    z.col(j) = rs.Theta * w.col(j).cwiseQuotient(rs.scales[j]);
  return z;
}

}  // namespace tcar
