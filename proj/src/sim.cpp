#include "tcar/sim.hpp"

#include <cmath>
#include <sstream>

namespace tcar {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Eigen::Vector4d equilibrium_vector(const EquilibriumState& eq) {
  return {eq.rho1s, eq.v1s, eq.rho2s, eq.v2s};
}

double max_sigma_row_sum(const RiemannSystem& rs) {
  double smax = 0;
  for (int j = 0; j < rs.grid.nodes; ++j) {
    Eigen::Matrix4d F = Eigen::Matrix4d::Zero();
    F.topLeftCorner<3, 3>() = rs.SigmaPPs[j];
    F.topRightCorner<3, 1>() = rs.SigmaPMs[j];
    F.bottomLeftCorner<1, 3>() = rs.SigmaMPs[j];
    smax = std::max(smax, F.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return smax;
}

// Outlet value of the transformed variable: w4(L) minus the kernel-weighted
// integral of the whole profile.
double beta_at_outlet(const Eigen::Matrix4Xd& w, const TopRows& top, const SpatialGrid& g) {
  const int M = g.nodes;
  const double h = g.h();
  double acc = 0;
  for (int j = 0; j < M; ++j) {
    const double wj = (j == 0 || j == M - 1) ? h / 2 : h;
    acc += wj * (top.K.col(j).dot(w.col(j).head<3>()) + top.L11[j] * w(3, j));
  }
  return w(3, M - 1) - acc;
}

}  // namespace

Eigen::Matrix4Xd initial_profiles(const EquilibriumState& eq, const ModelParams& p,
                                  const SpatialGrid& grid) {
  Eigen::Matrix4Xd z(4, grid.nodes);
  const double pi = std::acos(-1.0);
  for (int j = 0; j < grid.nodes; ++j) {
    const double s = std::sin(4 * pi * grid.x(j) / p.L) / 4;
    z.col(j) << eq.rho1s * (1 + s), eq.v1s * (1 - s), eq.rho2s * (1 + s), eq.v2s * (1 - s);
  }
  return z;
}

double sup_norm_rel(const Eigen::Matrix4Xd& state, const EquilibriumState& eq) {
  const Eigen::Vector4d zs = equilibrium_vector(eq);
  return ((state.colwise() - zs).array().colwise() / zs.array()).abs().maxCoeff();
}

double l2_norm_rel(const Eigen::Matrix4Xd& state, const EquilibriumState& eq,
                   const SpatialGrid& grid) {
  const Eigen::Vector4d zs = equilibrium_vector(eq);
  const Eigen::Matrix4Xd rel = (state.colwise() - zs).array().colwise() / zs.array();
  const Eigen::VectorXd sq = rel.colwise().squaredNorm();
  double acc = 0;
  for (int j = 0; j + 1 < grid.nodes; ++j) acc += grid.h() / 2 * (sq[j] + sq[j + 1]);
  return std::sqrt(acc / grid.L);
}

double step(Eigen::Matrix4Xd& w, const RiemannSystem& rs, const FeedbackGains* gains,
            double dt) {
  const int M = rs.grid.nodes;
  if (w.cols() != M)
    throw validation_error("field has " + std::to_string(w.cols()) +
                           " columns but the grid has " + std::to_string(M) + " nodes");
  const double h = rs.grid.h();
  const double maxlam = rs.lambdaW.cwiseAbs().maxCoeff();
  if (dt * maxlam / h > 1 + 1e-12)
    throw numerical_error("CFL violated: dt * max|lambda| / h = " + num(dt * maxlam / h));

  Eigen::Matrix4Xd wn = w;
  // Upwind transport: downstream families difference to the left, the upstream
  // family to the right.
  for (int c = 0; c < 3; ++c) {
    const double cr = dt * rs.lambdaW[c] / h;
    for (int j = 1; j < M; ++j) wn(c, j) = w(c, j) - cr * (w(c, j) - w(c, j - 1));
  }
  {
    const double cr = dt * rs.lambdaW[3] / h;
    for (int j = 0; j < M - 1; ++j) wn(3, j) = w(3, j) - cr * (w(3, j + 1) - w(3, j));
  }
  // Explicit coupling source evaluated at the old state.
  for (int j = 0; j < M; ++j) {
    const Eigen::Vector3d wp = w.col(j).head<3>();
    const double w4 = w(3, j);
    wn.col(j).head<3>() += dt * (rs.SigmaPPs[j] * wp + rs.SigmaPMs[j] * w4);
    wn(3, j) += dt * rs.SigmaMPs[j].dot(wp);
  }
  // Inlet reflection uses the already-updated incoming value.
  wn.col(0).head<3>() = rs.Q0bar * wn(3, 0);

  double U = 0;
  if (!gains) {
    wn(3, M - 1) = rs.R1bar.dot(wn.col(M - 1).head<3>());
  } else {
    // The control is affine in the unknown outlet value w4(L); two evaluations
    // of the control law give the exact coefficients, then the outlet condition
    // w4(L) = R1bar w+(L) + U / pref is solved in closed form.
    const Eigen::Vector4d zs = equilibrium_vector(rs.eq);
    wn(3, M - 1) = 0;
    Eigen::Matrix4Xd zabs = from_riemann(wn, rs);
    zabs.colwise() += zs;
    const double U0 = control_input(*gains, zabs, rs.eq);
    wn(3, M - 1) = 1;
    zabs = from_riemann(wn, rs);
    zabs.colwise() += zs;
    const double dU = control_input(*gains, zabs, rs.eq) - U0;
    const double denom = 1 - dU / gains->pref;
    if (std::abs(denom) < 0.1)
      throw numerical_error("outlet feedback is nearly self-referential: denom = " +
                            num(denom));
    const double w4L = (rs.R1bar.dot(wn.col(M - 1).head<3>()) + U0 / gains->pref) / denom;
    wn(3, M - 1) = w4L;
    U = U0 + dU * w4L;
  }
  w = std::move(wn);
  return U;
}

SimResult run(const SimConfig& cfg, const ModelParams& p, const EquilibriumState& eq,
              const RiemannSystem& rs, const KernelSolution* ks, const FeedbackGains* gains) {
  if (cfg.N < 32) throw validation_error("simulation needs at least 32 cells");
  if (!(cfg.cfl > 0) || cfg.cfl > 1)
    throw validation_error("cfl must lie in (0, 1] (got " + num(cfg.cfl) + ")");
  if (rs.grid.nodes != cfg.N + 1)
    throw validation_error("system was sampled on " + std::to_string(rs.grid.nodes) +
                           " nodes but the simulation needs " + std::to_string(cfg.N + 1));
  if (cfg.mode == SimMode::ClosedLoop && (!gains || !ks))
    throw validation_error("closed-loop simulation needs feedback gains and kernels");
  if (cfg.mode == SimMode::TargetSystem && !ks)
    throw validation_error("target-system simulation needs kernels");

  SimResult res;
  res.tF = rs.grid.L / rs.lambdaW[0] + rs.grid.L / rs.LambdaMinus;
  const double tEnd = cfg.tEnd > 0 ? cfg.tEnd : 1.1 * res.tF;
  const double h = rs.grid.h();

  double dt = cfg.cfl * h / rs.lambdaW.cwiseAbs().maxCoeff();
  const double smax = max_sigma_row_sum(rs);
  while (dt * smax > 0.5) dt /= 2;
  const int nSteps = static_cast<int>(std::ceil(tEnd / dt * (1 - 1e-12)));
  dt = tEnd / nSteps;
  res.dtUsed = dt;
  const int stride =
      cfg.outputStride > 0 ? cfg.outputStride : std::max(1, nSteps / 120);

  const Eigen::Vector4d zs = equilibrium_vector(eq);
  const Eigen::Matrix4Xd z0 = initial_profiles(eq, p, rs.grid);
  Eigen::Matrix4Xd w = to_riemann(z0.colwise() - zs, rs);

  TopRows top;
  if (ks) {
    top = sample_top_rows(*ks, rs.grid);
    Eigen::Matrix3Xd alpha;
    Eigen::VectorXd beta;
    backstepping_transform(w, *ks, rs.grid, alpha, beta);
    res.beta0Sup = beta.cwiseAbs().maxCoeff();
  }

  if (cfg.mode == SimMode::TargetSystem) {
    // Pure upstream transport of the transformed variable with zero inflow.
    Eigen::Matrix3Xd alpha;
    Eigen::VectorXd beta;
    backstepping_transform(w, *ks, rs.grid, alpha, beta);
    const int M = rs.grid.nodes;
    const double cr = dt * rs.LambdaMinus / h;
    auto record = [&](int n) {
      res.stepTimes.push_back(n * dt);
      res.U.push_back(0);
      res.supNorm.push_back(beta.cwiseAbs().maxCoeff());
      Eigen::VectorXd sq = beta.cwiseAbs2();
      double acc = 0;
      for (int j = 0; j + 1 < M; ++j) acc += h / 2 * (sq[j] + sq[j + 1]);
      res.l2Norm.push_back(std::sqrt(acc / rs.grid.L));
      res.betaL.push_back(beta[M - 1]);
      // t = 0 may carry an incompatible corner value; the outlet condition only
      // acts from the first step on.
      if (n > 0) res.betaLMax = std::max(res.betaLMax, std::abs(beta[M - 1]));
      if (n % stride == 0 || n == nSteps) {
        res.frameTimes.push_back(n * dt);
        res.betaFrames.push_back(beta);
      }
    };
    record(0);
    for (int n = 1; n <= nSteps; ++n) {
      Eigen::VectorXd bn = beta;
      for (int j = 0; j < M - 1; ++j) bn[j] = beta[j] + cr * (beta[j + 1] - beta[j]);
      bn[M - 1] = 0;
      beta = std::move(bn);
      record(n);
    }
    return res;
  }

  const FeedbackGains* g = cfg.mode == SimMode::ClosedLoop ? gains : nullptr;
  auto record = [&](int n, double U) {
    res.stepTimes.push_back(n * dt);
    res.U.push_back(U);
    Eigen::Matrix4Xd zabs = from_riemann(w, rs);
    zabs.colwise() += zs;
    res.supNorm.push_back(sup_norm_rel(zabs, eq));
    res.l2Norm.push_back(l2_norm_rel(zabs, eq, rs.grid));
    double bl = 0;
    if (ks) {
      bl = beta_at_outlet(w, top, rs.grid);
      // skip t = 0: incompatible initial data can sit off the target manifold
      // until the outlet condition has acted once.
      if (n > 0) res.betaLMax = std::max(res.betaLMax, std::abs(bl));
    }
    res.betaL.push_back(bl);
    if (n % stride == 0 || n == nSteps) {
      res.frameTimes.push_back(n * dt);
      res.frames.push_back(zabs);
    }
  };

  double U0 = 0;
  if (g) {
    Eigen::Matrix4Xd zabs = from_riemann(w, rs);
    zabs.colwise() += zs;
    U0 = control_input(*g, zabs, eq);
  }
  record(0, U0);
  for (int n = 1; n <= nSteps; ++n) {
    const double U = step(w, rs, g, dt);
    record(n, U);
  }
  return res;
}

}  // namespace tcar
