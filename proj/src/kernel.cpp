#include "tcar/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tcar {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct Lines {
  std::vector<Eigen::Matrix3Xd> K;
  std::vector<Eigen::VectorXd> L11;
};

}  // namespace

KernelSolution solve_kernels(const RiemannSystem& rs, const TriangularGrid& grid,
                             double tol, int max_iter) {
  const int N = grid.nodes;
  const double h = grid.h();
  if (N < 8) throw validation_error("kernel grid needs at least 8 nodes per edge");
  if (!(grid.L > 0)) throw validation_error("kernel grid needs positive length");
  if (!(tol > 0)) throw validation_error("kernel tolerance must be positive");
  if (max_iter < 1) throw validation_error("kernel max_iter must be at least 1");

  const Eigen::Vector3d lamp = rs.LambdaPlus;
  const double l4 = -rs.LambdaMinus;

  // Explicit characteristic marching resolves the couplings only if they vary
  // slowly over one cell relative to the transport, mirroring a CFL condition.
  double smax = 0;
  for (int j = 0; j < rs.grid.nodes; ++j) {
    Eigen::Matrix4d F = Eigen::Matrix4d::Zero();
    F.topLeftCorner<3, 3>() = rs.SigmaPPs[j];
    F.topRightCorner<3, 1>() = rs.SigmaPMs[j];
    F.bottomLeftCorner<1, 3>() = rs.SigmaMPs[j];
    smax = std::max(smax, F.cwiseAbs().rowwise().sum().maxCoeff());
  }
  const double gap = lamp.minCoeff() - l4;
  if (h * smax / gap > 0.5)
    throw validation_error("kernel grid too coarse for the coupling strength: h * |Sigma| / "
                           "(lambda_min - lambda4) = " +
                           num(h * smax / gap));

  const Eigen::Vector3d ds = (h / (lamp.array() - l4)).matrix();          // characteristic step
  const Eigen::Vector3d fr = (lamp.array() / (lamp.array() - l4)).matrix();  // base fraction

  // Coupling samples at the nodes and at the per-component base abscissae.
  std::vector<Eigen::Matrix3d> SPP(N);
  std::vector<Eigen::Vector3d> SPM(N);
  std::vector<Eigen::RowVector3d> SMP(N);
  Eigen::Matrix3Xd KD(3, N);  // diagonal values
  for (int j = 0; j < N; ++j) {
    const double x = grid.x(j);
    SPP[j] = rs.sigma_pp(x);
    SPM[j] = rs.sigma_pm(x);
    SMP[j] = rs.sigma_mp(x);
    KD.col(j) = -(SMP[j].transpose().array() / (lamp.array() - l4)).matrix();
  }
  std::vector<Eigen::Matrix3Xd> SPPbc(3);  // column c of SigmaPP at base points
  std::vector<Eigen::RowVectorXd> SMPbc(3);
  for (int c = 0; c < 3; ++c) {
    SPPbc[c].resize(3, N - 1);
    SMPbc[c].resize(N - 1);
    for (int j = 0; j < N - 1; ++j) {
      const double xb = grid.x(j) + fr[c] * h;
      SPPbc[c].col(j) = rs.sigma_pp(xb).col(c);
      SMPbc[c][j] = rs.sigma_mp(xb)[c];
    }
  }

  const Eigen::Vector3d lamQ = lamp.cwiseProduct(rs.Q0bar);

  auto rebuild_L11 = [&](const std::vector<Eigen::Matrix3Xd>& K,
                         std::vector<Eigen::VectorXd>& L11) {
    // On each offset line the defining integral runs along the line itself, so a
    // running trapezoid plus the first-node trace term gives every value.
    for (int d = 0; d < N; ++d) {
      const int n = N - d;
      L11[d].resize(n);
      const double trace = K[d].col(0).dot(lamQ);
      double acc = 0;
      double gPrev = K[d].col(0).dot(SPM[0]);
      L11[d][0] = trace / (-l4);
      for (int j = 1; j < n; ++j) {
        const double gCur = K[d].col(j).dot(SPM[j]);
        acc += h / 2 * (gPrev + gCur);
        gPrev = gCur;
        L11[d][j] = (trace + acc) / (-l4);
      }
    }
  };

  Lines cur;
  cur.K.resize(N);
  cur.L11.resize(N);
  // Start from the diagonal data transported along each characteristic to its
  // foot on the diagonal.
  for (int d = 0; d < N; ++d) {
    cur.K[d].resize(3, N - d);
    for (int j = 0; j < N - d; ++j)
      for (int c = 0; c < 3; ++c) {
        const double xd = (grid.x(j + d) * lamp[c] - grid.x(j) * l4) / (lamp[c] - l4);
        double t = xd / h;
        if (t < 0) t = 0;
        if (t > N - 1) t = N - 1;
        const int i0 = std::min(static_cast<int>(t), N - 2);
        const double f = t - i0;
        cur.K[d](c, j) = (1 - f) * KD(c, i0) + f * KD(c, i0 + 1);
      }
  }
  rebuild_L11(cur.K, cur.L11);

  KernelSolution ks;
  ks.grid = grid;
  Lines nxt;
  nxt.K.resize(N);
  nxt.L11.resize(N);
  for (int d = 0; d < N; ++d) nxt.K[d].resize(3, N - d);

  for (int it = 1; it <= max_iter; ++it) {
    nxt.K[0] = KD;
    for (int d = 1; d < N; ++d) {
      const int n = N - d;
      const Eigen::Matrix3Xd& prevNew = nxt.K[d - 1];
      const Eigen::Matrix3Xd& prevOld = cur.K[d - 1];
      const Eigen::VectorXd& prevL = cur.L11[d - 1];
      for (int j = 0; j < n; ++j) {
        for (int c = 0; c < 3; ++c) {
          // Transported value from the already-updated neighbouring line; the
          // coupling terms lag one sweep behind.
          const double kb = (1 - fr[c]) * prevNew(c, j) + fr[c] * prevNew(c, j + 1);
          const Eigen::Vector3d Kb =
              (1 - fr[c]) * prevOld.col(j) + fr[c] * prevOld.col(j + 1);
          const double Lb = (1 - fr[c]) * prevL[j] + fr[c] * prevL[j + 1];
          const double Rb = Kb.dot(SPPbc[c].col(j)) + Lb * SMPbc[c][j];
          const double Rn = cur.K[d].col(j).dot(SPP[j].col(c)) + cur.L11[d][j] * SMP[j][c];
          nxt.K[d](c, j) = kb + ds[c] / 2 * (Rb + Rn);
        }
      }
    }
    rebuild_L11(nxt.K, nxt.L11);

    double diff = 0;
    for (int d = 0; d < N; ++d) {
      diff = std::max(diff, (nxt.K[d] - cur.K[d]).cwiseAbs().maxCoeff());
      diff = std::max(diff, (nxt.L11[d] - cur.L11[d]).cwiseAbs().maxCoeff());
    }
    std::swap(cur.K, nxt.K);
    std::swap(cur.L11, nxt.L11);
    ks.sweepDiffs.push_back(diff);
    if (diff < tol) {
      ks.lineK = std::move(cur.K);
      ks.lineL11 = std::move(cur.L11);
      ks.iterations = it;
      ks.residual = diff;
      return ks;
    }
  }
  throw numerical_error("kernel iteration did not converge in " + std::to_string(max_iter) +
                        " sweeps; last change = " + num(ks.sweepDiffs.back()));
}

namespace {

// Shared barycentric interpolation over the triangulated quarter-plane cells.
template <class F>
auto tri_interp(const KernelSolution& ks, double x, double xi, F value)
    -> decltype(value(0, 0)) {
  const int N = ks.grid.nodes;
  const double h = ks.grid.h();
  double tx = x / h, ty = xi / h;
  if (tx < 0) tx = 0;
  if (tx > N - 1) tx = N - 1;
  if (ty < 0) ty = 0;
  if (ty > N - 1) ty = N - 1;
  int i = std::min(static_cast<int>(tx), N - 2);
  int j = std::min(static_cast<int>(ty), N - 2);
  if (j > i) j = i;
  const double u = tx - i;
  const double v = std::min(ty - j, tx - j);  // clamp to the triangle xi <= x
  if (v <= u || j + 1 > i)
    return (1 - u) * value(i, j) + (u - v) * value(i + 1, j) + v * value(i + 1, j + 1);
  return (1 - v) * value(i, j) + (v - u) * value(i, j + 1) + u * value(i + 1, j + 1);
}

}  // namespace

Eigen::RowVector3d kernel_K_interp(const KernelSolution& ks, double x, double xi) {
  return tri_interp(ks, x, xi,
                    [&](int i, int j) -> Eigen::RowVector3d { return ks.K_at(i, j); });
}

double kernel_L11_interp(const KernelSolution& ks, double x, double xi) {
  return tri_interp(ks, x, xi, [&](int i, int j) { return ks.L11_at(i, j); });
}

TopRows sample_top_rows(const KernelSolution& ks, const SpatialGrid& grid) {
  const int N = ks.grid.nodes;
  const double h = ks.grid.h();
  Eigen::Matrix3Xd Ktop(3, N);
  Eigen::VectorXd Ltop(N);
  for (int j = 0; j < N; ++j) {
    Ktop.col(j) = ks.K_at(N - 1, j).transpose();
    Ltop[j] = ks.L11_at(N - 1, j);
  }
  TopRows out;
  out.K.resize(3, grid.nodes);
  out.L11.resize(grid.nodes);
  for (int m = 0; m < grid.nodes; ++m) {
    double t = grid.x(m) / h;
    if (t < 0) t = 0;
    if (t > N - 1) t = N - 1;
    const int i0 = std::min(static_cast<int>(t), N - 2);
    const double f = t - i0;
    out.K.col(m) = (1 - f) * Ktop.col(i0) + f * Ktop.col(i0 + 1);
    out.L11[m] = (1 - f) * Ltop[i0] + f * Ltop[i0 + 1];
  }
  return out;
}

double kernel_residual(const KernelSolution& ks, const RiemannSystem& rs, int refine) {
  if (refine < 1) throw validation_error("residual refine factor must be at least 1");
  const int N = ks.grid.nodes;
  const int Ne = (N - 1) * refine + 1;
  const double L = ks.grid.L;
  const double he = L / (Ne - 1);
  const Eigen::Vector3d lamp = rs.LambdaPlus;
  const double l4 = -rs.LambdaMinus;
  const Eigen::Vector3d lamQ = lamp.cwiseProduct(rs.Q0bar);

  double rmax = 0;

  // Transport defect via one-sided differences along the exact characteristics.
  for (int i = 1; i < Ne - 1; ++i) {
    const double x = i * he;
    for (int j = 1; j < i; ++j) {
      const double xi = j * he;
      const Eigen::RowVector3d Kc = kernel_K_interp(ks, x, xi);
      const double Lc = kernel_L11_interp(ks, x, xi);
      const Eigen::Matrix3d spp = rs.sigma_pp(xi);
      const Eigen::RowVector3d smp = rs.sigma_mp(xi);
      for (int c = 0; c < 3; ++c) {
        const double dsl = 0.5 * he / (lamp[c] - l4);
        const double xb = x - l4 * dsl, xib = xi - lamp[c] * dsl;
        double dd;
        if (xb <= L && xib >= 0)
          dd = (Kc[c] - kernel_K_interp(ks, xb, xib)[c]) / dsl;
        else
          dd = (kernel_K_interp(ks, x + l4 * dsl, xi + lamp[c] * dsl)[c] - Kc[c]) / dsl;
        const double rr = dd + Kc.dot(spp.col(c)) + Lc * smp[c];
        rmax = std::max(rmax, std::abs(rr));
      }
    }
  }

  // Diagonal compatibility.
  for (int i = 0; i < Ne; ++i) {
    const double x = i * he;
    const Eigen::RowVector3d Kc = kernel_K_interp(ks, x, x);
    const Eigen::RowVector3d smp = rs.sigma_mp(x);
    for (int c = 0; c < 3; ++c)
      rmax = std::max(rmax, std::abs(Kc[c] * (lamp[c] - l4) + smp[c]));
  }

  // Defect of the integral relation defining L11, re-quadratured on the
  // evaluation grid along each upstream characteristic.
  for (int i = 1; i < Ne; ++i) {
    const double x = i * he;
    for (int j = 0; j <= i; ++j) {
      const double xi = j * he;
      const double trace = kernel_K_interp(ks, x - xi, 0).dot(lamQ);
      double acc = 0;
      double gPrev = kernel_K_interp(ks, x - xi, 0).dot(rs.sigma_pm(0.0));
      for (int m = 1; m <= j; ++m) {
        const double sig = (j - m) * he;  // distance still to walk toward the edge
        const double gCur =
            kernel_K_interp(ks, x - sig, xi - sig).dot(rs.sigma_pm(xi - sig));
        acc += he / 2 * (gPrev + gCur);
        gPrev = gCur;
      }
      const double want = (trace + acc) / (-l4);
      rmax = std::max(rmax, std::abs(kernel_L11_interp(ks, x, xi) - want));
    }
  }
  return rmax;
}

}  // namespace tcar
