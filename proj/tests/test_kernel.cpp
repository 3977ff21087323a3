#include <doctest.h>

#include <cmath>
#include <vector>

#include <tcar/kernel.hpp>

#include "support.hpp"

using namespace tcar;
using tsup::contains;
using tsup::thrown_message;

TEST_CASE("triangular interpolation reproduces node values") {
  const auto p = tsup::benchmark_pipeline(101);
  const TriangularGrid kg{p.params.L, 101};
  const auto ks = solve_kernels(p.rs, kg, 1e-9, 200);

  for (int i : {0, 1, 50, 99, 100})
    for (int j : {0, i / 3, i}) {
      if (j > i) continue;
      const double x = kg.x(i), xi = kg.x(j);
      CHECK(kernel_K_interp(ks, x, xi).isApprox(ks.K_at(i, j), 1e-13));
      CHECK(kernel_L11_interp(ks, x, xi) ==
            doctest::Approx(ks.L11_at(i, j)).epsilon(1e-13));
    }

  // A point interior to a cell stays within the surrounding node range.
  const double xm = kg.x(60) + 0.4 * kg.h(), xim = kg.x(20) + 0.7 * kg.h();
  const double v = kernel_L11_interp(ks, xm, xim);
  double lo = 1e300, hi = -1e300;
  for (int di = 0; di <= 1; ++di)
    for (int dj = 0; dj <= 1; ++dj) {
      lo = std::min(lo, ks.L11_at(60 + di, 20 + dj));
      hi = std::max(hi, ks.L11_at(60 + di, 20 + dj));
    }
  CHECK(v >= lo - 1e-15);
  CHECK(v <= hi + 1e-15);
}

TEST_CASE("benchmark kernel values and convergence") {
  const auto p = tsup::benchmark_pipeline(201);
  const TriangularGrid kg{p.params.L, 201};
  const auto ks = solve_kernels(p.rs, kg, 1e-12, 200);

  CHECK(ks.iterations < 40);
  CHECK(ks.residual < 1e-12);
  REQUIRE(ks.sweepDiffs.size() == static_cast<size_t>(ks.iterations));
  // Picard contraction: the sweep changes decrease monotonically at the tail.
  for (size_t i = 3; i < ks.sweepDiffs.size(); ++i)
    CHECK(ks.sweepDiffs[i] < ks.sweepDiffs[i - 1]);

  const int T = 200;
  auto near = [](double a, double b) {
    return std::abs(a - b) <= 1e-8 * std::abs(b) + 1e-11;
  };
  CHECK(near(ks.K_at(T, 0)[0], -9.0895690708897456e-05));
  CHECK(near(ks.K_at(T, 0)[2], -5.6979121009782379e-05));
  CHECK(near(ks.K_at(T, T)[0], -1.1798308923947373e-04));
  CHECK(near(ks.K_at(T, T)[2], -1.0500008545877849e-04));
  CHECK(near(ks.L11_at(T, 0), 1.1198329024560044e-04));
  CHECK(near(ks.L11_at(T, T), 8.061661929308037e-04));

  // The middle component belongs to the wave family the outlet flow condition
  // cannot see; it stays at numerical zero.
  double k2max = 0, kmax = 0;
  for (int d = 0; d < 201; ++d) {
    k2max = std::max(k2max, ks.lineK[d].row(1).cwiseAbs().maxCoeff());
    kmax = std::max(kmax, ks.lineK[d].cwiseAbs().maxCoeff());
  }
  CHECK(k2max < 1e-10);
  CHECK(near(kmax, 6.629783627408629e-04));
}

TEST_CASE("diagonal compatibility holds exactly at the nodes") {
  const auto p = tsup::benchmark_pipeline(101);
  const TriangularGrid kg{p.params.L, 101};
  const auto ks = solve_kernels(p.rs, kg, 1e-10, 200);

  const Eigen::Vector3d lamp = p.rs.LambdaPlus;
  const double l4 = -p.rs.LambdaMinus;
  for (int j = 0; j < 101; ++j) {
    const Eigen::RowVector3d smp = p.rs.sigma_mp(kg.x(j));
    for (int c = 0; c < 3; ++c)
      CHECK(ks.K_at(j, j)[c] * (lamp[c] - l4) ==
            doctest::Approx(-smp[c]).epsilon(1e-13));
  }
}

TEST_CASE("residual of the kernel equations shrinks with the grid") {
  const auto p = tsup::benchmark_pipeline(201);
  std::vector<double> res;
  for (int N : {51, 101, 201}) {
    const auto ks = solve_kernels(p.rs, TriangularGrid{p.params.L, N}, 1e-10, 200);
    res.push_back(kernel_residual(ks, p.rs, 1));
  }
  CHECK(res[2] < 1.5e-7);
  CHECK(res[0] / res[1] > 1.5);
  CHECK(res[1] / res[2] > 1.5);
}

TEST_CASE("decoupled couplings reduce to a single marching pass") {
  // With no feedback into the upstream wave (SigmaPM = 0, no inlet reflection)
  // L11 vanishes and the K equations march line by line; solving each node
  // implicitly gives the Picard fixed point in closed form.
  auto p = tsup::benchmark_pipeline(161);
  RiemannSystem rs = p.rs;
  const double L = p.params.L;
  for (int j = 0; j < rs.grid.nodes; ++j) {
    const double t = rs.grid.x(j) / L;
    Eigen::Matrix3d S;
    S << 0, 1.2e-2 * std::sin(3.1 * t), -0.7e-2 * std::cos(2.2 * t),
        0.9e-2 * std::cos(1.7 * t), 0, 1.1e-2 * std::sin(1.3 * t + 0.4),
        -0.8e-2 * std::sin(2.6 * t + 1.1), 0.6e-2 * std::cos(0.9 * t), 0;
    rs.SigmaPPs[j] = S;
    rs.SigmaPMs[j].setZero();
    rs.SigmaMPs[j] << 1.0e-2 * (0.5 + std::cos(2.0 * t)),
        -0.9e-2 * (0.3 + std::sin(1.9 * t)), 0.7e-2 * (0.2 + std::cos(3.3 * t));
  }
  rs.Q0bar.setZero();

  const int N = 161;
  const TriangularGrid kg{L, N};
  const auto ks = solve_kernels(rs, kg, 1e-10, 200);

  for (int d = 0; d < N; ++d) CHECK(ks.lineL11[d].cwiseAbs().maxCoeff() < 1e-16);

  const double h = kg.h();
  const Eigen::Vector3d lamp = rs.LambdaPlus;
  const double l4 = -rs.LambdaMinus;
  const Eigen::Vector3d ds = (h / (lamp.array() - l4)).matrix();
  const Eigen::Vector3d fr = (lamp.array() / (lamp.array() - l4)).matrix();

  std::vector<Eigen::Matrix3Xd> K(N);
  K[0].resize(3, N);
  for (int j = 0; j < N; ++j)
    K[0].col(j) =
        -(rs.sigma_mp(kg.x(j)).transpose().array() / (lamp.array() - l4)).matrix();
  for (int d = 1; d < N; ++d) {
    const int n = N - d;
    K[d].resize(3, n);
    for (int j = 0; j < n; ++j) {
      Eigen::Vector3d b;
      for (int c = 0; c < 3; ++c) {
        const double kb = (1 - fr[c]) * K[d - 1](c, j) + fr[c] * K[d - 1](c, j + 1);
        const Eigen::Vector3d Kb =
            (1 - fr[c]) * K[d - 1].col(j) + fr[c] * K[d - 1].col(j + 1);
        const double Rb = Kb.dot(rs.sigma_pp(kg.x(j) + fr[c] * h).col(c));
        b[c] = kb + ds[c] / 2 * Rb;
      }
      const Eigen::Matrix3d A =
          Eigen::Matrix3d::Identity() -
          (ds / 2).asDiagonal() * rs.sigma_pp(kg.x(j)).transpose();
      K[d].col(j) = A.partialPivLu().solve(b);
    }
  }

  double diff = 0;
  for (int d = 0; d < N; ++d)
    diff = std::max(diff, (ks.lineK[d] - K[d]).cwiseAbs().maxCoeff());
  CHECK(diff < 1e-8);
}

TEST_CASE("zero relaxation yields zero kernels") {
  const auto params = tsup::benchmark_params();
  auto eq = equilibrium_from_densities(tsup::bench_rho1, tsup::bench_rho2, params);
  eq.J.setZero();
  const auto cb = characteristic_basis(eq);
  const auto rs = build_riemann_system(eq, cb, SpatialGrid{params.L, 101});
  const auto ks = solve_kernels(rs, TriangularGrid{params.L, 101}, 1e-10, 200);

  CHECK(ks.iterations == 1);
  for (int d = 0; d < 101; ++d) {
    CHECK(ks.lineK[d].cwiseAbs().maxCoeff() < 1e-16);
    CHECK(ks.lineL11[d].cwiseAbs().maxCoeff() < 1e-16);
  }
  CHECK(kernel_residual(ks, rs, 1) < 1e-14);
}

TEST_CASE("kernel solver guards") {
  const auto p = tsup::benchmark_pipeline(33);
  CHECK(contains(
      thrown_message([&] { solve_kernels(p.rs, TriangularGrid{p.params.L, 4}); }),
      "at least 8 nodes"));
  CHECK(contains(
      thrown_message([&] { solve_kernels(p.rs, TriangularGrid{p.params.L, 33}, -1); }),
      "tolerance must be positive"));
  CHECK(contains(
      thrown_message([&] { solve_kernels(p.rs, TriangularGrid{p.params.L, 33}, 1e-8, 0); }),
      "max_iter"));

  // Couplings too strong for the characteristic step on a coarse grid.
  RiemannSystem rs = p.rs;
  for (auto& S : rs.SigmaPPs) S.setConstant(1.0);
  CHECK(contains(
      thrown_message([&] { solve_kernels(rs, TriangularGrid{p.params.L, 9}); }),
      "too coarse"));
}

TEST_CASE("outlet-edge resampling matches the stored top line") {
  const auto p = tsup::benchmark_pipeline(101);
  const TriangularGrid kg{p.params.L, 81};
  const auto ks = solve_kernels(p.rs, kg, 1e-10, 200);

  // Same node count: exact copy of the top line.
  const TopRows same = sample_top_rows(ks, SpatialGrid{p.params.L, 81});
  for (int j = 0; j < 81; ++j) {
    CHECK(same.K.col(j).isApprox(ks.K_at(80, j).transpose(), 1e-13));
    CHECK(same.L11[j] == doctest::Approx(ks.L11_at(80, j)).epsilon(1e-13));
  }

  // Doubled resolution: even nodes hit the stored values, odd nodes are means.
  const TopRows fine = sample_top_rows(ks, SpatialGrid{p.params.L, 161});
  for (int j = 0; j < 80; ++j) {
    CHECK(fine.K.col(2 * j).isApprox(ks.K_at(80, j).transpose(), 1e-12));
    CHECK(fine.L11[2 * j + 1] ==
          doctest::Approx(0.5 * (ks.L11_at(80, j) + ks.L11_at(80, j + 1))).epsilon(1e-11));
  }
}
