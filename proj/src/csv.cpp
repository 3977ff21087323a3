#include "tcar/csv.hpp"

#include <cstdio>
#include <fstream>

namespace tcar {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // binary keeps line endings identical
  if (!f) throw validation_error("cannot write file: " + path);
  return f;
}

}  // namespace

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_fields_csv(const std::string& path, const SimResult& r, const SpatialGrid& grid) {
  auto f = open_out(path);
  f << "t,x,rho1,v1,rho2,v2\n";
  for (size_t k = 0; k < r.frames.size(); ++k) {
    const std::string t = fmt_full(r.frameTimes[k]);
    for (int j = 0; j < grid.nodes; ++j) {
      f << t << ',' << fmt_full(grid.x(j));
      for (int c = 0; c < 4; ++c) f << ',' << fmt_full(r.frames[k](c, j));
      f << '\n';
    }
  }
}

void write_target_csv(const std::string& path, const SimResult& r, const SpatialGrid& grid) {
  auto f = open_out(path);
  f << "t,x,beta\n";
  for (size_t k = 0; k < r.betaFrames.size(); ++k) {
    const std::string t = fmt_full(r.frameTimes[k]);
    for (int j = 0; j < grid.nodes; ++j)
      f << t << ',' << fmt_full(grid.x(j)) << ',' << fmt_full(r.betaFrames[k][j]) << '\n';
  }
}

void write_series_csv(const std::string& path, const SimResult& r) {
  auto f = open_out(path);
  f << "t,U,sup_rel,l2_rel,beta_L\n";
  for (size_t k = 0; k < r.stepTimes.size(); ++k)
    f << fmt_full(r.stepTimes[k]) << ',' << fmt_full(r.U[k]) << ',' << fmt_full(r.supNorm[k])
      << ',' << fmt_full(r.l2Norm[k]) << ',' << fmt_full(r.betaL[k]) << '\n';
}

void write_kernel_csv(const std::string& path, const KernelSolution& ks) {
  auto f = open_out(path);
  f << "x,xi,k1,k2,k3,l11\n";
  for (int i = 0; i < ks.grid.nodes; ++i)
    for (int j = 0; j <= i; ++j) {
      const Eigen::RowVector3d K = ks.K_at(i, j);
      f << fmt_full(ks.grid.x(i)) << ',' << fmt_full(ks.grid.x(j)) << ',' << fmt_full(K[0])
        << ',' << fmt_full(K[1]) << ',' << fmt_full(K[2]) << ','
        << fmt_full(ks.L11_at(i, j)) << '\n';
    }
}

void write_riemann_csv(const std::string& path, const RiemannSystem& rs) {
  auto f = open_out(path);
  f << "x,scale1,scale2,scale3,scale4";
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b) f << ",sigma_pp" << a << b;
  f << ",sigma_pm1,sigma_pm2,sigma_pm3,sigma_mp1,sigma_mp2,sigma_mp3\n";
  for (int j = 0; j < rs.grid.nodes; ++j) {
    f << fmt_full(rs.grid.x(j));
    for (int c = 0; c < 4; ++c) f << ',' << fmt_full(rs.scales[j][c]);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) f << ',' << fmt_full(rs.SigmaPPs[j](a, b));
    for (int a = 0; a < 3; ++a) f << ',' << fmt_full(rs.SigmaPMs[j][a]);
    for (int b = 0; b < 3; ++b) f << ',' << fmt_full(rs.SigmaMPs[j][b]);
    f << '\n';
  }
}

}  // namespace tcar
