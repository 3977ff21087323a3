#include "tcar/model.hpp"

#include <cmath>
#include <sstream>

namespace tcar {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw validation_error(msg); }

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void validate(const ModelParams& p) {
  if (!(p.V1 > 0) || !(p.V2 > 0)) fail("free-flow speeds must be positive");
  if (!(p.gamma1 > 1)) fail("gamma1 must exceed 1 (got " + num(p.gamma1) + ")");
  if (!(p.gamma2 > 1)) fail("gamma2 must exceed 1 (got " + num(p.gamma2) + ")");
  if (!(p.AObar1 > 0 && p.AObar1 < 1))
    fail("AObar1 must lie in (0, 1) (got " + num(p.AObar1) + ")");
  if (!(p.AObar2 > 0 && p.AObar2 < 1))
    fail("AObar2 must lie in (0, 1) (got " + num(p.AObar2) + ")");
  if (!(p.tau1 > 0) || !(p.tau2 > 0)) fail("relaxation times must be positive");
  if (!(p.a1 > 0) || !(p.a2 > 0)) fail("per-vehicle areas must be positive");
  if (!(p.W > 0)) fail("road width must be positive");
  if (!(p.L > 0)) fail("road length must be positive");
}

double area_occupancy(double rho1, double rho2, const ModelParams& p) {
  if (rho1 < 0 || rho2 < 0) fail("density must be nonnegative");
  return (p.a1 * rho1 + p.a2 * rho2) / p.W;
}

static void check_cls(int cls) {
  if (cls != 1 && cls != 2) fail("class index must be 1 or 2");
}

double pressure(double ao, int cls, const ModelParams& p) {
  check_cls(cls);
  if (ao < 0) fail("area occupancy must be nonnegative");
  const double V = cls == 1 ? p.V1 : p.V2;
  const double g = cls == 1 ? p.gamma1 : p.gamma2;
  const double AOb = cls == 1 ? p.AObar1 : p.AObar2;
  return V * std::pow(ao / AOb, g);
}

double equilibrium_speed(double ao, int cls, const ModelParams& p) {
  check_cls(cls);
  return (cls == 1 ? p.V1 : p.V2) - pressure(ao, cls, p);
}

EquilibriumState equilibrium_from_densities(double rho1, double rho2, const ModelParams& p) {
  validate(p);
  if (!(rho1 > 0) || !(rho2 > 0)) fail("equilibrium densities must be positive");
  const double ao = area_occupancy(rho1, rho2, p);
  const double cap = 0.99 * std::min(p.AObar1, p.AObar2);
  if (ao > cap)
    fail("area occupancy " + num(ao) + " exceeds the feasible bound " + num(cap));

  EquilibriumState eq;
  eq.rho1s = rho1;
  eq.rho2s = rho2;
  eq.v1s = equilibrium_speed(ao, 1, p);
  eq.v2s = equilibrium_speed(ao, 2, p);
  if (!(eq.v2s > 0))
    fail("equilibrium speed of class 2 is not positive (" + num(eq.v2s) + ")");
  if (!(eq.v1s > eq.v2s))
    fail("class speeds must satisfy v1 > v2 at equilibrium (got " + num(eq.v1s) + " vs " +
         num(eq.v2s) + ")");

  for (int i = 0; i < 2; ++i) {
    const double V = i == 0 ? p.V1 : p.V2;
    const double g = i == 0 ? p.gamma1 : p.gamma2;
    const double AOb = i == 0 ? p.AObar1 : p.AObar2;
    for (int j = 0; j < 2; ++j) {
      const double a = j == 0 ? p.a1 : p.a2;
      eq.beta(i, j) = V * g * std::pow(ao / AOb, g) * a / (p.W * ao);
    }
  }

  const double b11 = eq.beta(0, 0), b12 = eq.beta(0, 1);
  const double b21 = eq.beta(1, 0), b22 = eq.beta(1, 1);
  const double v1 = eq.v1s, v2 = eq.v2s;

  eq.Jt.setIdentity();
  eq.Jt(1, 0) = b11;
  eq.Jt(1, 2) = b12;
  eq.Jt(3, 0) = b21;
  eq.Jt(3, 2) = b22;

  eq.Jx.setZero();
  eq.Jx(0, 0) = v1;
  eq.Jx(0, 1) = rho1;
  eq.Jx(1, 0) = v1 * b11;
  eq.Jx(1, 1) = v1;
  eq.Jx(1, 2) = v1 * b12;
  eq.Jx(2, 2) = v2;
  eq.Jx(2, 3) = rho2;
  eq.Jx(3, 0) = v2 * b21;
  eq.Jx(3, 2) = v2 * b22;
  eq.Jx(3, 3) = v2;

  eq.J.setZero();
  eq.J(1, 0) = b11 / p.tau1;
  eq.J(1, 1) = 1 / p.tau1;
  eq.J(1, 2) = b12 / p.tau1;
  eq.J(3, 0) = b21 / p.tau2;
  eq.J(3, 2) = b22 / p.tau2;
  eq.J(3, 3) = 1 / p.tau2;

  return eq;
}

CharacteristicBasis characteristic_basis(const EquilibriumState& eq) {
  CharacteristicBasis cb;
  const double v1 = eq.v1s, v2 = eq.v2s;
  const double b11r = eq.beta(0, 0) * eq.rho1s;
  const double b22r = eq.beta(1, 1) * eq.rho2s;
  const double sum = v1 + v2 - b11r - b22r;
  cb.Delta = std::sqrt((b22r - b11r + v1 - v2) * (b22r - b11r + v1 - v2) +
                       4 * eq.beta(0, 0) * eq.beta(1, 1) * eq.rho1s * eq.rho2s);
  const double l3 = (sum + cb.Delta) / 2;
  const double l4 = (sum - cb.Delta) / 2;
  cb.lambda << v1, v2, l3, l4;
  cb.Theta.setZero();
  cb.Jhat.setZero();

  const double maxAbs = cb.lambda.cwiseAbs().maxCoeff();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(cb.lambda[i] - cb.lambda[j]) < 1e-9 * maxAbs) {
        cb.regime = Regime::Degenerate;
        return cb;
      }

  const bool plus3 = v1 > 0 && v2 > 0 && l3 > 0;
  if (plus3 && l4 > 0)
    cb.regime = Regime::FreeFlow;
  else if (plus3 && l4 < 0)
    cb.regime = Regime::Congested;
  else {
    cb.regime = Regime::Degenerate;
    return cb;
  }

  const Eigen::Matrix4d A = eq.Jt.partialPivLu().solve(eq.Jx);
  const Eigen::Vector4d lamW = cb.lambda_w();
  for (int s = 0; s < 4; ++s) {
    Eigen::Matrix4d M = A - lamW[s] * Eigen::Matrix4d::Identity();
    Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
    // Zero out the pivot belonging to the exact eigenvalue without swallowing the
    // nearest admissible neighbour (speeds are distinct beyond 1e-9 relative here).
    lu.setThreshold(1e-11);
    if (lu.kernel().cols() != 1)
      throw numerical_error("eigenvector extraction failed for characteristic speed " +
                            num(lamW[s]));
    Eigen::Vector4d v = lu.kernel().col(0);
    v.normalize();
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    cb.Theta.col(s) = v;
  }
  const Eigen::Matrix4d BJ = eq.Jt.partialPivLu().solve(eq.J);
  cb.Jhat = -cb.Theta.inverse() * BJ * cb.Theta;
  return cb;
}

}  // namespace tcar
