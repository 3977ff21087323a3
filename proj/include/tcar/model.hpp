#pragma once
// Two-class traffic flow with area-occupancy coupling: pressure relations,
// equilibria, the linearized system, and its characteristic basis.
#include <Eigen/Dense>

#include "tcar/errors.hpp"

namespace tcar {

struct ModelParams {
  double V1 = 0, V2 = 0;          // free-flow speeds, class 1 the faster one
  double gamma1 = 0, gamma2 = 0;  // pressure exponents, each > 1
  double AObar1 = 0, AObar2 = 0;  // saturation area occupancies, in (0, 1)
  double tau1 = 0, tau2 = 0;      // speed relaxation times
  double a1 = 0, a2 = 0;          // road surface occupied per vehicle
  double W = 0;                   // road width
  double L = 0;                   // road length
};

// Throws validation_error with an actionable message on any bad field.
void validate(const ModelParams& p);

double area_occupancy(double rho1, double rho2, const ModelParams& p);
// cls selects the vehicle class and is 1 or 2.
double pressure(double ao, int cls, const ModelParams& p);
double equilibrium_speed(double ao, int cls, const ModelParams& p);

// Uniform steady state and the linearization around it.  State ordering for all
// 4x4 matrices is z = (rho1, v1, rho2, v2); the linear dynamics read
// Jt z_t + Jx z_x + J z = 0.
struct EquilibriumState {
  double rho1s = 0, rho2s = 0;
  double v1s = 0, v2s = 0;
  Eigen::Matrix2d beta;  // beta(i,j) = d p_i / d rho_j at the steady state
  Eigen::Matrix4d Jt, Jx, J;
};

EquilibriumState equilibrium_from_densities(double rho1, double rho2, const ModelParams& p);

// Congested: exactly the slowest characteristic runs upstream.  Degenerate also
// covers sign patterns other than free-flow/congested and near-coincident speeds;
// no eigenbasis is constructed there.
enum class Regime { FreeFlow, Congested, Degenerate };

struct CharacteristicBasis {
  // Characteristic speeds (v1s, v2s, l3, l4); in the congested regime they
  // interleave as l4 < 0 < v2s < l3 < v1s.
  Eigen::Vector4d lambda;
  double Delta = 0;  // discriminant of the quadratic giving (l3, l4)
  Regime regime = Regime::Degenerate;
  // Unit eigenvectors of Jt^-1 Jx as columns, in wave order (v2s, l3, v1s, l4);
  // the entry of largest magnitude in each column is positive.  Zero when the
  // regime is Degenerate.
  Eigen::Matrix4d Theta;
  Eigen::Matrix4d Jhat;  // -Theta^-1 Jt^-1 J Theta, same ordering
  Eigen::Vector4d lambda_w() const { return {lambda[1], lambda[2], lambda[0], lambda[3]}; }
};

CharacteristicBasis characteristic_basis(const EquilibriumState& eq);

}  // namespace tcar
