#pragma once

#include <array>
#include <string>
#include <vector>

#include "cfh/grid.hpp"

namespace cfh {

// Derivatives of the Guichard angle phi up to third order at one point.
struct PhiDerivs {
    double p = 0;
    double x = 0, y = 0, z = 0;
    double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;
    double xyz = 0;
    double xxx = 0, xyy = 0, xzz = 0;
    double xxy = 0, yyy = 0, yzz = 0;
    double xxz = 0, yyz = 0, zzz = 0;
};

// The four conditions on phi for g = cos^2 phi dx^2 + sin^2 phi dy^2 + dz^2 to be conformally flat.
std::array<double, 4> flatness_at(const PhiDerivs& d);

// Second-order derivatives of psi at one point.
struct PsiDerivs {
    double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;
};

// Residuals of the psi system (psi_xz, psi_yz, psi_zz, phi_zz equations) followed by the
// two normalization conditions (psi_xy = phi_x phi_y and the Laplacian identity).
std::array<double, 6> psi_system_at(const PhiDerivs& phi, const PsiDerivs& psi);

// Hat metric coefficients A = -phi_zx / (phi_z sin phi), B = phi_zy / (phi_z cos phi).
void hat_at(double phi, double phi_z, double phi_zx, double phi_zy, double& a, double& b);

std::array<Field3, 4> flatness_residuals(const Field3& phi, int order = 4);

struct PsiResiduals {
    std::array<Field3, 4> system;         // psi_xz, psi_yz, psi_zz, phi_zz equations
    std::array<Field3, 2> normalization;  // psi_xy and Laplacian conditions
};
PsiResiduals psi_residuals(const Field3& phi, const Field3& psi, int order = 4);

struct Hat2Metric {
    Field2 a, b;
};

// Hat metric on one slice from phi and phi_z samples (x/y derivatives by stencils).
Hat2Metric hat_metric(const Field2& phi, const Field2& phi_z, int order = 4);
// Hat metric on slice k of an evolved phi (z-derivative by stencils).
Hat2Metric hat_metric(const Field3& phi, int k, int order = 4);
// Hat metric from exact derivative samples.
Hat2Metric hat_metric(const Field2& phi, const Field2& phi_z, const Field2& phi_zx, const Field2& phi_zy);

// Gauss curvature of A^2 dx^2 + B^2 dy^2, K = -(1/AB)[(B_x/A)_x + (A_y/B)_y].
// A and B may be negative but must each keep one sign; InputError otherwise.
Field2 gauss_curvature(const Field2& a, const Field2& b, int order = 4);

struct GuichardReport {
    // residual of l_i^2 + l_j^2 - l_k^2 for (1,2;3), (1,3;2), (2,3;1)
    std::array<double, 3> residual{};
    std::array<std::string, 3> label{"(1,2;3)", "(1,3;2)", "(2,3;1)"};
    int holds = -1;  // index of the best permutation within tolerance, -1 if none
};
GuichardReport guichard_check(const Field3& l1sq, const Field3& l2sq, const Field3& l3sq, double tol = 1e-8);

// Smallest |sin 2 phi| on a field.
double min_abs_sin2(const Field3& phi);
double min_abs_sin2(const Field2& phi);

}  // namespace cfh
