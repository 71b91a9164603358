#pragma once

#include <array>
#include <string>

#include "cfh/frames.hpp"
#include "cfh/grid.hpp"

namespace cfh {

struct SurfaceOptions {
    // a_i = sign_a_i |phi_x| (|phi_y|): the surface alone cannot tell a_i from -a_i.
    int sign_a1 = 1, sign_a2 = 1;
    double umbilic_tol = 1e-6;  // min |lambda_1 - lambda_2| accepted
    double a_tol = 1e-8;        // min |a_i| accepted
    double unit_tol = 1e-6;     // max ||point| - 1| accepted
    int order = 4;
    int band = 3;

    void validate() const;
};

// A surface in S^3 sampled on principal coordinates, with its frame coefficients:
// d(point) = -a1 dx X_alpha - a2 dy X_beta, d(normal) = b1 dx X_alpha + b2 dy X_beta.
struct SurfaceData {
    Grid2 grid{};
    std::array<Field2, 4> point, normal, Xa, Xb;
    Field2 a1, a2, b1, b2;
    Field2 c1, c2;      // from the a's
    Field2 c1_b, c2_b;  // from the b's
    Field2 lambda1, lambda2, H, E, G;
    double connection = 0;    // max |c_i(a) - c_i(b)| on the interior band
    double principal = 0;  // max normalized off-diagonal of the first and second forms
    double min_umbilic = 0;  // min |lambda_1 - lambda_2|
};

// Normal chosen with det(X_alpha, X_beta, normal, point) > 0. Throws InputError for non-unit points,
// vanishing a_i or an umbilic node.
SurfaceData frame_coefficients(const std::array<Field2, 4>& point, const SurfaceOptions& opt = {});
// The Gauss map slice z = 0 of a mesh (N on that slice).
SurfaceData frame_coefficients(const HypersurfaceMesh& m, const SurfaceOptions& opt = {});

struct PhiPbarOptions {
    int sign = 1;    // right-hand side of a1 sin phi - a2 cos phi = sign
    int branch = 0;  // +1: Q >= 0 at the base node, -1: Q <= 0, 0: Q takes the sign of `sign`
    int base_i = -1, base_j = -1;  // -1 selects the centre
    double closed_tol = 1e-3;      // max closedness residual accepted
    int order = 4;
    int band = 3;

    void validate() const;
};

struct PhiPbar {
    bool accepted = false;
    std::string reason;
    int branch = 0;
    Field2 phi, Pbar, Q, Pbar_x, Pbar_y;
    Field2 closedness_field;  // (Pbar_x)_y - (Pbar_y)_x
    double closedness = 0;    // band max of the field above
    std::array<double, 2> branch_closedness{};  // for Q >= 0 and Q <= 0 at the base node
    double max_jump = 0, jump_bound = 0;        // node-to-node phi jump and 3 h max |grad phi|
};

// Solves a1 sin phi - a2 cos phi = sign pointwise with nearest-angle continuation from the base node,
// then integrates dPbar = ((a1)_x + phi_x a2)/a1 dx + ((a2)_y - phi_y a1)/a2 dy with Pbar(base) = 0
// after checking its closedness. Failures are reported through `accepted` and `reason`.
PhiPbar solve_phi_pbar(const Field2& a1, const Field2& a2, const PhiPbarOptions& opt = {});

// Schouten eigenvalues and dual data.
template <class G>
struct DualFields {
    Field<G> sigma1, sigma2, sigma3;
    Field<G> eP_star, P_star, phi_star;
    Field<G> kappa1, kappa2, kappa3;  // dual principal curvatures kappa_i / sigma_i
    Field<G> P_star_z, phi_star_z;
    Field<G> phi, P, P_z, phi_z;  // primal inputs
};
using DualData = DualFields<Grid2>;
using DualData3 = DualFields<Grid3>;

// Throws NumericalError when some sigma_i vanishes.
template <class G>
DualFields<G> schouten_dual(const Field<G>& k1, const Field<G>& k2, const Field<G>& k3, const Field<G>& eP,
                            const Field<G>& phi, const Field<G>& P_z, const Field<G>& phi_z);

// Dual data on the z = 0 slice of a mesh, with P_z and phi_z from z-stencils.
DualData dual_from_mesh(const HypersurfaceMesh& m, int order = 4);

struct DualIdentities {
    double sigma3 = 0;  // max |sigma_3 - (e^{-2P} + kappa_3^2)/2|
    double angle = 0;   // max |(sigma_1 cos)^2 + (sigma_2 sin)^2 - sigma_3^2|
    double unit = 0;    // max |cos^2 phi* + sin^2 phi* - 1| with the sigma-ratio cosine and sine
};
template <class G>
DualIdentities dual_identities(const DualFields<G>& d, const Field<G>& k3);

struct DualConsistency {
    double unit = 0;          // max |a1 sin phi* - a2 cos phi* + sign|
    double one_form = 0;      // max of the two (a_i) relations with phi*, Pbar*
    double b_dual = 0;        // max |b_i - (dual expression)|
    double b_primal = 0;      // max |b_i - (primal expression)|
    double b_discrepancy = 0;  // max |primal expression - dual expression|
};
DualConsistency dual_consistency(const SurfaceData& s, const DualData& d, int sign = 1, int order = 4, int band = 3);

// Residual of -phi_xx/a1^2 - phi_yy/a2^2 = 2(phi - H xi) + (a1^2 + a2^2)/(a1 a2) [-(phi + phi*)_x/(2 a1) X_alpha
// + (phi + phi*)_y/(2 a2) X_beta], max over the four components.
struct FieldCheck {
    Field2 residual;
    double linf = 0;  // interior band
};
FieldCheck laplacian_check(const SurfaceData& s, const Field2& phi, const Field2& phi_star, int order = 4,
                           int band = 3);

// kappa_1 kappa_2 K^phi against the second-derivative expression in e^{-Pbar} and phi, with K^phi from (a1, a2).
FieldCheck gauss_identity_check(const SurfaceData& s, const Field2& Pbar, const Field2& phi, int order = 4,
                                int band = 3);

}  // namespace cfh
