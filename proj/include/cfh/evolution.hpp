#pragma once

#include <array>
#include <string>
#include <vector>

#include "cfh/calculus.hpp"
#include "cfh/grid.hpp"
#include "cfh/initial_data.hpp"
#include "cfh/jet.hpp"
#include "cfh/seeds.hpp"

namespace cfh {

enum class ZMethod { Taylor, MOL };
ZMethod parse_zmethod(const std::string& s);
std::string to_string(ZMethod m);

struct EvolutionOptions {
    ZMethod method = ZMethod::Taylor;
    int M = 8;             // z-series order
    double z_max = 0.1;    // evolve on [-z_max, z_max]
    int nz = 41;           // output slices
    int order = 4;         // stencil order (MOL right-hand sides and diagnostics)
    bool filter = true;    // MOL: tenth-order low-pass filter after every step
    int pad = 8;           // MOL: padding nodes around the window (clipped to the seed domain)
    double step_ratio = 0.5;  // MOL: dz <= step_ratio * min(hx, hy)
    double trig_guard = 0.05;
    double kappa_guard = 1e-8;  // min |kappa_1 kappa_2| accepted on a slice
    double generic_guard = 1e-8;  // min phi_z phi_zx phi_zy, signed by its z = 0 value; <= 0 disables
    double blowup = 1e8;        // MOL: abort when a field exceeds this magnitude

    void validate() const;
    Grid3 grid(const Grid2& window) const;
};

// z-Taylor coefficients at one node: f(x, y, z) = sum_k f_k z^k, k = 0..M.
struct ZSeries {
    std::vector<double> phi, psi, u;
};

// Cauchy-Kovalevskaya recursion for the phi/psi system and the linear e^{-P} equation,
// with x/y derivatives carried exactly by bivariate jets of the seed of order M.
ZSeries taylor_z_series(const Seed& seed, double x, double y, int M);

struct SliceMonitor {
    double z = 0;
    double min_sincos = 0;  // min |sin phi cos phi|
    double min_u = 0;       // min e^{-P}
    double min_k1k2 = 0;    // min |kappa_1 kappa_2| on the interior band
    double min_generic = 0;  // min of phi_z phi_zx phi_zy times its sign at z = 0, interior band
    bool ok = false;
};

struct EvolvedGuichardData {
    Grid3 grid{};
    std::string method;
    Field3 phi, psi, u;  // u = e^{-P}
    Field3 kappa1, kappa2, kappa3;
    double z_lo = 0, z_hi = 0;  // reached range (slices kept)
    bool shrunk = false;        // true when monitors removed requested slices
    std::vector<SliceMonitor> monitors;  // one per requested slice
};

// Evolves (phi, psi, e^{-P}) from a seed on window x [-z_max, z_max], computes kappa_i and
// keeps the largest run of slices around z = 0 on which the degeneracy monitors pass.
// Throws NumericalError when the z = 0 slice itself fails.
EvolvedGuichardData evolve(const Seed& seed, const Grid2& window, const EvolutionOptions& opt = {});
// Uses data.source when present; the MOL path falls back to the dataset fields without padding.
EvolvedGuichardData evolve(const InitialDataSet& data, const EvolutionOptions& opt = {});

// MOL only, on an explicit grid: the six first-order fields from z = 0 to each requested slice.
struct MolFields {
    Field3 phi, psi, u;
    double z_lo = 0, z_hi = 0;  // reached before blow-up, if any
};
MolFields evolve_mol(const Field2& phi, const Field2& phi_z, const Field2& psi, const Field2& psi_z, const Field2& u,
                     const Field2& u_z, const Grid3& out, const EvolutionOptions& opt);

// Linear evolution of e^{-P} alone on a given phi (psi_zz taken from phi as in the e^{-P} equation),
// RK4 with the slice spacing as step and coefficients interpolated in z at half steps.
Field3 evolve_conformal(const Field3& phi, const Field2& u0, const Field2& uz0, int order = 4, bool filter = true);

// Tenth-order explicit low-pass filter along x and y (interior nodes only).
void lowpass_filter(Field2& f);

struct KappaFields {
    Field3 kappa1, kappa2, kappa3;
};
// kappa_3 from the second-derivative formula on (phi, e^{-P}); kappa_1, kappa_2 from it.
KappaFields kappa_fields(const Field3& phi, const Field3& u, int order = 4);

struct ConstraintSlices {
    static constexpr std::array<const char*, 4> names{"I_xy", "I_xz", "I_yz", "J"};
    std::array<Field3, 4> field;
    std::array<std::vector<Norms>, 4> per_slice;  // norms on each z-slice (interior band)
    std::array<double, 4> max_linf{};
};
ConstraintSlices constraint_report(const Field3& phi, const Field3& u, const Field3& kappa3, int band = 3,
                                   int order = 4);

struct CurvatureDiagnostics {
    Field3 K_ab, K_bc, K_ca;  // sectional curvatures of e^{2P} g
    Field3 chi;               // K_ab - kappa_1 kappa_2
    Field3 zeta_identity;     // zeta - (K_bc sin^2 phi + K_ca cos^2 phi)
    std::array<Field3, 3> gauss;    // K - kappa kappa, three planes
    std::array<Field3, 3> kappa3_derivs;  // (kappa_3)_x + u_x tan, (kappa_3)_y - u_y cot, (kappa_3)_z + u phi_z
    std::array<Field3, 3> codazzi;  // the three linear relations among the kappa_i derivatives
};
CurvatureDiagnostics curvature_diagnostics(const Field3& phi, const Field3& u, const KappaFields& k, int order = 4);

// Differences between the z-derivatives of the constraint quantities and their expressions
// through the constraints themselves (four propagation identities).
std::array<Field3, 4> propagation_identities(const Field3& phi, const Field3& u, const Field3& kappa3, int order = 4);

// Max over slices of a per-slice L-infinity, restricted to the interior band.
double max_linf(const Field3& f, int band = 3);

}  // namespace cfh
