#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "cfh/calculus.hpp"
#include "cfh/grid.hpp"
#include "cfh/seeds.hpp"

namespace cfh {

// Everything the z = 0 formulas need at one node.
struct PointState {
    double phi = 0, phi_x = 0, phi_y = 0, phi_z = 0, phi_zx = 0, phi_zy = 0, phi_zz = 0, psi_zz = 0;
    double u = 0, u_x = 0, u_y = 0, u_xx = 0, u_yy = 0, u_xy = 0;
    double u_z = 0, uz_x = 0, uz_y = 0;
};

struct PointDerived {
    double kappa1 = 0, kappa2 = 0, kappa3 = 0, zeta = 0, u_zz = 0;
};

// kappa_3, (e^{-P})_zz, kappa_1, kappa_2 and zeta from the z = 0 data.
PointDerived derived_at(const PointState& s);
// The four initial constraints: the e^{-P} xy-equation, the x- and y-equations for (e^{-P})_z, kappa_3^2 - zeta.
std::array<double, 4> constraints_at(const PointState& s, const PointDerived& d);

// Derivative samples taken from seed jets instead of stencils.
struct ExactDerivs {
    Field2 phi_x, phi_y, phi_zx, phi_zy, u_x, u_y, u_xx, u_yy, u_xy, uz_x, uz_y;
};

struct InitialDataSet {
    Grid2 grid{};
    double t = 1.0;
    std::string seed;
    Field2 phi, phi_z, phi_zz, psi, psi_z, psi_zz;
    Field2 u, u_z;  // e^{-P}, (e^{-P})_z
    Field2 P, P_z;
    Field2 kappa1, kappa2, kappa3, zeta, u_zz;
    std::optional<ExactDerivs> exact;
    int order = 4;  // stencil order when `exact` is absent
    std::shared_ptr<const Seed> source;  // set when assembled from a shared seed (needed by the z-series engine)

    double min_sincos() const;  // min |sin phi cos phi|
    double min_u() const;
};

struct DerivedFields {
    Field2 kappa1, kappa2, kappa3, zeta, u_zz;
};

// Stencil route from (phi, phi_z, phi_zz, psi_zz, P, P_z).
DerivedFields derived_quantities(const Field2& phi, const Field2& phi_z, const Field2& phi_zz, const Field2& psi_zz,
                                 const Field2& P, const Field2& P_z, int order = 4);

// Builds the dataset from seed jets (exact derivatives). phi_zz and psi_zz come from the psi
// evolution relations with L phi and L psi of the seed at z = 0.
InitialDataSet assemble_initial_data(const Seed& seed, const Grid2& g, double trig_guard = 0.05);
InitialDataSet assemble_initial_data(std::shared_ptr<const Seed> seed, const Grid2& g, double trig_guard = 0.05);

// Builds the dataset from sampled fields, derivatives by stencils.
InitialDataSet assemble_initial_data(const Field2& phi, const Field2& phi_z, const Field2& psi, const Field2& psi_z,
                                     const Field2& u, const Field2& u_z, int order = 4, double trig_guard = 0.05);

struct ConstraintReport {
    std::array<Residual, 4> residual;  // xy-equation, (e^{-P})_z x- and y-equations, kappa_3^2 - zeta
    std::array<Field2, 4> field;
    double min_k1k2 = 0;  // genericity margin
    std::size_t min_k1k2_node = 0;
};
ConstraintReport constraint_residuals(const InitialDataSet& d, int band = 0);

// psi_z from its gradient (-phi_zx cot phi, phi_zy tan phi), integrated along x on the base row
// and then along y in every column, with psi_z(base) = 0. Throws InputError when the mixed
// partials of the one-form disagree by more than `tol` on the interior.
struct PsiZReconstruction {
    Field2 psi_z;
    double integrability = 0;  // max |d/dy(psi_zx) - d/dx(psi_zy)| on the interior
};
PsiZReconstruction reconstruct_psi_z(const Field2& phi, const Field2& phi_z, int base_i, int base_j, double tol = 1e-6,
                                     int order = 4);

// Scales phi_z and psi_z by t and refreshes the derived quantities; phi, psi, e^{-P} and
// (e^{-P})_z are kept. A stored source seed is wrapped in a ScaledSeed. Throws InputError for t = 0.
InitialDataSet t_scale(const InitialDataSet& d, double t);

// Seed whose phi_z and psi_z jets are multiplied by t.
class ScaledSeed : public Seed {
public:
    ScaledSeed(std::shared_ptr<const Seed> base, double t);
    SeedJets jets(double x, double y, int order) const override;
    double kappa3(double x, double y) const override { return base_->kappa3(x, y); }
    Grid2 domain() const override { return base_->domain(); }
    std::string name() const override;

private:
    std::shared_ptr<const Seed> base_;
    double t_;
};

}  // namespace cfh
