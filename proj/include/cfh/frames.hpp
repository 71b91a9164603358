#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfh/evolution.hpp"
#include "cfh/grid.hpp"
#include "cfh/initial_data.hpp"

namespace cfh {

using Vec4 = std::array<double, 4>;
// Rows are the frame vectors X_alpha, X_beta, xi, N; as a transport matrix A the system reads F' = A F.
using Mat4 = std::array<Vec4, 4>;

Mat4 identity4();
Mat4 mul(const Mat4& a, const Mat4& b);
double gram_deviation(const Mat4& f);  // max |F F^T - I|
double skew_defect(const Mat4& a);     // max |A + A^T|
void orthonormalize(Mat4& f);          // modified Gram-Schmidt on the rows

// Transport along x: a1 = kappa_1 e^P cos phi, b1 = P_z cos phi - phi_z sin phi, c1 = P_y cot phi - phi_y.
Mat4 transport_x(double a1, double b1, double c1);
// Transport along y: a2 = kappa_2 e^P sin phi, b2 = P_z sin phi + phi_z cos phi, c2 = P_x tan phi + phi_x.
Mat4 transport_y(double a2, double b2, double c2);
// Transport along z: p = P_x / cos phi, q = P_y / sin phi, r = kappa_3 e^P.
Mat4 transport_z(double p, double q, double r);

// The six frame coefficients of the phi-surface at z = 0.
struct FrameCoefficients {
    Field2 a1, a2, b1, b2, c1, c2;
};
FrameCoefficients frame_coefficients(const InitialDataSet& d);

struct FrameOptions {
    int base_i = -1, base_j = -1;  // base node; -1 selects the centre
    int substeps = 4;              // RK4 steps per grid cell along x and y
    double dz = 1e-3;              // RK4 step along z
    int decimate = 4;              // node stride of the path-commutation check
    double compat_tol = 1e-5;      // max path-commutation residual accepted
    double drift_tol = 1e-6;       // max Gram deviation accepted
    int mgs_every = 0;             // re-orthonormalize every n steps; 0 disables
    int order = 4;                 // stencil order for coefficient derivatives

    void validate() const;
};

// Frames on a grid (nz == 1 for the initial surface). position is the phi-surface point N.
struct FrameField {
    Grid3 grid{};
    std::vector<Mat4> frame;
    std::vector<Vec4> position;
    int base_i = 0, base_j = 0;
    double gram = 0;           // max Gram deviation over all nodes
    double compatibility = 0;  // x-then-y vs y-then-x position difference (initial surface only)
};

// Integrates the frame system along x on the base row, then along y in every column.
// The base frame is the standard basis with N = e_4.
FrameField build_initial_frames(const InitialDataSet& d, const FrameOptions& opt = {});

// Per-node RK4 in z of the Gauss-map frame system, starting from the z = 0 slice.
FrameField evolve_frames(const FrameField& initial, const Field3& phi, const Field3& u, const Field3& kappa3,
                         const FrameOptions& opt = {});
FrameField evolve_frames(const FrameField& initial, const EvolvedGuichardData& e, const FrameOptions& opt = {});

// dN + kappa_1 e^P cos phi X_alpha dx + kappa_2 e^P sin phi X_beta dy + kappa_3 e^P xi dz, by stencils of N:
// max norm of each of the three components over the interior band.
std::array<double, 3> gauss_map_residual(const FrameField& f, const Field3& phi, const Field3& u,
                                         const KappaFields& k, int band = 3, int order = 4);

struct HypersurfaceMesh {
    Grid3 grid{};
    std::array<Field3, 4> f;  // point in R^4
    std::array<Field3, 4> N;  // unit normal (Gauss map)
    Field3 P, phi, kappa1, kappa2, kappa3;
    int base_i = 0, base_j = 0;
    double closure = 0;  // x-then-y vs y-then-x position difference on the decimated subset
};

// Path-integrates df = e^P (cos phi X_alpha dx + sin phi X_beta dy) on every slice from the base column,
// which itself follows f_z = e^P xi from f(base, 0) = 0.
HypersurfaceMesh reconstruct_f(const FrameField& frames, const EvolvedGuichardData& e, const FrameOptions& opt = {});

struct MeshChecks {
    double first_form = 0;     // |I_f - e^{2P} g|_inf / |e^{2P} g|_inf
    double shape_eigen = 0;    // max |sorted eigenvalues of the shape operator - sorted kappa_i|
    double middle_margin = 0;  // min of min(kappa_3 - min(k1, k2), max(k1, k2) - kappa_3); > 0 when kappa_3 is middle
    double guichard_ratio = 0;  // max |E/H - cos^2|, |G/H - sin^2|, |off-diagonal| / H
    std::array<double, 3> gauss{};    // K - kappa kappa with kappa_i = II_ii / I_ii of the mesh
    std::array<double, 3> codazzi{};  // linear relations among the mesh kappa_i derivatives
};
MeshChecks mesh_checks(const HypersurfaceMesh& m, int band = 3, int order = 4);

// Eigenvalues (ascending) of I^{-1} II for symmetric 3x3 forms, I positive definite.
std::array<double, 3> shape_eigenvalues(const std::array<double, 9>& I, const std::array<double, 9>& II);

// Inversion x -> q + (x - q) / |x - q|^2 with normal, conformal factor and principal curvatures carried along.
// Throws InputError when q is within min_distance of a mesh point.
HypersurfaceMesh inversion(const HypersurfaceMesh& m, const Vec4& q, double min_distance = 0.05);

// Legacy-ASCII VTK structured grid: points (f_1, f_2, f_3), point data f_4, N, P, phi, kappa_i.
void write_vtk(std::ostream& os, const HypersurfaceMesh& m);
void write_vtk(const std::string& path, const HypersurfaceMesh& m);
HypersurfaceMesh read_vtk(std::istream& is);
HypersurfaceMesh read_vtk(const std::string& path);
// CSV with one row per node: x, y, z, f_1..f_4, N_1..N_4, P, phi, kappa_1..kappa_3.
void write_mesh_csv(std::ostream& os, const HypersurfaceMesh& m);
void write_mesh_csv(const std::string& path, const HypersurfaceMesh& m);
HypersurfaceMesh read_mesh_csv(std::istream& is);
HypersurfaceMesh read_mesh_csv(const std::string& path);
// Dispatches on the extension (.vtk or .csv).
HypersurfaceMesh read_mesh(const std::string& path);

}  // namespace cfh
