#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "cfh/frames.hpp"
#include "doctest.h"
#include "pipeline_fixture.hpp"

using namespace cfh;
using cfh::testing::pipeline;
using cfh::testing::Pipeline;

namespace {

double rand_like(int a) { return std::sin(1.7 * a + 0.3) * 3; }

}  // namespace

TEST_CASE("transport matrices are skew-symmetric") {
    for (int a = 0; a < 20; ++a) {
        const double p = rand_like(a), q = rand_like(a + 7), r = rand_like(a + 13);
        CHECK(skew_defect(transport_x(p, q, r)) <= 1e-12);
        CHECK(skew_defect(transport_y(p, q, r)) <= 1e-12);
        CHECK(skew_defect(transport_z(p, q, r)) <= 1e-12);
    }
}

TEST_CASE("frame coefficients satisfy the unit relation") {
    const auto& p = pipeline(41);
    const FrameCoefficients C = frame_coefficients(p.data);
    double worst = 0;
    for (std::size_t n = 0; n < C.a1.size(); ++n)
        worst = std::max(worst, std::fabs(C.a1[n] * std::sin(p.data.phi[n]) - C.a2[n] * std::cos(p.data.phi[n]) - 1));
    CHECK(worst <= 1e-12);
}

TEST_CASE("initial frames: orthonormal, unit phi-surface, standard basis at the base node") {
    const auto& p = pipeline(41);
    const FrameField& v = p.v;
    CHECK(v.gram <= 1e-8);
    const Mat4& B = v.frame[p.data.grid.idx(v.base_i, v.base_j)];
    CHECK(B == identity4());
    double worst = 0;
    for (const Vec4& x : v.position)
        worst = std::max(worst, std::fabs(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) - 1));
    CHECK(worst <= 1e-8);
}

TEST_CASE("path commutation converges at order >= 3") {
    const double c41 = pipeline(41).v.compatibility;
    const Grid2 w{81, 81, 1.6, 2.4, 0.6, 1.4};
    auto fam = ex2_family_sample(1, 0, 0, w);
    std::shared_ptr<const Seed> seed = std::make_shared<Example2Seed>(ex2_solve_odes(fam.params));
    const FrameField v81 = build_initial_frames(assemble_initial_data(seed, w));
    CHECK(c41 < 1e-8);
    CHECK(convergence_order(c41, v81.compatibility) >= 3);
}

TEST_CASE("inconsistent initial data fails the path-commutation check") {
    InitialDataSet d = pipeline(41).data;
    for (int j = 0; j < d.grid.ny; ++j)
        for (int i = 0; i < d.grid.nx; ++i) d.phi_z[d.grid.idx(i, j)] += 0.05 * std::sin(5 * d.grid.x(i) * d.grid.y(j));
    CHECK_THROWS_AS(build_initial_frames(d), InputError);
}

TEST_CASE("frame drift tolerance and options are enforced") {
    FrameOptions o;
    o.drift_tol = 1e-18;
    CHECK_THROWS_AS(build_initial_frames(pipeline(41).data, o), NumericalError);
    FrameOptions bad;
    bad.substeps = 0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = FrameOptions{};
    bad.order = 5;
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("modified Gram-Schmidt keeps frames orthonormal to roundoff") {
    FrameOptions o;
    o.mgs_every = 10;
    const FrameField v = build_initial_frames(pipeline(41).data, o);
    CHECK(v.gram <= 1e-14);
    double diff = 0;
    for (std::size_t n = 0; n < v.frame.size(); ++n)
        for (int a = 0; a < 4; ++a)
            for (int c = 0; c < 4; ++c) diff = std::max(diff, std::fabs(v.frame[n][a][c] - pipeline(41).v.frame[n][a][c]));
    CHECK(diff <= 1e-10);
}

TEST_CASE("evolved frames: z = 0 slice unchanged, orthonormal at |z| = 0.1, Gauss map consistent") {
    const auto& p = pipeline(41);
    const Grid3& G = p.u.grid;
    const int k0 = (G.nz - 1) / 2;
    REQUIRE(G.z(k0) == 0.0);
    bool same = true;
    for (std::size_t n = 0; n < G.xy.size(); ++n) same = same && p.u.frame[std::size_t(k0) * G.xy.size() + n] == p.v.frame[n];
    CHECK(same);
    double end_gram = 0;
    for (int k : {0, G.nz - 1})
        for (std::size_t n = 0; n < G.xy.size(); ++n)
            end_gram = std::max(end_gram, gram_deviation(p.u.frame[std::size_t(k) * G.xy.size() + n]));
    CHECK(end_gram <= 1e-8);
    const auto gm = gauss_map_residual(p.u, p.evolved.phi, p.evolved.u,
                                       KappaFields{p.evolved.kappa1, p.evolved.kappa2, p.evolved.kappa3});
    for (double r : gm) CHECK(r <= 1e-4);
}

TEST_CASE("evolve_frames rejects mismatched grids") {
    const auto& p = pipeline(41);
    FrameField wrong = p.v;
    wrong.grid.xy.nx = 40;
    CHECK_THROWS_AS(evolve_frames(wrong, p.evolved), InputError);
}

TEST_CASE("reconstruction: base point, normal field, fundamental forms") {
    const auto& p = pipeline(41);
    const HypersurfaceMesh& m = p.mesh;
    const Grid3& G = m.grid;
    const std::size_t base = G.idx(m.base_i, m.base_j, (G.nz - 1) / 2);
    for (int c = 0; c < 4; ++c) CHECK(m.f[std::size_t(c)][base] == 0.0);
    bool same = true;
    for (std::size_t n = 0; n < G.size(); ++n)
        for (int c = 0; c < 4; ++c) same = same && m.N[std::size_t(c)][n] == p.u.frame[n][3][c];
    CHECK(same);
    CHECK(m.closure <= 1e-7);
    const MeshChecks c = mesh_checks(m);
    CHECK(c.first_form <= 1e-4);
    CHECK(c.shape_eigen <= 1e-3);
    CHECK(c.middle_margin > 0);
    CHECK(c.guichard_ratio <= 1e-4);
    for (double g : c.gauss) CHECK(g <= 1e-3);
}

TEST_CASE("mesh Codazzi relations converge under refinement") {
    // Absolute values at these resolutions are dominated by the stencil error near the
    // corner closest to the degenerate diagonal; the check is the refinement rate on a fixed physical band.
    const MeshChecks c41 = mesh_checks(pipeline(41).mesh, 3);
    const MeshChecks c81 = mesh_checks(pipeline(81).mesh, 6);
    for (int q = 0; q < 2; ++q) CHECK(c41.codazzi[std::size_t(q)] / c81.codazzi[std::size_t(q)] >= 8);
    CHECK(c81.first_form <= c41.first_form / 8);
    CHECK(c81.shape_eigen <= c41.shape_eigen / 4);
}

TEST_CASE("shape_eigenvalues on known forms") {
    const std::array<double, 9> I{4, 0, 0, 0, 1, 0, 0, 0, 9};
    const std::array<double, 9> II{8, 0, 0, 0, -3, 0, 0, 0, 9};
    const auto e = shape_eigenvalues(I, II);
    CHECK(e[0] == doctest::Approx(-3).epsilon(1e-14));
    CHECK(e[1] == doctest::Approx(1).epsilon(1e-14));
    CHECK(e[2] == doctest::Approx(2).epsilon(1e-14));
    // rotated identity form with a non-diagonal II: eigenvalues of the symmetric matrix itself
    const std::array<double, 9> Id{1, 0, 0, 0, 1, 0, 0, 0, 1};
    const std::array<double, 9> S{2, 1, 0, 1, 2, 0, 0, 0, 5};
    const auto f = shape_eigenvalues(Id, S);
    CHECK(f[0] == doctest::Approx(1).epsilon(1e-14));
    CHECK(f[1] == doctest::Approx(3).epsilon(1e-14));
    CHECK(f[2] == doctest::Approx(5).epsilon(1e-14));
    const std::array<double, 9> neg{1, 0, 0, 0, -1, 0, 0, 0, 1};
    CHECK_THROWS_AS(shape_eigenvalues(neg, S), NumericalError);
}

TEST_CASE("inversion: involution, Guichard ratios, transformed curvatures") {
    const auto& p = pipeline(41);
    const HypersurfaceMesh& m = p.mesh;
    const Vec4 q0{0.3, -0.2, 0.1, 0.5};
    const HypersurfaceMesh twice = inversion(inversion(m, q0), q0);
    double d = 0;
    for (int c = 0; c < 4; ++c)
        for (std::size_t n = 0; n < m.grid.size(); ++n) {
            d = std::max(d, std::fabs(twice.f[std::size_t(c)][n] - m.f[std::size_t(c)][n]));
            d = std::max(d, std::fabs(twice.N[std::size_t(c)][n] - m.N[std::size_t(c)][n]));
        }
    CHECK(d <= 1e-12);

    const HypersurfaceMesh inv = inversion(m, {3, 3, 3, 3});
    const MeshChecks c = mesh_checks(inv);
    CHECK(c.guichard_ratio <= 1e-4);
    // the carried principal curvatures are the eigenvalues of the recomputed shape operator
    double kmax = 0;
    for (std::size_t n = 0; n < inv.grid.size(); ++n) kmax = std::max(kmax, std::fabs(inv.kappa1[n]));
    CHECK(c.shape_eigen <= 1e-6 * kmax);
    CHECK(c.middle_margin > 0);
    // the conformal factor changes by a non-constant amount
    double lo = 1e300, hi = -1e300;
    for (std::size_t n = 0; n < m.grid.size(); ++n) {
        const double dP = inv.P[n] - m.P[n];
        lo = std::min(lo, dP), hi = std::max(hi, dP);
    }
    CHECK(hi - lo > 1e-3);
    CHECK_THROWS_AS(inversion(m, {m.f[0][0], m.f[1][0], m.f[2][0], m.f[3][0] + 0.01}), InputError);
}

TEST_CASE("mesh export and import") {
    const HypersurfaceMesh& m = pipeline(41).mesh;
    auto same = [&](const HypersurfaceMesh& r) {
        bool ok = r.grid == m.grid && r.base_i == m.base_i && r.base_j == m.base_j && r.closure == m.closure;
        for (int c = 0; c < 4; ++c) ok = ok && r.f[std::size_t(c)].v == m.f[std::size_t(c)].v && r.N[std::size_t(c)].v == m.N[std::size_t(c)].v;
        return ok && r.P.v == m.P.v && r.phi.v == m.phi.v && r.kappa1.v == m.kappa1.v && r.kappa2.v == m.kappa2.v &&
               r.kappa3.v == m.kappa3.v;
    };
    std::stringstream vtk;
    write_vtk(vtk, m);
    const std::string text = vtk.str();
    CHECK(text.find("DATASET STRUCTURED_GRID\nDIMENSIONS 41 41 41\n") != std::string::npos);
    std::istringstream in(text);
    CHECK(same(read_vtk(in)));

    std::stringstream csv;
    write_mesh_csv(csv, m);
    CHECK(same(read_mesh_csv(csv)));

    std::istringstream cut(text.substr(0, text.size() / 2));
    try {
        read_vtk(cut);
        FAIL("truncated mesh accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("at byte") != std::string::npos);
    }
    std::istringstream junk("not a mesh\n");
    CHECK_THROWS_AS(read_vtk(junk), InputError);
    CHECK_THROWS_AS(read_mesh("/nonexistent/mesh.vtk"), InputError);
    CHECK_THROWS_AS(read_mesh("mesh.txt"), InputError);
}
