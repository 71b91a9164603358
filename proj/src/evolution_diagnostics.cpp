#include <cmath>

#include "cfh/evolution.hpp"

namespace cfh {

namespace {

// Stencil derivatives shared by the diagnostics.
struct D3 {
    Field3 px, py, pz, pxx, pyy, pzz, pzx, pzy;
    Field3 ux, uy, uz, uxx, uyy, uzz, uxy, uzx, uzy;

    D3(const Field3& phi, const Field3& u, int o) {
        if (!(phi.grid == u.grid)) throw InputError("diagnostics: grid mismatch");
        if (phi.grid.nz < 5) throw InputError("diagnostics: need at least 5 z-slices");
        px = partial(phi, Axis::X, 1, o), py = partial(phi, Axis::Y, 1, o), pz = partial(phi, Axis::Z, 1, o);
        pxx = partial(phi, Axis::X, 2, o), pyy = partial(phi, Axis::Y, 2, o), pzz = partial(phi, Axis::Z, 2, o);
        pzx = partial(pz, Axis::X, 1, o), pzy = partial(pz, Axis::Y, 1, o);
        ux = partial(u, Axis::X, 1, o), uy = partial(u, Axis::Y, 1, o), uz = partial(u, Axis::Z, 1, o);
        uxx = partial(u, Axis::X, 2, o), uyy = partial(u, Axis::Y, 2, o), uzz = partial(u, Axis::Z, 2, o);
        uxy = partial(ux, Axis::Y, 1, o), uzx = partial(uz, Axis::X, 1, o), uzy = partial(uz, Axis::Y, 1, o);
    }
};

struct Trig {
    double s, c, t, ct, c2;
    explicit Trig(double p) : s(std::sin(p)), c(std::cos(p)), t(s / c), ct(c / s), c2(c * c - s * s) {}
};

double kappa3_at(const Trig& g, const D3& d, double u, std::size_t n) {
    return (g.t * d.uxx[n] - d.px[n] * g.c2 / (g.c * g.c) * d.ux[n]) -
           (g.ct * d.uyy[n] - d.py[n] * g.c2 / (g.s * g.s) * d.uy[n]) + (u * d.pzz[n] - d.uz[n] * d.pz[n]);
}

double zeta_at(const Trig& g, const D3& d, double u, std::size_t n) {
    return u * ((d.uxx[n] + 2 * d.px[n] * g.t * d.ux[n]) + (d.uyy[n] - 2 * d.py[n] * g.ct * d.uy[n]) +
                (d.uzz[n] + d.pz[n] * d.pz[n] * u)) -
           (d.ux[n] * d.ux[n] / (g.c * g.c) + d.uy[n] * d.uy[n] / (g.s * g.s) + d.uz[n] * d.uz[n]);
}

}  // namespace

KappaFields kappa_fields(const Field3& phi, const Field3& u, int order) {
    D3 d(phi, u, order);
    KappaFields k{Field3(phi.grid), Field3(phi.grid), Field3(phi.grid)};
    parallel_for(phi.size(), [&](std::size_t n) {
        Trig g(phi[n]);
        const double k3 = kappa3_at(g, d, u[n], n);
        k.kappa3[n] = k3;
        k.kappa1[n] = u[n] * g.t + k3;
        k.kappa2[n] = -u[n] * g.ct + k3;
    });
    return k;
}

ConstraintSlices constraint_report(const Field3& phi, const Field3& u, const Field3& kappa3, int band, int order) {
    D3 d(phi, u, order);
    phi.check(kappa3);
    ConstraintSlices r;
    for (auto& f : r.field) f = Field3(phi.grid);
    parallel_for(phi.size(), [&](std::size_t n) {
        Trig g(phi[n]);
        const double U = u[n];
        r.field[0][n] = d.uxy[n] - d.uy[n] * d.px[n] * g.ct + d.ux[n] * d.py[n] * g.t;
        r.field[1][n] = d.uzx[n] + d.ux[n] * d.pz[n] * g.t - U * d.pzx[n] * g.ct;
        r.field[2][n] = d.uzy[n] - d.uy[n] * d.pz[n] * g.ct + U * d.pzy[n] * g.t;
        r.field[3][n] = zeta_at(g, d, U, n) - kappa3[n] * kappa3[n];
    });
    for (int q = 0; q < 4; ++q) {
        auto& ps = r.per_slice[std::size_t(q)];
        for (int k = 0; k < phi.grid.nz; ++k) ps.push_back(norms(slice(r.field[std::size_t(q)], k), band));
        double m = 0;
        for (const auto& nm : ps) m = std::max(m, nm.linf);
        r.max_linf[std::size_t(q)] = m;
    }
    return r;
}

CurvatureDiagnostics curvature_diagnostics(const Field3& phi, const Field3& u, const KappaFields& k, int order) {
    D3 d(phi, u, order);
    const Grid3& G = phi.grid;
    CurvatureDiagnostics r;
    for (Field3* f : {&r.K_ab, &r.K_bc, &r.K_ca, &r.chi, &r.zeta_identity}) *f = Field3(G);
    for (auto& f : r.gauss) f = Field3(G);
    for (auto& f : r.codazzi) f = Field3(G);
    Field3 k1x = partial(k.kappa1, Axis::X, 1, order), k1y = partial(k.kappa1, Axis::Y, 1, order),
           k1z = partial(k.kappa1, Axis::Z, 1, order);
    Field3 k2x = partial(k.kappa2, Axis::X, 1, order), k2y = partial(k.kappa2, Axis::Y, 1, order),
           k2z = partial(k.kappa2, Axis::Z, 1, order);
    Field3 k3x = partial(k.kappa3, Axis::X, 1, order), k3y = partial(k.kappa3, Axis::Y, 1, order),
           k3z = partial(k.kappa3, Axis::Z, 1, order);
    r.kappa3_derivs = {Field3(G), Field3(G), Field3(G)};
    parallel_for(G.size(), [&](std::size_t n) {
        Trig g(phi[n]);
        const double U = u[n], s = g.s, c = g.c, sc = s * c;
        const double ux = d.ux[n], uy = d.uy[n], uz = d.uz[n], pz = d.pz[n];
        const double grad = ux * ux / (c * c) + uy * uy / (s * s);
        // (e^P cos phi)_z and (e^P sin phi)_z with e^P = 1 / u
        const double ec_z = -uz * c / (U * U) - s * pz / U;
        const double es_z = -uz * s / (U * U) + c * pz / U;
        const double Kab = U / (c * c) * (d.uxx[n] + d.px[n] / sc * ux) + U / (s * s) * (d.uyy[n] - d.py[n] / sc * uy) -
                           grad - U * U / sc * (d.pxx[n] - d.pyy[n]) - U * U * U * U / sc * ec_z * es_z;
        const double Kbc = U * d.px[n] / sc * ux + U / (s * s) * (d.uyy[n] - d.py[n] * g.ct * uy) +
                           U * (d.uzz[n] + pz * g.ct * uz) - grad - uz * uz + U * U * (pz * pz - d.pzz[n] * g.ct);
        const double Kca = U / (c * c) * (d.uxx[n] + d.px[n] * g.t * ux) - U * d.py[n] / sc * uy +
                           U * (d.uzz[n] - pz * g.t * uz) - grad - uz * uz + U * U * (pz * pz + d.pzz[n] * g.t);
        const double k1 = k.kappa1[n], k2 = k.kappa2[n], k3 = k.kappa3[n];
        r.K_ab[n] = Kab;
        r.K_bc[n] = Kbc;
        r.K_ca[n] = Kca;
        r.chi[n] = Kab - k1 * k2;
        r.zeta_identity[n] = zeta_at(g, d, U, n) - (Kbc * s * s + Kca * c * c);
        r.gauss[0][n] = Kab - k1 * k2;
        r.gauss[1][n] = Kbc - k2 * k3;
        r.gauss[2][n] = Kca - k3 * k1;
        r.kappa3_derivs[0][n] = k3x[n] + ux * g.t;
        r.kappa3_derivs[1][n] = k3y[n] - uy * g.ct;
        r.kappa3_derivs[2][n] = k3z[n] + U * pz;
        r.codazzi[0][n] = (k2 - k3) * k1x[n] + (k1 - k3) * k2x[n] + (k2 - k1) * k3x[n];
        r.codazzi[1][n] = (k3 - k1) * k2y[n] + (k2 - k1) * k3y[n] + (k3 - k2) * k1y[n];
        r.codazzi[2][n] = (k1 - k2) * k3z[n] + (k3 - k2) * k1z[n] + (k1 - k3) * k2z[n];
    });
    return r;
}

std::array<Field3, 4> propagation_identities(const Field3& phi, const Field3& u, const Field3& kappa3, int order) {
    ConstraintSlices c = constraint_report(phi, u, kappa3, 0, order);
    D3 d(phi, u, order);
    const Field3 &Ixy = c.field[0], &Ixz = c.field[1], &Iyz = c.field[2], &J = c.field[3];
    Field3 Ixy_x = partial(Ixy, Axis::X, 1, order), Ixy_y = partial(Ixy, Axis::Y, 1, order),
           Ixy_z = partial(Ixy, Axis::Z, 1, order);
    Field3 Ixz_x = partial(Ixz, Axis::X, 1, order), Ixz_y = partial(Ixz, Axis::Y, 1, order),
           Ixz_z = partial(Ixz, Axis::Z, 1, order);
    Field3 Iyz_y = partial(Iyz, Axis::Y, 1, order), Iyz_z = partial(Iyz, Axis::Z, 1, order);
    Field3 Jx = partial(J, Axis::X, 1, order), Jy = partial(J, Axis::Y, 1, order), Jz = partial(J, Axis::Z, 1, order);
    const Grid3& G = phi.grid;
    std::array<Field3, 4> r{Field3(G), Field3(G), Field3(G), Field3(G)};
    parallel_for(G.size(), [&](std::size_t n) {
        Trig g(phi[n]);
        const double U = u[n], k3 = kappa3[n], s = g.s, c = g.c, sc = s * c;
        const double k1 = U * g.t + k3, k2 = -U * g.ct + k3;
        const double px = d.px[n], py = d.py[n], pz = d.pz[n];
        r[0][n] = Ixy_z[n] - (Ixz_y[n] - pz * g.t * Ixy[n] + py * g.t * Ixz[n] - px * g.ct * Iyz[n]);
        r[1][n] = -k2 * g.t * Ixz_z[n] - (0.5 * Jx[n] - k3 / sc * Ixy_y[n] +
                                          (k3 * py / (c * c) + d.uy[n]) / (s * s) * Ixy[n] +
                                          (-k3 * pz / (c * c) + U * pz * g.t + d.uz[n]) * Ixz[n]);
        r[2][n] = k1 * g.ct * Iyz_z[n] - (0.5 * Jy[n] + k3 / sc * Ixy_x[n] +
                                          (k3 * px / (s * s) + d.ux[n]) / (c * c) * Ixy[n] -
                                          (k3 * pz / (s * s) + U * pz * g.ct - d.uz[n]) * Iyz[n]);
        r[3][n] = 0.5 * Jz[n] - (-k2 * g.t * Ixz_x[n] + k1 * g.ct * Iyz_y[n] +
                                 (2 * U * px * g.t + k3 * px * g.c2 / (c * c) - d.ux[n] / (c * c)) * Ixz[n] -
                                 (2 * U * py * g.ct + k3 * py * g.c2 / (s * s) + d.uy[n] / (s * s)) * Iyz[n]);
    });
    return r;
}

double max_linf(const Field3& f, int band) { return norms(f, band).linf; }

}  // namespace cfh
