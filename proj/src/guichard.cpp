#include "cfh/guichard.hpp"

#include <cmath>

#include "cfh/calculus.hpp"

namespace cfh {

std::array<double, 4> flatness_at(const PhiDerivs& d) {
    const double s = std::sin(d.p), c = std::cos(d.p);
    const double s2 = std::sin(2 * d.p), c2 = std::cos(2 * d.p);
    const double tn = s / c, ct = c / s;
    const double bracket_xy = ((d.xx - d.yy) * c2 - d.zz) / s2;
    const double bracket_z = (d.xx - d.yy - d.zz * c2) / s2;
    std::array<double, 4> r;
    r[0] = d.xyz + d.x * d.yz * tn - d.y * d.xz * ct;
    r[1] = 0.5 * (d.xxx - d.xyy + d.xzz) - bracket_xy * d.x - d.xz * d.z * ct;
    r[2] = 0.5 * (d.xxy - d.yyy - d.yzz) - bracket_xy * d.y - d.yz * d.z * tn;
    r[3] = 0.5 * (d.xxz + d.yyz + d.zzz) + bracket_z * d.z - d.x * d.xz * ct + d.y * d.yz * tn;
    return r;
}

std::array<double, 6> psi_system_at(const PhiDerivs& f, const PsiDerivs& q) {
    const double s = std::sin(f.p), c = std::cos(f.p);
    const double s2 = std::sin(2 * f.p), c2 = std::cos(2 * f.p);
    const double lphi = f.xx - f.yy, lpsi = q.xx - q.yy;
    std::array<double, 6> r;
    r[0] = q.xz + f.xz * c / s;
    r[1] = q.yz - f.yz * s / c;
    r[2] = q.zz - (lphi * s2 - lpsi * c2);
    r[3] = f.zz - (lphi * c2 + lpsi * s2);
    r[4] = q.xy - f.x * f.y;
    r[5] = (lphi * s2 - lpsi * c2) - (-(q.xx + q.yy) + f.x * f.x + f.y * f.y + f.z * f.z);
    return r;
}

void hat_at(double phi, double phi_z, double phi_zx, double phi_zy, double& a, double& b) {
    a = -phi_zx / (phi_z * std::sin(phi));
    b = phi_zy / (phi_z * std::cos(phi));
}

double min_abs_sin2(const Field3& phi) {
    double m = INFINITY;
    for (double p : phi.v) m = std::min(m, std::fabs(std::sin(2 * p)));
    return m;
}

double min_abs_sin2(const Field2& phi) {
    double m = INFINITY;
    for (double p : phi.v) m = std::min(m, std::fabs(std::sin(2 * p)));
    return m;
}

namespace {

void require_nondegenerate(const Field3& phi) {
    if (min_abs_sin2(phi) < 1e-8) throw NumericalError("degenerate sin 2phi: Guichard angle reaches a multiple of pi/2");
}

}  // namespace

std::array<Field3, 4> flatness_residuals(const Field3& phi, int order) {
    require_nondegenerate(phi);
    auto d = [order](const Field3& f, Axis a, int n = 1) { return partial(f, a, n, order); };
    const Field3 px = d(phi, Axis::X), py = d(phi, Axis::Y), pz = d(phi, Axis::Z);
    const Field3 pxx = d(phi, Axis::X, 2), pyy = d(phi, Axis::Y, 2), pzz = d(phi, Axis::Z, 2);
    const Field3 pxz = d(pz, Axis::X), pyz = d(pz, Axis::Y);
    const Field3 pxyz = d(pxz, Axis::Y);
    const Field3 pxxx = d(phi, Axis::X, 3), pyyy = d(phi, Axis::Y, 3), pzzz = d(phi, Axis::Z, 3);
    const Field3 pxyy = d(pyy, Axis::X), pxzz = d(pzz, Axis::X);
    const Field3 pxxy = d(pxx, Axis::Y), pyzz = d(pzz, Axis::Y);
    const Field3 pxxz = d(pxx, Axis::Z), pyyz = d(pyy, Axis::Z);
    std::array<Field3, 4> r{Field3(phi.grid), Field3(phi.grid), Field3(phi.grid), Field3(phi.grid)};
    for (std::size_t n = 0; n < phi.size(); ++n) {
        PhiDerivs q;
        q.p = phi[n];
        q.x = px[n]; q.y = py[n]; q.z = pz[n];
        q.xx = pxx[n]; q.yy = pyy[n]; q.zz = pzz[n];
        q.xz = pxz[n]; q.yz = pyz[n];
        q.xyz = pxyz[n];
        q.xxx = pxxx[n]; q.xyy = pxyy[n]; q.xzz = pxzz[n];
        q.xxy = pxxy[n]; q.yyy = pyyy[n]; q.yzz = pyzz[n];
        q.xxz = pxxz[n]; q.yyz = pyyz[n]; q.zzz = pzzz[n];
        auto v = flatness_at(q);
        for (int k = 0; k < 4; ++k) r[std::size_t(k)][n] = v[std::size_t(k)];
    }
    return r;
}

PsiResiduals psi_residuals(const Field3& phi, const Field3& psi, int order) {
    require_nondegenerate(phi);
    phi.check(psi);
    auto d = [order](const Field3& f, Axis a, int n = 1) { return partial(f, a, n, order); };
    const Field3 px = d(phi, Axis::X), py = d(phi, Axis::Y), pz = d(phi, Axis::Z);
    const Field3 pxx = d(phi, Axis::X, 2), pyy = d(phi, Axis::Y, 2), pzz = d(phi, Axis::Z, 2);
    const Field3 pxz = d(pz, Axis::X), pyz = d(pz, Axis::Y);
    const Field3 qz = d(psi, Axis::Z);
    const Field3 qxx = d(psi, Axis::X, 2), qyy = d(psi, Axis::Y, 2), qzz = d(psi, Axis::Z, 2);
    const Field3 qxy = d(d(psi, Axis::X), Axis::Y), qxz = d(qz, Axis::X), qyz = d(qz, Axis::Y);
    PsiResiduals r;
    for (auto& f : r.system) f = Field3(phi.grid);
    for (auto& f : r.normalization) f = Field3(phi.grid);
    for (std::size_t n = 0; n < phi.size(); ++n) {
        PhiDerivs f;
        f.p = phi[n];
        f.x = px[n]; f.y = py[n]; f.z = pz[n];
        f.xx = pxx[n]; f.yy = pyy[n]; f.zz = pzz[n];
        f.xz = pxz[n]; f.yz = pyz[n];
        PsiDerivs q{qxx[n], qyy[n], qzz[n], qxy[n], qxz[n], qyz[n]};
        auto v = psi_system_at(f, q);
        for (int k = 0; k < 4; ++k) r.system[std::size_t(k)][n] = v[std::size_t(k)];
        r.normalization[0][n] = v[4];
        r.normalization[1][n] = v[5];
    }
    return r;
}

namespace {

Hat2Metric hat_from(const Field2& phi, const Field2& pz, const Field2& pzx, const Field2& pzy) {
    Hat2Metric h{Field2(phi.grid), Field2(phi.grid)};
    for (std::size_t n = 0; n < phi.size(); ++n) {
        double s = std::sin(phi[n]), c = std::cos(phi[n]);
        if (pz[n] == 0.0 || std::fabs(s) < 1e-12 || std::fabs(c) < 1e-12)
            throw NumericalError("hat metric: zero divisor (phi_z, sin phi or cos phi vanishes)");
        hat_at(phi[n], pz[n], pzx[n], pzy[n], h.a[n], h.b[n]);
        if (std::fabs(h.a[n]) < 1e-12 || std::fabs(h.b[n]) < 1e-12)
            throw NumericalError("hat metric: vanishing coefficient (phi_zx or phi_zy is zero), not a metric");
    }
    return h;
}

}  // namespace

Hat2Metric hat_metric(const Field2& phi, const Field2& phi_z, int order) {
    return hat_from(phi, phi_z, partial(phi_z, Axis::X, 1, order), partial(phi_z, Axis::Y, 1, order));
}

Hat2Metric hat_metric(const Field3& phi, int k, int order) {
    Field3 pz = partial(phi, Axis::Z, 1, order);
    return hat_metric(slice(phi, k), slice(pz, k), order);
}

Hat2Metric hat_metric(const Field2& phi, const Field2& phi_z, const Field2& phi_zx, const Field2& phi_zy) {
    return hat_from(phi, phi_z, phi_zx, phi_zy);
}

Field2 gauss_curvature(const Field2& a, const Field2& b, int order) {
    a.check(b);
    // the formula is invariant under A -> -A and B -> -B; a zero or a sign change is a degenerate metric
    auto one_sign = [](const Field2& f) {
        const double s = f[0] > 0 ? 1.0 : -1.0;
        for (double v : f.v)
            if (!(s * v > 0)) return false;
        return true;
    };
    if (!one_sign(a) || !one_sign(b))
        throw InputError("gauss_curvature: a metric coefficient vanishes or changes sign on the grid");
    Field2 t1 = partial(b, Axis::X, 1, order) / a;
    Field2 t2 = partial(a, Axis::Y, 1, order) / b;
    Field2 s = partial(t1, Axis::X, 1, order) + partial(t2, Axis::Y, 1, order);
    Field2 k(a.grid);
    for (std::size_t n = 0; n < a.size(); ++n) k[n] = -s[n] / (a[n] * b[n]);
    return k;
}

GuichardReport guichard_check(const Field3& l1, const Field3& l2, const Field3& l3, double tol) {
    l1.check(l2);
    l1.check(l3);
    GuichardReport r;
    const Field3* l[3] = {&l1, &l2, &l3};
    const int perm[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
    double best = INFINITY;
    for (int p = 0; p < 3; ++p) {
        double m = 0;
        for (std::size_t n = 0; n < l1.size(); ++n)
            m = std::max(m, std::fabs((*l[perm[p][0]])[n] + (*l[perm[p][1]])[n] - (*l[perm[p][2]])[n]));
        r.residual[std::size_t(p)] = m;
        if (m <= tol && m < best) {
            best = m;
            r.holds = p;
        }
    }
    return r;
}

}  // namespace cfh
