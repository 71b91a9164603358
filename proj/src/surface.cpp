#include "cfh/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfh/calculus.hpp"
#include "cfh/guichard.hpp"

namespace cfh {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

using V4 = std::array<double, 4>;

V4 at(const std::array<Field2, 4>& f, std::size_t n) { return {f[0][n], f[1][n], f[2][n], f[3][n]}; }
double dot(const V4& a, const V4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

double det3(double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

// Cofactor vector x with <x, v> = det(r0, r1, v, r3) for every v.
V4 cofactor(const V4& r0, const V4& r1, const V4& r3) {
    V4 x{};
    for (int c = 0; c < 4; ++c) {
        int k[3], m = 0;
        for (int q = 0; q < 4; ++q)
            if (q != c) k[m++] = q;
        // expansion along row 2
        const double minor = det3(r0[k[0]], r0[k[1]], r0[k[2]], r1[k[0]], r1[k[1]], r1[k[2]], r3[k[0]], r3[k[1]],
                                  r3[k[2]]);
        x[c] = ((2 + c) % 2 == 0 ? 1 : -1) * minor;
    }
    return x;
}

double band_max(const Field2& f, int band) { return max_abs(f, band); }

std::array<Field2, 4> partial4(const std::array<Field2, 4>& f, Axis a, int deriv, int order) {
    return {partial(f[0], a, deriv, order), partial(f[1], a, deriv, order), partial(f[2], a, deriv, order),
            partial(f[3], a, deriv, order)};
}

void resolve_base(const Grid2& g, int& i0, int& j0) {
    if (i0 < 0) i0 = (g.nx - 1) / 2;
    if (j0 < 0) j0 = (g.ny - 1) / 2;
    if (i0 >= g.nx || j0 >= g.ny) throw InputError("surface: base node outside the grid");
}

double nearest(double c, double prev) { return c + kTwoPi * std::round((prev - c) / kTwoPi); }

// The two solutions of a1 sin phi - a2 cos phi = sign: Q >= 0 (index 0) and Q <= 0 (index 1).
std::array<double, 2> roots(double a1, double a2, int sign) {
    const double rho = std::max(1.0, std::hypot(a1, a2));
    const double th = std::atan2(a2, a1);
    const double al = std::asin(std::clamp(sign / rho, -1.0, 1.0));
    return {th + al, th + std::numbers::pi - al};
}

struct BranchResult {
    Field2 phi, Q, px, py, closed;
    double closedness = 0;
};

BranchResult solve_branch(const Field2& a1, const Field2& a2, const Field2& a1x, const Field2& a2y, int branch,
                          int i0, int j0, const PhiPbarOptions& opt) {
    const Grid2& g = a1.grid;
    BranchResult r;
    r.phi = Field2(g);
    auto pick = [&](int i, int j, double prev) {
        const std::size_t n = g.idx(i, j);
        const auto c = roots(a1[n], a2[n], opt.sign);
        const double u = nearest(c[0], prev), v = nearest(c[1], prev);
        return std::fabs(u - prev) <= std::fabs(v - prev) ? u : v;
    };
    const std::size_t b = g.idx(i0, j0);
    r.phi[b] = roots(a1[b], a2[b], opt.sign)[branch > 0 ? 0 : 1];
    for (int i = i0 + 1; i < g.nx; ++i) r.phi[g.idx(i, j0)] = pick(i, j0, r.phi[g.idx(i - 1, j0)]);
    for (int i = i0 - 1; i >= 0; --i) r.phi[g.idx(i, j0)] = pick(i, j0, r.phi[g.idx(i + 1, j0)]);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = j0 + 1; j < g.ny; ++j) r.phi[g.idx(i, j)] = pick(i, j, r.phi[g.idx(i, j - 1)]);
        for (int j = j0 - 1; j >= 0; --j) r.phi[g.idx(i, j)] = pick(i, j, r.phi[g.idx(i, j + 1)]);
    }
    const Field2 phx = partial(r.phi, Axis::X, 1, opt.order), phy = partial(r.phi, Axis::Y, 1, opt.order);
    r.Q = Field2(g);
    r.px = Field2(g);
    r.py = Field2(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        r.Q[n] = a1[n] * std::cos(r.phi[n]) + a2[n] * std::sin(r.phi[n]);
        r.px[n] = (a1x[n] + phx[n] * a2[n]) / a1[n];
        r.py[n] = (a2y[n] - phy[n] * a1[n]) / a2[n];
    }
    r.closed = partial(r.px, Axis::Y, 1, opt.order) - partial(r.py, Axis::X, 1, opt.order);
    r.closedness = band_max(r.closed, opt.band);
    if (!std::isfinite(r.closedness)) r.closedness = INFINITY;
    return r;
}

}  // namespace

void SurfaceOptions::validate() const {
    if (std::abs(sign_a1) != 1 || std::abs(sign_a2) != 1) throw InputError("surface: sign_a1, sign_a2 must be +-1");
    if (!(umbilic_tol >= 0) || !(a_tol >= 0) || !(unit_tol > 0)) throw InputError("surface: negative tolerance");
    if (order < 2 || order > 8 || order % 2) throw InputError("surface: order must be even in [2, 8]");
    if (band < 0) throw InputError("surface: band must be >= 0");
}

void PhiPbarOptions::validate() const {
    if (std::abs(sign) != 1) throw InputError("phi/Pbar: sign must be +-1");
    if (branch < -1 || branch > 1) throw InputError("phi/Pbar: branch must be -1, 0 or 1");
    if (!(closed_tol > 0)) throw InputError("phi/Pbar: closed_tol must be > 0");
    if (order < 2 || order > 8 || order % 2) throw InputError("phi/Pbar: order must be even in [2, 8]");
    if (band < 0) throw InputError("phi/Pbar: band must be >= 0");
}

SurfaceData frame_coefficients(const std::array<Field2, 4>& point, const SurfaceOptions& opt) {
    opt.validate();
    const Grid2& g = point[0].grid;
    g.validate();
    for (const auto& c : point) point[0].check(c);
    SurfaceData s;
    s.grid = g;
    s.point = point;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double r = std::sqrt(dot(at(point, n), at(point, n)));
        if (!(std::fabs(r - 1) <= opt.unit_tol))
            throw InputError("surface: point " + std::to_string(n) + " is off the unit sphere by " +
                             std::to_string(r - 1));
    }
    const auto px = partial4(point, Axis::X, 1, opt.order), py = partial4(point, Axis::Y, 1, opt.order);
    s.a1 = Field2(g);
    s.a2 = Field2(g);
    for (int c = 0; c < 4; ++c) {
        s.Xa[c] = Field2(g);
        s.Xb[c] = Field2(g);
        s.normal[c] = Field2(g);
    }
    for (std::size_t n = 0; n < g.size(); ++n) {
        const V4 x = at(px, n), y = at(py, n);
        const double a1 = opt.sign_a1 * std::sqrt(dot(x, x)), a2 = opt.sign_a2 * std::sqrt(dot(y, y));
        if (!(std::fabs(a1) > opt.a_tol) || !(std::fabs(a2) > opt.a_tol))
            throw InputError("surface: degenerate parametrization (a_i = 0) at node " + std::to_string(n));
        s.a1[n] = a1;
        s.a2[n] = a2;
        V4 Xa, Xb;
        for (int c = 0; c < 4; ++c) {
            Xa[c] = -x[c] / a1;
            Xb[c] = -y[c] / a2;
            s.Xa[c][n] = Xa[c];
            s.Xb[c][n] = Xb[c];
        }
        V4 xi = cofactor(Xa, Xb, at(point, n));
        const double l = std::sqrt(dot(xi, xi));
        if (!(l > 0)) throw InputError("surface: degenerate tangent plane at node " + std::to_string(n));
        for (int c = 0; c < 4; ++c) s.normal[c][n] = xi[c] / l;
    }
    const auto nx = partial4(s.normal, Axis::X, 1, opt.order), ny = partial4(s.normal, Axis::Y, 1, opt.order);
    s.b1 = Field2(g);
    s.b2 = Field2(g);
    s.lambda1 = Field2(g);
    s.lambda2 = Field2(g);
    s.H = Field2(g);
    s.E = Field2(g);
    s.G = Field2(g);
    Field2 off(g);
    s.min_umbilic = INFINITY;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const V4 Xa = at(s.Xa, n), Xb = at(s.Xb, n), x = at(px, n), y = at(py, n);
        s.b1[n] = dot(at(nx, n), Xa);
        s.b2[n] = dot(at(ny, n), Xb);
        s.lambda1[n] = s.b1[n] / s.a1[n];
        s.lambda2[n] = s.b2[n] / s.a2[n];
        s.H[n] = 0.5 * (s.lambda1[n] + s.lambda2[n]);
        s.E[n] = dot(x, x);
        s.G[n] = dot(y, y);
        const double den = std::sqrt(s.E[n] * s.G[n]);
        off[n] = std::max(std::fabs(dot(x, y)) / den, std::fabs(dot(at(nx, n), y)) / den);
        s.min_umbilic = std::min(s.min_umbilic, std::fabs(s.lambda1[n] - s.lambda2[n]));
    }
    s.principal = band_max(off, opt.band);
    if (!(s.min_umbilic > opt.umbilic_tol))
        throw InputError("genericity: umbilic point on the surface (min |lambda_1 - lambda_2| = " +
                         std::to_string(s.min_umbilic) + ")");
    s.c1 = partial(s.a1, Axis::Y, 1, opt.order) / s.a2;
    s.c2 = partial(s.a2, Axis::X, 1, opt.order) / s.a1;
    s.c1_b = partial(s.b1, Axis::Y, 1, opt.order) / s.b2;
    s.c2_b = partial(s.b2, Axis::X, 1, opt.order) / s.b1;
    s.connection = std::max(band_max(s.c1 - s.c1_b, opt.band), band_max(s.c2 - s.c2_b, opt.band));
    return s;
}

SurfaceData frame_coefficients(const HypersurfaceMesh& m, const SurfaceOptions& opt) {
    int k0 = -1;
    for (int k = 0; k < m.grid.nz; ++k)
        if (std::fabs(m.grid.z(k)) <= 1e-12 * std::max(1.0, std::fabs(m.grid.z1 - m.grid.z0))) k0 = k;
    if (k0 < 0) throw InputError("surface: the mesh has no z = 0 slice");
    return frame_coefficients({slice(m.N[0], k0), slice(m.N[1], k0), slice(m.N[2], k0), slice(m.N[3], k0)}, opt);
}

PhiPbar solve_phi_pbar(const Field2& a1, const Field2& a2, const PhiPbarOptions& opt) {
    opt.validate();
    a1.check(a2);
    const Grid2& g = a1.grid;
    int i0 = opt.base_i, j0 = opt.base_j;
    resolve_base(g, i0, j0);
    PhiPbar out;
    for (std::size_t n = 0; n < g.size(); ++n)
        if (a1[n] == 0 || a2[n] == 0 || !std::isfinite(a1[n]) || !std::isfinite(a2[n])) {
            out.reason = "a_i vanishes or is not finite at node " + std::to_string(n);
            return out;
        }
    double worst = INFINITY;
    std::size_t worst_n = 0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double r2 = a1[n] * a1[n] + a2[n] * a2[n];
        if (r2 < worst) worst = r2, worst_n = n;
    }
    if (worst < 1 - 1e-12) {
        out.reason = "a1^2 + a2^2 = " + std::to_string(worst) + " < 1 at node " + std::to_string(worst_n) +
                     ": no real phi";
        return out;
    }
    const Field2 a1x = partial(a1, Axis::X, 1, opt.order), a2y = partial(a2, Axis::Y, 1, opt.order);
    // Both roots give closed one-forms (the second one is the dual angle shifted by pi), so the branch is a
    // convention: by default Q at the base node takes the sign of the request.
    out.branch = opt.branch != 0 ? opt.branch : opt.sign;
    out.branch_closedness = {INFINITY, INFINITY};
    BranchResult best;
    for (int b : {1, -1}) {
        BranchResult r = solve_branch(a1, a2, a1x, a2y, b, i0, j0, opt);
        out.branch_closedness[b > 0 ? 0 : 1] = r.closedness;
        if (b == out.branch) best = std::move(r);
    }
    out.phi = std::move(best.phi);
    out.Q = std::move(best.Q);
    out.Pbar_x = std::move(best.px);
    out.Pbar_y = std::move(best.py);
    out.closedness_field = std::move(best.closed);
    out.closedness = best.closedness;

    // Jump bound from the implicit derivative phi_x = ((a2)_x cos - (a1)_x sin) / Q, which needs no phi stencil.
    const Field2 a1y = partial(a1, Axis::Y, 1, opt.order), a2x = partial(a2, Axis::X, 1, opt.order);
    double grad = 0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double c = std::cos(out.phi[n]), s = std::sin(out.phi[n]), q = out.Q[n];
        for (double num : {a2x[n] * c - a1x[n] * s, a2y[n] * c - a1y[n] * s})
            if (num != 0) grad = std::max(grad, q != 0 ? std::fabs(num / q) : INFINITY);
    }
    out.jump_bound = 3 * std::max(g.hx(), g.hy()) * grad;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (i + 1 < g.nx)
                out.max_jump = std::max(out.max_jump, std::fabs(out.phi[g.idx(i + 1, j)] - out.phi[g.idx(i, j)]));
            if (j + 1 < g.ny)
                out.max_jump = std::max(out.max_jump, std::fabs(out.phi[g.idx(i, j + 1)] - out.phi[g.idx(i, j)]));
        }

    out.Pbar = Field2(g);
    {
        std::vector<double> line(static_cast<std::size_t>(g.nx));
        for (int i = 0; i < g.nx; ++i) line[i] = out.Pbar_x[g.idx(i, j0)];
        const auto row = cumulative_integral(line, g.hx(), static_cast<std::size_t>(i0));
        std::vector<double> col(static_cast<std::size_t>(g.ny));
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) col[j] = out.Pbar_y[g.idx(i, j)];
            const auto c = cumulative_integral(col, g.hy(), static_cast<std::size_t>(j0));
            for (int j = 0; j < g.ny; ++j) out.Pbar[g.idx(i, j)] = row[i] + c[j];
        }
    }

    if (!(out.max_jump <= out.jump_bound)) {
        out.reason = "phi branch discontinuity: node jump " + std::to_string(out.max_jump) + " exceeds " +
                     std::to_string(out.jump_bound);
    } else if (!(out.closedness <= opt.closed_tol)) {
        out.reason = "dPbar is not closed: residual " + std::to_string(out.closedness) + " exceeds " +
                     std::to_string(opt.closed_tol);
    } else {
        out.accepted = true;
    }
    return out;
}

template <class G>
DualFields<G> schouten_dual(const Field<G>& k1, const Field<G>& k2, const Field<G>& k3, const Field<G>& eP,
                            const Field<G>& phi, const Field<G>& P_z, const Field<G>& phi_z) {
    for (const auto* f : {&k2, &k3, &eP, &phi, &P_z, &phi_z}) k1.check(*f);
    const G& g = k1.grid;
    DualFields<G> d;
    for (auto* f : {&d.sigma1, &d.sigma2, &d.sigma3, &d.eP_star, &d.P_star, &d.phi_star, &d.kappa1, &d.kappa2,
                    &d.kappa3, &d.P_star_z, &d.phi_star_z})
        *f = Field<G>(g);
    d.phi = phi;
    d.P = map(eP, [](double e) { return std::log(e); });
    d.P_z = P_z;
    d.phi_z = phi_z;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double a = k1[n], b = k2[n], c = k3[n];
        const double s1 = 0.5 * (a * b - b * c + c * a), s2 = 0.5 * (a * b + b * c - c * a),
                     s3 = 0.5 * (-a * b + b * c + c * a);
        if (s1 == 0 || s2 == 0 || s3 == 0 || !std::isfinite(s1 * s2 * s3))
            throw NumericalError("dual: a Schouten eigenvalue vanishes at node " + std::to_string(n));
        d.sigma1[n] = s1;
        d.sigma2[n] = s2;
        d.sigma3[n] = s3;
        d.eP_star[n] = s3 * eP[n];
        d.P_star[n] = std::log(std::fabs(d.eP_star[n]));
        const double cs = s1 / s3 * std::cos(phi[n]), sn = s2 / s3 * std::sin(phi[n]);
        d.phi_star[n] = std::atan2(sn, cs);
        d.kappa1[n] = a / s1;
        d.kappa2[n] = b / s2;
        d.kappa3[n] = c / s3;
        const double u = 1 / eP[n];
        d.P_star_z[n] = -(phi_z[n] * c * u + P_z[n] * (s3 - c * c)) / s3;
        d.phi_star_z[n] = (P_z[n] * c * u - phi_z[n] * (s3 - c * c)) / s3;
    }
    return d;
}

template DualFields<Grid2> schouten_dual(const Field2&, const Field2&, const Field2&, const Field2&, const Field2&,
                                         const Field2&, const Field2&);
template DualFields<Grid3> schouten_dual(const Field3&, const Field3&, const Field3&, const Field3&, const Field3&,
                                         const Field3&, const Field3&);

template <class G>
DualIdentities dual_identities(const DualFields<G>& d, const Field<G>& k3) {
    DualIdentities r;
    for (std::size_t n = 0; n < d.sigma3.size(); ++n) {
        const double u = std::exp(-d.P[n]);
        r.sigma3 = std::max(r.sigma3, std::fabs(d.sigma3[n] - 0.5 * (u * u + k3[n] * k3[n])));
        const double c = d.sigma1[n] * std::cos(d.phi[n]), s = d.sigma2[n] * std::sin(d.phi[n]);
        r.angle = std::max(r.angle, std::fabs(c * c + s * s - d.sigma3[n] * d.sigma3[n]));
        const double cs = c / d.sigma3[n], sn = s / d.sigma3[n];
        r.unit = std::max(r.unit, std::fabs(cs * cs + sn * sn - 1));
    }
    return r;
}

template DualIdentities dual_identities(const DualFields<Grid2>&, const Field2&);
template DualIdentities dual_identities(const DualFields<Grid3>&, const Field3&);

DualData dual_from_mesh(const HypersurfaceMesh& m, int order) {
    int k0 = -1;
    for (int k = 0; k < m.grid.nz; ++k)
        if (std::fabs(m.grid.z(k)) <= 1e-12 * std::max(1.0, std::fabs(m.grid.z1 - m.grid.z0))) k0 = k;
    if (k0 < 0) throw InputError("dual: the mesh has no z = 0 slice");
    if (m.grid.nz < order + 1) throw InputError("dual: too few z-slices for the z-derivatives");
    const Field2 eP = map(slice(m.P, k0), [](double p) { return std::exp(p); });
    return schouten_dual(slice(m.kappa1, k0), slice(m.kappa2, k0), slice(m.kappa3, k0), eP, slice(m.phi, k0),
                         slice(partial(m.P, Axis::Z, 1, order), k0), slice(partial(m.phi, Axis::Z, 1, order), k0));
}

DualConsistency dual_consistency(const SurfaceData& s, const DualData& d, int sign, int order, int band) {
    s.a1.check(d.phi);
    const Grid2& g = s.grid;
    const Field2 a1x = partial(s.a1, Axis::X, 1, order), a2y = partial(s.a2, Axis::Y, 1, order);
    const Field2 psx = partial(d.phi_star, Axis::X, 1, order), psy = partial(d.phi_star, Axis::Y, 1, order);
    const Field2 Psx = partial(d.P_star, Axis::X, 1, order), Psy = partial(d.P_star, Axis::Y, 1, order);
    Field2 unit(g), form(g), bd(g), bp(g), disc(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double c = std::cos(d.phi[n]), sn = std::sin(d.phi[n]);
        const double cs = d.sigma1[n] / d.sigma3[n] * c, ss = d.sigma2[n] / d.sigma3[n] * sn;
        unit[n] = s.a1[n] * ss - s.a2[n] * cs + sign;
        form[n] = std::max(std::fabs(a1x[n] + psx[n] * s.a2[n] - Psx[n] * s.a1[n]),
                           std::fabs(a2y[n] - psy[n] * s.a1[n] - Psy[n] * s.a2[n]));
        const double p1 = d.P_z[n] * c - d.phi_z[n] * sn, p2 = d.P_z[n] * sn + d.phi_z[n] * c;
        const double q1 = d.P_star_z[n] * cs - d.phi_star_z[n] * ss, q2 = d.P_star_z[n] * ss + d.phi_star_z[n] * cs;
        bp[n] = std::max(std::fabs(s.b1[n] - p1), std::fabs(s.b2[n] - p2));
        bd[n] = std::max(std::fabs(s.b1[n] - q1), std::fabs(s.b2[n] - q2));
        disc[n] = std::max(std::fabs(p1 - q1), std::fabs(p2 - q2));
    }
    return {band_max(unit, band), band_max(form, band), band_max(bd, band), band_max(bp, band),
            band_max(disc, band)};
}

FieldCheck laplacian_check(const SurfaceData& s, const Field2& phi, const Field2& phi_star, int order, int band) {
    s.a1.check(phi);
    s.a1.check(phi_star);
    const Grid2& g = s.grid;
    const auto pxx = partial4(s.point, Axis::X, 2, order), pyy = partial4(s.point, Axis::Y, 2, order);
    const Field2 sum = phi + phi_star;
    const Field2 sx = partial(sum, Axis::X, 1, order), sy = partial(sum, Axis::Y, 1, order);
    FieldCheck r;
    r.residual = Field2(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double a1 = s.a1[n], a2 = s.a2[n];
        const double k = (a1 * a1 + a2 * a2) / (a1 * a2);
        double m = 0;
        for (int c = 0; c < 4; ++c) {
            const double lhs = -pxx[c][n] / (a1 * a1) - pyy[c][n] / (a2 * a2);
            const double rhs = 2 * (s.point[c][n] - s.H[n] * s.normal[c][n]) +
                               k * (-sx[n] / (2 * a1) * s.Xa[c][n] + sy[n] / (2 * a2) * s.Xb[c][n]);
            m = std::max(m, std::fabs(lhs - rhs));
        }
        r.residual[n] = m;
    }
    r.linf = band_max(r.residual, band);
    return r;
}

FieldCheck gauss_identity_check(const SurfaceData& s, const Field2& Pbar, const Field2& phi, int order, int band) {
    s.a1.check(Pbar);
    s.a1.check(phi);
    const Grid2& g = s.grid;
    const Field2 K = gauss_curvature(s.a1, s.a2, order);
    const Field2 u = map(Pbar, [](double p) { return std::exp(-p); });
    const Field2 ux = partial(u, Axis::X, 1, order), uy = partial(u, Axis::Y, 1, order);
    const Field2 uxx = partial(u, Axis::X, 2, order), uyy = partial(u, Axis::Y, 2, order);
    const Field2 fx = partial(phi, Axis::X, 1, order), fy = partial(phi, Axis::Y, 1, order);
    const Field2 fxx = partial(phi, Axis::X, 2, order), fyy = partial(phi, Axis::Y, 2, order);
    FieldCheck r;
    r.residual = Field2(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double c = std::cos(phi[n]), sn = std::sin(phi[n]), e = u[n];
        const double k1 = s.a1[n] * e / c, k2 = s.a2[n] * e / sn;
        const double lhs = k1 * k2 * K[n];
        const double rhs = e / (c * c) * (uxx[n] + fx[n] / (sn * c) * ux[n]) +
                           e / (sn * sn) * (uyy[n] - fy[n] / (sn * c) * uy[n]) -
                           (ux[n] * ux[n] / (c * c) + uy[n] * uy[n] / (sn * sn)) -
                           e * e / (sn * c) * (fxx[n] - fyy[n]);
        r.residual[n] = lhs - rhs;
    }
    r.linf = band_max(r.residual, band);
    return r;
}

}  // namespace cfh
