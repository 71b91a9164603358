#include "cfh/frames.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cfh {

Mat4 identity4() {
    Mat4 m{};
    for (int a = 0; a < 4; ++a) m[a][a] = 1;
    return m;
}

Mat4 mul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double s = a[i][k];
            if (s == 0) continue;
            for (int j = 0; j < 4; ++j) r[i][j] += s * b[k][j];
        }
    return r;
}

double gram_deviation(const Mat4& f) {
    double m = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            double d = 0;
            for (int c = 0; c < 4; ++c) d += f[i][c] * f[j][c];
            m = std::max(m, std::fabs(d - (i == j ? 1.0 : 0.0)));
        }
    return m;
}

double skew_defect(const Mat4& a) {
    double m = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m = std::max(m, std::fabs(a[i][j] + a[j][i]));
    return m;
}

void orthonormalize(Mat4& f) {
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < i; ++j) {
            double d = 0;
            for (int c = 0; c < 4; ++c) d += f[i][c] * f[j][c];
            for (int c = 0; c < 4; ++c) f[i][c] -= d * f[j][c];
        }
        double n = 0;
        for (int c = 0; c < 4; ++c) n += f[i][c] * f[i][c];
        n = std::sqrt(n);
        for (int c = 0; c < 4; ++c) f[i][c] /= n;
    }
}

Mat4 transport_x(double a1, double b1, double c1) {
    return {{{0, -c1, -b1, a1}, {c1, 0, 0, 0}, {b1, 0, 0, 0}, {-a1, 0, 0, 0}}};
}

Mat4 transport_y(double a2, double b2, double c2) {
    return {{{0, c2, 0, 0}, {-c2, 0, -b2, a2}, {0, b2, 0, 0}, {0, -a2, 0, 0}}};
}

Mat4 transport_z(double p, double q, double r) {
    return {{{0, 0, p, 0}, {0, 0, q, 0}, {-p, -q, 0, r}, {0, 0, -r, 0}}};
}

void FrameOptions::validate() const {
    if (substeps < 1) throw InputError("frames: substeps must be >= 1");
    if (!(dz > 0)) throw InputError("frames: dz must be positive");
    if (decimate < 1) throw InputError("frames: decimate must be >= 1");
    if (!(compat_tol > 0) || !(drift_tol > 0)) throw InputError("frames: tolerances must be positive");
    if (mgs_every < 0) throw InputError("frames: mgs_every must be >= 0");
    if (order < 2 || order > 8 || order % 2) throw InputError("frames: stencil order must be even in [2, 8]");
}

FrameCoefficients frame_coefficients(const InitialDataSet& d) {
    const Grid2& g = d.grid;
    Field2 px, py, ux, uy;
    if (d.exact) {
        px = d.exact->phi_x, py = d.exact->phi_y, ux = d.exact->u_x, uy = d.exact->u_y;
    } else {
        px = partial(d.phi, Axis::X, 1, d.order), py = partial(d.phi, Axis::Y, 1, d.order);
        ux = partial(d.u, Axis::X, 1, d.order), uy = partial(d.u, Axis::Y, 1, d.order);
    }
    FrameCoefficients r{Field2(g), Field2(g), Field2(g), Field2(g), Field2(g), Field2(g)};
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double s = std::sin(d.phi[n]), c = std::cos(d.phi[n]), U = d.u[n];
        const double Pz = -d.u_z[n] / U, Px = -ux[n] / U, Py = -uy[n] / U, fz = d.phi_z[n];
        r.a1[n] = d.kappa1[n] * c / U;
        r.a2[n] = d.kappa2[n] * s / U;
        r.b1[n] = Pz * c - fz * s;
        r.b2[n] = Pz * s + fz * c;
        r.c1[n] = Py * c / s - py[n];
        r.c2[n] = Px * s / c + px[n];
    }
    return r;
}

namespace {

Mat4 axpy(const Mat4& f, double h, const Mat4& k) {
    Mat4 r = f;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] += h * k[i][j];
    return r;
}

// One RK4 step of F' = A(t) F; t in node units, h the physical step.
template <class Coef>
Mat4 rk4(const Mat4& F, double t, double dt, double h, const Coef& A) {
    const Mat4 A1 = A(t), A2 = A(t + 0.5 * dt), A4 = A(t + dt);
    const Mat4 k1 = mul(A1, F);
    const Mat4 k2 = mul(A2, axpy(F, 0.5 * h, k1));
    const Mat4 k3 = mul(A2, axpy(F, 0.5 * h, k2));
    const Mat4 k4 = mul(A4, axpy(F, h, k3));
    Mat4 r = F;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] += h / 6 * (k1[i][j] + 2 * k2[i][j] + 2 * k3[i][j] + k4[i][j]);
    return r;
}

// Integrates along a line of n nodes with spacing h from node s in both directions;
// out(i) receives the frame at node i.
template <class Coef, class Out>
void sweep(int n, double h, int s, const Mat4& F0, int m, int mgs, const Coef& A, const Out& out) {
    out(s, F0);
    for (int dir : {1, -1}) {
        Mat4 F = F0;
        long steps = 0;
        for (int i = s; dir > 0 ? i < n - 1 : i > 0; i += dir) {
            for (int q = 0; q < m; ++q) {
                const double t = i + dir * double(q) / m;
                F = rk4(F, t, dir * 1.0 / m, dir * h / m, A);
                if (mgs > 0 && ++steps % mgs == 0) orthonormalize(F);
            }
            out(i + dir, F);
        }
    }
}

struct LineCoef {
    const double *a, *b, *c;
    std::ptrdiff_t stride;
    int n;
    Mat4 (*make)(double, double, double);
    Mat4 operator()(double t) const {
        return make(lagrange4(a, stride, n, t), lagrange4(b, stride, n, t), lagrange4(c, stride, n, t));
    }
};

void resolve_base(int& i0, int& j0, const Grid2& g) {
    if (i0 < 0) i0 = (g.nx - 1) / 2;
    if (j0 < 0) j0 = (g.ny - 1) / 2;
    if (i0 >= g.nx || j0 >= g.ny) throw InputError("frames: base node outside the grid");
}

int zero_slice(const Grid3& G) {
    for (int k = 0; k < G.nz; ++k)
        if (std::fabs(G.z(k)) <= 1e-12 * std::max(1.0, std::fabs(G.z1 - G.z0))) return k;
    throw InputError("frames: the z-grid has no z = 0 slice");
}

double max_gram(const std::vector<Mat4>& f) {
    double m = 0;
    for (const auto& F : f) m = std::max(m, gram_deviation(F));
    return m;
}

void check_drift(double gram, const FrameOptions& opt, const char* who) {
    if (!(gram <= opt.drift_tol))
        throw NumericalError(std::string(who) + ": orthonormality drift " + std::to_string(gram) + " exceeds " +
                             std::to_string(opt.drift_tol));
}

}  // namespace

FrameField build_initial_frames(const InitialDataSet& d, const FrameOptions& opt) {
    opt.validate();
    const Grid2& g = d.grid;
    int i0 = opt.base_i, j0 = opt.base_j;
    resolve_base(i0, j0, g);
    const FrameCoefficients C = frame_coefficients(d);
    const int nx = g.nx, ny = g.ny;
    auto xline = [&](int j) {
        const std::size_t o = g.idx(0, j);
        return LineCoef{C.a1.v.data() + o, C.b1.v.data() + o, C.c1.v.data() + o, 1, nx, transport_x};
    };
    auto yline = [&](int i) {
        return LineCoef{C.a2.v.data() + i, C.b2.v.data() + i, C.c2.v.data() + i, nx, ny, transport_y};
    };

    FrameField r;
    r.grid = Grid3{g, 1, 0.0, 0.0};
    r.frame.assign(g.size(), Mat4{});
    r.base_i = i0, r.base_j = j0;
    std::vector<Mat4> row(static_cast<std::size_t>(nx));
    sweep(nx, g.hx(), i0, identity4(), opt.substeps, opt.mgs_every, xline(j0),
          [&](int i, const Mat4& F) { row[std::size_t(i)] = F; });
    parallel_for(std::size_t(nx), [&](std::size_t i) {
        sweep(ny, g.hy(), j0, row[i], opt.substeps, opt.mgs_every, yline(int(i)),
              [&](int j, const Mat4& F) { r.frame[g.idx(int(i), j)] = F; });
    });

    // y-then-x on every decimate-th row and column
    std::vector<Mat4> col(static_cast<std::size_t>(ny));
    sweep(ny, g.hy(), j0, identity4(), opt.substeps, opt.mgs_every, yline(i0),
          [&](int j, const Mat4& F) { col[std::size_t(j)] = F; });
    const int dec = opt.decimate;
    std::vector<double> diff(std::size_t(ny), 0.0);
    parallel_for(std::size_t(ny), [&](std::size_t j) {
        if (int(j) % dec && int(j) != j0) return;
        double m = 0;
        sweep(nx, g.hx(), i0, col[j], opt.substeps, opt.mgs_every, xline(int(j)), [&](int i, const Mat4& F) {
            if (i % dec) return;
            const Mat4& A = r.frame[g.idx(i, int(j))];
            for (int c = 0; c < 4; ++c) m = std::max(m, std::fabs(A[3][c] - F[3][c]));
        });
        diff[j] = m;
    });
    r.compatibility = *std::max_element(diff.begin(), diff.end());
    r.position.resize(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) r.position[n] = r.frame[n][3];
    r.gram = max_gram(r.frame);
    check_drift(r.gram, opt, "build_initial_frames");
    if (!(r.compatibility <= opt.compat_tol))
        throw InputError("build_initial_frames: path-commutation residual " + std::to_string(r.compatibility) +
                         " exceeds " + std::to_string(opt.compat_tol) + " (inconsistent initial data)");
    return r;
}

FrameField evolve_frames(const FrameField& initial, const Field3& phi, const Field3& u, const Field3& kappa3,
                         const FrameOptions& opt) {
    opt.validate();
    phi.check(u);
    phi.check(kappa3);
    const Grid3& G = phi.grid;
    if (!(initial.grid.xy == G.xy) || initial.grid.nz != 1 || initial.frame.size() != G.xy.size())
        throw InputError("evolve_frames: initial frames do not match the field grid");
    const int k0 = zero_slice(G);
    const std::size_t nxy = G.xy.size();

    Field3 p(G), q(G), r(G);
    const Field3 ux = partial(u, Axis::X, 1, opt.order), uy = partial(u, Axis::Y, 1, opt.order);
    for (std::size_t n = 0; n < G.size(); ++n) {
        const double U = u[n];
        p[n] = -ux[n] / (U * std::cos(phi[n]));
        q[n] = -uy[n] / (U * std::sin(phi[n]));
        r[n] = kappa3[n] / U;
    }
    FrameField out;
    out.grid = G;
    out.frame.assign(G.size(), Mat4{});
    out.base_i = initial.base_i, out.base_j = initial.base_j;
    const int m = G.nz > 1 ? std::max(1, int(std::ceil(G.hz() / opt.dz - 1e-9))) : 1;
    parallel_for(nxy, [&](std::size_t n) {
        const LineCoef A{p.v.data() + n, q.v.data() + n, r.v.data() + n, std::ptrdiff_t(nxy), G.nz, transport_z};
        sweep(G.nz, G.hz(), k0, initial.frame[n], m, opt.mgs_every, A,
              [&](int k, const Mat4& F) { out.frame[std::size_t(k) * nxy + n] = F; });
    });
    out.position.resize(G.size());
    for (std::size_t n = 0; n < G.size(); ++n) out.position[n] = out.frame[n][3];
    out.gram = max_gram(out.frame);
    check_drift(out.gram, opt, "evolve_frames");
    return out;
}

FrameField evolve_frames(const FrameField& initial, const EvolvedGuichardData& e, const FrameOptions& opt) {
    return evolve_frames(initial, e.phi, e.u, e.kappa3, opt);
}

std::array<double, 3> gauss_map_residual(const FrameField& f, const Field3& phi, const Field3& u,
                                         const KappaFields& k, int band, int order) {
    const Grid3& G = phi.grid;
    if (!(f.grid == G)) throw InputError("gauss_map_residual: grid mismatch");
    std::array<Field3, 3> res{Field3(G), Field3(G), Field3(G)};
    for (int c = 0; c < 4; ++c) {
        Field3 Nc(G);
        for (std::size_t n = 0; n < G.size(); ++n) Nc[n] = f.frame[n][3][c];
        const Field3 dx = partial(Nc, Axis::X, 1, order), dy = partial(Nc, Axis::Y, 1, order);
        const Field3 dz = G.nz >= 5 ? partial(Nc, Axis::Z, 1, order) : Field3(G);
        for (std::size_t n = 0; n < G.size(); ++n) {
            const Mat4& F = f.frame[n];
            const double eP = 1 / u[n];
            const double rx = dx[n] + k.kappa1[n] * eP * std::cos(phi[n]) * F[0][c];
            const double ry = dy[n] + k.kappa2[n] * eP * std::sin(phi[n]) * F[1][c];
            const double rz = G.nz >= 5 ? dz[n] + k.kappa3[n] * eP * F[2][c] : 0.0;
            res[0][n] = std::max(res[0][n], std::fabs(rx));
            res[1][n] = std::max(res[1][n], std::fabs(ry));
            res[2][n] = std::max(res[2][n], std::fabs(rz));
        }
    }
    return {max_abs(res[0], band), max_abs(res[1], band), max_abs(res[2], band)};
}

HypersurfaceMesh reconstruct_f(const FrameField& frames, const EvolvedGuichardData& e, const FrameOptions& opt) {
    opt.validate();
    const Grid3& G = e.grid;
    if (!(frames.grid == G) || frames.frame.size() != G.size())
        throw InputError("reconstruct_f: frames do not match the evolved grid");
    const Grid2& g = G.xy;
    const int nx = g.nx, ny = g.ny, nz = G.nz, i0 = frames.base_i, j0 = frames.base_j;
    const int k0 = zero_slice(G);
    const std::size_t nxy = g.size();

    HypersurfaceMesh m;
    m.grid = G;
    m.base_i = i0, m.base_j = j0;
    for (auto& c : m.f) c = Field3(G);
    for (auto& c : m.N) c = Field3(G);
    m.P = map(e.u, [](double U) { return -std::log(U); });
    m.phi = e.phi, m.kappa1 = e.kappa1, m.kappa2 = e.kappa2, m.kappa3 = e.kappa3;
    for (std::size_t n = 0; n < G.size(); ++n)
        for (int c = 0; c < 4; ++c) m.N[std::size_t(c)][n] = frames.frame[n][3][c];

    auto eP = [&](std::size_t n) { return 1 / e.u[n]; };
    auto dfx = [&](std::size_t n, int c) { return eP(n) * std::cos(e.phi[n]) * frames.frame[n][0][c]; };
    auto dfy = [&](std::size_t n, int c) { return eP(n) * std::sin(e.phi[n]) * frames.frame[n][1][c]; };

    // base column in z
    std::array<std::vector<double>, 4> base;
    for (int c = 0; c < 4; ++c) {
        if (nz == 1) {
            base[std::size_t(c)] = {0.0};
            continue;
        }
        std::vector<double> gz(static_cast<std::size_t>(nz));
        for (int k = 0; k < nz; ++k) {
            const std::size_t n = G.idx(i0, j0, k);
            gz[std::size_t(k)] = eP(n) * frames.frame[n][2][c];
        }
        base[std::size_t(c)] = cumulative_integral(gz, G.hz(), std::size_t(k0));
    }

    std::vector<double> closure(std::size_t(nz) * 4, 0.0);
    parallel_for(std::size_t(nz) * 4, [&](std::size_t task) {
        const int k = int(task / 4), c = int(task % 4);
        const std::size_t off = std::size_t(k) * nxy;
        const double b = base[std::size_t(c)][std::size_t(k)];
        Field3& F = m.f[std::size_t(c)];
        std::vector<double> gx(static_cast<std::size_t>(nx)), gy(static_cast<std::size_t>(ny));
        for (int i = 0; i < nx; ++i) gx[std::size_t(i)] = dfx(off + g.idx(i, j0), c);
        const std::vector<double> row = cumulative_integral(gx, g.hx(), std::size_t(i0));
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) gy[std::size_t(j)] = dfy(off + g.idx(i, j), c);
            const std::vector<double> col = cumulative_integral(gy, g.hy(), std::size_t(j0));
            for (int j = 0; j < ny; ++j) F[off + g.idx(i, j)] = b + row[std::size_t(i)] + col[std::size_t(j)];
        }
        // y-then-x on the decimated subset
        for (int j = 0; j < ny; ++j) gy[std::size_t(j)] = dfy(off + g.idx(i0, j), c);
        const std::vector<double> col0 = cumulative_integral(gy, g.hy(), std::size_t(j0));
        double worst = 0;
        for (int j = 0; j < ny; j += opt.decimate) {
            for (int i = 0; i < nx; ++i) gx[std::size_t(i)] = dfx(off + g.idx(i, j), c);
            const std::vector<double> r = cumulative_integral(gx, g.hx(), std::size_t(i0));
            for (int i = 0; i < nx; i += opt.decimate)
                worst = std::max(worst, std::fabs(b + col0[std::size_t(j)] + r[std::size_t(i)] - F[off + g.idx(i, j)]));
        }
        closure[task] = worst;
    });
    // f(base, 0) = 0 exactly
    for (int c = 0; c < 4; ++c) m.f[std::size_t(c)][G.idx(i0, j0, k0)] = 0.0;
    m.closure = *std::max_element(closure.begin(), closure.end());
    if (!(m.closure <= opt.compat_tol))
        throw NumericalError("reconstruct_f: closure residual " + std::to_string(m.closure) + " exceeds " +
                             std::to_string(opt.compat_tol));
    return m;
}

}  // namespace cfh
