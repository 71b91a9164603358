#include "cfh/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace cfh {

ZMethod parse_zmethod(const std::string& s) {
    if (s == "taylor") return ZMethod::Taylor;
    if (s == "mol") return ZMethod::MOL;
    throw InputError("unknown evolution method '" + s + "' (expected taylor or mol)");
}

std::string to_string(ZMethod m) { return m == ZMethod::Taylor ? "taylor" : "mol"; }

void EvolutionOptions::validate() const {
    if (M < 2 || M > 20) throw InputError("evolution: series order M must lie in [2, 20]");
    if (!(z_max >= 0) || !std::isfinite(z_max)) throw InputError("evolution: z_max must be non-negative");
    if (z_max == 0 && nz != 1) throw InputError("evolution: z_max = 0 requires nz = 1");
    if (z_max > 0 && (nz < 5 || nz % 2 == 0)) throw InputError("evolution: nz must be odd and at least 5");
    if (order < 2 || order > 8 || order % 2) throw InputError("evolution: stencil order must be 2, 4, 6 or 8");
    if (pad < 0) throw InputError("evolution: pad must be non-negative");
    if (!(step_ratio > 0) || step_ratio > 0.8) throw InputError("evolution: step_ratio must lie in (0, 0.8]");
    if (!(trig_guard > 0) || !(kappa_guard >= 0)) throw InputError("evolution: guards must be positive");
    if (!(blowup > 0)) throw InputError("evolution: blow-up threshold must be positive");
}

Grid3 EvolutionOptions::grid(const Grid2& window) const { return Grid3{window, nz, -z_max, z_max}; }

// ---------------------------------------------------------------- z-series engine

namespace {

// sum_{j=lo}^{k} w(j) a_j b_{k-j}
template <class W>
Jet2 conv(const std::vector<Jet2>& a, const std::vector<Jet2>& b, int k, int lo, W w) {
    Jet2 r;
    for (int j = lo; j <= k; ++j) {
        Jet2 t = a[std::size_t(j)] * b[std::size_t(k - j)];
        double s = w(j);
        if (s != 1.0) t *= s;
        if (r.empty())
            r = std::move(t);
        else
            r += t;
    }
    return r;
}

Jet2 conv(const std::vector<Jet2>& a, const std::vector<Jet2>& b, int k) {
    return conv(a, b, k, 0, [](int) { return 1.0; });
}

Jet2 second_x(const Jet2& f) { return f.dx().dx(); }
Jet2 second_y(const Jet2& f) { return f.dy().dy(); }

}  // namespace

ZSeries taylor_z_series(const Seed& seed, double x, double y, int M) {
    if (M < 2) throw InputError("taylor_z_series: order must be at least 2");
    SeedJets J = seed.jets(x, y, M);
    const std::size_t n = std::size_t(M) + 1;
    std::vector<Jet2> ph(n), ps(n), u(n);
    ph[0] = J.phi, ph[1] = J.phi_z, ps[0] = J.psi, ps[1] = J.psi_z, u[0] = J.u, u[1] = J.u_z;
    std::vector<Jet2> s(n), c(n), T(n), K(n), S2(n), C2(n);
    std::vector<Jet2> phx(n), phy(n), ux(n), uy(n), Lph(n), Lps(n), Du(n), W(n), V(n), pzz(n);
    Jet2 rc0, rs0;
    for (int k = 0; k + 2 <= M; ++k) {
        const std::size_t kk = std::size_t(k);
        if (k == 0) {
            sincos(ph[0], s[0], c[0]);
            rc0 = recip(c[0]);
            rs0 = recip(s[0]);
            T[0] = s[0] * rc0;
            K[0] = c[0] * rs0;
        } else {
            // s' = phi' c, c' = -phi' s; tan = s / c and cot = c / s by series division
            s[kk] = conv(ph, c, k, 1, [&](int j) { return double(j) / k; });
            c[kk] = conv(ph, s, k, 1, [&](int j) { return -double(j) / k; });
            T[kk] = (s[kk] - conv(c, T, k, 1, [](int) { return 1.0; })) * rc0;
            K[kk] = (c[kk] - conv(s, K, k, 1, [](int) { return 1.0; })) * rs0;
        }
        S2[kk] = conv(s, c, k) * 2.0;
        C2[kk] = conv(c, c, k) - conv(s, s, k);
        phx[kk] = ph[kk].dx();
        phy[kk] = ph[kk].dy();
        ux[kk] = u[kk].dx();
        uy[kk] = u[kk].dy();
        Lph[kk] = second_x(ph[kk]) - second_y(ph[kk]);
        Lps[kk] = second_x(ps[kk]) - second_y(ps[kk]);
        Du[kk] = second_x(u[kk]) + second_y(u[kk]);
        W[kk] = conv(phx, T, k);
        V[kk] = conv(phy, K, k);
        const double f = double(k + 2) * (k + 1);
        ph[kk + 2] = (conv(C2, Lph, k) + conv(S2, Lps, k)) * (1.0 / f);
        ps[kk + 2] = (conv(S2, Lph, k) - conv(C2, Lps, k)) * (1.0 / f);
        pzz[kk] = ps[kk + 2] * f;
        Jet2 r = Du[kk] + conv(W, ux, k) * 2.0 - conv(V, uy, k) * 2.0 + u[kk] - conv(pzz, u, k) * 2.0;
        u[kk + 2] = r * (1.0 / f);
    }
    ZSeries z;
    z.phi.resize(n), z.psi.resize(n), z.u.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        z.phi[k] = ph[k].value();
        z.psi[k] = ps[k].value();
        z.u[k] = u[k].value();
    }
    return z;
}

namespace {

double horner(const std::vector<double>& a, double z) {
    double s = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * z + *it;
    return s;
}

int zero_slice(const Grid3& g) {
    for (int k = 0; k < g.nz; ++k)
        if (std::fabs(g.z(k)) <= 1e-12 * std::max(1.0, std::fabs(g.z1 - g.z0))) return k;
    throw InputError("evolution grid has no z = 0 slice");
}

Field3 z_sub(const Field3& f, int k0, int k1) {
    Grid3 g{f.grid.xy, k1 - k0 + 1, f.grid.z(k0), f.grid.z(k1)};
    if (g.nz == 1) g.z1 = g.z0;
    Field3 r(g);
    const std::size_t m = f.grid.xy.size();
    std::copy(f.v.begin() + std::ptrdiff_t(std::size_t(k0) * m), f.v.begin() + std::ptrdiff_t(std::size_t(k1 + 1) * m),
              r.v.begin());
    return r;
}

// ---------------------------------------------------------------- method of lines

struct MolState {
    std::array<Field2, 6> f;  // phi, phi_z, psi, psi_z, u, u_z
};

MolState mol_rhs(const MolState& s, int order) {
    const Field2 &phi = s.f[0], &psi = s.f[2], &u = s.f[4];
    Field2 phx = partial(phi, Axis::X, 1, order), phy = partial(phi, Axis::Y, 1, order);
    Field2 Lph = partial(phi, Axis::X, 2, order) - partial(phi, Axis::Y, 2, order);
    Field2 Lps = partial(psi, Axis::X, 2, order) - partial(psi, Axis::Y, 2, order);
    Field2 ux = partial(u, Axis::X, 1, order), uy = partial(u, Axis::Y, 1, order);
    Field2 Du = partial(u, Axis::X, 2, order) + partial(u, Axis::Y, 2, order);
    MolState r;
    r.f[0] = s.f[1];
    r.f[2] = s.f[3];
    r.f[4] = s.f[5];
    r.f[1] = Field2(phi.grid);
    r.f[3] = Field2(phi.grid);
    r.f[5] = Field2(phi.grid);
    parallel_for(phi.size(), [&](std::size_t n) {
        const double p = phi[n], c2 = std::cos(2 * p), s2 = std::sin(2 * p), t = std::tan(p);
        const double phzz = c2 * Lph[n] + s2 * Lps[n];
        const double pszz = s2 * Lph[n] - c2 * Lps[n];
        r.f[1][n] = phzz;
        r.f[3][n] = pszz;
        r.f[5][n] = Du[n] + 2 * phx[n] * t * ux[n] - 2 * phy[n] / t * uy[n] + (1 - 2 * pszz) * u[n];
    });
    return r;
}

MolState axpy(const MolState& a, double h, const MolState& k) {
    MolState r = a;
    for (int i = 0; i < 6; ++i)
        for (std::size_t n = 0; n < r.f[std::size_t(i)].size(); ++n) r.f[std::size_t(i)][n] += h * k.f[std::size_t(i)][n];
    return r;
}

void rk4_step(MolState& s, double h, int order) {
    MolState k1 = mol_rhs(s, order);
    MolState k2 = mol_rhs(axpy(s, h / 2, k1), order);
    MolState k3 = mol_rhs(axpy(s, h / 2, k2), order);
    MolState k4 = mol_rhs(axpy(s, h, k3), order);
    for (int i = 0; i < 6; ++i) {
        Field2& f = s.f[std::size_t(i)];
        for (std::size_t n = 0; n < f.size(); ++n)
            f[n] += h / 6 * (k1.f[std::size_t(i)][n] + 2 * k2.f[std::size_t(i)][n] + 2 * k3.f[std::size_t(i)][n] +
                             k4.f[std::size_t(i)][n]);
    }
}

bool finite_below(const MolState& s, double limit) {
    for (const auto& f : s.f)
        for (double v : f.v)
            if (!(std::fabs(v) <= limit)) return false;
    return true;
}

}  // namespace

void lowpass_filter(Field2& f) {
    // f += (delta^2)^5 f / 1024: transfer 1 - sin^10(theta / 2)
    static const double w[11] = {-1, 10, -45, 120, -210, 252, -210, 120, -45, 10, -1};
    const Grid2& g = f.grid;
    std::vector<double> tmp(f.v);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 5; i + 5 < g.nx; ++i) {
            double s = 0;
            for (int m = -5; m <= 5; ++m) s += w[m + 5] * tmp[g.idx(i + m, j)];
            f[g.idx(i, j)] = tmp[g.idx(i, j)] - s / 1024;
        }
    tmp = f.v;
    for (int j = 5; j + 5 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double s = 0;
            for (int m = -5; m <= 5; ++m) s += w[m + 5] * tmp[g.idx(i, j + m)];
            f[g.idx(i, j)] = tmp[g.idx(i, j)] - s / 1024;
        }
}

MolFields evolve_mol(const Field2& phi, const Field2& phi_z, const Field2& psi, const Field2& psi_z, const Field2& u,
                     const Field2& u_z, const Grid3& out, const EvolutionOptions& opt) {
    opt.validate();
    for (const Field2* f : {&phi_z, &psi, &psi_z, &u, &u_z}) phi.check(*f);
    const Grid2& g = phi.grid;
    const int k0 = zero_slice(out);
    MolFields r{Field3(Grid3{g, out.nz, out.z0, out.z1}, std::nan("")), {}, {}, 0, 0};
    r.psi = r.phi;
    r.u = r.phi;
    MolState init{{phi, phi_z, psi, psi_z, u, u_z}};
    auto store = [&](const MolState& s, int k) {
        set_slice(r.phi, k, s.f[0]);
        set_slice(r.psi, k, s.f[2]);
        set_slice(r.u, k, s.f[4]);
    };
    store(init, k0);
    const double dz = out.hz();
    const int sub = dz > 0 ? std::max(1, int(std::ceil(dz / (opt.step_ratio * std::min(g.hx(), g.hy())) - 1e-12))) : 1;
    for (int dir : {1, -1}) {
        MolState s = init;
        double reached = 0;
        for (int k = k0 + dir; k >= 0 && k < out.nz; k += dir) {
            const double z_from = out.z(k - dir), h = (out.z(k) - z_from) / sub;
            for (int m = 0; m < sub; ++m) {
                rk4_step(s, h, opt.order);
                if (opt.filter)
                    for (auto& f : s.f) lowpass_filter(f);
            }
            if (!finite_below(s, opt.blowup)) break;
            store(s, k);
            reached = out.z(k);
        }
        (dir > 0 ? r.z_hi : r.z_lo) = reached;
    }
    return r;
}

Field3 evolve_conformal(const Field3& phi, const Field2& u0, const Field2& uz0, int order, bool filter) {
    const Grid3& g = phi.grid;
    if (!(u0.grid == g.xy) || !(uz0.grid == g.xy)) throw InputError("evolve_conformal: grid mismatch");
    if (g.nz < 5) throw InputError("evolve_conformal: need at least 5 z-slices");
    const int k0 = zero_slice(g);
    // coefficients of u_zz = Du + a u_x + b u_y + c u
    Field3 phx = partial(phi, Axis::X, 1, order), phy = partial(phi, Axis::Y, 1, order);
    Field3 Lph = partial(phi, Axis::X, 2, order) - partial(phi, Axis::Y, 2, order);
    Field3 phzz = partial(phi, Axis::Z, 2, order);
    Field3 a(g), b(g), c(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double p = phi[n], t = std::tan(p);
        const double psizz = (Lph[n] - phzz[n] * std::cos(2 * p)) / std::sin(2 * p);
        a[n] = 2 * phx[n] * t;
        b[n] = -2 * phy[n] / t;
        c[n] = 1 - 2 * psizz;
    }
    const std::size_t m = g.xy.size();
    // coefficients at fractional slice position t (node units)
    auto coeffs_at = [&](double t, Field2& A, Field2& B, Field2& C) {
        A = Field2(g.xy), B = Field2(g.xy), C = Field2(g.xy);
        const double r = t - std::round(t);
        if (std::fabs(r) < 1e-12) {
            int k = int(std::lround(t));
            A = slice(a, k), B = slice(b, k), C = slice(c, k);
            return;
        }
        for (std::size_t n = 0; n < m; ++n) {
            A[n] = lagrange4(a.v.data() + n, std::ptrdiff_t(m), g.nz, t);
            B[n] = lagrange4(b.v.data() + n, std::ptrdiff_t(m), g.nz, t);
            C[n] = lagrange4(c.v.data() + n, std::ptrdiff_t(m), g.nz, t);
        }
    };
    auto rhs = [&](const Field2& u, const Field2& uz, double t, Field2& du, Field2& duz) {
        Field2 A, B, C;
        coeffs_at(t, A, B, C);
        Field2 ux = partial(u, Axis::X, 1, order), uy = partial(u, Axis::Y, 1, order);
        Field2 D = partial(u, Axis::X, 2, order) + partial(u, Axis::Y, 2, order);
        du = uz;
        duz = D + A * ux + B * uy + C * u;
    };
    Field3 out(g);
    set_slice(out, k0, u0);
    const double h = g.hz();
    for (int dir : {1, -1}) {
        Field2 u = u0, uz = uz0;
        for (int k = k0; k + dir >= 0 && k + dir < g.nz; k += dir) {
            const double t = k, sh = dir * h;
            Field2 k1u, k1z, k2u, k2z, k3u, k3z, k4u, k4z;
            rhs(u, uz, t, k1u, k1z);
            rhs(u + (sh / 2) * k1u, uz + (sh / 2) * k1z, t + dir * 0.5, k2u, k2z);
            rhs(u + (sh / 2) * k2u, uz + (sh / 2) * k2z, t + dir * 0.5, k3u, k3z);
            rhs(u + sh * k3u, uz + sh * k3z, t + dir, k4u, k4z);
            u += (sh / 6) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            uz += (sh / 6) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
            if (filter) {
                lowpass_filter(u);
                lowpass_filter(uz);
            }
            set_slice(out, k + dir, u);
        }
    }
    return out;
}

// ---------------------------------------------------------------- driver

namespace {

struct RawEvolution {
    Field3 phi, psi, u;
    double z_lo = 0, z_hi = 0;
};

RawEvolution run_taylor(const Seed& seed, const Grid3& g, int M) {
    RawEvolution r{Field3(g), Field3(g), Field3(g), g.z0, g.z1};
    const std::size_t m = g.xy.size();
    std::vector<std::string> errors(m);
    parallel_for(m, [&](std::size_t n) {
        int i = int(n % std::size_t(g.xy.nx)), j = int(n / std::size_t(g.xy.nx));
        try {
            ZSeries z = taylor_z_series(seed, g.xy.x(i), g.xy.y(j), M);
            for (int k = 0; k < g.nz; ++k) {
                const double zk = g.z(k);
                const std::size_t q = std::size_t(k) * m + n;
                r.phi[q] = horner(z.phi, zk);
                r.psi[q] = horner(z.psi, zk);
                r.u[q] = horner(z.u, zk);
            }
        } catch (const std::exception& e) {
            errors[n] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw NumericalError("z-series engine: " + e);
    return r;
}

RawEvolution run_mol_padded(const Seed& seed, const Grid3& g, const EvolutionOptions& opt) {
    const Grid2& w = g.xy;
    const Grid2 dom = seed.domain();
    const double hx = w.hx(), hy = w.hy();
    auto fit = [&](double room, double h) { return std::max(0, std::min(opt.pad, int(std::floor(room / h + 1e-9)))); };
    const int pl = fit(w.x0 - dom.x0, hx), pr = fit(dom.x1 - w.x1, hx);
    const int pb = fit(w.y0 - dom.y0, hy), pt = fit(dom.y1 - w.y1, hy);
    Grid2 pg{w.nx + pl + pr, w.ny + pb + pt, w.x0 - pl * hx, w.x1 + pr * hx, w.y0 - pb * hy, w.y1 + pt * hy};
    SeedSamples s = sample_seed(seed, pg);
    MolFields f = evolve_mol(s.phi, s.phi_z, s.psi, s.psi_z, s.u, s.u_z, Grid3{pg, g.nz, g.z0, g.z1}, opt);
    RawEvolution r{Field3(g), Field3(g), Field3(g), f.z_lo, f.z_hi};
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < w.ny; ++j)
            for (int i = 0; i < w.nx; ++i) {
                std::size_t from = f.phi.grid.idx(i + pl, j + pb, k), to = g.idx(i, j, k);
                r.phi[to] = f.phi[from];
                r.psi[to] = f.psi[from];
                r.u[to] = f.u[from];
            }
    return r;
}

EvolvedGuichardData finish(RawEvolution raw, const Grid3& g, const EvolutionOptions& opt, const std::string& method) {
    EvolvedGuichardData d;
    d.method = method;
    const int k0 = zero_slice(g);
    const std::size_t m = g.xy.size();
    const int band = std::min(3, (std::min(g.xy.nx, g.xy.ny) - 1) / 2);
    KappaFields kf;
    Field3 gen;  // phi_z phi_zx phi_zy
    if (g.nz >= 5) {
        kf = kappa_fields(raw.phi, raw.u, opt.order);
        Field3 pz = partial(raw.phi, Axis::Z, 1, opt.order);
        Field3 pzx = partial(pz, Axis::X, 1, opt.order), pzy = partial(pz, Axis::Y, 1, opt.order);
        gen = Field3(g);
        for (std::size_t n = 0; n < gen.size(); ++n) gen[n] = pz[n] * pzx[n] * pzy[n];
    }
    d.monitors.resize(std::size_t(g.nz));
    for (int k = 0; k < g.nz; ++k) {
        SliceMonitor& s = d.monitors[std::size_t(k)];
        s.z = g.z(k);
        s.min_sincos = HUGE_VAL;
        s.min_u = HUGE_VAL;
        s.min_k1k2 = HUGE_VAL;
        s.min_generic = HUGE_VAL;
        bool finite = true;
        for (std::size_t n = 0; n < m; ++n) {
            const std::size_t q = std::size_t(k) * m + n;
            const double p = raw.phi[q];
            if (!std::isfinite(p) || !std::isfinite(raw.u[q]) || !std::isfinite(raw.psi[q])) finite = false;
            s.min_sincos = std::min(s.min_sincos, std::fabs(std::sin(p) * std::cos(p)));
            s.min_u = std::min(s.min_u, raw.u[q]);
        }
        if (!kf.kappa1.v.empty())
            for (int j = band; j < g.xy.ny - band; ++j)
                for (int i = band; i < g.xy.nx - band; ++i) {
                    const std::size_t q = g.idx(i, j, k);
                    double v = std::fabs(kf.kappa1[q] * kf.kappa2[q]);
                    if (!(v >= s.min_k1k2)) s.min_k1k2 = v;  // NaN propagates as failure
                    const double w = gen[q] * (gen[g.idx(i, j, k0)] < 0 ? -1.0 : 1.0);
                    if (!(w >= s.min_generic)) s.min_generic = w;
                }
        s.ok = finite && s.min_sincos >= opt.trig_guard && s.min_u > 0 &&
               (kf.kappa1.v.empty() || s.min_k1k2 > opt.kappa_guard) &&
               (gen.v.empty() || opt.generic_guard <= 0 || s.min_generic > opt.generic_guard);
    }
    if (!d.monitors[std::size_t(k0)].ok) {
        const auto& s = d.monitors[std::size_t(k0)];
        throw NumericalError("evolution: the z = 0 slice fails the degeneracy monitors (min|sin cos| = " +
                             std::to_string(s.min_sincos) + ", min e^{-P} = " + std::to_string(s.min_u) +
                             ", min|k1 k2| = " + std::to_string(s.min_k1k2) +
                             ", min|phi_z phi_zx phi_zy| = " + std::to_string(s.min_generic) + ")");
    }
    int lo = k0, hi = k0;
    while (lo - 1 >= 0 && d.monitors[std::size_t(lo - 1)].ok && g.z(lo - 1) >= raw.z_lo - 1e-12) --lo;
    while (hi + 1 < g.nz && d.monitors[std::size_t(hi + 1)].ok && g.z(hi + 1) <= raw.z_hi + 1e-12) ++hi;
    // keep the range symmetric so that one-sided z stencils treat both ends alike
    const int half = std::min(k0 - lo, hi - k0);
    lo = k0 - half, hi = k0 + half;
    d.shrunk = lo > 0 || hi < g.nz - 1;
    if (g.nz > 1 && hi - lo + 1 < 5)
        throw NumericalError("evolution: degenerate within two slices of z = 0 (reached z = " +
                             std::to_string(g.z(hi)) + ")");
    d.phi = z_sub(raw.phi, lo, hi);
    d.psi = z_sub(raw.psi, lo, hi);
    d.u = z_sub(raw.u, lo, hi);
    d.grid = d.phi.grid;
    d.z_lo = g.z(lo);
    d.z_hi = g.z(hi);
    if (d.grid.nz >= 5) {
        if (d.shrunk) kf = kappa_fields(d.phi, d.u, opt.order);
        d.kappa1 = std::move(kf.kappa1);
        d.kappa2 = std::move(kf.kappa2);
        d.kappa3 = std::move(kf.kappa3);
    }
    return d;
}

}  // namespace

EvolvedGuichardData evolve(const Seed& seed, const Grid2& window, const EvolutionOptions& opt) {
    opt.validate();
    window.validate();
    const Grid3 g = opt.grid(window);
    RawEvolution raw = opt.method == ZMethod::Taylor ? run_taylor(seed, g, opt.M) : run_mol_padded(seed, g, opt);
    return finish(std::move(raw), g, opt, to_string(opt.method));
}

EvolvedGuichardData evolve(const InitialDataSet& data, const EvolutionOptions& opt) {
    if (data.source) return evolve(*data.source, data.grid, opt);
    if (opt.method == ZMethod::Taylor)
        throw InputError("evolution: the z-series method needs a seed (sampled data supports method = mol only)");
    opt.validate();
    const Grid3 g = opt.grid(data.grid);
    MolFields f = evolve_mol(data.phi, data.phi_z, data.psi, data.psi_z, data.u, data.u_z, g, opt);
    return finish(RawEvolution{std::move(f.phi), std::move(f.psi), std::move(f.u), f.z_lo, f.z_hi}, g, opt, "mol");
}

}  // namespace cfh
