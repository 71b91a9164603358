#include "cfh/initial_data.hpp"

#include <algorithm>
#include <cmath>

namespace cfh {

PointDerived derived_at(const PointState& s) {
    const double sn = std::sin(s.phi), cs = std::cos(s.phi);
    const double tn = sn / cs, ct = cs / sn, c2 = cs * cs - sn * sn;
    PointDerived d;
    d.kappa3 = (tn * s.u_xx - s.phi_x * c2 / (cs * cs) * s.u_x) - (ct * s.u_yy - s.phi_y * c2 / (sn * sn) * s.u_y) +
               (s.u * s.phi_zz - s.u_z * s.phi_z);
    const double ex = s.u_xx + 2 * s.phi_x * tn * s.u_x;
    const double ey = s.u_yy - 2 * s.phi_y * ct * s.u_y;
    d.u_zz = ex + ey + (1 - 2 * s.psi_zz) * s.u;
    d.kappa1 = s.u * tn + d.kappa3;
    d.kappa2 = -s.u * ct + d.kappa3;
    d.zeta = s.u * (ex + ey + d.u_zz + s.phi_z * s.phi_z * s.u) -
             (s.u_x * s.u_x / (cs * cs) + s.u_y * s.u_y / (sn * sn) + s.u_z * s.u_z);
    return d;
}

std::array<double, 4> constraints_at(const PointState& s, const PointDerived& d) {
    const double sn = std::sin(s.phi), cs = std::cos(s.phi);
    const double tn = sn / cs, ct = cs / sn;
    return {s.u_xy - s.u_y * s.phi_x * ct + s.u_x * s.phi_y * tn,
            s.uz_x + s.u_x * s.phi_z * tn - s.u * s.phi_zx * ct,
            s.uz_y - s.u_y * s.phi_z * ct + s.u * s.phi_zy * tn,
            d.kappa3 * d.kappa3 - d.zeta};
}

double InitialDataSet::min_sincos() const {
    double m = HUGE_VAL;
    for (double p : phi.v) m = std::min(m, std::fabs(std::sin(p) * std::cos(p)));
    return m;
}

double InitialDataSet::min_u() const { return *std::min_element(u.v.begin(), u.v.end()); }

namespace {

struct Stencils {
    Field2 phi_x, phi_y, u_x, u_y, u_xx, u_yy;
};

Stencils stencils(const Field2& phi, const Field2& u, int order) {
    return {partial(phi, Axis::X, 1, order), partial(phi, Axis::Y, 1, order), partial(u, Axis::X, 1, order),
            partial(u, Axis::Y, 1, order),   partial(u, Axis::X, 2, order),   partial(u, Axis::Y, 2, order)};
}

void check_guards(const Field2& phi, const Field2& u, double trig_guard, const char* what) {
    for (double p : phi.v)
        if (!(std::fabs(std::sin(p) * std::cos(p)) >= trig_guard))
            throw NumericalError(std::string(what) + ": |sin phi cos phi| below the trigonometric guard");
    for (double a : u.v)
        if (!(a > 0)) throw NumericalError(std::string(what) + ": e^{-P} must be positive on the grid");
}

// Fill the derived fields of d from per-node states.
void refresh(InitialDataSet& d) {
    const Grid2& g = d.grid;
    d.kappa1 = Field2(g);
    d.kappa2 = Field2(g);
    d.kappa3 = Field2(g);
    d.zeta = Field2(g);
    d.u_zz = Field2(g);
    std::optional<Stencils> st;
    if (!d.exact) st = stencils(d.phi, d.u, d.order);
    parallel_for(g.size(), [&](std::size_t n) {
        PointState s;
        s.phi = d.phi[n];
        s.phi_z = d.phi_z[n];
        s.phi_zz = d.phi_zz[n];
        s.psi_zz = d.psi_zz[n];
        s.u = d.u[n];
        s.u_z = d.u_z[n];
        if (d.exact) {
            const ExactDerivs& e = *d.exact;
            s.phi_x = e.phi_x[n], s.phi_y = e.phi_y[n];
            s.u_x = e.u_x[n], s.u_y = e.u_y[n], s.u_xx = e.u_xx[n], s.u_yy = e.u_yy[n];
        } else {
            s.phi_x = st->phi_x[n], s.phi_y = st->phi_y[n];
            s.u_x = st->u_x[n], s.u_y = st->u_y[n], s.u_xx = st->u_xx[n], s.u_yy = st->u_yy[n];
        }
        PointDerived r = derived_at(s);
        d.kappa1[n] = r.kappa1;
        d.kappa2[n] = r.kappa2;
        d.kappa3[n] = r.kappa3;
        d.zeta[n] = r.zeta;
        d.u_zz[n] = r.u_zz;
    });
}

void set_P(InitialDataSet& d) {
    d.P = map(d.u, [](double a) { return -std::log(a); });
    d.P_z = map2(d.u_z, d.u, [](double a, double b) { return -a / b; });
}

}  // namespace

DerivedFields derived_quantities(const Field2& phi, const Field2& phi_z, const Field2& phi_zz, const Field2& psi_zz,
                                 const Field2& P, const Field2& P_z, int order) {
    for (const Field2* f : {&phi_z, &phi_zz, &psi_zz, &P, &P_z}) phi.check(*f);
    InitialDataSet d;
    d.grid = phi.grid;
    d.order = order;
    d.phi = phi;
    d.phi_z = phi_z;
    d.phi_zz = phi_zz;
    d.psi_zz = psi_zz;
    d.u = map(P, [](double p) { return std::exp(-p); });
    d.u_z = map2(d.u, P_z, [](double a, double pz) { return -a * pz; });
    check_guards(phi, d.u, 1e-12, "derived_quantities");
    refresh(d);
    return {d.kappa1, d.kappa2, d.kappa3, d.zeta, d.u_zz};
}

InitialDataSet assemble_initial_data(const Seed& seed, const Grid2& g, double trig_guard) {
    g.validate();
    InitialDataSet d;
    d.grid = g;
    d.seed = seed.name();
    for (Field2* f : {&d.phi, &d.phi_z, &d.phi_zz, &d.psi, &d.psi_z, &d.psi_zz, &d.u, &d.u_z}) *f = Field2(g);
    ExactDerivs e;
    for (Field2* f : {&e.phi_x, &e.phi_y, &e.phi_zx, &e.phi_zy, &e.u_x, &e.u_y, &e.u_xx, &e.u_yy, &e.u_xy, &e.uz_x,
                      &e.uz_y})
        *f = Field2(g);
    parallel_for(g.size(), [&](std::size_t n) {
        int i = int(n % std::size_t(g.nx)), j = int(n / std::size_t(g.nx));
        SeedJets J = seed.jets(g.x(i), g.y(j), 2);
        const double p = J.phi.value();
        const double c2 = std::cos(2 * p), s2 = std::sin(2 * p);
        const double Lphi = J.phi.deriv(2, 0) - J.phi.deriv(0, 2), Lpsi = J.psi.deriv(2, 0) - J.psi.deriv(0, 2);
        d.phi[n] = p;
        d.phi_z[n] = J.phi_z.value();
        d.phi_zz[n] = c2 * Lphi + s2 * Lpsi;
        d.psi[n] = J.psi.value();
        d.psi_z[n] = J.psi_z.value();
        d.psi_zz[n] = s2 * Lphi - c2 * Lpsi;
        d.u[n] = J.u.value();
        d.u_z[n] = J.u_z.value();
        e.phi_x[n] = J.phi.deriv(1, 0);
        e.phi_y[n] = J.phi.deriv(0, 1);
        e.phi_zx[n] = J.phi_z.deriv(1, 0);
        e.phi_zy[n] = J.phi_z.deriv(0, 1);
        e.u_x[n] = J.u.deriv(1, 0);
        e.u_y[n] = J.u.deriv(0, 1);
        e.u_xx[n] = J.u.deriv(2, 0);
        e.u_yy[n] = J.u.deriv(0, 2);
        e.u_xy[n] = J.u.deriv(1, 1);
        e.uz_x[n] = J.u_z.deriv(1, 0);
        e.uz_y[n] = J.u_z.deriv(0, 1);
    });
    require_nonvanishing(d.u, d.seed.c_str());
    check_guards(d.phi, d.u, trig_guard, d.seed.c_str());
    d.exact = std::move(e);
    set_P(d);
    refresh(d);
    return d;
}

InitialDataSet assemble_initial_data(std::shared_ptr<const Seed> seed, const Grid2& g, double trig_guard) {
    if (!seed) throw InputError("assemble_initial_data: null seed");
    InitialDataSet d = assemble_initial_data(*seed, g, trig_guard);
    d.source = std::move(seed);
    return d;
}

InitialDataSet assemble_initial_data(const Field2& phi, const Field2& phi_z, const Field2& psi, const Field2& psi_z,
                                     const Field2& u, const Field2& u_z, int order, double trig_guard) {
    for (const Field2* f : {&phi_z, &psi, &psi_z, &u, &u_z}) phi.check(*f);
    InitialDataSet d;
    d.grid = phi.grid;
    d.seed = "sampled";
    d.order = order;
    d.phi = phi;
    d.phi_z = phi_z;
    d.psi = psi;
    d.psi_z = psi_z;
    d.u = u;
    d.u_z = u_z;
    require_nonvanishing(u, "initial data");
    check_guards(phi, u, trig_guard, "initial data");
    Field2 Lphi = partial(phi, Axis::X, 2, order) - partial(phi, Axis::Y, 2, order);
    Field2 Lpsi = partial(psi, Axis::X, 2, order) - partial(psi, Axis::Y, 2, order);
    d.phi_zz = Field2(d.grid);
    d.psi_zz = Field2(d.grid);
    for (std::size_t n = 0; n < d.grid.size(); ++n) {
        const double c2 = std::cos(2 * phi[n]), s2 = std::sin(2 * phi[n]);
        d.phi_zz[n] = c2 * Lphi[n] + s2 * Lpsi[n];
        d.psi_zz[n] = s2 * Lphi[n] - c2 * Lpsi[n];
    }
    set_P(d);
    refresh(d);
    return d;
}

ConstraintReport constraint_residuals(const InitialDataSet& d, int band) {
    const Grid2& g = d.grid;
    ConstraintReport r;
    for (auto& f : r.field) f = Field2(g);
    ExactDerivs local;
    const ExactDerivs* e = d.exact ? &*d.exact : nullptr;
    if (!e) {
        const int o = d.order;
        Field2 ux = partial(d.u, Axis::X, 1, o);
        local = {partial(d.phi, Axis::X, 1, o),   partial(d.phi, Axis::Y, 1, o),  partial(d.phi_z, Axis::X, 1, o),
                 partial(d.phi_z, Axis::Y, 1, o), ux,                             partial(d.u, Axis::Y, 1, o),
                 partial(d.u, Axis::X, 2, o),     partial(d.u, Axis::Y, 2, o),    partial(ux, Axis::Y, 1, o),
                 partial(d.u_z, Axis::X, 1, o),   partial(d.u_z, Axis::Y, 1, o)};
        e = &local;
    }
    parallel_for(g.size(), [&](std::size_t n) {
        PointState s{d.phi[n],    e->phi_x[n], e->phi_y[n], d.phi_z[n], e->phi_zx[n], e->phi_zy[n],
                     d.phi_zz[n], d.psi_zz[n], d.u[n],      e->u_x[n],  e->u_y[n],    e->u_xx[n],
                     e->u_yy[n],  e->u_xy[n],  d.u_z[n],    e->uz_x[n], e->uz_y[n]};
        PointDerived pd{d.kappa1[n], d.kappa2[n], d.kappa3[n], d.zeta[n], d.u_zz[n]};
        auto c = constraints_at(s, pd);
        for (int k = 0; k < 4; ++k) r.field[std::size_t(k)][n] = c[std::size_t(k)];
    });
    static const char* names[4] = {"u_xy", "u_zx", "u_zy", "kappa3_sq_minus_zeta"};
    for (int k = 0; k < 4; ++k) r.residual[std::size_t(k)] = residual(names[k], r.field[std::size_t(k)], band);
    r.min_k1k2 = HUGE_VAL;
    for (int j = band; j < g.ny - band; ++j)
        for (int i = band; i < g.nx - band; ++i) {
            std::size_t n = g.idx(i, j);
            double v = std::fabs(d.kappa1[n] * d.kappa2[n]);
            if (v < r.min_k1k2) r.min_k1k2 = v, r.min_k1k2_node = n;
        }
    return r;
}

PsiZReconstruction reconstruct_psi_z(const Field2& phi, const Field2& phi_z, int base_i, int base_j, double tol,
                                     int order) {
    phi.check(phi_z);
    const Grid2& g = phi.grid;
    if (base_i < 0 || base_i >= g.nx || base_j < 0 || base_j >= g.ny)
        throw InputError("reconstruct_psi_z: base point outside the grid");
    Field2 a = map2(partial(phi_z, Axis::X, 1, order), phi, [](double pzx, double p) { return -pzx / std::tan(p); });
    Field2 b = map2(partial(phi_z, Axis::Y, 1, order), phi, [](double pzy, double p) { return pzy * std::tan(p); });
    PsiZReconstruction r;
    r.integrability = max_abs(partial(a, Axis::Y, 1, order) - partial(b, Axis::X, 1, order), order / 2);
    if (!(r.integrability <= tol))
        throw InputError("reconstruct_psi_z: the one-form (psi_zx, psi_zy) is not closed (mixed-partial residual " +
                         std::to_string(r.integrability) + ")");
    r.psi_z = Field2(g);
    std::vector<double> row(std::size_t(g.nx)), col(std::size_t(g.ny));
    for (int i = 0; i < g.nx; ++i) row[std::size_t(i)] = a[g.idx(i, base_j)];
    std::vector<double> base_row = cumulative_integral(row, g.hx(), std::size_t(base_i));
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) col[std::size_t(j)] = b[g.idx(i, j)];
        std::vector<double> c = cumulative_integral(col, g.hy(), std::size_t(base_j));
        for (int j = 0; j < g.ny; ++j) r.psi_z[g.idx(i, j)] = base_row[std::size_t(i)] + c[std::size_t(j)];
    }
    return r;
}

InitialDataSet t_scale(const InitialDataSet& d, double t) {
    if (t == 0 || !std::isfinite(t)) throw InputError("t_scale: t must be a nonzero real number");
    InitialDataSet r = d;
    r.t = d.t * t;
    r.phi_z *= t;
    r.psi_z *= t;
    if (r.source) r.source = std::make_shared<ScaledSeed>(d.source, t);
    if (r.exact) {
        r.exact->phi_zx *= t;
        r.exact->phi_zy *= t;
    }
    // phi_zz and psi_zz at z = 0 depend only on L phi and L psi, which the scaling keeps.
    refresh(r);
    return r;
}

ScaledSeed::ScaledSeed(std::shared_ptr<const Seed> base, double t) : base_(std::move(base)), t_(t) {
    if (!base_) throw InputError("ScaledSeed: null base seed");
    if (t == 0 || !std::isfinite(t)) throw InputError("t_scale: t must be a nonzero real number");
}

SeedJets ScaledSeed::jets(double x, double y, int order) const {
    SeedJets J = base_->jets(x, y, order);
    J.phi_z *= t_;
    J.psi_z *= t_;
    return J;
}

std::string ScaledSeed::name() const { return base_->name(); }

}  // namespace cfh
