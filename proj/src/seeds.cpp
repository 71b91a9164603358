#include "cfh/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cfh/calculus.hpp"

namespace cfh {

namespace {

using Series = std::vector<double>;

// (a * b)_k for one k
double conv(const Series& a, const Series& b, int k) {
    double s = 0;
    for (int j = 0; j <= k; ++j) s += a[std::size_t(j)] * b[std::size_t(k - j)];
    return s;
}

Series coeffs_x(const Jet2& j) {
    Series s(std::size_t(j.order() + 1));
    for (int k = 0; k <= j.order(); ++k) s[std::size_t(k)] = j.at(k, 0);
    return s;
}

Series derivative(const Series& s) {
    Series d(s.size() > 1 ? s.size() - 1 : 1, 0.0);
    for (std::size_t k = 1; k < s.size(); ++k) d[k - 1] = double(k) * s[k];
    return d;
}

double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw InputError("bad number '" + tok + "' in function descriptor");
        }
        if (tok.find_first_not_of(" \t", used) != std::string::npos) throw InputError("bad number '" + tok + "' in function descriptor");
        out.push_back(v);
    }
    return out;
}

// centered sixth-order first derivative of a smooth function
template <class F>
double diff6(F f, double t, double h) {
    return (-f(t - 3 * h) + 9 * f(t - 2 * h) - 45 * f(t - h) + 45 * f(t + h) - 9 * f(t + 2 * h) + f(t + 3 * h)) / (60 * h);
}

}  // namespace

// ---------------------------------------------------------------- ScalarFunction

ScalarFunction ScalarFunction::affine(double a, double b) {
    ScalarFunction f;
    f.kind_ = Kind::Affine;
    f.p_ = {a, b};
    return f;
}

ScalarFunction ScalarFunction::exponential(double a, double b, double c) {
    ScalarFunction f;
    f.kind_ = Kind::Exp;
    f.p_ = {a, b, c};
    return f;
}

ScalarFunction ScalarFunction::sampled(double t0, double t1, std::vector<double> values) {
    if (values.size() < 9) throw InputError("sampled function needs at least 9 values");
    if (!(t1 > t0)) throw InputError("sampled function needs t1 > t0");
    for (double v : values)
        if (!std::isfinite(v)) throw InputError("sampled function has a non-finite value");
    ScalarFunction f;
    f.kind_ = Kind::Sampled;
    f.p_ = {t0, t1};
    f.p_.insert(f.p_.end(), values.begin(), values.end());
    return f;
}

ScalarFunction ScalarFunction::parse(const std::string& desc) {
    auto colon = desc.find(':');
    if (colon == std::string::npos) throw InputError("function desc '" + desc + "' lacks 'kind:'");
    std::string kind = desc.substr(0, colon);
    auto v = parse_numbers(desc.substr(colon + 1));
    if (kind == "affine") {
        if (v.size() != 2) throw InputError("affine descriptor takes a,b");
        return affine(v[0], v[1]);
    }
    if (kind == "exp") {
        if (v.size() != 3) throw InputError("exp descriptor takes a,b,c");
        return exponential(v[0], v[1], v[2]);
    }
    if (kind == "sampled") {
        if (v.size() < 11) throw InputError("sampled descriptor takes t0,t1 and at least 9 values");
        return sampled(v[0], v[1], std::vector<double>(v.begin() + 2, v.end()));
    }
    throw InputError("unknown function kind '" + kind + "'");
}

std::vector<double> ScalarFunction::taylor(double t, int order) const {
    std::vector<double> s(std::size_t(order + 1), 0.0);
    switch (kind_) {
        case Kind::Affine:
            s[0] = p_[0] + p_[1] * t;
            if (order >= 1) s[1] = p_[1];
            break;
        case Kind::Exp: {
            double e = p_[1] * std::exp(p_[2] * t), ck = 1;
            for (int k = 0; k <= order; ++k) {
                s[std::size_t(k)] = e * ck / factorial(k);
                ck *= p_[2];
            }
            s[0] += p_[0];
            break;
        }
        case Kind::Sampled: {
            const double t0 = p_[0], t1 = p_[1];
            const int n = int(p_.size()) - 2;
            const double h = (t1 - t0) / (n - 1);
            if (t < t0 - 1e-12 * (t1 - t0) || t > t1 + 1e-12 * (t1 - t0))
                throw InputError("sampled function evaluated outside its range");
            const int w = 9;
            int c = int(std::lround((t - t0) / h));
            int start = std::clamp(c - w / 2, 0, n - w);
            std::vector<double> nodes(w);
            for (int i = 0; i < w; ++i) nodes[std::size_t(i)] = (start + i - (t - t0) / h);
            for (int k = 0; k <= std::min(order, w - 1); ++k) {
                auto wt = fd_weights(0.0, nodes, k);
                double d = 0;
                for (int i = 0; i < w; ++i) d += wt[std::size_t(i)] * p_[std::size_t(2 + start + i)];
                s[std::size_t(k)] = d / std::pow(h, k) / factorial(k);
            }
            break;
        }
    }
    return s;
}

double ScalarFunction::derivative(double t, int k) const {
    return taylor(t, k)[std::size_t(k)] * factorial(k);
}

int ScalarFunction::monotone_sign(double a, double b) const {
    int sign = 0;
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
        double d = derivative(a + (b - a) * i / n, 1);
        int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign)) return 0;
        sign = s;
    }
    return sign;
}

double ScalarFunction::min_on(double a, double b) const {
    double m = HUGE_VAL;
    const int n = 400;
    for (int i = 0; i <= n; ++i) m = std::min(m, (*this)(a + (b - a) * i / n));
    return m;
}

std::string ScalarFunction::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::Affine: os << "affine:" << p_[0] << "," << p_[1]; break;
        case Kind::Exp: os << "exp:" << p_[0] << "," << p_[1] << "," << p_[2]; break;
        case Kind::Sampled: os << "sampled[" << p_.size() - 2 << "]:" << p_[0] << "," << p_[1]; break;
    }
    return os.str();
}

// ---------------------------------------------------------------- shared

void require_nonvanishing(const Field2& u, const char* what) {
    double lo = HUGE_VAL, hi = -HUGE_VAL, scale = 0;
    for (double v : u.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        scale = std::max(scale, std::fabs(v));
    }
    if (scale == 0 || (lo <= 0 && hi >= 0) || std::min(std::fabs(lo), std::fabs(hi)) <= 1e-12 * std::max(1.0, scale))
        throw NumericalError(std::string(what) + ": e^{-P} vanishes on the grid (degenerate conformal factor)");
}

double GHStats::G_rel() const { return G_sd / (1 + std::fabs(G_mean)); }
double GHStats::H_rel() const { return H_sd / (1 + std::fabs(H_mean)); }

namespace {

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double s = 0;
    for (double a : v) s += (a - mean) * (a - mean);
    sd = std::sqrt(s / double(v.size()));
}

GHStats finish_gh(std::vector<double> G, std::vector<double> H) {
    GHStats r;
    r.G = std::move(G);
    r.H = std::move(H);
    mean_sd(r.G, r.G_mean, r.G_sd);
    mean_sd(r.H, r.H_mean, r.H_sd);
    r.G_min = *std::min_element(r.G.begin(), r.G.end());
    return r;
}

void require_inside(const Grid2& g, double xa, double xb, double ya, double yb, const char* what) {
    const double tol = 1e-12;
    if (g.x0 < xa - tol || g.x1 > xb + tol || g.y0 < ya - tol || g.y1 > yb + tol)
        throw InputError(std::string(what) + ": grid extends beyond the ODE solution range");
}

}  // namespace

SeedSamples sample_seed(const Seed& s, const Grid2& g) {
    SeedSamples r{Field2(g), Field2(g), Field2(g), Field2(g), Field2(g), Field2(g)};
    parallel_for(g.size(), [&](std::size_t n) {
        int i = int(n % std::size_t(g.nx)), j = int(n / std::size_t(g.nx));
        SeedJets J = s.jets(g.x(i), g.y(j), 0);
        r.phi[n] = J.phi.value();
        r.phi_z[n] = J.phi_z.value();
        r.psi[n] = J.psi.value();
        r.psi_z[n] = J.psi_z.value();
        r.u[n] = J.u.value();
        r.u_z[n] = J.u_z.value();
    });
    return r;
}

// ---------------------------------------------------------------- Example 2

void Example2Params::validate() const {
    for (double v : {c0, c1, c2, X1, X1p, Y, Yp, x_lo, x_hi, y_lo, y_hi})
        if (!std::isfinite(v)) throw InputError("example2: non-finite parameter");
    if (!(x_lo > 0)) throw InputError("example2: x-range must lie in (0, inf); x = 0 is a singular point");
    if (!(x_hi > x_lo) || !(y_hi > y_lo)) throw InputError("example2: empty x- or y-range");
    if (x_lo > 1 || x_hi < 1) throw InputError("example2: x-range must contain the data point x = 1");
    if (y_lo > 0 || y_hi < 0) throw InputError("example2: y-range must contain the data point y = 0");
    if (orientation != 1.0 && orientation != -1.0) throw InputError("example2: orientation must be +1 or -1");
    if (X1pp) {
        double want = c0 - c1 - X1 - c2;
        if (std::fabs(*X1pp - want) > 1e-12 * (1 + std::fabs(want)))
            throw InputError("example2: X1''(1) is inconsistent with c2 (X1'' + X1 + X2 = c0 x^2 - c1 at x = 1)");
    }
    if (!(ode.rtol > 0) || !(ode.atol > 0)) throw InputError("example2: ODE tolerances must be positive");
}

double ex2_x_residual(const Example2Params& p, double x, double X1, double X1p, double X1pp, double X1ppp) {
    return x * X1ppp - X1pp + (x + 9 / (4 * x)) * X1p - X1 - (p.c0 * x * x + p.c1);
}

Example2Odes ex2_solve_odes(const Example2Params& p) {
    p.validate();
    Example2Odes s;
    s.p = p;
    const double c0 = p.c0, c1 = p.c1;
    auto fx = [c0, c1](double x, const std::vector<double>& y, std::vector<double>& d) {
        d[0] = y[1];
        d[1] = y[2];
        d[2] = (y[2] - (x + 9 / (4 * x)) * y[1] + y[0] + c0 * x * x + c1) / x;
        d[3] = y[1] / (x * x * x);
    };
    auto fy = [c0, c1](double t, const std::vector<double>& y, std::vector<double>& d) {
        d[0] = y[1];
        d[1] = c0 * t * t + c1 - y[0];
    };
    s.xs = OdeSolution2(fx, 1.0, {p.X1, p.X1p, p.X1pp_at_1(), 0.0}, p.x_lo, p.x_hi, p.ode);
    s.ys = OdeSolution2(fy, 0.0, {p.Y, p.Yp}, p.y_lo, p.y_hi, p.ode);
    return s;
}

double Example2Odes::X2(double x) const {
    return 9 * x / 4 * xs(x)[3] + p.c2 * x;
}

std::vector<double> Example2Odes::X1_series(double x, int order) const {
    auto st = xs(x);
    Series t(std::size_t(std::max(order, 2) + 1), 0.0);
    t[0] = st[0];
    t[1] = st[1];
    t[2] = st[2] / 2;
    const int n = int(t.size()) - 1;
    Series d1(t.size()), d2(t.size()), d3(t.size()), g(t.size());
    for (int j = 0; j <= n; ++j) g[std::size_t(j)] = 9 / (4 * x) * std::pow(-1 / x, j);
    for (int k = 0; k + 3 <= n; ++k) {
        for (int j = 0; j <= k + 1; ++j) d1[std::size_t(j)] = (j + 1) * t[std::size_t(j + 1)];
        d2[std::size_t(k)] = (k + 2) * (k + 1) * t[std::size_t(k + 2)];
        double f = (k == 0 ? p.c0 * x * x + p.c1 : k == 1 ? 2 * p.c0 * x : k == 2 ? p.c0 : 0.0);
        double prev = k > 0 ? d3[std::size_t(k - 1)] : 0.0;
        double gd1 = conv(g, d1, k);
        double rhs = f - prev + d2[std::size_t(k)] - (x * d1[std::size_t(k)] + (k > 0 ? d1[std::size_t(k - 1)] : 0.0) + gd1) +
                     t[std::size_t(k)];
        d3[std::size_t(k)] = rhs / x;
        t[std::size_t(k + 3)] = d3[std::size_t(k)] / double((k + 3) * (k + 2) * (k + 1));
    }
    t.resize(std::size_t(order + 1));
    return t;
}

std::vector<double> Example2Odes::Y_series(double y, int order) const {
    auto st = ys(y);
    Series t(std::size_t(std::max(order, 1) + 1), 0.0);
    t[0] = st[0];
    t[1] = st[1];
    for (int k = 0; k + 2 < int(t.size()); ++k) {
        double f = (k == 0 ? p.c0 * y * y + p.c1 : k == 1 ? 2 * p.c0 * y : k == 2 ? p.c0 : 0.0);
        t[std::size_t(k + 2)] = (f - t[std::size_t(k)]) / double((k + 2) * (k + 1));
    }
    t.resize(std::size_t(order + 1));
    return t;
}

Ex2OdeCheck ex2_ode_check(const Example2Odes& s, int samples) {
    Ex2OdeCheck r;
    const double hx = 2e-3;
    const double xa = s.p.x_lo + 3 * hx, xb = s.p.x_hi - 3 * hx;
    for (int i = 0; i <= samples; ++i) {
        double x = xa + (xb - xa) * i / samples;
        auto st = s.xs(x);
        double x3 = diff6([&](double t) { return s.xs(t)[2]; }, x, hx);
        r.x_equation = std::max(r.x_equation, std::fabs(ex2_x_residual(s.p, x, st[0], st[1], st[2], x3)));
        double rel = st[2] + st[0] + s.X2(x) - s.p.c0 * x * x + s.p.c1;
        r.x2_relation = std::max(r.x2_relation, std::fabs(rel));
    }
    const double hy = 2e-3;
    const double ya = s.p.y_lo + 3 * hy, yb = s.p.y_hi - 3 * hy;
    for (int i = 0; i <= samples; ++i) {
        double y = ya + (yb - ya) * i / samples;
        double ypp = diff6([&](double t) { return s.ys(t)[1]; }, y, hy);
        r.y_equation = std::max(r.y_equation, std::fabs(ypp + s.ys(y)[0] - s.p.c0 * y * y - s.p.c1));
    }
    return r;
}

Ex2Closed ex2_closed_forms(const Grid2& g) {
    g.validate();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i), y = g.y(j);
            double r2 = x * x + y * y;
            if (std::fabs(x) < 1e-8 || std::fabs(std::fabs(x) - std::fabs(y)) < 1e-8 * std::sqrt(r2) || std::fabs(y) < 1e-8)
                throw InputError("example2: grid touches a singular line (x = 0, y = 0 or |x| = |y|)");
        }
    Ex2Closed c{Field2(g), Field2(g), Field2(g), Field2(g), Field2(g), Field2(g)};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i), y = g.y(j), r2 = x * x + y * y;
            auto n = g.idx(i, j);
            c.phi[n] = 2 * std::atan2(y, x);
            c.phi_z[n] = y / r2;
            c.psi[n] = std::log(r2) - 9.0 / 8 * std::log(std::fabs(x));
            c.psi_z[n] = -x / r2;
            c.phi_zz[n] = -y / (2 * x * r2 * r2) * (7 * x * x + 9 * y * y);
            c.psi_zz[n] = (23 * x * x * x * x + 22 * x * x * y * y - 9 * y * y * y * y) / (8 * x * x * r2 * r2);
        }
    return c;
}

InitialTriple ex2_initial_data(const std::function<Pair(double)>& Xf, const std::function<Pair(double)>& Yf,
                               const Grid2& g, double o) {
    InitialTriple t{Field2(g), Field2(g), Field2(g)};
    std::vector<Pair> X(std::size_t(g.nx)), Y(std::size_t(g.ny));
    for (int i = 0; i < g.nx; ++i) X[std::size_t(i)] = Xf(g.x(i));
    for (int j = 0; j < g.ny; ++j) Y[std::size_t(j)] = Yf(g.y(j));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i), y = g.y(j), r2 = x * x + y * y;
            const auto& xv = X[std::size_t(i)];
            const auto& yv = Y[std::size_t(j)];
            double A = x * xv[1] - xv[0] + y * yv[1] - yv[0];
            auto n = g.idx(i, j);
            t.u[n] = o * (xv[1] - 2 * x / r2 * A);
            t.kappa3[n] = o * (-yv[1] + 2 * y / r2 * A);
            t.u_z[n] = o * (x * xv[1] - A + 2 * y * y / r2 * A) / r2;
        }
    require_nonvanishing(t.u, "example2");
    return t;
}

InitialTriple ex2_initial_data(const Example2Odes& s, const Grid2& g) {
    require_inside(g, s.p.x_lo, s.p.x_hi, s.p.y_lo, s.p.y_hi, "example2");
    auto X = [&](double x) { auto v = s.xs(x); return Pair{v[0], v[1]}; };
    auto Y = [&](double y) { auto v = s.ys(y); return Pair{v[0], v[1]}; };
    return ex2_initial_data(X, Y, g, s.p.orientation);
}

double ex2_G(const Example2Odes& s, double x) {
    auto st = s.xs(x);
    const double c0 = s.p.c0, c1 = s.p.c1, X1 = st[0], X1p = st[1], X2 = s.X2(x);
    double a = X1 + c1 + X2 - c0 * x * x;
    return a * a + 4 * c0 * (X1 + c1) + (1 + 9 / (4 * x * x)) * X1p * X1p + (2 / x * X2 - 4 * c0 * x) * X1p;
}

double ex2_H(const Example2Odes& s, double y) {
    auto st = s.ys(y);
    const double c0 = s.p.c0, c1 = s.p.c1;
    double a = st[1] - 2 * c0 * y, b = st[0] - c1 - c0 * y * y + 2 * c0;
    return a * a + b * b - 4 * c0 * c0;
}

GHStats ex2_GH(const Example2Odes& s, const Grid2& g) {
    require_inside(g, s.p.x_lo, s.p.x_hi, s.p.y_lo, s.p.y_hi, "example2");
    std::vector<double> G(std::size_t(g.nx)), H(std::size_t(g.ny));
    for (int i = 0; i < g.nx; ++i) G[std::size_t(i)] = ex2_G(s, g.x(i));
    for (int j = 0; j < g.ny; ++j) H[std::size_t(j)] = ex2_H(s, g.y(j));
    return finish_gh(std::move(G), std::move(H));
}

bool ex2_admissible(double c0, double c2, double c3) {
    // relative slack of a few ulps so that boundary points computed in floating point are kept
    double lhs = 17 * c0 * c0 + 9 * c0 * c2 + c2 * c2, rhs = 13 * c3 * c3;
    return lhs - rhs >= -1e-14 * (17 * c0 * c0 + 9 * std::fabs(c0 * c2) + c2 * c2 + rhs);
}

std::optional<Ex2Completion> ex2_complete(double c0, double c2, double c3, double lam_c4, double lam_H, int sY, int sX,
                                          int sXp) {
    if (!ex2_admissible(c0, c2, c3)) return std::nullopt;
    lam_c4 = std::clamp(lam_c4, 0.0, 1.0);
    lam_H = std::clamp(lam_H, 0.0, 1.0);
    Ex2Completion c;
    c.c0 = c0;
    c.c1 = 0;
    c.c2 = c2;
    c.c3 = c3;
    const double b = c2 - 2 * c0;
    const double c4min = -b * b / 13, c4max = c0 * c2 - c3 * c3 + c0 * c0;
    c.c4 = std::min(c4max, c4min + lam_c4 * std::max(0.0, c4max - c4min));
    const double Hlo = 4 * (c3 * c3 - c0 * c0), Hhi = 4 * (c0 * c2 - c.c4);
    c.H0 = std::min(Hhi, Hlo + lam_H * std::max(0.0, Hhi - Hlo));
    c.Yp = 2 * c3;
    c.Y = -2 * c0 + sY * std::sqrt(std::max(0.0, 4 * (c0 * c0 - c3 * c3) + c.H0));
    c.X1 = -(c0 + c2) + sX * std::sqrt(std::max(0.0, 4 * (c0 * c2 - c.c4) - c.H0));
    c.X1p = (-b + sXp * std::sqrt(std::max(0.0, b * b + 13 * c.c4))) / (13.0 / 4);
    c.X1pp = c0 - c.X1 - c2;
    return c;
}

namespace {

Example2Params params_from(const Ex2Completion& c, const Grid2& window) {
    Example2Params p;
    p.c0 = c.c0;
    p.c1 = c.c1;
    p.c2 = c.c2;
    p.X1 = c.X1;
    p.X1p = c.X1p;
    p.Y = c.Y;
    p.Yp = c.Yp;
    p.x_lo = std::min(window.x0, 1.0);
    p.x_hi = std::max(window.x1, 1.0);
    p.y_lo = std::min(window.y0, 0.0);
    p.y_hi = std::max(window.y1, 0.0);
    return p;
}

}  // namespace

Ex2FamilyResult ex2_family_sample(double c0, double c2, double c3, const Grid2& window, int search_n) {
    Ex2FamilyResult best;
    if (!ex2_admissible(c0, c2, c3)) {
        best.reason = "17 c0^2 + 9 c0 c2 + c2^2 < 13 c3^2";
        return best;
    }
    if (!(window.x0 > 0)) throw InputError("example2 family: window must lie in x > 0");
    Grid2 g{search_n, search_n, window.x0, window.x1, window.y0, window.y1};
    std::vector<double> xs(std::size_t(g.nx)), ys(std::size_t(g.ny));
    for (int i = 0; i < g.nx; ++i) xs[std::size_t(i)] = g.x(i);
    for (int j = 0; j < g.ny; ++j) ys[std::size_t(j)] = g.y(j);
    best.margin = -1;
    for (int a = 0; a <= 10; ++a)
        for (int h = 0; h <= 4; ++h)
            for (int sY : {1, -1})
                for (int sX : {1, -1})
                    for (int sXp : {1, -1}) {
                        auto c = ex2_complete(c0, c2, c3, a / 10.0, h / 4.0, sY, sX, sXp);
                        Example2Params p = params_from(*c, window);
                        Example2Odes s;
                        try {
                            s = ex2_solve_odes(p);
                        } catch (const NumericalError&) {
                            continue;
                        }
                        double umin = HUGE_VAL, umax = -HUGE_VAL, kmin = HUGE_VAL;
                        std::vector<std::vector<double>> X, Y;
                        for (double x : xs) X.push_back(s.xs(x));
                        for (double y : ys) Y.push_back(s.ys(y));
                        for (std::size_t j = 0; j < ys.size(); ++j)
                            for (std::size_t i = 0; i < xs.size(); ++i) {
                                double x = xs[i], y = ys[j], r2 = x * x + y * y;
                                double A = x * X[i][1] - X[i][0] + y * Y[j][1] - Y[j][0];
                                double u = X[i][1] - 2 * x / r2 * A;
                                double k3 = -Y[j][1] + 2 * y / r2 * A;
                                double cp = (x * x - y * y) / r2, sp = 2 * x * y / r2;
                                double k1 = u * sp / cp + k3, k2 = -u * cp / sp + k3;
                                umin = std::min(umin, u);
                                umax = std::max(umax, u);
                                kmin = std::min(kmin, std::fabs(k1 * k2));
                            }
                        bool one_sign = umin > 0 || umax < 0;
                        double ugap = std::min(std::fabs(umin), std::fabs(umax));
                        if (!one_sign || ugap < 1e-3) continue;
                        if (kmin > best.margin) {
                            best.accepted = true;
                            best.completion = *c;
                            best.params = p;
                            best.params.orientation = umin > 0 ? 1.0 : -1.0;
                            best.lam_c4 = a / 10.0;
                            best.lam_H = h / 4.0;
                            best.sY = sY;
                            best.sX = sX;
                            best.sXp = sXp;
                            best.margin = kmin;
                        }
                    }
    if (!best.accepted) {
        best.margin = 0;
        best.reason = "no completion keeps e^{-P} of one sign on the window";
    }
    return best;
}

Example2Seed::Example2Seed(const Example2Params& p) : s_(ex2_solve_odes(p)) {}

SeedJets Example2Seed::jets(double x, double y, int N) const {
    if (x < s_.p.x_lo || x > s_.p.x_hi || y < s_.p.y_lo || y > s_.p.y_hi)
        throw InputError("example2: point outside the ODE solution range");
    Jet2 X = Jet2::variable(N, x, 0), Y = Jet2::variable(N, y, 1);
    Jet2 r2 = X * X + Y * Y;
    SeedJets J;
    J.phi = 2.0 * atan2(Y, X);
    J.phi_z = Y / r2;
    J.psi = log(r2) - 9.0 / 8 * log(x > 0 ? X : -1.0 * X);
    J.psi_z = -1.0 * X / r2;
    auto tx = s_.X1_series(x, N + 1);
    auto ty = s_.Y_series(y, N + 1);
    Jet2 X1 = Jet2::from_series(N, tx, 0), X1p = Jet2::from_series(N, derivative(tx), 0);
    Jet2 Yf = Jet2::from_series(N, ty, 1), Yp = Jet2::from_series(N, derivative(ty), 1);
    Jet2 A = X * X1p - X1 + Y * Yp - Yf;
    Jet2 Ar = A / r2;
    const double o = s_.p.orientation;
    J.u = o * (X1p - 2.0 * X * Ar);
    J.u_z = o * (X * X1p - A + 2.0 * Y * Y * Ar) / r2;
    return J;
}

double Example2Seed::kappa3(double x, double y) const {
    auto X = s_.xs(x);
    auto Y = s_.ys(y);
    double r2 = x * x + y * y;
    double A = x * X[1] - X[0] + y * Y[1] - Y[0];
    return s_.p.orientation * (-Y[1] + 2 * y / r2 * A);
}

Grid2 Example2Seed::domain() const { return Grid2{2, 2, s_.p.x_lo, s_.p.x_hi, s_.p.y_lo, s_.p.y_hi}; }

// ---------------------------------------------------------------- Example 1

void Example1Params::validate() const {
    for (double v : {c0, c1, c2, X1, X1p, x_lo, x_hi, y_lo, y_hi})
        if (!std::isfinite(v)) throw InputError("example1: non-finite parameter");
    if (!(x_hi > x_lo) || !(y_hi > y_lo)) throw InputError("example1: empty x- or y-range");
    if (x_lo > 0 || x_hi < 0 || y_lo > 0 || y_hi < 0) throw InputError("example1: ranges must contain 0");
    if (sigma.min_on(x_lo, x_hi) <= 0) throw InputError("example1: sigma must be positive");
    if (sigma.monotone_sign(x_lo, x_hi) == 0) throw InputError("example1: sigma must be strictly monotone");
    if (rho.monotone_sign(y_lo, y_hi) == 0) throw InputError("example1: rho must be strictly monotone");
    if (!(ode.rtol > 0) || !(ode.atol > 0)) throw InputError("example1: ODE tolerances must be positive");
}

namespace {

struct RhoTrig {
    double e, r1, r2, s, c, cos2;
};

RhoTrig rho_trig(const ScalarFunction& rho, double y) {
    auto t = rho.taylor(y, 2);
    RhoTrig r;
    r.e = std::exp(t[0]);
    r.r1 = t[1];
    r.r2 = 2 * t[2];
    double q = 1 / std::sqrt(1 + r.e * r.e);
    r.c = q;
    r.s = r.e * q;
    r.cos2 = r.c * r.c - r.s * r.s;
    return r;
}

}  // namespace

Example1Odes ex1_solve_odes(const Example1Params& p) {
    p.validate();
    if (!p.Y1 || !p.Y1p) throw InputError("example1: Y1(0) and Y1'(0) must be set (run the family completion)");
    Example1Odes s;
    s.p = p;
    const ScalarFunction sig = p.sigma, rho = p.rho;
    auto fx = [sig](double x, const std::vector<double>& y, std::vector<double>& d) {
        auto t = sig.taylor(x, 1);
        double sg = t[0], sp = t[1];
        d[0] = y[1];
        d[1] = -(1 + sg * sg) * y[0] + sg * y[2];
        d[2] = sp * y[0];
        d[3] = y[4];
        d[4] = sg * sg / 2;
    };
    auto fy = [rho](double t, const std::vector<double>& y, std::vector<double>& d) {
        RhoTrig r = rho_trig(rho, t);
        d[0] = y[1];
        d[1] = r.r1 * r.cos2 * y[1] - r.e * (r.r2 + r.r1 * r.r1 * r.c * r.c) * r.s * r.c * y[0] + r.e * r.e * y[0] - r.e * y[2];
        d[2] = r.e * r.r1 * y[0] + (r.e + 1 / r.e) * y[1];
        d[3] = y[4];
        d[4] = r.s * r.s * (0.5 * r.r1 * r.r1 + r.r2 + r.r1 * r.r1 * r.cos2);
    };
    double e0 = std::exp(p.rho(0.0));
    s.xs = OdeSolution2(fx, 0.0, {p.X1, p.X1p, p.c0, 0.0, 0.0}, p.x_lo, p.x_hi, p.ode);
    s.ys = OdeSolution2(fy, 0.0, {*p.Y1, *p.Y1p, e0 * *p.Y1 + p.c1, 0.0, 0.0}, p.y_lo, p.y_hi, p.ode);
    return s;
}

std::vector<double> Example1Odes::X_series(double x, int N, std::vector<double>* X2out, std::vector<double>* aout) const {
    auto st = xs(x);
    Series sg = p.sigma.taylor(x, N);
    Series sp = derivative(p.sigma.taylor(x, N + 1));
    Series sg2(std::size_t(N + 1));
    for (int k = 0; k <= N; ++k) sg2[std::size_t(k)] = conv(sg, sg, k);
    Series x1(std::size_t(N + 3), 0.0), x2(std::size_t(N + 2), 0.0), al(std::size_t(N + 3), 0.0);
    x1[0] = st[0];
    x1[1] = st[1];
    x2[0] = st[2];
    al[0] = st[3];
    al[1] = st[4];
    for (int k = 0; k <= N; ++k) {
        double a = -(x1[std::size_t(k)] + conv(sg2, x1, k)) + conv(sg, x2, k);
        x1[std::size_t(k + 2)] = a / double((k + 2) * (k + 1));
        x2[std::size_t(k + 1)] = conv(sp, x1, k) / double(k + 1);
        al[std::size_t(k + 2)] = sg2[std::size_t(k)] / 2 / double((k + 2) * (k + 1));
    }
    x1.resize(std::size_t(N + 1));
    if (X2out) *X2out = Series(x2.begin(), x2.begin() + N + 1);
    if (aout) *aout = Series(al.begin(), al.begin() + N + 1);
    return x1;
}

std::vector<double> Example1Odes::Y_series(double y, int N, std::vector<double>* Y2out, std::vector<double>* bout) const {
    auto st = ys(y);
    Jet2 R = Jet2::from_series(N + 2, p.rho.taylor(y, N + 2), 0);
    Jet2 R1 = R.dx(), R2 = R1.dx();
    Jet2 Rn = R.truncated(N), R1n = R1.truncated(N);
    Jet2 E = exp(Rn);
    Jet2 phi = atan(E), s, c;
    sincos(phi, s, c);
    Jet2 cos2 = c * c - s * s;
    Series a = coeffs_x(R1n * cos2);
    Series b = coeffs_x(-1.0 * E * (R2 + R1n * R1n * c * c) * s * c + E * E);
    Series e = coeffs_x(-1.0 * E);
    Series pp = coeffs_x(E * R1n);
    Series q = coeffs_x(E + 1.0 / E);
    Series F = coeffs_x(s * s * (0.5 * R1n * R1n + R2 + R1n * R1n * cos2));
    Series y1(std::size_t(N + 3), 0.0), y2(std::size_t(N + 1), 0.0), be(std::size_t(N + 3), 0.0), d1(std::size_t(N + 2), 0.0);
    y1[0] = st[0];
    y1[1] = st[1];
    y2[0] = st[2];
    be[0] = st[3];
    be[1] = st[4];
    for (int k = 0; k <= N; ++k) {
        if (k >= 1) {
            for (int j = 0; j <= k - 1; ++j) d1[std::size_t(j)] = (j + 1) * y1[std::size_t(j + 1)];
            y2[std::size_t(k)] = (conv(pp, y1, k - 1) + conv(q, d1, k - 1)) / double(k);
        }
        for (int j = 0; j <= k; ++j) d1[std::size_t(j)] = (j + 1) * y1[std::size_t(j + 1)];
        double v = conv(a, d1, k) + conv(b, y1, k) + conv(e, y2, k);
        y1[std::size_t(k + 2)] = v / double((k + 2) * (k + 1));
        be[std::size_t(k + 2)] = F[std::size_t(k)] / double((k + 2) * (k + 1));
    }
    y1.resize(std::size_t(N + 1));
    if (Y2out) *Y2out = y2;
    if (bout) *bout = Series(be.begin(), be.begin() + N + 1);
    return y1;
}

Ex1OdeCheck ex1_ode_check(const Example1Odes& s, int samples) {
    Ex1OdeCheck r;
    const double h = 2e-3;
    auto X1pp = [&](double t) {
        auto st = s.xs(t);
        double sg = s.p.sigma(t);
        return -(1 + sg * sg) * st[0] + sg * st[2];
    };
    const double xa = s.p.x_lo + 3 * h, xb = s.p.x_hi - 3 * h;
    for (int i = 0; i <= samples; ++i) {
        double x = xa + (xb - xa) * i / samples;
        auto st = s.xs(x);
        auto t = s.p.sigma.taylor(x, 1);
        double x3 = diff6(X1pp, x, h);
        double res = t[0] * x3 - t[1] * X1pp(x) + t[0] * (1 + t[0] * t[0]) * st[1] - t[1] * st[0];
        r.x_cross = std::max(r.x_cross, std::fabs(res));
    }
    // Y2 against e^rho Y1 + int_0^y e^{-rho} Y1' + c1 by quadrature on a fine uniform line through 0
    const int n = 4 * samples + 1;
    for (int side : {-1, 1}) {
        double end = side < 0 ? s.p.y_lo : s.p.y_hi;
        if (end == 0) continue;
        std::vector<double> f(static_cast<std::size_t>(n));
        double hy = end / (n - 1);
        for (int i = 0; i < n; ++i) {
            double y = i * hy;
            f[std::size_t(i)] = std::exp(-s.p.rho(y)) * s.ys(y)[1];
        }
        auto I = cumulative_integral(f, hy, 0);
        for (int i = 0; i < n; ++i) {
            double y = i * hy;
            auto st = s.ys(y);
            double want = std::exp(s.p.rho(y)) * st[0] + I[std::size_t(i)] + s.p.c1;
            r.y_relation = std::max(r.y_relation, std::fabs(st[2] - want));
        }
    }
    return r;
}

Ex1Closed ex1_closed_forms(const Example1Params& p, const Grid2& g) {
    p.validate();
    g.validate();
    Ex1Closed c{Field2(g), Field2(g), Field2(g), Field2(g), Field2(g), Field2(g), Field2(g), Field2(g)};
    for (int j = 0; j < g.ny; ++j) {
        double y = g.y(j);
        RhoTrig r = rho_trig(p.rho, y);
        double phi = std::atan(r.e);
        for (int i = 0; i < g.nx; ++i) {
            double sg = p.sigma(g.x(i));
            auto n = g.idx(i, j);
            double sc = r.s * r.c, s2 = r.s * r.s;
            c.phi[n] = phi;
            c.phi_z[n] = sg * r.s;
            c.phi_y[n] = r.r1 * sc;
            c.phi_yy[n] = (r.r2 + r.r1 * r.r1 * r.cos2) * sc;
            c.Lpsi[n] = 0.5 * (sg * sg - 2 * r.r2 * s2 - r.r1 * r.r1 * s2 * (2 * r.c * r.c + r.cos2));
            c.phi_zz[n] = (sg * sg - r.r2 - r.r1 * r.r1 * r.c * r.c) * sc;
            c.psi_zz[n] = 0.5 * (-sg * sg * r.cos2 - 2 * r.r2 * s2 - r.r1 * r.r1 * s2 * r.cos2);
            c.psi_z[n] = -sg * r.c;
        }
    }
    return c;
}

InitialTriple ex1_initial_data(const Example1Params& p, const std::function<Pair(double)>& Xf,
                               const std::function<Pair(double)>& Yf, const Grid2& g) {
    InitialTriple t{Field2(g), Field2(g), Field2(g)};
    std::vector<Pair> X(std::size_t(g.nx)), Y(std::size_t(g.ny));
    for (int i = 0; i < g.nx; ++i) X[std::size_t(i)] = Xf(g.x(i));
    for (int j = 0; j < g.ny; ++j) Y[std::size_t(j)] = Yf(g.y(j));
    for (int j = 0; j < g.ny; ++j) {
        RhoTrig r = rho_trig(p.rho, g.y(j));
        const auto& yv = Y[std::size_t(j)];
        for (int i = 0; i < g.nx; ++i) {
            const auto& xv = X[std::size_t(i)];
            double sg = p.sigma(g.x(i));
            auto n = g.idx(i, j);
            t.u[n] = r.c * xv[0] + yv[0];
            t.kappa3[n] = -r.s * xv[0] - r.e * yv[0] + yv[1];
            t.u_z[n] = -sg * r.s * r.s * xv[0] + xv[1] + sg * r.c * yv[0];
        }
    }
    require_nonvanishing(t.u, "example1");
    return t;
}

InitialTriple ex1_initial_data(const Example1Odes& s, const Grid2& g) {
    require_inside(g, s.p.x_lo, s.p.x_hi, s.p.y_lo, s.p.y_hi, "example1");
    auto X = [&](double x) { auto v = s.xs(x); return Pair{v[0], v[2]}; };
    auto Y = [&](double y) { auto v = s.ys(y); return Pair{v[0], v[2]}; };
    return ex1_initial_data(s.p, X, Y, g);
}

double ex1_G(const Example1Odes& s, double x) {
    auto st = s.xs(x);
    double a = s.p.sigma(x) * st[0] - st[2];
    return a * a + st[0] * st[0] + st[1] * st[1];
}

double ex1_H(const Example1Odes& s, double y) {
    auto st = s.ys(y);
    RhoTrig r = rho_trig(s.p.rho, y);
    double w = std::sqrt(1 + r.e * r.e);
    double m = w / r.e * st[1] + r.r1 * r.e / w * st[0];
    return st[2] * st[2] + m * m - w * w * st[0] * st[0];
}

GHStats ex1_GH(const Example1Odes& s, const Grid2& g) {
    require_inside(g, s.p.x_lo, s.p.x_hi, s.p.y_lo, s.p.y_hi, "example1");
    std::vector<double> G(std::size_t(g.nx)), H(std::size_t(g.ny));
    for (int i = 0; i < g.nx; ++i) G[std::size_t(i)] = ex1_G(s, g.x(i));
    for (int j = 0; j < g.ny; ++j) H[std::size_t(j)] = ex1_H(s, g.y(j));
    return finish_gh(std::move(G), std::move(H));
}

Ex1Completion ex1_complete(const Example1Params& p, double minus_H0, int sgn) {
    Ex1Completion r;
    auto t = p.rho.taylor(0.0, 1);
    double e = std::exp(t[0]), w2 = 1 + e * e;
    double disc = minus_H0 + (p.c1 * p.c1 + p.c2 * p.c2) * w2;
    r.G0 = minus_H0;
    if (!std::isfinite(disc) || disc < 0) {
        r.reason = "negative discriminant: -H(0) + (c1^2 + c2^2)(1 + e^{2 rho(0)}) < 0";
        return r;
    }
    r.Y1 = p.c1 * e + (sgn >= 0 ? 1 : -1) * std::sqrt(disc);
    r.Y1p = e * (p.c2 - t[1] * e / w2 * r.Y1);
    r.accepted = true;
    return r;
}

Ex1Completion ex1_family_sample(const Example1Params& p, int sgn) {
    double s0 = p.sigma(0.0);
    double a = s0 * p.X1 - p.c0;
    double G0 = a * a + p.X1 * p.X1 + p.X1p * p.X1p;
    return ex1_complete(p, G0, sgn);
}

namespace {

Example1Params completed(Example1Params p) {
    if (!p.Y1 || !p.Y1p) {
        auto c = ex1_family_sample(p);
        if (!c.accepted) throw InputError("example1: " + c.reason);
        p.Y1 = c.Y1;
        p.Y1p = c.Y1p;
    }
    return p;
}

}  // namespace

Example1Seed::Example1Seed(const Example1Params& p) : s_(ex1_solve_odes(completed(p))) {}

SeedJets Example1Seed::jets(double x, double y, int N) const {
    if (x < s_.p.x_lo || x > s_.p.x_hi || y < s_.p.y_lo || y > s_.p.y_hi)
        throw InputError("example1: point outside the ODE solution range");
    Series X2, al, Y2, be;
    Series x1 = s_.X_series(x, N, &X2, &al);
    Series y1 = s_.Y_series(y, N, &Y2, &be);
    Jet2 S = Jet2::from_series(N, s_.p.sigma.taylor(x, N), 0);
    Jet2 R = Jet2::from_series(N, s_.p.rho.taylor(y, N), 1);
    Jet2 phi = atan(exp(R)), sn, cs;
    sincos(phi, sn, cs);
    Jet2 X1 = Jet2::from_series(N, x1, 0), X2j = Jet2::from_series(N, X2, 0);
    Jet2 Y1 = Jet2::from_series(N, y1, 1);
    SeedJets J;
    J.phi = phi;
    J.phi_z = S * sn;
    J.psi = Jet2::from_series(N, al, 0) + Jet2::from_series(N, be, 1);
    J.psi_z = -1.0 * S * cs;
    J.u = cs * X1 + Y1;
    J.u_z = -1.0 * S * sn * sn * X1 + X2j + S * cs * Y1;
    return J;
}

double Example1Seed::kappa3(double x, double y) const {
    auto X = s_.xs(x);
    auto Y = s_.ys(y);
    RhoTrig r = rho_trig(s_.p.rho, y);
    return -r.s * X[0] - r.e * Y[0] + Y[2];
}

Grid2 Example1Seed::domain() const { return Grid2{2, 2, s_.p.x_lo, s_.p.x_hi, s_.p.y_lo, s_.p.y_hi}; }

}  // namespace cfh
