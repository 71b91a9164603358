#include "cfh/calculus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cfh {

std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int deriv) {
    const int n = int(nodes.size());
    if (n == 0 || deriv < 0 || deriv >= n) throw InputError("fd_weights: need more nodes than the derivative order");
    // c[j][k]: weight of node j for derivative k
    std::vector<std::vector<double>> c(std::size_t(n), std::vector<double>(std::size_t(deriv + 1), 0.0));
    double c1 = 1.0, c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, deriv);
        double c2 = 1.0, c5 = c4;
        c4 = nodes[std::size_t(i)] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = nodes[std::size_t(i)] - nodes[std::size_t(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[std::size_t(i)][std::size_t(k)] = c1 * (k * c[std::size_t(i - 1)][std::size_t(k - 1)] - c5 * c[std::size_t(i - 1)][std::size_t(k)]) / c2;
                c[std::size_t(i)][0] = -c1 * c5 * c[std::size_t(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[std::size_t(j)][std::size_t(k)] = (c4 * c[std::size_t(j)][std::size_t(k)] - k * c[std::size_t(j)][std::size_t(k - 1)]) / c3;
            c[std::size_t(j)][0] = c4 * c[std::size_t(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) w[std::size_t(j)] = c[std::size_t(j)][std::size_t(deriv)];
    return w;
}

AxisStencil::AxisStencil(int n, double h, int deriv, int order) : n_(n) {
    if (deriv < 1 || deriv > 3) throw InputError("stencil derivative order must be 1..3");
    if (order < 2 || order > 8 || order % 2) throw InputError("stencil accuracy order must be 2, 4, 6 or 8");
    const int wc = 2 * ((order + deriv - 1) / 2) + 1;
    const int wb = order + deriv;
    if (n < wb) throw InputError("axis too short for the requested stencil");
    const int half = (wc - 1) / 2;
    start_.resize(std::size_t(n));
    cls_.resize(std::size_t(n));
    auto make = [&](int s, int w, int at) {
        std::vector<double> nodes(static_cast<std::size_t>(w));
        for (int k = 0; k < w; ++k) nodes[std::size_t(k)] = double(s + k);
        auto wt = fd_weights(double(at), nodes, deriv);
        double scale = std::pow(h, -deriv);
        for (double& a : wt) a *= scale;
        return wt;
    };
    // class 0: centered interior stencil
    w_.push_back(make(-half, wc, 0));
    for (int i = 0; i < n; ++i) {
        if (i - half >= 0 && i + half <= n - 1) {
            start_[std::size_t(i)] = i - half;
            cls_[std::size_t(i)] = 0;
        } else {
            int s = i < half ? 0 : n - wb;
            start_[std::size_t(i)] = s;
            cls_[std::size_t(i)] = int(w_.size());
            w_.push_back(make(s, wb, i));
        }
    }
}

void AxisStencil::apply(const double* in, std::ptrdiff_t stride, double* out) const {
    for (int i = 0; i < n_; ++i) {
        const auto& w = w_[std::size_t(cls_[std::size_t(i)])];
        const double* p = in + std::ptrdiff_t(start_[std::size_t(i)]) * stride;
        // weights sum to zero: differencing against the node value makes constants exact
        const double fi = in[std::ptrdiff_t(i) * stride];
        double acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * (p[std::ptrdiff_t(k) * stride] - fi);
        out[std::ptrdiff_t(i) * stride] = acc;
    }
}

Field2 partial(const Field2& f, Axis a, int deriv, int order) {
    const Grid2& g = f.grid;
    Field2 r(g);
    if (a == Axis::X) {
        AxisStencil s(g.nx, g.hx(), deriv, order);
        for (int j = 0; j < g.ny; ++j) s.apply(&f.v[g.idx(0, j)], 1, &r.v[g.idx(0, j)]);
    } else if (a == Axis::Y) {
        AxisStencil s(g.ny, g.hy(), deriv, order);
        for (int i = 0; i < g.nx; ++i) s.apply(&f.v[g.idx(i, 0)], g.nx, &r.v[g.idx(i, 0)]);
    } else {
        throw InputError("a 2D field has no z-axis");
    }
    return r;
}

Field3 partial(const Field3& f, Axis a, int deriv, int order) {
    const Grid3& g = f.grid;
    const int nx = g.xy.nx, ny = g.xy.ny, nz = g.nz;
    Field3 r(g);
    if (a == Axis::X) {
        AxisStencil s(nx, g.xy.hx(), deriv, order);
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j) s.apply(&f.v[g.idx(0, j, k)], 1, &r.v[g.idx(0, j, k)]);
    } else if (a == Axis::Y) {
        AxisStencil s(ny, g.xy.hy(), deriv, order);
        for (int k = 0; k < nz; ++k)
            for (int i = 0; i < nx; ++i) s.apply(&f.v[g.idx(i, 0, k)], nx, &r.v[g.idx(i, 0, k)]);
    } else {
        if (nz == 1) throw InputError("z-derivative needs more than one slice");
        AxisStencil s(nz, g.hz(), deriv, order);
        const std::ptrdiff_t st = std::ptrdiff_t(nx) * ny;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) s.apply(&f.v[g.idx(i, j, 0)], st, &r.v[g.idx(i, j, 0)]);
    }
    return r;
}

namespace {

double trap_weight(int i, int n, int band) {
    return (i == band || i == n - 1 - band) ? 0.5 : 1.0;
}

template <class Visit>
void banded(const Grid2& g, int band, Visit visit) {
    if (2 * band >= g.nx || 2 * band >= g.ny) throw InputError("interior band leaves no nodes");
    for (int j = band; j < g.ny - band; ++j)
        for (int i = band; i < g.nx - band; ++i) visit(i, j, trap_weight(i, g.nx, band) * trap_weight(j, g.ny, band));
}

}  // namespace

Norms norms(const Field2& f, int band) {
    Norms n;
    double s = 0, w = 0;
    banded(f.grid, band, [&](int i, int j, double wt) {
        std::size_t id = f.grid.idx(i, j);
        double a = std::fabs(f.v[id]);
        if (!(a <= n.linf)) { n.linf = a; n.argmax = id; }
        s += wt * a * a;
        w += wt;
    });
    n.l2 = std::sqrt(s / w);
    return n;
}

Norms norms(const Field3& f, int band) {
    Norms n;
    double s = 0, w = 0;
    const Grid3& g = f.grid;
    for (int k = 0; k < g.nz; ++k) {
        double wk = (g.nz > 1 && (k == 0 || k == g.nz - 1)) ? 0.5 : 1.0;
        banded(g.xy, band, [&](int i, int j, double wt) {
            std::size_t id = g.idx(i, j, k);
            double a = std::fabs(f.v[id]);
            if (!(a <= n.linf)) { n.linf = a; n.argmax = id; }
            s += wk * wt * a * a;
            w += wk * wt;
        });
    }
    n.l2 = std::sqrt(s / w);
    return n;
}

double max_abs(const Field2& f, int band) { return norms(f, band).linf; }
double max_abs(const Field3& f, int band) { return norms(f, band).linf; }

Residual residual(const std::string& name, const Field2& f, int band) {
    Norms n = norms(f, band);
    return {name, n.linf, n.l2, n.argmax};
}

Residual residual(const std::string& name, const Field3& f, int band) {
    Norms n = norms(f, band);
    return {name, n.linf, n.l2, n.argmax};
}

double convergence_order(double coarse_err, double fine_err, double ratio) {
    return std::log(coarse_err / fine_err) / std::log(ratio);
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double h, std::size_t base) {
    const std::size_t n = f.size();
    if (base >= n) throw InputError("integration base outside the line");
    std::vector<double> inc(n, 0.0);  // inc[i]: integral over panel [i-1, i]
    for (std::size_t i = 1; i < n; ++i) {
        if (n < 4)
            inc[i] = 0.5 * h * (f[i - 1] + f[i]);
        else if (i == 1)
            inc[i] = h * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24.0;
        else if (i == n - 1)
            inc[i] = h * (f[n - 4] - 5 * f[n - 3] + 19 * f[n - 2] + 9 * f[n - 1]) / 24.0;
        else
            inc[i] = h * (-f[i - 2] + 13 * f[i - 1] + 13 * f[i] - f[i + 1]) / 24.0;
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = base + 1; i < n; ++i) out[i] = out[i - 1] + inc[i];
    for (std::size_t i = base; i-- > 0;) out[i] = out[i + 1] - inc[i + 1];
    return out;
}

double lagrange4(const double* v, std::ptrdiff_t stride, int n, double t) {
    if (n < 4) throw InputError("interpolation needs four nodes");
    int s = int(std::floor(t)) - 1;
    if (s < 0) s = 0;
    if (s > n - 4) s = n - 4;
    double r = 0;
    for (int a = 0; a < 4; ++a) {
        double l = 1;
        for (int b = 0; b < 4; ++b)
            if (b != a) l *= (t - (s + b)) / double(a - b);
        r += l * v[std::ptrdiff_t(s + a) * stride];
    }
    return r;
}

namespace {

void put(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

std::vector<std::vector<double>> read_rows(std::istream& is, std::size_t cols, const char* header) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw InputError(std::string("CSV: expected header '") + header + "', got '" + line + "'");
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw InputError("CSV: bad number '" + cell + "' on line " + std::to_string(lineno));
            row.push_back(v);
        }
        if (row.size() != cols) throw InputError("CSV: wrong column count on line " + std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Count the leading run of rows sharing the value in column c.
std::size_t run_length(const std::vector<std::vector<double>>& rows, std::size_t c) {
    std::size_t n = 1;
    while (n < rows.size() && rows[n][c] == rows[0][c]) ++n;
    return n;
}

}  // namespace

void write_csv(std::ostream& os, const Field2& f) {
    const Grid2& g = f.grid;
    os << "x,y,value\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            put(os, g.x(i)); os << ',';
            put(os, g.y(j)); os << ',';
            put(os, f.v[g.idx(i, j)]); os << '\n';
        }
}

void write_csv(std::ostream& os, const Field3& f) {
    const Grid3& g = f.grid;
    os << "x,y,z,value\n";
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.xy.ny; ++j)
            for (int i = 0; i < g.xy.nx; ++i) {
                put(os, g.xy.x(i)); os << ',';
                put(os, g.xy.y(j)); os << ',';
                put(os, g.z(k)); os << ',';
                put(os, f.v[g.idx(i, j, k)]); os << '\n';
            }
}

void write_csv(const std::string& path, const Field2& f) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    write_csv(os, f);
}

void write_csv(const std::string& path, const Field3& f) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    write_csv(os, f);
}

Field2 read_csv2(std::istream& is) {
    auto rows = read_rows(is, 3, "x,y,value");
    if (rows.empty()) throw InputError("CSV: no data rows");
    // x varies fastest: the first block shares y
    std::size_t nx = 0;
    while (nx < rows.size() && rows[nx][1] == rows[0][1]) ++nx;
    if (nx < 2 || rows.size() % nx) throw InputError("CSV: rows do not form a rectangular grid");
    Grid2 g{int(nx), int(rows.size() / nx), rows[0][0], rows[nx - 1][0], rows[0][1], rows.back()[1]};
    g.validate();
    Field2 f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const auto& r = rows[g.idx(i, j)];
            if (r[0] != g.x(i) || r[1] != g.y(j))
                throw InputError("CSV: coordinates off the uniform grid at row " + std::to_string(g.idx(i, j) + 2));
            f.v[g.idx(i, j)] = r[2];
        }
    return f;
}

Field3 read_csv3(std::istream& is) {
    auto rows = read_rows(is, 4, "x,y,z,value");
    if (rows.empty()) throw InputError("CSV: no data rows");
    std::size_t nx = 0;
    while (nx < rows.size() && rows[nx][1] == rows[0][1] && rows[nx][2] == rows[0][2]) ++nx;
    std::size_t nxy = run_length(rows, 2);
    if (nx < 2 || nxy % nx || rows.size() % nxy) throw InputError("CSV: rows do not form a box grid");
    Grid3 g;
    g.xy = Grid2{int(nx), int(nxy / nx), rows[0][0], rows[nx - 1][0], rows[0][1], rows[nxy - 1][1]};
    g.nz = int(rows.size() / nxy);
    g.z0 = rows[0][2];
    g.z1 = rows.back()[2];
    g.validate();
    Field3 f(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.xy.ny; ++j)
            for (int i = 0; i < g.xy.nx; ++i) {
                const auto& r = rows[g.idx(i, j, k)];
                if (r[0] != g.xy.x(i) || r[1] != g.xy.y(j) || r[2] != g.z(k))
                    throw InputError("CSV: coordinates off the uniform grid at row " + std::to_string(g.idx(i, j, k) + 2));
                f.v[g.idx(i, j, k)] = r[3];
            }
    return f;
}

Field2 read_csv2(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path);
    return read_csv2(is);
}

Field3 read_csv3(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path);
    return read_csv3(is);
}

}  // namespace cfh
