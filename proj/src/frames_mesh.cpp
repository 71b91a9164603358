#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cfh/frames.hpp"

namespace cfh {

namespace {

// Jacobi rotations on a symmetric 3x3 matrix (row-major); returns ascending eigenvalues.
std::array<double, 3> sym_eigen(std::array<double, 9> a) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        const double off = std::fabs(a[1]) + std::fabs(a[2]) + std::fabs(a[5]);
        if (off <= 1e-300) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                const double apq = a[3 * p + q];
                if (apq == 0) continue;
                const double theta = (a[3 * q + q] - a[3 * p + p]) / (2 * apq);
                const double t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < 3; ++k) {  // columns p, q
                    const double akp = a[3 * k + p], akq = a[3 * k + q];
                    a[3 * k + p] = c * akp - s * akq;
                    a[3 * k + q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {  // rows p, q
                    const double apk = a[3 * p + k], aqk = a[3 * q + k];
                    a[3 * p + k] = c * apk - s * aqk;
                    a[3 * q + k] = s * apk + c * aqk;
                }
            }
    }
    std::array<double, 3> e{a[0], a[4], a[8]};
    std::sort(e.begin(), e.end());
    return e;
}

double dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

// Minimum of f over nodes at least `band` nodes from every x/y edge.
double band_min(const Field3& f, int band) {
    const Grid3& G = f.grid;
    double m = INFINITY;
    for (int k = 0; k < G.nz; ++k)
        for (int j = band; j < G.xy.ny - band; ++j)
            for (int i = band; i < G.xy.nx - band; ++i) m = std::min(m, f[G.idx(i, j, k)]);
    return m;
}

}  // namespace

std::array<double, 3> shape_eigenvalues(const std::array<double, 9>& I, const std::array<double, 9>& II) {
    // I = L L^T, eigenvalues of L^{-1} II L^{-T}
    double L[3][3] = {};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = I[std::size_t(3 * i + j)];
            for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            if (i == j) {
                if (!(s > 0)) throw NumericalError("shape_eigenvalues: first form is not positive definite");
                L[i][i] = std::sqrt(s);
            } else {
                L[i][j] = s / L[j][j];
            }
        }
    auto solve_lower = [&](const double* b, double* x, int stride) {
        for (int i = 0; i < 3; ++i) {
            double s = b[i * stride];
            for (int k = 0; k < i; ++k) s -= L[i][k] * x[k * stride];
            x[i * stride] = s / L[i][i];
        }
    };
    std::array<double, 9> S{}, Y{}, C{};
    for (int i = 0; i < 9; ++i) S[std::size_t(i)] = 0.5 * (II[std::size_t(i)] + II[std::size_t(3 * (i % 3) + i / 3)]);
    for (int c = 0; c < 3; ++c) solve_lower(S.data() + c, Y.data() + c, 3);  // Y = L^{-1} S
    for (int r = 0; r < 3; ++r) solve_lower(Y.data() + 3 * r, C.data() + 3 * r, 1);  // C^T = L^{-1} Y^T
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double m = 0.5 * (C[std::size_t(3 * i + j)] + C[std::size_t(3 * j + i)]);
            C[std::size_t(3 * i + j)] = C[std::size_t(3 * j + i)] = m;
        }
    return sym_eigen(C);
}

MeshChecks mesh_checks(const HypersurfaceMesh& m, int band, int order) {
    const Grid3& G = m.grid;
    if (G.nz < 5) throw InputError("mesh_checks: need at least 5 z-slices");
    std::array<std::array<Field3, 4>, 3> df, dN;  // [direction][component]
    for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 3; ++a) {
            df[std::size_t(a)][std::size_t(c)] = partial(m.f[std::size_t(c)], Axis(a), 1, order);
            dN[std::size_t(a)][std::size_t(c)] = partial(m.N[std::size_t(c)], Axis(a), 1, order);
        }
    Field3 ff(G), ref(G), eig(G), margin(G), ratio(G), u(G);
    KappaFields km{Field3(G), Field3(G), Field3(G)};
    parallel_for(G.size(), [&](std::size_t n) {
        std::array<Vec4, 3> fi, Ni;
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 4; ++c) {
                fi[std::size_t(a)][std::size_t(c)] = df[std::size_t(a)][std::size_t(c)][n];
                Ni[std::size_t(a)][std::size_t(c)] = dN[std::size_t(a)][std::size_t(c)][n];
            }
        std::array<double, 9> I{}, II{};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                I[std::size_t(3 * a + b)] = dot(fi[std::size_t(a)], fi[std::size_t(b)]);
                II[std::size_t(3 * a + b)] = -dot(fi[std::size_t(a)], Ni[std::size_t(b)]);
            }
        const double e2P = std::exp(2 * m.P[n]), c = std::cos(m.phi[n]), s = std::sin(m.phi[n]);
        const std::array<double, 3> g{e2P * c * c, e2P * s * s, e2P};
        double d = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                d = std::max(d, std::fabs(I[std::size_t(3 * a + b)] - (a == b ? g[std::size_t(a)] : 0.0)));
        ff[n] = d;
        ref[n] = std::max({g[0], g[1], g[2]});
        std::array<double, 3> k{m.kappa1[n], m.kappa2[n], m.kappa3[n]};
        std::sort(k.begin(), k.end());
        const std::array<double, 3> e = shape_eigenvalues(I, II);
        eig[n] = std::max({std::fabs(e[0] - k[0]), std::fabs(e[1] - k[1]), std::fabs(e[2] - k[2])});
        const double k1 = m.kappa1[n], k2 = m.kappa2[n], k3 = m.kappa3[n];
        margin[n] = std::min(k3 - std::min(k1, k2), std::max(k1, k2) - k3);
        const double H = I[8];
        ratio[n] = std::max({std::fabs(I[0] / H - c * c), std::fabs(I[4] / H - s * s), std::fabs(I[1]) / H,
                             std::fabs(I[2]) / H, std::fabs(I[5]) / H});
        km.kappa1[n] = II[0] / I[0];
        km.kappa2[n] = II[4] / I[4];
        km.kappa3[n] = II[8] / I[8];
        u[n] = std::exp(-m.P[n]);
    });
    MeshChecks r;
    r.first_form = max_abs(ff, band) / max_abs(ref, band);
    r.shape_eigen = max_abs(eig, band);
    r.middle_margin = band_min(margin, band);
    r.guichard_ratio = max_abs(ratio, band);
    const CurvatureDiagnostics cd = curvature_diagnostics(m.phi, u, km, order);
    for (int q = 0; q < 3; ++q) {
        r.gauss[std::size_t(q)] = max_linf(cd.gauss[std::size_t(q)], band);
        r.codazzi[std::size_t(q)] = max_linf(cd.codazzi[std::size_t(q)], band);
    }
    return r;
}

HypersurfaceMesh inversion(const HypersurfaceMesh& m, const Vec4& q, double min_distance) {
    HypersurfaceMesh r = m;
    const std::size_t n = m.grid.size();
    for (std::size_t a = 0; a < n; ++a) {
        Vec4 v, N;
        for (int c = 0; c < 4; ++c) {
            v[std::size_t(c)] = m.f[std::size_t(c)][a] - q[std::size_t(c)];
            N[std::size_t(c)] = m.N[std::size_t(c)][a];
        }
        const double v2 = dot(v, v);
        if (!(std::sqrt(v2) >= min_distance))
            throw InputError("inversion: centre within " + std::to_string(min_distance) + " of the mesh");
        const double vN = dot(v, N);
        for (int c = 0; c < 4; ++c) {
            r.f[std::size_t(c)][a] = q[std::size_t(c)] + v[std::size_t(c)] / v2;
            r.N[std::size_t(c)][a] = N[std::size_t(c)] - 2 * vN / v2 * v[std::size_t(c)];
        }
        r.P[a] = m.P[a] - std::log(v2);
        r.kappa1[a] = v2 * m.kappa1[a] + 2 * vN;
        r.kappa2[a] = v2 * m.kappa2[a] + 2 * vN;
        r.kappa3[a] = v2 * m.kappa3[a] + 2 * vN;
    }
    r.closure = 0;
    return r;
}

// ---- export / import ----

namespace {

void put(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

struct MeshArrays {
    std::vector<std::pair<std::string, const Field3*>> list;
    explicit MeshArrays(const HypersurfaceMesh& m) {
        list = {{"f4", &m.f[3]},      {"N1", &m.N[0]},         {"N2", &m.N[1]},         {"N3", &m.N[2]},
                {"N4", &m.N[3]},      {"P", &m.P},             {"phi", &m.phi},         {"kappa1", &m.kappa1},
                {"kappa2", &m.kappa2}, {"kappa3", &m.kappa3}};
    }
};

std::vector<Field3*> mutable_arrays(HypersurfaceMesh& m) {
    return {&m.f[3], &m.N[0], &m.N[1], &m.N[2], &m.N[3], &m.P, &m.phi, &m.kappa1, &m.kappa2, &m.kappa3};
}

void write_meta(std::ostream& os, const HypersurfaceMesh& m) {
    const Grid3& G = m.grid;
    os << "cfh-mesh " << G.xy.nx << ' ' << G.xy.ny << ' ' << G.nz;
    for (double v : {G.xy.x0, G.xy.x1, G.xy.y0, G.xy.y1, G.z0, G.z1}) os << ' ', put(os, v);
    os << ' ' << m.base_i << ' ' << m.base_j << ' ';
    put(os, m.closure);
}

// Whitespace tokenizer that reports byte offsets in its errors.
class Lexer {
public:
    explicit Lexer(std::string s) : s_(std::move(s)) {}
    std::string line() {
        if (p_ >= s_.size()) fail("unexpected end of file");
        const std::size_t e = s_.find('\n', p_);
        std::string r = s_.substr(p_, e == std::string::npos ? std::string::npos : e - p_);
        p_ = e == std::string::npos ? s_.size() : e + 1;
        if (!r.empty() && r.back() == '\r') r.pop_back();
        return r;
    }
    std::string word() {
        skip();
        if (p_ >= s_.size()) fail("unexpected end of file");
        const std::size_t b = p_;
        while (p_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
        return s_.substr(b, p_ - b);
    }
    void expect(const std::string& w) {
        skip();
        const std::size_t at = p_;
        const std::string got = word();
        if (got != w) fail("expected '" + w + "', got '" + got + "'", at);
    }
    double number() {
        skip();
        const std::size_t at = p_;
        const std::string w = word();
        char* end = nullptr;
        const double v = std::strtod(w.c_str(), &end);
        if (end != w.c_str() + w.size()) fail("malformed number '" + w + "'", at);
        return v;
    }
    long integer() {
        skip();
        const std::size_t at = p_;
        const double v = number();
        if (v != std::floor(v)) fail("expected an integer", at);
        return long(v);
    }
    [[noreturn]] void fail(const std::string& what, std::size_t at = std::string::npos) const {
        throw InputError("mesh: " + what + " at byte " + std::to_string(at == std::string::npos ? p_ : at));
    }
    std::size_t pos() const { return p_; }

private:
    void skip() {
        while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
    }
    std::string s_;
    std::size_t p_ = 0;
};

HypersurfaceMesh empty_mesh(Lexer& lx) {
    lx.expect("cfh-mesh");
    HypersurfaceMesh m;
    const std::size_t at = lx.pos();
    Grid3 G;
    G.xy.nx = int(lx.integer()), G.xy.ny = int(lx.integer()), G.nz = int(lx.integer());
    G.xy.x0 = lx.number(), G.xy.x1 = lx.number(), G.xy.y0 = lx.number(), G.xy.y1 = lx.number();
    G.z0 = lx.number(), G.z1 = lx.number();
    try {
        G.validate();
    } catch (const InputError& e) {
        lx.fail(std::string("bad grid (") + e.what() + ")", at);
    }
    m.grid = G;
    m.base_i = int(lx.integer()), m.base_j = int(lx.integer());
    m.closure = lx.number();
    for (auto& c : m.f) c = Field3(G);
    for (auto& c : m.N) c = Field3(G);
    for (Field3* f : {&m.P, &m.phi, &m.kappa1, &m.kappa2, &m.kappa3}) *f = Field3(G);
    return m;
}

std::string slurp(std::istream& is) { return std::string(std::istreambuf_iterator<char>(is), {}); }

}  // namespace

void write_vtk(std::ostream& os, const HypersurfaceMesh& m) {
    const Grid3& G = m.grid;
    const std::size_t n = G.size();
    os << "# vtk DataFile Version 3.0\n";
    write_meta(os, m);
    os << "\nASCII\nDATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << G.xy.nx << ' ' << G.xy.ny << ' ' << G.nz << "\n";
    os << "POINTS " << n << " double\n";
    for (std::size_t a = 0; a < n; ++a) {
        put(os, m.f[0][a]), os << ' ', put(os, m.f[1][a]), os << ' ', put(os, m.f[2][a]);
        os << '\n';
    }
    os << "POINT_DATA " << n << '\n';
    for (const auto& [name, f] : MeshArrays(m).list) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t a = 0; a < n; ++a) put(os, (*f)[a]), os << '\n';
    }
}

void write_vtk(const std::string& path, const HypersurfaceMesh& m) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    write_vtk(os, m);
    if (!os) throw InputError("write failed: " + path);
}

HypersurfaceMesh read_vtk(std::istream& is) {
    Lexer lx(slurp(is));
    const std::string head = lx.line();
    if (head.rfind("# vtk DataFile", 0) != 0) lx.fail("not a legacy VTK file", 0);
    HypersurfaceMesh m = empty_mesh(lx);
    const Grid3& G = m.grid;
    const std::size_t n = G.size();
    lx.expect("ASCII");
    lx.expect("DATASET");
    lx.expect("STRUCTURED_GRID");
    lx.expect("DIMENSIONS");
    const std::size_t at = lx.pos();
    if (lx.integer() != G.xy.nx || lx.integer() != G.xy.ny || lx.integer() != G.nz)
        lx.fail("DIMENSIONS disagree with the header", at);
    lx.expect("POINTS");
    if (std::size_t(lx.integer()) != n) lx.fail("point count disagrees with DIMENSIONS");
    lx.expect("double");
    for (std::size_t a = 0; a < n; ++a)
        for (int c = 0; c < 3; ++c) m.f[std::size_t(c)][a] = lx.number();
    lx.expect("POINT_DATA");
    if (std::size_t(lx.integer()) != n) lx.fail("point-data count disagrees with DIMENSIONS");
    const MeshArrays names(m);
    const auto targets = mutable_arrays(m);
    for (std::size_t q = 0; q < targets.size(); ++q) {
        lx.expect("SCALARS");
        lx.expect(names.list[q].first);
        lx.expect("double");
        lx.expect("1");
        lx.expect("LOOKUP_TABLE");
        lx.expect("default");
        for (std::size_t a = 0; a < n; ++a) (*targets[q])[a] = lx.number();
    }
    return m;
}

HypersurfaceMesh read_vtk(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path);
    return read_vtk(is);
}

void write_mesh_csv(std::ostream& os, const HypersurfaceMesh& m) {
    const Grid3& G = m.grid;
    os << "# ";
    write_meta(os, m);
    os << "\nx,y,z,f1,f2,f3,f4,N1,N2,N3,N4,P,phi,kappa1,kappa2,kappa3\n";
    for (int k = 0; k < G.nz; ++k)
        for (int j = 0; j < G.xy.ny; ++j)
            for (int i = 0; i < G.xy.nx; ++i) {
                const std::size_t a = G.idx(i, j, k);
                put(os, G.xy.x(i)), os << ',', put(os, G.xy.y(j)), os << ',', put(os, G.z(k));
                for (const Field3* f : {&m.f[0], &m.f[1], &m.f[2], &m.f[3], &m.N[0], &m.N[1], &m.N[2], &m.N[3], &m.P,
                                        &m.phi, &m.kappa1, &m.kappa2, &m.kappa3})
                    os << ',', put(os, (*f)[a]);
                os << '\n';
            }
}

void write_mesh_csv(const std::string& path, const HypersurfaceMesh& m) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    write_mesh_csv(os, m);
    if (!os) throw InputError("write failed: " + path);
}

HypersurfaceMesh read_mesh_csv(std::istream& is) {
    std::string text = slurp(is);
    if (text.rfind("# ", 0) != 0) throw InputError("mesh: missing '# cfh-mesh' line at byte 0");
    for (char& ch : text)
        if (ch == ',') ch = ' ';
    text[0] = ' ';
    Lexer lx(text);
    HypersurfaceMesh m = empty_mesh(lx);
    for (const char* h : {"x", "y", "z", "f1", "f2", "f3", "f4", "N1", "N2", "N3", "N4", "P", "phi", "kappa1",
                          "kappa2", "kappa3"})
        lx.expect(h);
    const Grid3& G = m.grid;
    for (int k = 0; k < G.nz; ++k)
        for (int j = 0; j < G.xy.ny; ++j)
            for (int i = 0; i < G.xy.nx; ++i) {
                const std::size_t at = lx.pos();
                const double x = lx.number(), y = lx.number(), z = lx.number();
                if (x != G.xy.x(i) || y != G.xy.y(j) || z != G.z(k)) lx.fail("node coordinates out of order", at);
                const std::size_t a = G.idx(i, j, k);
                for (Field3* f : {&m.f[0], &m.f[1], &m.f[2], &m.f[3], &m.N[0], &m.N[1], &m.N[2], &m.N[3], &m.P,
                                  &m.phi, &m.kappa1, &m.kappa2, &m.kappa3})
                    (*f)[a] = lx.number();
            }
    return m;
}

HypersurfaceMesh read_mesh_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path);
    return read_mesh_csv(is);
}

HypersurfaceMesh read_mesh(const std::string& path) {
    auto ends = [&](const char* e) {
        const std::string s(e);
        return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
    };
    if (ends(".vtk")) return read_vtk(path);
    if (ends(".csv")) return read_mesh_csv(path);
    throw InputError("mesh: unknown file extension for " + path);
}

}  // namespace cfh
