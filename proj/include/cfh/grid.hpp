#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfh {

// Bad input or configuration (CLI exit code 2).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degeneracy, blow-up or other numerical abort (CLI exit code 3).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

// Uniform rectangular grid on [x0,x1] x [y0,y1], nodes inclusive.
struct Grid2 {
    int nx = 0, ny = 0;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double hx() const { return (x1 - x0) / (nx - 1); }
    double hy() const { return (y1 - y0) / (ny - 1); }
    double x(int i) const { return i == nx - 1 ? x1 : x0 + i * hx(); }
    double y(int j) const { return j == ny - 1 ? y1 : y0 + j * hy(); }
    std::size_t size() const { return std::size_t(nx) * ny; }
    std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }
    void validate() const;
    // Same window, spacing halved.
    Grid2 refined() const;
    bool operator==(const Grid2& o) const {
        return nx == o.nx && ny == o.ny && x0 == o.x0 && x1 == o.x1 && y0 == o.y0 && y1 == o.y1;
    }
};

// Grid2 times a uniform z-range. nz == 1 is allowed (the z = z0 slice only).
struct Grid3 {
    Grid2 xy;
    int nz = 1;
    double z0 = 0, z1 = 0;

    double hz() const { return nz > 1 ? (z1 - z0) / (nz - 1) : 0.0; }
    double z(int k) const { return k == nz - 1 ? z1 : z0 + k * hz(); }
    std::size_t size() const { return xy.size() * nz; }
    std::size_t idx(int i, int j, int k) const { return (std::size_t(k) * xy.ny + j) * xy.nx + i; }
    void validate() const;
    Grid3 refined() const;
    bool operator==(const Grid3& o) const {
        return xy == o.xy && nz == o.nz && z0 == o.z0 && z1 == o.z1;
    }
};

template <class G>
struct Field {
    G grid{};
    std::vector<double> v;

    Field() = default;
    explicit Field(const G& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t n) { return v[n]; }
    double operator[](std::size_t n) const { return v[n]; }

    Field& operator+=(const Field& o) { check(o); for (std::size_t n = 0; n < v.size(); ++n) v[n] += o.v[n]; return *this; }
    Field& operator-=(const Field& o) { check(o); for (std::size_t n = 0; n < v.size(); ++n) v[n] -= o.v[n]; return *this; }
    Field& operator*=(const Field& o) { check(o); for (std::size_t n = 0; n < v.size(); ++n) v[n] *= o.v[n]; return *this; }
    Field& operator/=(const Field& o) { check(o); for (std::size_t n = 0; n < v.size(); ++n) v[n] /= o.v[n]; return *this; }
    Field& operator*=(double s) { for (double& a : v) a *= s; return *this; }
    Field& operator+=(double s) { for (double& a : v) a += s; return *this; }

    void check(const Field& o) const {
        if (!(grid == o.grid)) throw InputError("field grid mismatch");
    }
};

using Field2 = Field<Grid2>;
using Field3 = Field<Grid3>;

template <class G> Field<G> operator+(Field<G> a, const Field<G>& b) { a += b; return a; }
template <class G> Field<G> operator-(Field<G> a, const Field<G>& b) { a -= b; return a; }
template <class G> Field<G> operator*(Field<G> a, const Field<G>& b) { a *= b; return a; }
template <class G> Field<G> operator/(Field<G> a, const Field<G>& b) { a /= b; return a; }
template <class G> Field<G> operator*(double s, Field<G> a) { a *= s; return a; }
template <class G> Field<G> operator*(Field<G> a, double s) { a *= s; return a; }
template <class G> Field<G> operator+(Field<G> a, double s) { a += s; return a; }
template <class G> Field<G> operator-(Field<G> a, double s) { a += -s; return a; }
template <class G> Field<G> operator-(Field<G> a) { a *= -1.0; return a; }

template <class G, class F>
Field<G> map(const Field<G>& a, F f) {
    Field<G> r(a.grid);
    for (std::size_t n = 0; n < a.size(); ++n) r.v[n] = f(a.v[n]);
    return r;
}

template <class G, class F>
Field<G> map2(const Field<G>& a, const Field<G>& b, F f) {
    a.check(b);
    Field<G> r(a.grid);
    for (std::size_t n = 0; n < a.size(); ++n) r.v[n] = f(a.v[n], b.v[n]);
    return r;
}

Field2 sample(const Grid2& g, const std::function<double(double, double)>& f);
Field3 sample(const Grid3& g, const std::function<double(double, double, double)>& f);

Field2 slice(const Field3& f, int k);
void set_slice(Field3& f, int k, const Field2& s);
// Stack equally spaced slices into a Field3.
Field3 stack(const std::vector<Field2>& slices, double z0, double z1);

// Every other node of a refined field, back on the coarse grid.
Field2 restrict_to(const Field2& fine, const Grid2& coarse);
Field3 restrict_to(const Field3& fine, const Grid3& coarse);

// Nodal loop split across CFH_THREADS workers (default: hardware threads).
// Each index is processed independently, so the result does not depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);
int thread_count();

}  // namespace cfh
