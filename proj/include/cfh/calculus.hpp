#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cfh/grid.hpp"

namespace cfh {

// Finite-difference weights for the `deriv`-th derivative at x0 from values at `nodes`
// (Fornberg's recursion). Exact for polynomials of degree < nodes.size().
std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int deriv);

// Derivative operator along one uniform axis. Interior nodes use the centered stencil of
// the requested accuracy order; nodes near either end use a one-sided window of the same order.
class AxisStencil {
public:
    AxisStencil(int n, double h, int deriv, int order);
    // out[i*stride] = sum_k w_k in[(start_i + k)*stride]
    void apply(const double* in, std::ptrdiff_t stride, double* out) const;
    int n() const { return n_; }
    int start(int i) const { return start_[std::size_t(i)]; }
    const std::vector<double>& weights(int i) const { return w_[std::size_t(cls_[std::size_t(i)])]; }

private:
    int n_;
    std::vector<int> start_, cls_;
    std::vector<std::vector<double>> w_;
};

// Partial derivative of order 1..3 along an axis, accuracy `order` (even, 2..8).
Field2 partial(const Field2& f, Axis a, int deriv = 1, int order = 4);
Field3 partial(const Field3& f, Axis a, int deriv = 1, int order = 4);

struct Norms {
    double linf = 0;
    double l2 = 0;  // trapezoid-weighted RMS over the (banded) window
    std::size_t argmax = 0;
};

// Norms over nodes at least `band` nodes from every x/y edge (z-slices all included).
Norms norms(const Field2& f, int band = 0);
Norms norms(const Field3& f, int band = 0);
double max_abs(const Field2& f, int band = 0);
double max_abs(const Field3& f, int band = 0);

// Named residual entry as serialized into reports.
struct Residual {
    std::string name;
    double linf = 0;
    double l2 = 0;
    std::size_t argmax = 0;
};
Residual residual(const std::string& name, const Field2& f, int band = 0);
Residual residual(const std::string& name, const Field3& f, int band = 0);

// Observed order from errors on two grids whose spacing differs by `ratio`.
double convergence_order(double coarse_err, double fine_err, double ratio = 2.0);

// Cumulative integral along a uniform line: out[i] = int_{base}^{i} f, fourth-order accurate
// (each panel integrates the cubic through four neighbouring nodes).
std::vector<double> cumulative_integral(const std::vector<double>& f, double h, std::size_t base = 0);

// Four-point Lagrange interpolation on a uniform 1D table at fractional position t (node units).
double lagrange4(const double* v, std::ptrdiff_t stride, int n, double t);

// CSV: header "x,y,value" or "x,y,z,value", one row per node, x fastest, %.17g values.
void write_csv(std::ostream& os, const Field2& f);
void write_csv(std::ostream& os, const Field3& f);
void write_csv(const std::string& path, const Field2& f);
void write_csv(const std::string& path, const Field3& f);
Field2 read_csv2(std::istream& is);
Field3 read_csv3(std::istream& is);
Field2 read_csv2(const std::string& path);
Field3 read_csv3(const std::string& path);

}  // namespace cfh
