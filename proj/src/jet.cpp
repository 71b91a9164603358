#include "cfh/jet.hpp"

#include <algorithm>
#include <cmath>

#include "cfh/grid.hpp"

namespace cfh {

namespace {

double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// r_block(d) += s * a_block(m) * b_block(d - m)
inline void block_mul_acc(double* r, const double* a, int m, const double* b, int k, double s) {
    for (int i = 0; i <= m; ++i) {
        double ai = s * a[i];
        if (ai == 0.0) continue;
        for (int j = 0; j <= k; ++j) r[i + j] += ai * b[j];
    }
}

int common_order(const Jet2& a, const Jet2& b) {
    if (a.empty() || b.empty()) throw InputError("jet arithmetic on an empty jet");
    return std::min(a.order(), b.order());
}

}  // namespace

Jet2::Jet2(int order, double value) : n_(order), c_(std::size_t(count(order)), 0.0) {
    if (order < 0) throw InputError("jet order must be non-negative");
    c_[0] = value;
}

Jet2 Jet2::variable(int order, double at, int which) {
    Jet2 j(order, at);
    if (order >= 1) j.c_[std::size_t(1 + which)] = 1.0;
    return j;
}

Jet2 Jet2::from_series(int order, const std::vector<double>& s, int which) {
    Jet2 j(order);
    for (int k = 0; k <= order && k < int(s.size()); ++k) {
        if (which == 0)
            j.at(k, 0) = s[std::size_t(k)];
        else
            j.at(0, k) = s[std::size_t(k)];
    }
    return j;
}

double Jet2::deriv(int a, int b) const {
    if (a + b > n_) throw InputError("jet derivative beyond its order");
    return factorial(a) * factorial(b) * at(a, b);
}

Jet2 Jet2::dx() const {
    if (n_ < 1) throw InputError("differentiating an order-0 jet");
    Jet2 r(n_ - 1);
    for (int d = 0; d <= n_ - 1; ++d)
        for (int b = 0; b <= d; ++b) r.at(d - b, b) = (d - b + 1) * at(d - b + 1, b);
    return r;
}

Jet2 Jet2::dy() const {
    if (n_ < 1) throw InputError("differentiating an order-0 jet");
    Jet2 r(n_ - 1);
    for (int d = 0; d <= n_ - 1; ++d)
        for (int b = 0; b <= d; ++b) r.at(d - b, b) = (b + 1) * at(d - b, b + 1);
    return r;
}

Jet2 Jet2::truncated(int order) const {
    if (order > n_) throw InputError("cannot raise a jet's order");
    Jet2 r(order);
    std::copy_n(c_.begin(), r.c_.size(), r.c_.begin());
    return r;
}

Jet2 Jet2::euler() const {
    Jet2 r(*this);
    for (int d = 0; d <= n_; ++d)
        for (int b = 0; b <= d; ++b) r.c_[std::size_t(off(d) + b)] *= d;
    return r;
}

double Jet2::eval(double dx, double dy) const {
    double s = 0;
    for (int d = n_; d >= 0; --d)
        for (int b = 0; b <= d; ++b) s += at(d - b, b) * std::pow(dx, d - b) * std::pow(dy, b);
    return s;
}

Jet2& Jet2::operator+=(const Jet2& o) {
    int n = common_order(*this, o);
    if (n < n_) *this = truncated(n);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
    int n = common_order(*this, o);
    if (n < n_) *this = truncated(n);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet2& Jet2::operator*=(double s) {
    for (double& a : c_) a *= s;
    return *this;
}

void mul_acc(Jet2& r, const Jet2& a, const Jet2& b, double s) {
    const int n = r.order();
    if (a.order() < n || b.order() < n) throw InputError("mul_acc: operand order below target");
    for (int d = 0; d <= n; ++d) {
        double* rd = r.block(d);
        for (int m = 0; m <= d; ++m) block_mul_acc(rd, a.block(m), m, b.block(d - m), d - m, s);
    }
}

Jet2 operator+(Jet2 a, const Jet2& b) { a += b; return a; }
Jet2 operator-(Jet2 a, const Jet2& b) { a -= b; return a; }
Jet2 operator-(Jet2 a) { a *= -1.0; return a; }
Jet2 operator*(Jet2 a, double s) { a *= s; return a; }
Jet2 operator*(double s, Jet2 a) { a *= s; return a; }
Jet2 operator+(Jet2 a, double s) { a += s; return a; }
Jet2 operator+(double s, Jet2 a) { a += s; return a; }
Jet2 operator-(Jet2 a, double s) { a += -s; return a; }
Jet2 operator-(double s, const Jet2& a) { Jet2 r = -a; r += s; return r; }
Jet2 operator/(Jet2 a, double s) { a *= 1.0 / s; return a; }
Jet2 operator/(double s, const Jet2& a) { return recip(a) * s; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r(common_order(a, b));
    mul_acc(r, a, b);
    return r;
}

Jet2 operator/(const Jet2& a, const Jet2& b) {
    const int n = common_order(a, b);
    const double b0 = b.value();
    if (b0 == 0.0 || !std::isfinite(b0)) throw NumericalError("jet division by zero");
    Jet2 q(n);
    for (int d = 0; d <= n; ++d) {
        double* qd = q.block(d);
        const double* ad = a.block(d);
        for (int i = 0; i <= d; ++i) qd[i] = ad[i];
        for (int m = 1; m <= d; ++m) block_mul_acc(qd, b.block(m), m, q.block(d - m), d - m, -1.0);
        for (int i = 0; i <= d; ++i) qd[i] /= b0;
    }
    return q;
}

Jet2 recip(const Jet2& a) { return Jet2(a.order(), 1.0) / a; }

Jet2 exp(const Jet2& g) {
    const int n = g.order();
    Jet2 f(n, std::exp(g.value()));
    for (int d = 1; d <= n; ++d) {
        double* fd = f.block(d);
        for (int m = 1; m <= d; ++m) block_mul_acc(fd, g.block(m), m, f.block(d - m), d - m, double(m) / d);
    }
    return f;
}

Jet2 log(const Jet2& g) {
    const int n = g.order();
    const double g0 = g.value();
    if (!(g0 > 0)) throw NumericalError("jet log of a non-positive value");
    Jet2 f(n, std::log(g0));
    for (int d = 1; d <= n; ++d) {
        double* fd = f.block(d);
        const double* gd = g.block(d);
        for (int i = 0; i <= d; ++i) fd[i] = gd[i];
        for (int m = 1; m <= d - 1; ++m) block_mul_acc(fd, g.block(m), m, f.block(d - m), d - m, -double(d - m) / d);
        for (int i = 0; i <= d; ++i) fd[i] /= g0;
    }
    return f;
}

Jet2 pow(const Jet2& g, double p) {
    const int n = g.order();
    const double g0 = g.value();
    if (!(g0 > 0)) throw NumericalError("jet power of a non-positive value");
    Jet2 f(n, std::pow(g0, p));
    // g E f = p f E g
    for (int d = 1; d <= n; ++d) {
        double* fd = f.block(d);
        for (int m = 1; m <= d; ++m) {
            block_mul_acc(fd, g.block(m), m, f.block(d - m), d - m, p * m / d);
            if (m < d) block_mul_acc(fd, g.block(m), m, f.block(d - m), d - m, -double(d - m) / d);
        }
        for (int i = 0; i <= d; ++i) fd[i] /= g0;
    }
    return f;
}

Jet2 sqrt(const Jet2& g) { return pow(g, 0.5); }

void sincos(const Jet2& g, Jet2& s, Jet2& c) {
    const int n = g.order();
    s = Jet2(n, std::sin(g.value()));
    c = Jet2(n, std::cos(g.value()));
    for (int d = 1; d <= n; ++d) {
        double* sd = s.block(d);
        double* cd = c.block(d);
        for (int m = 1; m <= d; ++m) {
            block_mul_acc(sd, g.block(m), m, c.block(d - m), d - m, double(m) / d);
            block_mul_acc(cd, g.block(m), m, s.block(d - m), d - m, -double(m) / d);
        }
    }
}

Jet2 sin(const Jet2& g) { Jet2 s, c; sincos(g, s, c); return s; }
Jet2 cos(const Jet2& g) { Jet2 s, c; sincos(g, s, c); return c; }
Jet2 tan(const Jet2& g) { Jet2 s, c; sincos(g, s, c); return s / c; }

Jet2 atan(const Jet2& g) {
    const int n = g.order();
    Jet2 w = recip(1.0 + g * g);
    Jet2 f(n, std::atan(g.value()));
    for (int d = 1; d <= n; ++d) {
        double* fd = f.block(d);
        for (int m = 1; m <= d; ++m) block_mul_acc(fd, g.block(m), m, w.block(d - m), d - m, double(m) / d);
    }
    return f;
}

Jet2 atan2(const Jet2& y, const Jet2& x) {
    const int n = common_order(x, y);
    // E f = (x E y - y E x) / (x^2 + y^2)
    Jet2 w = (x * y.euler() - y * x.euler()) / (x * x + y * y);
    Jet2 f(n, std::atan2(y.value(), x.value()));
    for (int d = 1; d <= n; ++d) {
        double* fd = f.block(d);
        const double* wd = w.block(d);
        for (int i = 0; i <= d; ++i) fd[i] = wd[i] / d;
    }
    return f;
}

}  // namespace cfh
