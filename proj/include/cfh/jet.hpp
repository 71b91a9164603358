#pragma once

#include <vector>

namespace cfh {

// Truncated bivariate Taylor polynomial sum c_ab dx^a dy^b, a + b <= order.
// Coefficients are stored by total degree d = a + b, then by b.
// Univariate series use the x-direction only.
class Jet2 {
public:
    Jet2() = default;
    explicit Jet2(int order, double value = 0.0);
    // dx (which = 0) or dy (which = 1) around `at`
    static Jet2 variable(int order, double at, int which);
    // Univariate Taylor coefficients s_k placed along x (which = 0) or y (which = 1).
    static Jet2 from_series(int order, const std::vector<double>& s, int which);

    int order() const { return n_; }
    bool empty() const { return n_ < 0; }
    double value() const { return c_[0]; }
    double& at(int a, int b) { return c_[std::size_t(off(a + b) + b)]; }
    double at(int a, int b) const { return c_[std::size_t(off(a + b) + b)]; }
    // d^(a+b) / dx^a dy^b at the expansion point
    double deriv(int a, int b) const;
    double* block(int d) { return c_.data() + off(d); }
    const double* block(int d) const { return c_.data() + off(d); }
    const std::vector<double>& coeffs() const { return c_; }

    Jet2 dx() const;
    Jet2 dy() const;
    Jet2 truncated(int order) const;
    // Euler operator x d/dx + y d/dy: scales degree-d part by d.
    Jet2 euler() const;
    double eval(double dx, double dy) const;

    Jet2& operator+=(const Jet2& o);
    Jet2& operator-=(const Jet2& o);
    Jet2& operator*=(double s);
    Jet2& operator+=(double s) { c_[0] += s; return *this; }

    static int off(int d) { return d * (d + 1) / 2; }
    static int count(int order) { return (order + 1) * (order + 2) / 2; }

private:
    int n_ = -1;
    std::vector<double> c_;
};

// r += s * a * b, truncated at r.order()
void mul_acc(Jet2& r, const Jet2& a, const Jet2& b, double s = 1.0);

Jet2 operator+(Jet2 a, const Jet2& b);
Jet2 operator-(Jet2 a, const Jet2& b);
Jet2 operator-(Jet2 a);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator/(const Jet2& a, const Jet2& b);
Jet2 operator*(Jet2 a, double s);
Jet2 operator*(double s, Jet2 a);
Jet2 operator+(Jet2 a, double s);
Jet2 operator+(double s, Jet2 a);
Jet2 operator-(Jet2 a, double s);
Jet2 operator-(double s, const Jet2& a);
Jet2 operator/(double s, const Jet2& a);
Jet2 operator/(Jet2 a, double s);

Jet2 recip(const Jet2& a);
Jet2 exp(const Jet2& g);
Jet2 log(const Jet2& g);
Jet2 sqrt(const Jet2& g);
Jet2 pow(const Jet2& g, double p);
void sincos(const Jet2& g, Jet2& s, Jet2& c);
Jet2 sin(const Jet2& g);
Jet2 cos(const Jet2& g);
Jet2 tan(const Jet2& g);
Jet2 atan(const Jet2& g);
// Branch fixed by the value at the expansion point (std::atan2).
Jet2 atan2(const Jet2& y, const Jet2& x);

}  // namespace cfh
