#include "cfh/ode.hpp"

#include <algorithm>
#include <cmath>

#include "cfh/grid.hpp"

namespace cfh {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace

OdeSolution solve_ode(const OdeRhs& f, double t0, const std::vector<double>& y0, double t1,
                      const OdeOptions& opt) {
    const std::size_t n = y0.size();
    OdeSolution sol;
    sol.t0_ = t0;
    sol.t1_ = t1;
    sol.dim_ = n;
    if (t1 == t0) return sol;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    std::vector<double> y = y0, y1(n), yt(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    f(t0, y, k1);
    double t = t0;
    double h = std::min(opt.max_step, 1e-3 * std::fabs(t1 - t0) + 1e-6) * dir;
    long steps = 0;
    double err_old = 1e-4;
    while (dir * (t1 - t) > 0) {
        if (++steps > opt.max_steps) throw NumericalError("ODE integration exceeded the step budget");
        if (dir * (t + h - t1) > 0) h = t1 - t;
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, yt, k2);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, yt, k3);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, yt, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, yt, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h, yt, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t + h, y1, k7);
        double err = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / double(n));
        if (!std::isfinite(err)) throw NumericalError("ODE integration produced non-finite values");
        if (err <= 1.0) {
            // dense output coefficients for the accepted step
            for (std::size_t i = 0; i < n; ++i) {
                double ydiff = y1[i] - y[i];
                double bspl = h * k1[i] - ydiff;
                sol.cont_.push_back(y[i]);
                sol.cont_.push_back(ydiff);
                sol.cont_.push_back(bspl);
                sol.cont_.push_back(ydiff - h * k7[i] - bspl);
                sol.cont_.push_back(h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]));
            }
            sol.told_.push_back(t);
            sol.h_.push_back(h);
            t = (dir * (t + h - t1) >= 0) ? t1 : t + h;
            y = y1;
            k1 = k7;
            // PI step-size control
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5) * std::pow(err_old, 0.4 / 5);
            fac = std::clamp(fac, 0.2, 5.0);
            err_old = std::max(err, 1e-4);
            h *= fac;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
        if (std::fabs(h) > opt.max_step) h = dir * opt.max_step;
        if (std::fabs(h) < 1e-14 * std::max(1.0, std::fabs(t))) throw NumericalError("ODE step size underflow");
    }
    return sol;
}

bool OdeSolution::covers(double t) const {
    return t >= std::min(t0_, t1_) && t <= std::max(t0_, t1_);
}

std::vector<double> OdeSolution::operator()(double t) const {
    if (!covers(t)) throw InputError("ODE solution evaluated outside its range");
    if (told_.empty()) throw InputError("ODE solution has no steps");
    const double dir = t1_ > t0_ ? 1.0 : -1.0;
    // last step whose start does not lie beyond t
    std::size_t lo = 0, hi = told_.size();
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (dir * (told_[mid] - t) <= 0)
            lo = mid;
        else
            hi = mid;
    }
    const double th = (t - told_[lo]) / h_[lo], th1 = 1.0 - th;
    std::vector<double> y(dim_);
    const double* c = cont_.data() + lo * 5 * dim_;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double* r = c + 5 * i;
        y[i] = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
    }
    return y;
}

OdeSolution2::OdeSolution2(const OdeRhs& f, double t_ref, const std::vector<double>& y_ref, double a, double b,
                           const OdeOptions& opt)
    : t_ref_(t_ref), a_(std::min(a, t_ref)), b_(std::max(b, t_ref)), y_ref_(y_ref) {
    if (a_ < t_ref_) {
        lo_ = solve_ode(f, t_ref_, y_ref_, a_, opt);
        has_lo_ = true;
    }
    if (b_ > t_ref_) {
        hi_ = solve_ode(f, t_ref_, y_ref_, b_, opt);
        has_hi_ = true;
    }
}

std::vector<double> OdeSolution2::operator()(double t) const {
    if (t == t_ref_) return y_ref_;
    if (t < t_ref_) {
        if (!has_lo_ || t < a_) throw InputError("ODE solution evaluated outside its range");
        return lo_(t);
    }
    if (!has_hi_ || t > b_) throw InputError("ODE solution evaluated outside its range");
    return hi_(t);
}

}  // namespace cfh
