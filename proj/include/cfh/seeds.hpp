#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfh/grid.hpp"
#include "cfh/jet.hpp"
#include "cfh/ode.hpp"

namespace cfh {

// One-variable function used for rho(y) and sigma(x) of Example 1.
class ScalarFunction {
public:
    static ScalarFunction affine(double a, double b);            // a + b t
    static ScalarFunction exponential(double a, double b, double c);  // a + b e^{c t}
    // Uniform samples on [t0, t1]; derivatives from local nine-point Fornberg stencils.
    static ScalarFunction sampled(double t0, double t1, std::vector<double> values);
    // "affine:a,b", "exp:a,b,c" or "sampled:t0,t1,v0,v1,..."
    static ScalarFunction parse(const std::string& desc);

    // Taylor coefficients f^(k)(t)/k!, k = 0..order.
    std::vector<double> taylor(double t, int order) const;
    double operator()(double t) const { return taylor(t, 0)[0]; }
    double derivative(double t, int k) const;
    // +1 or -1 if f' keeps that sign on [a, b] (checked on a fine sample), else 0.
    int monotone_sign(double a, double b) const;
    double min_on(double a, double b) const;
    std::string describe() const;

private:
    enum class Kind { Affine, Exp, Sampled } kind_ = Kind::Affine;
    std::vector<double> p_;
};

// Bivariate jets at one point of the z = 0 data carried by a seed:
// the Guichard angle, psi, e^{-P} (u) and their first z-derivatives.
struct SeedJets {
    Jet2 phi, phi_z, psi, psi_z, u, u_z;
};

class Seed {
public:
    virtual ~Seed() = default;
    virtual SeedJets jets(double x, double y, int order) const = 0;
    // kappa_3 at z = 0 from the example's own closed formula (independent of the generic one).
    virtual double kappa3(double x, double y) const = 0;
    // Rectangle on which the ODE solutions are available.
    virtual Grid2 domain() const = 0;
    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------- Example 2

struct Example2Params {
    double c0 = 1, c1 = 0, c2 = -4.5;
    // X1 data at x = 1 (the base of the X2 quadrature). X1''(1) follows from c2 unless given.
    double X1 = 3.5, X1p = 2.0;
    std::optional<double> X1pp;
    // Y data at y = 0
    double Y = -2.0, Yp = 0.0;
    double x_lo = 0.5, x_hi = 2.0, y_lo = 0.0, y_hi = 2.6;
    double orientation = 1.0;  // multiplies the (e^{-P}, (e^{-P})_z, kappa_3) triple
    OdeOptions ode{};

    double X1pp_at_1() const { return X1pp ? *X1pp : c0 - c1 - X1 - c2; }
    void validate() const;
};

struct Example2Odes {
    Example2Params p;
    OdeSolution2 xs;  // (X1, X1', X1'', Q) with Q = int_1^x X1'/t^3
    OdeSolution2 ys;  // (Y, Y')

    double X2(double x) const;
    // Taylor coefficients of X1 and Y at a point.
    std::vector<double> X1_series(double x, int order) const;
    std::vector<double> Y_series(double y, int order) const;
};

Example2Odes ex2_solve_odes(const Example2Params& p);

struct Ex2OdeCheck {
    double x_equation = 0;   // third-order X1 equation, X1''' by differencing the dense X1''
    double y_equation = 0;   // Y'' + Y = c0 y^2 + c1, Y'' by differencing the dense Y'
    double x2_relation = 0;  // X1'' + X1 + X2 - c0 x^2 + c1 with X2 from the quadrature
};
Ex2OdeCheck ex2_ode_check(const Example2Odes& s, int samples = 400);

// Left side minus right side of the third-order X1 equation.
double ex2_x_residual(const Example2Params& p, double x, double X1, double X1p, double X1pp, double X1ppp);

struct Ex2Closed {
    Field2 phi, phi_z, psi, psi_z, phi_zz, psi_zz;
};
// Printed closed forms of the hyperbolic-plane example.
Ex2Closed ex2_closed_forms(const Grid2& g);

struct InitialTriple {
    Field2 u, kappa3, u_z;  // e^{-P}, kappa_3, (e^{-P})_z at z = 0
};
InitialTriple ex2_initial_data(const Example2Odes& s, const Grid2& g);
// Same assembly from arbitrary one-variable data: X(x) = (X1, X1'), Y(y) = (Y, Y').
using Pair = std::array<double, 2>;
InitialTriple ex2_initial_data(const std::function<Pair(double)>& X, const std::function<Pair(double)>& Y,
                               const Grid2& g, double orientation = 1.0);

double ex2_G(const Example2Odes& s, double x);
double ex2_H(const Example2Odes& s, double y);

struct GHStats {
    std::vector<double> G, H;  // G along the x-nodes, H along the y-nodes
    double G_mean = 0, G_sd = 0, H_mean = 0, H_sd = 0;
    double G_min = 0;
    // sd / (1 + |mean|)
    double G_rel() const;
    double H_rel() const;
};
GHStats ex2_GH(const Example2Odes& s, const Grid2& g);

struct Ex2Completion {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0, H0 = 0;
    double Y = 0, Yp = 0, X1 = 0, X1p = 0, X1pp = 0;
};

// Closed-form completion of (c0, c2, c3) with c1 = 0. lam_c4 and lam_H in [0, 1] place c4 and
// H(0) inside their admissible intervals; the signs choose the roots for Y(0), X1(1), X1'(1).
std::optional<Ex2Completion> ex2_complete(double c0, double c2, double c3, double lam_c4, double lam_H,
                                          int sY, int sX, int sXp);

bool ex2_admissible(double c0, double c2, double c3);

struct Ex2FamilyResult {
    bool accepted = false;
    std::string reason;
    Ex2Completion completion;
    Example2Params params;  // ready for ex2_solve_odes
    double lam_c4 = 0, lam_H = 0;
    int sY = 1, sX = 1, sXp = 1;
    double margin = 0;  // min |kappa_1 kappa_2| on the search sample of the window
};

// Completion of an admissible (c0, c2, c3) chosen so that e^{-P} keeps one sign on `window`
// (orientation fixed to make it positive) and min |kappa_1 kappa_2| there is as large as the
// search grid allows. Rejection is reported in the result.
Ex2FamilyResult ex2_family_sample(double c0, double c2, double c3, const Grid2& window, int search_n = 21);

class Example2Seed : public Seed {
public:
    explicit Example2Seed(const Example2Params& p);
    explicit Example2Seed(Example2Odes s) : s_(std::move(s)) {}
    SeedJets jets(double x, double y, int order) const override;
    double kappa3(double x, double y) const override;
    Grid2 domain() const override;
    std::string name() const override { return "example2"; }
    const Example2Odes& odes() const { return s_; }

private:
    Example2Odes s_;
};

// ---------------------------------------------------------------- Example 1

struct Example1Params {
    ScalarFunction rho = ScalarFunction::affine(0, 1);
    ScalarFunction sigma = ScalarFunction::exponential(0, 1, 1);
    double c0 = 0.5, c1 = 0.3, c2 = 0.2;
    // data at x = 0 and y = 0
    double X1 = 1.0, X1p = 0.0;
    std::optional<double> Y1, Y1p;  // completed by ex1_family_sample when absent
    double x_lo = -0.5, x_hi = 0.5, y_lo = -0.5, y_hi = 0.5;
    OdeOptions ode{};

    void validate() const;
};

struct Example1Odes {
    Example1Params p;
    OdeSolution2 xs;  // (X1, X1', X2, alpha, alpha')
    OdeSolution2 ys;  // (Y1, Y1', Y2, beta, beta')

    std::vector<double> X_series(double x, int order, std::vector<double>* X2 = nullptr,
                                 std::vector<double>* alpha = nullptr) const;
    std::vector<double> Y_series(double y, int order, std::vector<double>* Y2 = nullptr,
                                 std::vector<double>* beta = nullptr) const;
};

// Requires Y1 and Y1p to be set.
Example1Odes ex1_solve_odes(const Example1Params& p);

struct Ex1OdeCheck {
    double x_cross = 0;  // third-order form vs the integrated form, X1''' by differencing
    double y_relation = 0;  // Y2 from the ODE vs e^rho Y1 + int e^{-rho} Y1' + c1
};
Ex1OdeCheck ex1_ode_check(const Example1Odes& s, int samples = 400);

// Printed auxiliaries of Example 1 on a grid.
struct Ex1Closed {
    Field2 phi, phi_z, phi_y, phi_yy, phi_zz, psi_zz, Lpsi, psi_z;
};
Ex1Closed ex1_closed_forms(const Example1Params& p, const Grid2& g);

InitialTriple ex1_initial_data(const Example1Odes& s, const Grid2& g);
// Same assembly from arbitrary one-variable data: X(x) = (X1, X2), Y(y) = (Y1, Y2).
InitialTriple ex1_initial_data(const Example1Params& p, const std::function<Pair(double)>& X,
                               const std::function<Pair(double)>& Y, const Grid2& g);

double ex1_G(const Example1Odes& s, double x);
double ex1_H(const Example1Odes& s, double y);
GHStats ex1_GH(const Example1Odes& s, const Grid2& g);

struct Ex1Completion {
    bool accepted = false;
    std::string reason;
    double G0 = 0, Y1 = 0, Y1p = 0;
};
// Y1(0), Y1'(0) from -H(0) = minus_H0 and (c1, c2); root sign s picks Y1(0).
Ex1Completion ex1_complete(const Example1Params& p, double minus_H0, int s = 1);
// Uses -H(0) = G(0) from the X1 data.
Ex1Completion ex1_family_sample(const Example1Params& p, int s = 1);

class Example1Seed : public Seed {
public:
    explicit Example1Seed(const Example1Params& p);
    SeedJets jets(double x, double y, int order) const override;
    double kappa3(double x, double y) const override;
    Grid2 domain() const override;
    std::string name() const override { return "example1"; }
    const Example1Odes& odes() const { return s_; }

private:
    Example1Odes s_;
};

// Samples of a seed's jets on a grid (values only).
struct SeedSamples {
    Field2 phi, phi_z, psi, psi_z, u, u_z;
};
SeedSamples sample_seed(const Seed& s, const Grid2& g);

// Degenerate e^{-P} check shared by the initial-data builders.
void require_nonvanishing(const Field2& u, const char* what);

}  // namespace cfh
