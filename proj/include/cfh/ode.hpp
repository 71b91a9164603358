#pragma once

#include <functional>
#include <vector>

namespace cfh {

using OdeRhs = std::function<void(double t, const std::vector<double>& y, std::vector<double>& dydt)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.01;
    long max_steps = 2000000;
};

// Adaptive Dormand-Prince 5(4) solution on [min(t0,t1), max(t0,t1)] with
// the fourth-order continuous extension for evaluation between steps.
class OdeSolution {
public:
    std::vector<double> operator()(double t) const;
    double t_begin() const { return t0_; }
    double t_end() const { return t1_; }
    bool covers(double t) const;
    std::size_t steps() const { return told_.size(); }
    std::size_t dim() const { return dim_; }

private:
    friend OdeSolution solve_ode(const OdeRhs&, double, const std::vector<double>&, double, const OdeOptions&);
    double t0_ = 0, t1_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> told_, h_;
    std::vector<double> cont_;  // 5 * dim per step
};

OdeSolution solve_ode(const OdeRhs& f, double t0, const std::vector<double>& y0, double t1,
                      const OdeOptions& opt = {});

// Integrates from an interior reference point to both ends of [a, b].
class OdeSolution2 {
public:
    OdeSolution2() = default;
    OdeSolution2(const OdeRhs& f, double t_ref, const std::vector<double>& y_ref, double a, double b,
                 const OdeOptions& opt = {});
    std::vector<double> operator()(double t) const;
    double a() const { return a_; }
    double b() const { return b_; }

private:
    double t_ref_ = 0, a_ = 0, b_ = 0;
    std::vector<double> y_ref_;
    OdeSolution lo_, hi_;
    bool has_lo_ = false, has_hi_ = false;
};

}  // namespace cfh
