#include <cmath>
#include <sstream>

#include "cfh/calculus.hpp"
#include "doctest.h"

using namespace cfh;

TEST_CASE("finite-difference weights reproduce the classic centered stencils") {
    auto w = fd_weights(0.0, {-2, -1, 0, 1, 2}, 1);
    CHECK(w[0] == doctest::Approx(1.0 / 12));
    CHECK(w[1] == doctest::Approx(-8.0 / 12));
    CHECK(w[2] == doctest::Approx(0.0));
    CHECK(w[3] == doctest::Approx(8.0 / 12));
    auto w2 = fd_weights(0.0, {-2, -1, 0, 1, 2}, 2);
    CHECK(w2[0] == doctest::Approx(-1.0 / 12));
    CHECK(w2[2] == doctest::Approx(-30.0 / 12));
}

TEST_CASE("partial derivatives are exact on quartics at interior nodes") {
    Grid2 g{21, 17, -1.0, 1.3, 0.2, 1.1};
    Field2 f = sample(g, [](double x, double y) { return std::pow(x, 4) - 2 * x * x * x * y + y * y * y * y + 3 * x * y; });
    Field2 fx = partial(f, Axis::X), fyy = partial(f, Axis::Y, 2);
    double ex = 0, eyy = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 2; i < g.nx - 2; ++i) {
            double x = g.x(i), y = g.y(j);
            ex = std::max(ex, std::fabs(fx[g.idx(i, j)] - (4 * x * x * x - 6 * x * x * y + 3 * y)));
        }
    for (int j = 2; j < g.ny - 2; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double y = g.y(j);
            eyy = std::max(eyy, std::fabs(fyy[g.idx(i, j)] - 12 * y * y));
        }
    CHECK(ex < 1e-10);
    CHECK(eyy < 1e-9);
}

TEST_CASE("one-sided boundary stencils keep fourth order") {
    auto err = [](int n) {
        Grid2 g{n, 9, 0.0, 1.0, 0.0, 1.0};
        Field2 f = sample(g, [](double x, double) { return std::sin(3 * x); });
        Field2 d1 = partial(f, Axis::X, 1), d2 = partial(f, Axis::X, 2), d3 = partial(f, Axis::X, 3);
        double e = 0;
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i);
            e = std::max(e, std::fabs(d1[g.idx(i, 0)] - 3 * std::cos(3 * x)));
            e = std::max(e, std::fabs(d2[g.idx(i, 0)] + 9 * std::sin(3 * x)) / 3);
            e = std::max(e, std::fabs(d3[g.idx(i, 0)] + 27 * std::cos(3 * x)) / 9);
        }
        return e;
    };
    double p = convergence_order(err(41), err(81));
    CHECK(p > 3.7);
}

TEST_CASE("mixed partials commute") {
    Grid2 g{33, 29, 0.1, 0.9, -0.4, 0.5};
    Field2 f = sample(g, [](double x, double y) { return std::exp(x * y) * std::cos(x + 2 * y); });
    Field2 a = partial(partial(f, Axis::X), Axis::Y), b = partial(partial(f, Axis::Y), Axis::X);
    CHECK(max_abs(a - b) < 10 * std::pow(g.hx(), 4));
}

TEST_CASE("norms") {
    Grid2 g{1001, 7, 0.0, 1.0, 0.0, 1.0};
    Field2 f = sample(g, [](double x, double) { return x; });
    Norms n = norms(f);
    CHECK(n.linf == doctest::Approx(1.0));
    CHECK(std::fabs(n.l2 - 1 / std::sqrt(3.0)) < 1e-6);
    Field2 z(g);
    CHECK(norms(z).linf == 0.0);
    Field2 b = f;
    b[g.idx(0, 3)] = 50;  // boundary spike hidden by the band
    CHECK(norms(b, 3).linf < 1.0);
}

TEST_CASE("convergence order from an h^4 error") {
    CHECK(convergence_order(16e-8, 1e-8) == doctest::Approx(4.0));
}

TEST_CASE("cumulative integral from an interior base") {
    const int n = 41;
    const double h = 2.0 / (n - 1);
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[std::size_t(i)] = std::cos(-1.0 + i * h);
    auto F = cumulative_integral(f, h, 20);
    double e = 0;
    for (int i = 0; i < n; ++i) e = std::max(e, std::fabs(F[std::size_t(i)] - (std::sin(-1.0 + i * h) - std::sin(0.0))));
    CHECK(e < 2e-7);
}

TEST_CASE("CSV round trip is bit-exact") {
    Grid2 g{9, 8, 0.6, 1.4, 1.6, 2.4};
    Field2 f = sample(g, [](double x, double y) { return std::sin(x * 7.1) / y + 1e-300; });
    std::stringstream ss;
    write_csv(ss, f);
    Field2 r = read_csv2(ss);
    CHECK(r.grid == g);
    bool same = true;
    for (std::size_t n = 0; n < f.size(); ++n) same = same && (f[n] == r[n]);
    CHECK(same);

    Grid3 g3{g, 7, -0.1, 0.1};
    Field3 f3 = sample(g3, [](double x, double y, double z) { return x + y * z; });
    std::stringstream s3;
    write_csv(s3, f3);
    Field3 r3 = read_csv3(s3);
    CHECK(r3.grid == g3);
    CHECK(r3.v == f3.v);
}

TEST_CASE("malformed CSV is rejected") {
    std::stringstream bad("x,y,value\n0,0,1\n1,0,abc\n");
    CHECK_THROWS_AS(read_csv2(bad), InputError);
    std::stringstream hdr("a,b,c\n");
    CHECK_THROWS_AS(read_csv2(hdr), InputError);
}

TEST_CASE("grid invariants") {
    Grid2 g{5, 9, 0, 1, 0, 1};
    CHECK_THROWS_AS(g.validate(), InputError);
    Grid2 e{9, 9, 1, 1, 0, 1};
    CHECK_THROWS_AS(e.validate(), InputError);
}
