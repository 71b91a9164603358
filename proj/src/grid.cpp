#include "cfh/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

namespace cfh {

void Grid2::validate() const {
    if (nx < 7 || ny < 7) throw InputError("grid needs at least 7 nodes per axis");
    if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(x0 + x1 + y0 + y1))
        throw InputError("grid window must be a non-empty finite rectangle");
}

Grid2 Grid2::refined() const {
    Grid2 g = *this;
    g.nx = 2 * nx - 1;
    g.ny = 2 * ny - 1;
    return g;
}

void Grid3::validate() const {
    xy.validate();
    if (nz < 1) throw InputError("grid needs at least one z-slice");
    if (nz > 1 && nz < 7) throw InputError("a z-range needs at least 7 slices");
    if (nz > 1 && !(z1 > z0)) throw InputError("z-range must be non-empty");
}

Grid3 Grid3::refined() const {
    Grid3 g = *this;
    g.xy = xy.refined();
    if (nz > 1) g.nz = 2 * nz - 1;
    return g;
}

Field2 sample(const Grid2& g, const std::function<double(double, double)>& f) {
    Field2 r(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) r.v[g.idx(i, j)] = f(g.x(i), g.y(j));
    return r;
}

Field3 sample(const Grid3& g, const std::function<double(double, double, double)>& f) {
    Field3 r(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.xy.ny; ++j)
            for (int i = 0; i < g.xy.nx; ++i) r.v[g.idx(i, j, k)] = f(g.xy.x(i), g.xy.y(j), g.z(k));
    return r;
}

Field2 slice(const Field3& f, int k) {
    Field2 s(f.grid.xy);
    std::copy_n(f.v.begin() + std::ptrdiff_t(f.grid.idx(0, 0, k)), s.size(), s.v.begin());
    return s;
}

void set_slice(Field3& f, int k, const Field2& s) {
    if (!(s.grid == f.grid.xy)) throw InputError("slice grid mismatch");
    std::copy(s.v.begin(), s.v.end(), f.v.begin() + std::ptrdiff_t(f.grid.idx(0, 0, k)));
}

Field3 stack(const std::vector<Field2>& slices, double z0, double z1) {
    if (slices.empty()) throw InputError("no slices to stack");
    Grid3 g{slices[0].grid, int(slices.size()), z0, z1};
    Field3 r(g);
    for (int k = 0; k < g.nz; ++k) set_slice(r, k, slices[std::size_t(k)]);
    return r;
}

Field2 restrict_to(const Field2& fine, const Grid2& coarse) {
    if (!(fine.grid == coarse.refined())) throw InputError("restriction needs a once-refined grid");
    Field2 r(coarse);
    for (int j = 0; j < coarse.ny; ++j)
        for (int i = 0; i < coarse.nx; ++i) r.v[coarse.idx(i, j)] = fine.v[fine.grid.idx(2 * i, 2 * j)];
    return r;
}

Field3 restrict_to(const Field3& fine, const Grid3& coarse) {
    if (!(fine.grid == coarse.refined())) throw InputError("restriction needs a once-refined grid");
    Field3 r(coarse);
    int kz = coarse.nz > 1 ? 2 : 1;
    for (int k = 0; k < coarse.nz; ++k)
        for (int j = 0; j < coarse.xy.ny; ++j)
            for (int i = 0; i < coarse.xy.nx; ++i)
                r.v[coarse.idx(i, j, k)] = fine.v[fine.grid.idx(2 * i, 2 * j, kz * k)];
    return r;
}

int thread_count() {
    if (const char* s = std::getenv("CFH_THREADS")) {
        int n = std::atoi(s);
        if (n > 0) return n;
    }
    unsigned h = std::thread::hardware_concurrency();
    return h ? int(h) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    std::size_t workers = std::min<std::size_t>(std::size_t(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t b = w * chunk, e = std::min(n, b + chunk);
        pool.emplace_back([&body, &errors, w, b, e] {
            try {
                for (std::size_t i = b; i < e; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace cfh
