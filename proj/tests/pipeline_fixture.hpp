#pragma once

#include <map>
#include <memory>

#include "cfh/frames.hpp"
#include "doctest.h"

namespace cfh::testing {

struct Pipeline {
    InitialDataSet data;
    EvolvedGuichardData evolved;
    FrameField v, u;
    HypersurfaceMesh mesh;
};

// Example 2 on the mirrored window, where the evolution stays generic for |z| <= 0.1. Built once per size.
inline const Pipeline& pipeline(int n) {
    static std::map<int, Pipeline> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const Grid2 w{n, n, 1.6, 2.4, 0.6, 1.4};
    auto fam = ex2_family_sample(1, 0, 0, w);
    REQUIRE(fam.accepted);
    std::shared_ptr<const Seed> seed = std::make_shared<Example2Seed>(ex2_solve_odes(fam.params));
    Pipeline p;
    p.data = assemble_initial_data(seed, w);
    EvolutionOptions o;
    o.M = 12;
    o.nz = 41;
    p.evolved = evolve(*seed, w, o);
    REQUIRE_FALSE(p.evolved.shrunk);
    p.v = build_initial_frames(p.data);
    p.u = evolve_frames(p.v, p.evolved);
    p.mesh = reconstruct_f(p.u, p.evolved);
    return cache.emplace(n, std::move(p)).first->second;
}

}  // namespace cfh::testing
