#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqdse/tiler.hpp"

using namespace sqdse;

namespace {

ConvWork make_work(int kh, int kw, int stride, int pad, int in_c, int in_hw, int out_c,
                   int groups = 1) {
    ConvWork w;
    w.kernel_h = kh;
    w.kernel_w = kw;
    w.stride = stride;
    w.pad_h = w.pad_w = pad;
    w.in_c = in_c;
    w.in_h = w.in_w = in_hw;
    w.out_c = out_c;
    w.out_h = (in_hw + 2 * pad - kh) / stride + 1;
    w.out_w = (in_hw + 2 * pad - kw) / stride + 1;
    w.groups = groups;
    return w;
}

std::int64_t compulsory_bytes(const ConvWork& w, int eb) { return footprint(w, eb); }

AcceleratorConfig config_with_buffer(std::int64_t buffer) {
    AcceleratorConfig cfg;
    cfg.buffer_bytes = buffer;
    return cfg;
}

}  // namespace

TEST_CASE("footprint counts input, weights and output once") {
    const ConvWork w = make_work(1, 1, 1, 0, 32, 4, 32, 1);
    CHECK(footprint(w, 2) == 2 * (32 * 16 + 32 * 32 + 32 * 16));
    CHECK(!needs_tiling(w, config_with_buffer(131072)));
    CHECK(needs_tiling(w, config_with_buffer(1024)));
}

TEST_CASE("fitting layers get the identity plan with compulsory traffic") {
    const ConvWork w = make_work(3, 3, 1, 1, 16, 14, 32, 1);
    const AcceleratorConfig cfg = config_with_buffer(131072);
    REQUIRE(!needs_tiling(w, cfg));
    const TilingResult r = search_tiling(w, cfg, 1000);
    CHECK(!r.tiled);
    CHECK(r.plan == identity_plan(w));
    CHECK(r.traffic.total_bytes == compulsory_bytes(w, cfg.element_bytes));
    CHECK(r.traffic.n_transfers == 3);
    CHECK(r.plan.input_reload == 1);
    CHECK(r.plan.weight_reload == 1);
    CHECK(r.plan.output_reload == 1);
}

TEST_CASE("traffic of every feasible plan covers the compulsory bytes") {
    const ConvWork works[] = {
        make_work(3, 3, 1, 1, 64, 28, 64, 1),
        make_work(1, 1, 1, 0, 128, 28, 128, 1),
        make_work(5, 5, 2, 2, 32, 56, 48, 1),
        make_work(3, 3, 1, 1, 64, 28, 64, 2),
    };
    const AcceleratorConfig cfg = config_with_buffer(16 * 1024);
    for (const ConvWork& w : works) {
        const auto plans = enumerate_plans(w, cfg);
        REQUIRE(!plans.empty());
        for (const TilingPlan& plan : plans) {
            const TrafficBreakdown t = traffic(w, plan, cfg.element_bytes);
            CHECK(t.total_bytes >= compulsory_bytes(w, cfg.element_bytes));
            CHECK(t.input_bytes + t.weight_bytes + t.output_bytes == t.total_bytes);
            CHECK(tile_working_set(w, plan, cfg.element_bytes) <= cfg.buffer_bytes);
        }
    }
}

TEST_CASE("reload factors follow the loop order") {
    // 1x1 layer so halos are exact: input reload equals the k-trip count when
    // k iterates outside every input-dependent loop.
    const ConvWork w = make_work(1, 1, 1, 0, 64, 32, 64, 1);
    TilingPlan plan;
    plan.tile_x = 32;
    plan.tile_y = 32;
    plan.tile_c = 64;
    plan.tile_k = 16;  // 4 k-tiles
    plan.loop_order = {TileAxis::K, TileAxis::C, TileAxis::Y, TileAxis::X};
    plan = with_reload_factors(w, plan);
    CHECK(plan.input_reload == 4);
    CHECK(plan.weight_reload == 1);
    CHECK(plan.output_reload == 1);

    const TrafficBreakdown t4 = traffic(w, plan, 2);
    plan.tile_k = 8;  // halving tile_k doubles the k trips
    plan = with_reload_factors(w, plan);
    CHECK(plan.input_reload == 8);
    CHECK(traffic(w, plan, 2).input_bytes == 2 * t4.input_bytes);

    // with k innermost the input is loaded once and the weights reload
    // across the spatial loops
    plan.tile_x = 8;
    plan.loop_order = {TileAxis::C, TileAxis::Y, TileAxis::X, TileAxis::K};
    plan = with_reload_factors(w, plan);
    CHECK(plan.input_reload == 1);
    CHECK(plan.weight_reload == 4);  // the four x trips sit outside the k loop
}

TEST_CASE("the chosen plan is optimal within the enumerated candidates") {
    const ConvWork works[] = {
        make_work(3, 3, 1, 1, 64, 28, 64, 1),
        make_work(1, 1, 1, 0, 256, 14, 256, 1),
        make_work(7, 7, 2, 0, 3, 111, 64, 1),
        make_work(1, 3, 1, 1, 32, 55, 32, 1),
        make_work(3, 3, 2, 1, 48, 28, 96, 2),
    };
    for (const ConvWork& w : works) {
        const AcceleratorConfig cfg = config_with_buffer(8 * 1024);
        const std::int64_t compute = 5000;
        const TilingResult chosen = search_tiling(w, cfg, compute);
        REQUIRE(chosen.tiled);
        for (const TilingPlan& plan : enumerate_plans(w, cfg)) {
            const TrafficBreakdown t = traffic(w, plan, cfg.element_bytes);
            const std::int64_t cycles = combine_cycles(compute, t, cfg);
            CHECK(chosen.estimated_cycles <= cycles);
            if (cycles == chosen.estimated_cycles)
                CHECK(chosen.traffic.total_bytes <= t.total_bytes);
        }
    }
}

TEST_CASE("growing the buffer never increases the estimated cycles") {
    const ConvWork works[] = {
        make_work(3, 3, 1, 1, 64, 28, 64, 1),
        make_work(1, 1, 1, 0, 256, 28, 256, 1),
        make_work(5, 5, 1, 2, 32, 56, 64, 1),
    };
    const std::int64_t buffers[] = {4096, 16384, 65536, 262144, 1048576};
    for (const ConvWork& w : works) {
        std::int64_t prev = -1;
        for (std::int64_t buffer : buffers) {
            const TilingResult r = search_tiling(w, config_with_buffer(buffer), 2000);
            if (prev >= 0) CHECK(r.estimated_cycles <= prev);
            prev = r.estimated_cycles;
        }
    }
}

TEST_CASE("an impossibly small buffer is an error naming the requirement") {
    const ConvWork w = make_work(3, 3, 1, 1, 64, 28, 64, 1);
    try {
        search_tiling(w, config_with_buffer(16), 1000);
        FAIL("expected TilerError");
    } catch (const TilerError& e) {
        CHECK(std::string(e.what()).find("minimal tile working set") != std::string::npos);
    }
}

TEST_CASE("grouped layers scale traffic by the group count") {
    const ConvWork grouped = make_work(1, 1, 1, 0, 64, 16, 64, 2);
    const AcceleratorConfig cfg = config_with_buffer(131072);
    const TilingResult r = search_tiling(grouped, cfg, 100);
    // weights shrink with groups; input and output bytes stay the full tensors
    CHECK(r.traffic.weight_bytes == grouped.weight_count() * cfg.element_bytes);
    CHECK(r.traffic.input_bytes == 64 * 16 * 16 * cfg.element_bytes);
    CHECK(r.traffic.output_bytes == 64 * 16 * 16 * cfg.element_bytes);
}

TEST_CASE("combiner overlaps compute with traffic and adds transfer latency") {
    AcceleratorConfig cfg;
    TrafficBreakdown t;
    t.total_bytes = 4096;
    t.n_transfers = 3;
    CHECK(combine_cycles(64, t, cfg) == 256 + 300);   // dram bound
    CHECK(combine_cycles(9000, t, cfg) == 9000 + 300);  // compute bound
    t.total_bytes = 17;  // partial beat rounds up
    CHECK(combine_cycles(0, t, cfg) == 2 + 300);
}
