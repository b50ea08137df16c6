#include "sqdse/tiler.hpp"

#include <algorithm>
#include <cmath>

namespace sqdse {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

struct Trips {
    std::int64_t x, y, c, k;

    std::int64_t of(TileAxis axis) const {
        switch (axis) {
            case TileAxis::X: return x;
            case TileAxis::Y: return y;
            case TileAxis::C: return c;
            case TileAxis::K: return k;
        }
        return 1;
    }
};

Trips trip_counts(const ConvWork& work, const TilingPlan& plan) {
    return {ceil_div(work.out_w, plan.tile_x), ceil_div(work.out_h, plan.tile_y),
            ceil_div(work.in_c_per_group(), plan.tile_c),
            ceil_div(work.out_c_per_group(), plan.tile_k)};
}

bool depends(TileAxis axis, char tensor) {
    switch (tensor) {
        case 'i': return axis == TileAxis::X || axis == TileAxis::Y || axis == TileAxis::C;
        case 'w': return axis == TileAxis::C || axis == TileAxis::K;
        case 'o': return axis == TileAxis::X || axis == TileAxis::Y || axis == TileAxis::K;
    }
    return false;
}

std::int64_t reload_factor(const TilingPlan& plan, const Trips& trips, char tensor) {
    // Innermost loop the tensor depends on (loop_order is outermost-first).
    int innermost_dep = -1;
    for (int pos = 0; pos < 4; ++pos)
        if (depends(plan.loop_order[size_t(pos)], tensor)) innermost_dep = pos;
    std::int64_t reload = 1;
    for (int pos = 0; pos < innermost_dep; ++pos) {
        TileAxis axis = plan.loop_order[size_t(pos)];
        if (!depends(axis, tensor)) reload *= trips.of(axis);
    }
    return reload;
}

// Sum over the tiles along one output axis of the input window each tile
// needs (halo included, clamped to the real input extent).
std::int64_t input_window_sum(int out_dim, int tile, int stride, int kernel, int in_dim) {
    std::int64_t sum = 0;
    for (int t0 = 0; t0 < out_dim; t0 += tile) {
        int actual = std::min(tile, out_dim - t0);
        sum += std::min<std::int64_t>(std::int64_t(actual - 1) * stride + kernel, in_dim);
    }
    return sum;
}

}  // namespace

const char* axis_name(TileAxis axis) {
    switch (axis) {
        case TileAxis::X: return "x";
        case TileAxis::Y: return "y";
        case TileAxis::C: return "c";
        case TileAxis::K: return "k";
    }
    return "?";
}

std::int64_t footprint(const ConvWork& work, int element_bytes) {
    const std::int64_t input = std::int64_t(work.in_c) * work.in_h * work.in_w;
    const std::int64_t weights = work.weight_count();
    const std::int64_t output = std::int64_t(work.out_c) * work.out_h * work.out_w;
    return element_bytes * (input + weights + output);
}

bool needs_tiling(const ConvWork& work, const AcceleratorConfig& cfg) {
    return footprint(work, cfg.element_bytes) > cfg.buffer_bytes;
}

std::int64_t tile_working_set(const ConvWork& work, const TilingPlan& plan, int element_bytes) {
    const std::int64_t in_h = std::min<std::int64_t>(
        std::int64_t(plan.tile_y - 1) * work.stride + work.kernel_h, work.in_h);
    const std::int64_t in_w = std::min<std::int64_t>(
        std::int64_t(plan.tile_x - 1) * work.stride + work.kernel_w, work.in_w);
    const std::int64_t input = std::int64_t(plan.tile_c) * in_h * in_w;
    const std::int64_t weights = std::int64_t(work.kernel_h) * work.kernel_w * plan.tile_c * plan.tile_k;
    const std::int64_t output = std::int64_t(plan.tile_k) * plan.tile_y * plan.tile_x;
    return element_bytes * (input + weights + output);
}

TilingPlan with_reload_factors(const ConvWork& work, TilingPlan plan) {
    const Trips trips = trip_counts(work, plan);
    plan.input_reload = reload_factor(plan, trips, 'i');
    plan.weight_reload = reload_factor(plan, trips, 'w');
    plan.output_reload = reload_factor(plan, trips, 'o');
    return plan;
}

TilingPlan identity_plan(const ConvWork& work) {
    TilingPlan plan;
    plan.tile_x = work.out_w;
    plan.tile_y = work.out_h;
    plan.tile_c = work.in_c_per_group();
    plan.tile_k = work.out_c_per_group();
    return with_reload_factors(work, plan);
}

TrafficBreakdown traffic(const ConvWork& work, const TilingPlan& plan, int element_bytes) {
    if (plan.tile_x < 1 || plan.tile_x > work.out_w || plan.tile_y < 1 || plan.tile_y > work.out_h ||
        plan.tile_c < 1 || plan.tile_c > work.in_c_per_group() || plan.tile_k < 1 ||
        plan.tile_k > work.out_c_per_group())
        throw TilerError("infeasible plan: tile extents out of range");

    const Trips trips = trip_counts(work, plan);
    const std::int64_t r_in = reload_factor(plan, trips, 'i');
    const std::int64_t r_w = reload_factor(plan, trips, 'w');
    const std::int64_t r_out = reload_factor(plan, trips, 'o');
    const std::int64_t g = work.groups;

    const std::int64_t raw_input = std::int64_t(work.in_c) * work.in_h * work.in_w * element_bytes;
    std::int64_t input =
        g * work.in_c_per_group() *
        input_window_sum(work.out_h, plan.tile_y, work.stride, work.kernel_h, work.in_h) *
        input_window_sum(work.out_w, plan.tile_x, work.stride, work.kernel_w, work.in_w) * r_in *
        element_bytes;
    input = std::max(input, raw_input * r_in);

    TrafficBreakdown t;
    t.input_bytes = input;
    t.weight_bytes = work.weight_count() * r_w * element_bytes;
    t.output_bytes = std::int64_t(work.out_c) * work.out_h * work.out_w * r_out * element_bytes;
    t.total_bytes = t.input_bytes + t.weight_bytes + t.output_bytes;
    t.n_transfers = g * (trips.x * trips.y * trips.c * r_in + trips.c * trips.k * r_w +
                         trips.x * trips.y * trips.k * r_out);
    return t;
}

std::int64_t combine_cycles(std::int64_t compute_cycles, const TrafficBreakdown& traffic,
                            const AcceleratorConfig& cfg) {
    const std::int64_t dram_cycles =
        std::int64_t(std::ceil(double(traffic.total_bytes) / cfg.dram_bytes_per_cycle));
    return std::max(compute_cycles, dram_cycles) + traffic.n_transfers * cfg.dram_latency_cycles;
}

namespace {

std::vector<int> axis_candidates(int dim) {
    std::vector<int> out;
    for (int v = 1; v < dim; v *= 2) out.push_back(v);
    out.push_back(dim);
    return out;
}

std::array<std::array<TileAxis, 4>, 24> loop_orders() {
    std::array<std::array<TileAxis, 4>, 24> orders{};
    std::array<TileAxis, 4> axes{TileAxis::X, TileAxis::Y, TileAxis::C, TileAxis::K};
    int i = 0;
    do {
        orders[size_t(i++)] = axes;
    } while (std::next_permutation(axes.begin(), axes.end()));
    return orders;
}

}  // namespace

std::vector<TilingPlan> enumerate_plans(const ConvWork& work, const AcceleratorConfig& cfg) {
    static const auto orders = loop_orders();
    std::vector<TilingPlan> plans;
    for (int tx : axis_candidates(work.out_w))
        for (int ty : axis_candidates(work.out_h))
            for (int tc : axis_candidates(work.in_c_per_group()))
                for (int tk : axis_candidates(work.out_c_per_group())) {
                    TilingPlan base;
                    base.tile_x = tx;
                    base.tile_y = ty;
                    base.tile_c = tc;
                    base.tile_k = tk;
                    if (tile_working_set(work, base, cfg.element_bytes) > cfg.buffer_bytes) continue;
                    for (const auto& order : orders) {
                        base.loop_order = order;
                        plans.push_back(with_reload_factors(work, base));
                    }
                }
    return plans;
}

TilingResult search_tiling(const ConvWork& work, const AcceleratorConfig& cfg,
                           std::int64_t compute_cycles) {
    TilingResult result;
    if (!needs_tiling(work, cfg)) {
        result.plan = identity_plan(work);
        result.traffic = traffic(work, result.plan, cfg.element_bytes);
        result.traffic.n_transfers = 3;  // one transfer per tensor
        result.tiled = false;
        result.estimated_cycles = combine_cycles(compute_cycles, result.traffic, cfg);
        return result;
    }

    static const auto orders = loop_orders();
    bool found = false;
    std::int64_t best_cycles = 0, best_bytes = 0;
    int best_order = 0;
    for (int tx : axis_candidates(work.out_w)) {
        for (int ty : axis_candidates(work.out_h)) {
            for (int tc : axis_candidates(work.in_c_per_group())) {
                for (int tk : axis_candidates(work.out_c_per_group())) {
                    TilingPlan base;
                    base.tile_x = tx;
                    base.tile_y = ty;
                    base.tile_c = tc;
                    base.tile_k = tk;
                    if (tile_working_set(work, base, cfg.element_bytes) > cfg.buffer_bytes) continue;
                    for (int oi = 0; oi < 24; ++oi) {
                        base.loop_order = orders[size_t(oi)];
                        TilingPlan plan = with_reload_factors(work, base);
                        TrafficBreakdown t = traffic(work, plan, cfg.element_bytes);
                        std::int64_t cycles = combine_cycles(compute_cycles, t, cfg);
                        auto candidate = std::make_tuple(cycles, t.total_bytes, oi, tx, ty, tc, tk);
                        auto incumbent = std::make_tuple(best_cycles, best_bytes, best_order,
                                                         result.plan.tile_x, result.plan.tile_y,
                                                         result.plan.tile_c, result.plan.tile_k);
                        if (!found || candidate < incumbent) {
                            found = true;
                            best_cycles = cycles;
                            best_bytes = t.total_bytes;
                            best_order = oi;
                            result.plan = plan;
                            result.traffic = t;
                        }
                    }
                }
            }
        }
    }
    if (!found) {
        TilingPlan minimal;  // 1x1x1x1
        throw TilerError("no feasible tiling: buffer of " + std::to_string(cfg.buffer_bytes) +
                         " bytes is below the minimal tile working set of " +
                         std::to_string(tile_working_set(work, minimal, cfg.element_bytes)) +
                         " bytes");
    }
    result.tiled = true;
    result.estimated_cycles = best_cycles;
    return result;
}

}  // namespace sqdse
