#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sqdse/dataflow.hpp"
#include "sqdse/hwmodel.hpp"

namespace sqdse {

enum class TileAxis { X, Y, C, K };

const char* axis_name(TileAxis axis);

// Tile sizes for the output x/y, per-group input-channel (c) and per-group
// output-channel (k) loops, plus the inter-tile loop order (outermost first).
struct TilingPlan {
    int tile_x = 1, tile_y = 1, tile_c = 1, tile_k = 1;
    std::array<TileAxis, 4> loop_order{TileAxis::X, TileAxis::Y, TileAxis::C, TileAxis::K};
    std::int64_t input_reload = 1, weight_reload = 1, output_reload = 1;

    bool operator==(const TilingPlan&) const = default;
};

struct TrafficBreakdown {
    std::int64_t input_bytes = 0;
    std::int64_t weight_bytes = 0;
    std::int64_t output_bytes = 0;
    std::int64_t total_bytes = 0;
    std::int64_t n_transfers = 0;
};

class TilerError : public std::runtime_error {
public:
    explicit TilerError(const std::string& message) : std::runtime_error(message) {}
};

// Whole-layer working set: input + weights + output, in bytes.
std::int64_t footprint(const ConvWork& work, int element_bytes);

bool needs_tiling(const ConvWork& work, const AcceleratorConfig& cfg);

// Buffer bytes needed by one tile (input halo included), per group.
std::int64_t tile_working_set(const ConvWork& work, const TilingPlan& plan, int element_bytes);

// Deterministic traffic for a plan via the stationarity rule: a tensor is
// re-fetched once per iteration of every inter-tile loop that sits outside
// its innermost dependent loop and on which it does not depend (input
// depends on x,y,c; weights on c,k; output on x,y,k).
TrafficBreakdown traffic(const ConvWork& work, const TilingPlan& plan, int element_bytes);

// Fills the reload factors of `plan` from its loop order; returns the plan.
TilingPlan with_reload_factors(const ConvWork& work, TilingPlan plan);

// Identity (single-tile) plan with compulsory traffic and 3 transfers.
TilingPlan identity_plan(const ConvWork& work);

struct TilingResult {
    TilingPlan plan;
    TrafficBreakdown traffic;
    bool tiled = false;
    std::int64_t estimated_cycles = 0;
};

// All buffer-feasible candidate plans (power-of-two tile extents plus the
// full extent per axis, times the 24 inter-tile loop orders). Exposed for
// the exhaustive optimality checks in the tests.
std::vector<TilingPlan> enumerate_plans(const ConvWork& work, const AcceleratorConfig& cfg);

// Lexicographic argmin over (estimated layer cycles, DRAM bytes, plan
// encoding); `compute_cycles` is the dataflow compute time of the chosen
// mode. Layers that fit the buffer get the identity plan.
TilingResult search_tiling(const ConvWork& work, const AcceleratorConfig& cfg,
                           std::int64_t compute_cycles);

// The per-layer time combiner shared with the simulation driver.
std::int64_t combine_cycles(std::int64_t compute_cycles, const TrafficBreakdown& traffic,
                            const AcceleratorConfig& cfg);

}  // namespace sqdse
