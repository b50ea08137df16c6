#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqdse/dataflow.hpp"
#include "sqdse/hwmodel.hpp"
#include "sqdse/netir.hpp"
#include "sqdse/tiler.hpp"

namespace sqdse {

struct EnergyBreakdown {
    double mac = 0.0;
    double rf = 0.0;
    double buffer = 0.0;
    double dram = 0.0;

    double total() const { return mac + rf + buffer + dram; }
};

// energy = macs*mac + rf*rf_access + buffer*buffer_access
//        + (dram_bytes / element_bytes) * dram_access
EnergyBreakdown energy_of(const AccessCounts& accesses, const EnergyCostTable& table,
                          int element_bytes);

enum class ModeForce { Auto, WS, OS };

struct LayerResult {
    std::string id;
    std::string kind;
    DataflowMode mode = DataflowMode::WS;
    bool elementwise = false;
    bool tiled = false;
    TilingPlan plan;
    std::int64_t tiles = 1;            // inter-tile iterations (1 when untiled)
    std::int64_t n_transfers = 0;
    std::int64_t compute_cycles = 0;
    std::int64_t dram_cycles = 0;
    std::int64_t total_cycles = 0;
    std::int64_t dense_macs = 0;
    double efficiency = 0.0;           // dense macs / total cycles
    AccessCounts accesses;             // dram_bytes filled
    EnergyBreakdown energy;
    std::string config_key;            // merge key: kind/kernel/stride/Ci/Co/g/out shape
};

struct NetworkResult {
    std::string network;
    std::string config;
    std::vector<LayerResult> layers;   // topological order, input node excluded
    std::int64_t total_cycles = 0;
    double total_energy = 0.0;
    std::int64_t total_dense_macs = 0;
    std::int64_t params = 0;
};

// Conv/fc layers: both dataflow modes are tiled and timed, and the faster one
// (ties: lower energy, then WS) is kept unless `force` overrides. Pool, add
// and global-pool layers use the elementwise rule with their tensors charged
// to DRAM once. Input layers are free and produce no result.
LayerResult simulate_layer(const Layer& layer, const TensorShape& in_shape,
                           const AcceleratorConfig& cfg, ModeForce force = ModeForce::Auto);

// Requires inferred shapes. Totals are exact sums over the layer results.
NetworkResult simulate_network(const LayerGraph& graph, const AcceleratorConfig& cfg,
                               ModeForce force = ModeForce::Auto);

struct CompareRow {
    std::string name;
    std::int64_t params = 0;
    std::int64_t dense_macs = 0;
    std::int64_t total_cycles = 0;
    double normalized_time = 0.0;      // cycles / min cycles in the set
    double total_energy = 0.0;
};

// Input order is preserved; the fastest row gets normalized time 1.0.
std::vector<CompareRow> compare(const std::vector<NetworkResult>& results);

struct FigureSeries {
    std::string name;
    std::int64_t cycles = 0;
    std::int64_t dense_macs = 0;
    double efficiency = 0.0;
};

// One entry per layer, or with `merge_same_config` one entry per distinct
// layer configuration with cycles and MACs summed and efficiency recomputed
// on the merged totals. Merging preserves the cycle total exactly.
std::vector<FigureSeries> figure_data(const NetworkResult& result, bool merge_same_config);

// One header row, then one row per layer with exactly these columns:
// layer, kind, mode, tiles, compute_cycles, dram_cycles, total_cycles, macs,
// efficiency, energy_total, energy_dram, energy_buffer, energy_rf, energy_mac
std::string report_csv(const NetworkResult& result);
// Same columns, space-aligned, plus a totals footer.
std::string report_table(const NetworkResult& result);
// Full structured document mirroring NetworkResult.
std::string report_json(const NetworkResult& result);

std::string figure_csv(const std::vector<FigureSeries>& series);

}  // namespace sqdse
