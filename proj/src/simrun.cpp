#include "sqdse/simrun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

namespace sqdse {

using ordered_json = nlohmann::ordered_json;

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t dram_cycles_of(std::int64_t bytes, const AcceleratorConfig& cfg) {
    return std::int64_t(std::ceil(double(bytes) / cfg.dram_bytes_per_cycle));
}

std::string merge_key(const Layer& layer, const TensorShape& in_shape, const TensorShape& out) {
    std::ostringstream key;
    key << kind_name(layer.kind);
    if (const auto* conv = std::get_if<ConvAttrs>(&layer.kind))
        key << '/' << conv->kernel_h << 'x' << conv->kernel_w << "/s" << conv->stride << '/'
            << in_shape.c << ">" << conv->out_channels << "/g" << conv->groups;
    else if (const auto* pool = std::get_if<PoolAttrs>(&layer.kind))
        key << '/' << pool->kernel << "/s" << pool->stride << '/' << in_shape.c;
    else
        key << '/' << in_shape.c;
    key << '/' << out.c << 'x' << out.h << 'x' << out.w;
    return key.str();
}

struct ModeOutcome {
    CycleReport report;
    TilingResult tiling;
    std::int64_t dram_cycles = 0;
    std::int64_t total_cycles = 0;
    EnergyBreakdown energy;
};

ModeOutcome run_mode(const ConvWork& work, const AcceleratorConfig& cfg, DataflowMode mode) {
    ModeOutcome out;
    out.report = mode == DataflowMode::WS ? ws_cycles(work, cfg) : os_cycles(work, cfg);
    out.tiling = search_tiling(work, cfg, out.report.compute_cycles);
    out.report.accesses.dram_bytes = out.tiling.traffic.total_bytes;
    out.dram_cycles = dram_cycles_of(out.tiling.traffic.total_bytes, cfg);
    out.total_cycles = std::max(out.report.compute_cycles, out.dram_cycles) +
                       out.tiling.traffic.n_transfers * cfg.dram_latency_cycles;
    out.energy = energy_of(out.report.accesses, cfg.energy, cfg.element_bytes);
    return out;
}

std::int64_t tile_count(const ConvWork& work, const TilingPlan& plan) {
    return std::int64_t(work.groups) * ceil_div(work.out_w, plan.tile_x) *
           ceil_div(work.out_h, plan.tile_y) * ceil_div(work.in_c_per_group(), plan.tile_c) *
           ceil_div(work.out_c_per_group(), plan.tile_k);
}

}  // namespace

EnergyBreakdown energy_of(const AccessCounts& accesses, const EnergyCostTable& table,
                          int element_bytes) {
    EnergyBreakdown e;
    e.mac = double(accesses.macs) * table.mac;
    e.rf = double(accesses.rf_accesses) * table.rf_access;
    e.buffer = double(accesses.buffer_accesses) * table.buffer_access;
    e.dram = double(accesses.dram_bytes) / element_bytes * table.dram_access;
    return e;
}

LayerResult simulate_layer(const Layer& layer, const TensorShape& in_shape,
                           const AcceleratorConfig& cfg, ModeForce force) {
    if (!layer.out_shape)
        throw GraphError(layer.id, "output shape not inferred");
    const TensorShape out = *layer.out_shape;

    LayerResult result;
    result.id = layer.id;
    result.kind = kind_name(layer.kind);
    result.config_key = merge_key(layer, in_shape, out);

    if (const auto work = conv_work(layer, in_shape)) {
        try {
            if (force == ModeForce::WS || force == ModeForce::OS) {
                const auto mode = force == ModeForce::WS ? DataflowMode::WS : DataflowMode::OS;
                const ModeOutcome only = run_mode(*work, cfg, mode);
                result.mode = mode;
                result.tiled = only.tiling.tiled;
                result.plan = only.tiling.plan;
                result.tiles = only.tiling.tiled ? tile_count(*work, only.tiling.plan) : 1;
                result.n_transfers = only.tiling.traffic.n_transfers;
                result.compute_cycles = only.report.compute_cycles;
                result.dram_cycles = only.dram_cycles;
                result.total_cycles = only.total_cycles;
                result.accesses = only.report.accesses;
                result.energy = only.energy;
            } else {
                const ModeOutcome ws = run_mode(*work, cfg, DataflowMode::WS);
                const ModeOutcome os = run_mode(*work, cfg, DataflowMode::OS);
                const DataflowMode mode = pick_mode(ws.total_cycles, ws.energy.total(),
                                                    os.total_cycles, os.energy.total());
                const ModeOutcome& chosen = mode == DataflowMode::WS ? ws : os;
                result.mode = mode;
                result.tiled = chosen.tiling.tiled;
                result.plan = chosen.tiling.plan;
                result.tiles = chosen.tiling.tiled ? tile_count(*work, chosen.tiling.plan) : 1;
                result.n_transfers = chosen.tiling.traffic.n_transfers;
                result.compute_cycles = chosen.report.compute_cycles;
                result.dram_cycles = chosen.dram_cycles;
                result.total_cycles = chosen.total_cycles;
                result.accesses = chosen.report.accesses;
                result.energy = chosen.energy;
            }
        } catch (const TilerError& e) {
            throw TilerError("layer '" + layer.id + "': " + e.what());
        }
        result.dense_macs = work->dense_macs();
        result.efficiency =
            result.total_cycles > 0 ? double(result.dense_macs) / double(result.total_cycles) : 0.0;
        return result;
    }

    // Elementwise layers. Cycles cover the produced elements (input elements
    // for global pooling, whose reduction dominates); every touched tensor is
    // fetched from or written to DRAM once.
    result.elementwise = true;
    result.mode = DataflowMode::OS;
    std::int64_t elements = 0;
    std::int64_t tensor_elems = 0;
    std::int64_t tensors = 0;
    if (std::holds_alternative<AddAttrs>(layer.kind)) {
        // Fused with its producer: the freshly computed operand is consumed
        // on-chip, so only the skip operand read and the result write move.
        elements = out.elements();
        tensor_elems = 2 * out.elements();
        tensors = 2;
    } else if (std::holds_alternative<PoolAttrs>(layer.kind)) {
        elements = out.elements();
        tensor_elems = in_shape.elements() + out.elements();
        tensors = 2;
    } else if (std::holds_alternative<GapAttrs>(layer.kind)) {
        elements = in_shape.elements();
        tensor_elems = in_shape.elements() + out.elements();
        tensors = 2;
    } else {
        return result;  // input node: free
    }

    const CycleReport report = elementwise_report(elements, cfg);
    result.accesses = report.accesses;
    result.accesses.dram_bytes = tensor_elems * cfg.element_bytes;
    result.n_transfers = tensors;
    result.compute_cycles = report.compute_cycles;
    result.dram_cycles = dram_cycles_of(result.accesses.dram_bytes, cfg);
    result.total_cycles = std::max(result.compute_cycles, result.dram_cycles) +
                          tensors * cfg.dram_latency_cycles;
    result.energy = energy_of(result.accesses, cfg.energy, cfg.element_bytes);
    return result;
}

NetworkResult simulate_network(const LayerGraph& graph, const AcceleratorConfig& cfg,
                               ModeForce force) {
    NetworkResult net;
    net.network = graph.name;
    net.config = cfg.name;
    net.params = param_count(graph);
    for (const Layer& layer : graph.layers) {
        if (std::holds_alternative<InputAttrs>(layer.kind)) continue;
        const TensorShape in_shape = input_shape_of(graph, layer);
        LayerResult lr = simulate_layer(layer, in_shape, cfg, force);
        net.total_cycles += lr.total_cycles;
        net.total_energy += lr.energy.total();
        net.total_dense_macs += lr.dense_macs;
        net.layers.push_back(std::move(lr));
    }
    return net;
}

std::vector<CompareRow> compare(const std::vector<NetworkResult>& results) {
    std::int64_t fastest = 0;
    for (const auto& r : results)
        if (fastest == 0 || r.total_cycles < fastest) fastest = r.total_cycles;
    std::vector<CompareRow> rows;
    rows.reserve(results.size());
    for (const auto& r : results) {
        CompareRow row;
        row.name = r.network;
        row.params = r.params;
        row.dense_macs = r.total_dense_macs;
        row.total_cycles = r.total_cycles;
        row.normalized_time = fastest > 0 ? double(r.total_cycles) / double(fastest) : 0.0;
        row.total_energy = r.total_energy;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FigureSeries> figure_data(const NetworkResult& result, bool merge_same_config) {
    std::vector<FigureSeries> series;
    if (!merge_same_config) {
        for (const auto& lr : result.layers)
            series.push_back({lr.id, lr.total_cycles, lr.dense_macs, lr.efficiency});
        return series;
    }
    std::map<std::string, size_t> index;  // first-appearance order via vector
    for (const auto& lr : result.layers) {
        auto [it, inserted] = index.emplace(lr.config_key, series.size());
        if (inserted) series.push_back({lr.config_key, 0, 0, 0.0});
        FigureSeries& s = series[it->second];
        s.cycles += lr.total_cycles;
        s.dense_macs += lr.dense_macs;
    }
    for (auto& s : series)
        s.efficiency = s.cycles > 0 ? double(s.dense_macs) / double(s.cycles) : 0.0;
    return series;
}

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

const char* const kReportColumns[] = {"layer",        "kind",        "mode",
                                      "tiles",        "compute_cycles", "dram_cycles",
                                      "total_cycles", "macs",        "efficiency",
                                      "energy_total", "energy_dram", "energy_buffer",
                                      "energy_rf",    "energy_mac"};

std::vector<std::string> report_row(const LayerResult& lr) {
    return {lr.id,
            lr.kind,
            mode_name(lr.mode),
            std::to_string(lr.tiles),
            std::to_string(lr.compute_cycles),
            std::to_string(lr.dram_cycles),
            std::to_string(lr.total_cycles),
            std::to_string(lr.dense_macs),
            format_double(lr.efficiency),
            format_double(lr.energy.total()),
            format_double(lr.energy.dram),
            format_double(lr.energy.buffer),
            format_double(lr.energy.rf),
            format_double(lr.energy.mac)};
}

}  // namespace

std::string report_csv(const NetworkResult& result) {
    std::ostringstream out;
    for (size_t i = 0; i < std::size(kReportColumns); ++i)
        out << (i ? "," : "") << kReportColumns[i];
    out << '\n';
    for (const auto& lr : result.layers) {
        const auto row = report_row(lr);
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

std::string report_table(const NetworkResult& result) {
    std::vector<std::vector<std::string>> rows;
    rows.emplace_back(std::begin(kReportColumns), std::end(kReportColumns));
    for (const auto& lr : result.layers) rows.push_back(report_row(lr));

    std::vector<size_t> widths(std::size(kReportColumns), 0);
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());

    std::ostringstream out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << "  ";
            out << row[i] << std::string(widths[i] - row[i].size(), ' ');
        }
        out << '\n';
    }
    out << "total: " << result.total_cycles << " cycles, " << format_double(result.total_energy)
        << " energy, " << result.total_dense_macs << " macs, " << result.params << " params ("
        << result.network << " on " << result.config << ")\n";
    return out.str();
}

std::string report_json(const NetworkResult& result) {
    ordered_json doc;
    doc["network"] = result.network;
    doc["config"] = result.config;
    doc["total_cycles"] = result.total_cycles;
    doc["total_energy"] = result.total_energy;
    doc["total_macs"] = result.total_dense_macs;
    doc["params"] = result.params;
    doc["layers"] = ordered_json::array();
    for (const auto& lr : result.layers) {
        ordered_json j;
        j["layer"] = lr.id;
        j["kind"] = lr.kind;
        j["mode"] = mode_name(lr.mode);
        j["tiles"] = lr.tiles;
        j["compute_cycles"] = lr.compute_cycles;
        j["dram_cycles"] = lr.dram_cycles;
        j["total_cycles"] = lr.total_cycles;
        j["macs"] = lr.dense_macs;
        j["efficiency"] = lr.efficiency;
        j["energy_total"] = lr.energy.total();
        j["energy_dram"] = lr.energy.dram;
        j["energy_buffer"] = lr.energy.buffer;
        j["energy_rf"] = lr.energy.rf;
        j["energy_mac"] = lr.energy.mac;
        if (lr.tiled) {
            ordered_json plan;
            plan["tile_x"] = lr.plan.tile_x;
            plan["tile_y"] = lr.plan.tile_y;
            plan["tile_c"] = lr.plan.tile_c;
            plan["tile_k"] = lr.plan.tile_k;
            std::string order;
            for (TileAxis axis : lr.plan.loop_order) order += axis_name(axis);
            plan["loop_order"] = order;
            plan["n_transfers"] = lr.n_transfers;
            plan["dram_bytes"] = lr.accesses.dram_bytes;
            j["tiling"] = plan;
        }
        doc["layers"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::string figure_csv(const std::vector<FigureSeries>& series) {
    std::ostringstream out;
    out << "name,cycles,efficiency\n";
    for (const auto& s : series)
        out << s.name << ',' << s.cycles << ',' << format_double(s.efficiency) << '\n';
    return out.str();
}

}  // namespace sqdse
