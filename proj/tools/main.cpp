#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqdse/netir.hpp"
#include "sqdse/simrun.hpp"
#include "sqdse/zoo.hpp"

namespace {

using namespace sqdse;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitModelError = 1;
constexpr int kExitUsageError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// A selector is either a catalog name or a path to a network file.
LayerGraph resolve_network(const std::string& selector) {
    if (std::filesystem::exists(selector)) return from_text(read_file(selector));
    try {
        return build_variant(selector);
    } catch (const ZooError&) {
        throw UsageError("unknown network '" + selector + "'");
    }
}

struct ConfigFlags {
    std::string selector = "16x16_128KB";
    std::optional<double> sparsity;
};

AcceleratorConfig resolve_config(const ConfigFlags& flags) {
    AcceleratorConfig cfg;
    if (std::filesystem::exists(flags.selector))
        cfg = load_config(read_file(flags.selector));
    else
        cfg = preset(flags.selector);
    if (flags.sparsity) cfg.weight_sparsity = *flags.sparsity;
    check_config(cfg);
    return cfg;
}

ModeForce parse_mode(const std::string& mode) {
    if (mode == "auto") return ModeForce::Auto;
    if (mode == "ws") return ModeForce::WS;
    if (mode == "os") return ModeForce::OS;
    throw UsageError("unknown mode '" + mode + "' (expected ws, os or auto)");
}

std::string format_count(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

int cmd_list(const std::string& format, const std::string& output) {
    std::string text;
    if (format == "table") {
        text = catalog_to_text();
    } else if (format == "csv") {
        std::ostringstream out;
        out << "name,description,expected_params,expected_macs,source\n";
        for (const auto& e : catalog())
            out << e.name << ',' << e.description << ',' << std::int64_t(e.expected_params) << ','
                << std::int64_t(e.expected_macs) << ',' << e.source_table << '\n';
        text = out.str();
    } else {
        ordered_json doc = ordered_json::array();
        for (const auto& e : catalog()) {
            ordered_json j;
            j["name"] = e.name;
            j["description"] = e.description;
            j["expected_params"] = std::int64_t(e.expected_params);
            j["expected_macs"] = std::int64_t(e.expected_macs);
            j["source"] = e.source_table;
            doc.push_back(std::move(j));
        }
        text = doc.dump(2) + "\n";
    }
    write_output(output, text);
    return kExitOk;
}

int cmd_describe(const std::string& net, const std::string& format, const std::string& output) {
    LayerGraph graph = infer_shapes(resolve_network(net));
    const auto costs = per_layer_costs(graph);

    if (format == "json") {
        ordered_json doc;
        doc["network"] = graph.name;
        doc["params"] = param_count(graph);
        doc["macs"] = mac_count(graph);
        doc["layers"] = ordered_json::array();
        for (size_t i = 0; i < graph.layers.size(); ++i) {
            const Layer& layer = graph.layers[i];
            ordered_json j;
            j["layer"] = layer.id;
            j["kind"] = kind_name(layer.kind);
            j["out_shape"] = {layer.out_shape->c, layer.out_shape->h, layer.out_shape->w};
            j["params"] = costs[i].params;
            j["macs"] = costs[i].macs;
            doc["layers"].push_back(std::move(j));
        }
        write_output(output, doc.dump(2) + "\n");
        return kExitOk;
    }

    const char sep = format == "csv" ? ',' : '\t';
    std::ostringstream out;
    out << "layer" << sep << "kind" << sep << "out_shape" << sep << "params" << sep << "macs\n";
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const Layer& layer = graph.layers[i];
        const TensorShape s = *layer.out_shape;
        out << layer.id << sep << kind_name(layer.kind) << sep << s.c << 'x' << s.h << 'x' << s.w
            << sep << costs[i].params << sep << costs[i].macs << '\n';
    }
    if (format != "csv")
        out << "total: " << param_count(graph) << " params, " << mac_count(graph) << " macs ("
            << graph.name << ")\n";
    write_output(output, out.str());
    return kExitOk;
}

int cmd_simulate(const std::string& net, const ConfigFlags& cfg_flags, const std::string& mode,
                 bool verbose_tiling, const std::string& format, const std::string& output,
                 const std::string& figure_path) {
    LayerGraph graph = infer_shapes(resolve_network(net));
    const AcceleratorConfig cfg = resolve_config(cfg_flags);
    const NetworkResult result = simulate_network(graph, cfg, parse_mode(mode));

    std::string text;
    if (format == "csv")
        text = report_csv(result);
    else if (format == "json")
        text = report_json(result);
    else
        text = report_table(result);
    if (verbose_tiling && format == "table") {
        std::ostringstream extra;
        for (const auto& lr : result.layers) {
            if (!lr.tiled) continue;
            std::string order;
            for (TileAxis axis : lr.plan.loop_order) order += axis_name(axis);
            extra << lr.id << ": tile " << lr.plan.tile_x << 'x' << lr.plan.tile_y << " c"
                  << lr.plan.tile_c << " k" << lr.plan.tile_k << " order " << order << " reload i"
                  << lr.plan.input_reload << " w" << lr.plan.weight_reload << " o"
                  << lr.plan.output_reload << ", " << lr.n_transfers << " transfers, "
                  << lr.accesses.dram_bytes << " bytes\n";
        }
        text += extra.str();
    }
    write_output(output, text);
    if (!figure_path.empty())
        write_output(figure_path, figure_csv(figure_data(result, true)));
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& nets, const ConfigFlags& cfg_flags,
                const std::string& format, const std::string& output) {
    const AcceleratorConfig cfg = resolve_config(cfg_flags);
    std::vector<NetworkResult> results;
    for (const auto& net : nets)
        results.push_back(simulate_network(infer_shapes(resolve_network(net)), cfg));
    const auto rows = compare(results);

    std::string text;
    if (format == "json") {
        ordered_json doc = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json j;
            j["name"] = row.name;
            j["params"] = row.params;
            j["macs"] = row.dense_macs;
            j["total_cycles"] = row.total_cycles;
            j["normalized_time"] = row.normalized_time;
            j["total_energy"] = row.total_energy;
            doc.push_back(std::move(j));
        }
        text = doc.dump(2) + "\n";
    } else {
        const char sep = format == "csv" ? ',' : '\t';
        std::ostringstream out;
        out << "name" << sep << "params" << sep << "macs" << sep << "total_cycles" << sep
            << "normalized_time" << sep << "total_energy\n";
        for (const auto& row : rows) {
            std::ostringstream norm;
            norm.setf(std::ios::fixed);
            norm.precision(2);
            norm << row.normalized_time;
            out << row.name << sep << row.params << sep << row.dense_macs << sep
                << row.total_cycles << sep << norm.str() << sep << format_count(row.total_energy)
                << '\n';
        }
        text = out.str();
    }
    write_output(output, text);
    return kExitOk;
}

int cmd_sweep(const std::string& net, const std::vector<std::string>& pe_list,
              const std::vector<std::int64_t>& buffer_list, const std::vector<double>& sparsities,
              const ConfigFlags& cfg_flags, const std::string& format, const std::string& output) {
    LayerGraph graph = infer_shapes(resolve_network(net));
    const AcceleratorConfig base = resolve_config(cfg_flags);

    struct GridPoint {
        int pe_rows, pe_cols;
        std::int64_t buffer;
        double sparsity;
    };
    std::vector<GridPoint> grid;
    auto parse_pe = [](const std::string& s) {
        const auto x = s.find('x');
        if (x == std::string::npos) throw UsageError("bad PE geometry '" + s + "' (expected RxC)");
        return std::pair<int, int>{std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    };
    const std::vector<std::string> pes = pe_list.empty()
        ? std::vector<std::string>{std::to_string(base.pe_rows) + "x" + std::to_string(base.pe_cols)}
        : pe_list;
    const std::vector<std::int64_t> buffers =
        buffer_list.empty() ? std::vector<std::int64_t>{base.buffer_bytes} : buffer_list;
    const std::vector<double> sp =
        sparsities.empty() ? std::vector<double>{base.weight_sparsity} : sparsities;
    for (const auto& pe : pes)
        for (std::int64_t buf : buffers)
            for (double s : sp) {
                auto [r, c] = parse_pe(pe);
                grid.push_back({r, c, buf, s});
            }

    std::vector<NetworkResult> results(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        AcceleratorConfig cfg = base;
        cfg.pe_rows = grid[i].pe_rows;
        cfg.pe_cols = grid[i].pe_cols;
        cfg.buffer_bytes = grid[i].buffer;
        cfg.weight_sparsity = grid[i].sparsity;
        cfg.name = std::to_string(cfg.pe_rows) + "x" + std::to_string(cfg.pe_cols) + "_" +
                   std::to_string(cfg.buffer_bytes) + "B";
        check_config(cfg);
        results[i] = simulate_network(graph, cfg);
    }

    std::string text;
    if (format == "json") {
        ordered_json doc = ordered_json::array();
        for (size_t i = 0; i < grid.size(); ++i) {
            ordered_json j;
            j["pe"] = std::to_string(grid[i].pe_rows) + "x" + std::to_string(grid[i].pe_cols);
            j["buffer_bytes"] = grid[i].buffer;
            j["sparsity"] = grid[i].sparsity;
            j["total_cycles"] = results[i].total_cycles;
            j["total_energy"] = results[i].total_energy;
            j["macs"] = results[i].total_dense_macs;
            j["params"] = results[i].params;
            doc.push_back(std::move(j));
        }
        text = doc.dump(2) + "\n";
    } else {
        const char sep = format == "csv" ? ',' : '\t';
        std::ostringstream out;
        out << "pe" << sep << "buffer_bytes" << sep << "sparsity" << sep << "total_cycles" << sep
            << "total_energy" << sep << "macs" << sep << "params\n";
        for (size_t i = 0; i < grid.size(); ++i)
            out << grid[i].pe_rows << 'x' << grid[i].pe_cols << sep << grid[i].buffer << sep
                << grid[i].sparsity << sep << results[i].total_cycles << sep
                << format_count(results[i].total_energy) << sep << results[i].total_dense_macs
                << sep << results[i].params << '\n';
        text = out.str();
    }
    write_output(output, text);
    return kExitOk;
}

int cmd_export(const std::string& net, const std::string& path) {
    const LayerGraph graph = resolve_network(net);
    write_output(path, to_text(graph));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SqueezeNext design-space exploration toolkit"};
    app.require_subcommand(1);

    std::string format = "table";
    std::string output;
    ConfigFlags cfg_flags;

    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "Output format")
            ->check(CLI::IsMember({"table", "csv", "json"}));
        cmd->add_option("--output,-o", output, "Output path (default: stdout)");
    };
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", cfg_flags.selector, "Preset name or config file path");
        cmd->add_option("--sparsity", cfg_flags.sparsity, "Weight sparsity override")
            ->check(CLI::Range(0.0, 0.9999));
    };

    auto* list_cmd = app.add_subcommand("list", "List the built-in network catalog");
    add_format(list_cmd);

    std::string net;
    auto* describe_cmd = app.add_subcommand("describe", "Per-layer shapes, parameters and MACs");
    describe_cmd->add_option("network", net, "Catalog name or network file")->required();
    add_format(describe_cmd);

    std::string mode = "auto";
    bool verbose_tiling = false;
    std::string figure_path;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a network on an accelerator");
    simulate_cmd->add_option("network", net, "Catalog name or network file")->required();
    simulate_cmd->add_option("--mode", mode, "Force a dataflow mode")
        ->check(CLI::IsMember({"ws", "os", "auto"}));
    simulate_cmd->add_flag("--verbose-tiling", verbose_tiling, "Print per-layer tiling plans");
    simulate_cmd->add_option("--figure-data", figure_path,
                             "Write merged per-layer cycle/efficiency series to this path");
    add_config(simulate_cmd);
    add_format(simulate_cmd);

    std::vector<std::string> nets;
    auto* compare_cmd = app.add_subcommand("compare", "Compare networks on one accelerator");
    compare_cmd->add_option("networks", nets, "Catalog names or network files")->required();
    add_config(compare_cmd);
    add_format(compare_cmd);

    std::vector<std::string> pe_list;
    std::vector<std::int64_t> buffer_list;
    std::vector<double> sparsity_list;
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a grid of accelerator configurations");
    sweep_cmd->add_option("network", net, "Catalog name or network file")->required();
    sweep_cmd->add_option("--pe", pe_list, "PE geometries, e.g. 8x8 16x16")->delimiter(',');
    sweep_cmd->add_option("--buffer", buffer_list, "Buffer sizes in bytes")->delimiter(',');
    sweep_cmd->add_option("--sparsity-list", sparsity_list, "Weight sparsity values")
        ->delimiter(',');
    add_config(sweep_cmd);
    add_format(sweep_cmd);

    auto* export_cmd = app.add_subcommand("export", "Write a catalog network to a file");
    export_cmd->add_option("network", net, "Catalog name or network file")->required();
    export_cmd->add_option("--output,-o", output, "Output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsageError;
    }

    try {
        if (list_cmd->parsed()) return cmd_list(format, output);
        if (describe_cmd->parsed()) return cmd_describe(net, format, output);
        if (simulate_cmd->parsed())
            return cmd_simulate(net, cfg_flags, mode, verbose_tiling, format, output, figure_path);
        if (compare_cmd->parsed()) return cmd_compare(nets, cfg_flags, format, output);
        if (sweep_cmd->parsed())
            return cmd_sweep(net, pe_list, buffer_list, sparsity_list, cfg_flags, format, output);
        if (export_cmd->parsed()) return cmd_export(net, output);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModelError;
    }
    return kExitUsageError;
}
