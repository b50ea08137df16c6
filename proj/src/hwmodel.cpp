#include "sqdse/hwmodel.hpp"

#include <set>

#include <json.hpp>

namespace sqdse {

using ordered_json = nlohmann::ordered_json;

AcceleratorConfig preset(const std::string& name) {
    AcceleratorConfig cfg;
    cfg.name = name;
    if (name == "16x16_128KB") {
        cfg.pe_rows = 16;
        cfg.pe_cols = 16;
        cfg.buffer_bytes = 131072;
    } else if (name == "8x8_32KB") {
        cfg.pe_rows = 8;
        cfg.pe_cols = 8;
        cfg.buffer_bytes = 32768;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return cfg;
}

void check_config(const AcceleratorConfig& cfg) {
    if (cfg.pe_rows < 1) throw ConfigError("pe_rows out of range");
    if (cfg.pe_cols < 1) throw ConfigError("pe_cols out of range");
    if (cfg.element_bytes < 1) throw ConfigError("element_bytes out of range");
    if (cfg.buffer_bytes < cfg.element_bytes) throw ConfigError("buffer_bytes out of range");
    if (cfg.dram_latency_cycles < 0) throw ConfigError("dram_latency_cycles out of range");
    if (cfg.dram_bytes_per_cycle <= 0) throw ConfigError("dram_bytes_per_cycle out of range");
    if (cfg.weight_sparsity < 0.0 || cfg.weight_sparsity >= 1.0)
        throw ConfigError("weight_sparsity out of range [0,1)");
    if (cfg.energy.mac <= 0 || cfg.energy.rf_access <= 0) throw ConfigError("energy cost out of range");
    if (cfg.energy.buffer_access <= 0 || cfg.energy.dram_access <= cfg.energy.buffer_access)
        throw ConfigError("energy costs must satisfy dram_access > buffer_access > 0");
}

namespace {

void reject_unknown(const ordered_json& obj, const std::set<std::string>& allowed,
                    const std::string& context) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError(context + ": unknown field '" + item.key() + "'");
}

}  // namespace

AcceleratorConfig load_config(const std::string& document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be an object");
    reject_unknown(doc,
                   {"preset", "name", "pe_rows", "pe_cols", "buffer_bytes", "element_bytes",
                    "dram_latency_cycles", "dram_bytes_per_cycle", "weight_sparsity", "energy"},
                   "config");

    AcceleratorConfig cfg;
    if (doc.contains("preset")) cfg = preset(doc.at("preset").get<std::string>());
    if (doc.contains("name")) cfg.name = doc.at("name").get<std::string>();
    if (doc.contains("pe_rows")) cfg.pe_rows = doc.at("pe_rows").get<int>();
    if (doc.contains("pe_cols")) cfg.pe_cols = doc.at("pe_cols").get<int>();
    if (doc.contains("buffer_bytes")) cfg.buffer_bytes = doc.at("buffer_bytes").get<std::int64_t>();
    if (doc.contains("element_bytes")) cfg.element_bytes = doc.at("element_bytes").get<int>();
    if (doc.contains("dram_latency_cycles"))
        cfg.dram_latency_cycles = doc.at("dram_latency_cycles").get<int>();
    if (doc.contains("dram_bytes_per_cycle"))
        cfg.dram_bytes_per_cycle = doc.at("dram_bytes_per_cycle").get<double>();
    if (doc.contains("weight_sparsity")) cfg.weight_sparsity = doc.at("weight_sparsity").get<double>();
    if (doc.contains("energy")) {
        const auto& e = doc.at("energy");
        reject_unknown(e, {"mac", "rf_access", "buffer_access", "dram_access"}, "energy");
        if (e.contains("mac")) cfg.energy.mac = e.at("mac").get<double>();
        if (e.contains("rf_access")) cfg.energy.rf_access = e.at("rf_access").get<double>();
        if (e.contains("buffer_access")) cfg.energy.buffer_access = e.at("buffer_access").get<double>();
        if (e.contains("dram_access")) cfg.energy.dram_access = e.at("dram_access").get<double>();
    }
    check_config(cfg);
    return cfg;
}

std::string save_config(const AcceleratorConfig& cfg) {
    ordered_json doc;
    doc["name"] = cfg.name;
    doc["pe_rows"] = cfg.pe_rows;
    doc["pe_cols"] = cfg.pe_cols;
    doc["buffer_bytes"] = cfg.buffer_bytes;
    doc["element_bytes"] = cfg.element_bytes;
    doc["dram_latency_cycles"] = cfg.dram_latency_cycles;
    doc["dram_bytes_per_cycle"] = cfg.dram_bytes_per_cycle;
    doc["weight_sparsity"] = cfg.weight_sparsity;
    doc["energy"] = {{"mac", cfg.energy.mac},
                     {"rf_access", cfg.energy.rf_access},
                     {"buffer_access", cfg.energy.buffer_access},
                     {"dram_access", cfg.energy.dram_access}};
    return doc.dump(2) + "\n";
}

}  // namespace sqdse
