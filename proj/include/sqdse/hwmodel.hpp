#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sqdse {

// Normalized per-access energy, one 16-bit MAC = 1.0.
struct EnergyCostTable {
    double mac = 1.0;
    double rf_access = 1.0;
    double buffer_access = 6.0;
    double dram_access = 200.0;

    bool operator==(const EnergyCostTable&) const = default;
};

struct AcceleratorConfig {
    std::string name = "custom";
    int pe_rows = 16;
    int pe_cols = 16;
    std::int64_t buffer_bytes = 131072;
    int element_bytes = 2;
    int dram_latency_cycles = 100;
    // 16 GB/s at the 1 GHz reference clock.
    double dram_bytes_per_cycle = 16.0;
    double weight_sparsity = 0.40;
    EnergyCostTable energy;

    std::int64_t pe_count() const { return std::int64_t(pe_rows) * pe_cols; }

    bool operator==(const AcceleratorConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

// "8x8_32KB" or "16x16_128KB".
AcceleratorConfig preset(const std::string& name);

// Throws ConfigError naming the offending field.
void check_config(const AcceleratorConfig& cfg);

// JSON round trip; a document may start from a `preset` base and override
// individual fields. Unknown fields are rejected.
AcceleratorConfig load_config(const std::string& document);
std::string save_config(const AcceleratorConfig& cfg);

}  // namespace sqdse
