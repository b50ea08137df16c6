#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sqdse/hwmodel.hpp"
#include "sqdse/netir.hpp"

namespace sqdse {

enum class DataflowMode { WS, OS };

const char* mode_name(DataflowMode mode);

struct AccessCounts {
    std::int64_t macs = 0;             // executed MACs (sparsity-reduced in OS)
    std::int64_t rf_accesses = 0;
    std::int64_t buffer_accesses = 0;
    std::int64_t dram_bytes = 0;       // filled by the tiler / simulation driver
    std::int64_t elementwise_ops = 0;
};

struct CycleReport {
    DataflowMode mode = DataflowMode::WS;
    std::int64_t compute_cycles = 0;
    AccessCounts accesses;
    double utilized_pes = 0.0;
};

// Normalized convolution geometry; FC layers map to a 1x1 convolution over a
// 1x1 spatial extent with the flattened input as channels.
struct ConvWork {
    int kernel_h = 1, kernel_w = 1;
    int stride = 1, pad_h = 0, pad_w = 0;
    int in_c = 0, in_h = 0, in_w = 0;
    int out_c = 0, out_h = 0, out_w = 0;
    int groups = 1;

    int in_c_per_group() const { return in_c / groups; }
    int out_c_per_group() const { return out_c / groups; }
    std::int64_t weight_count() const {
        return std::int64_t(kernel_h) * kernel_w * in_c_per_group() * out_c;
    }
    std::int64_t dense_macs() const {
        return std::int64_t(out_h) * out_w * kernel_h * kernel_w * in_c_per_group() * out_c;
    }
};

// Empty for non-conv/fc layers. Requires the layer's output shape.
std::optional<ConvWork> conv_work(const Layer& layer, const TensorShape& in_shape);

class DataflowError : public std::runtime_error {
public:
    explicit DataflowError(const std::string& message) : std::runtime_error(message) {}
};

// Weight-stationary: the array holds a Pr x Pc weight sub-matrix (rows:
// input channels, cols: output channels) and streams activation vectors.
// Dense; sparsity is not exploited.
CycleReport ws_cycles(const ConvWork& work, const AcceleratorConfig& cfg);

// Output-stationary (single output channel, multiple output pixels): the
// array pins a Pr x Pc output block and streams weights, skipping zeros.
CycleReport os_cycles(const ConvWork& work, const AcceleratorConfig& cfg);

// Pool/add/global-pool cycle rule: ceil(elements / PE count), 2 buffer
// accesses per element, zero MACs.
CycleReport elementwise_report(std::int64_t elements, const AcceleratorConfig& cfg);

// Per-weight 0/1 mask indexed [group][out_c_in_group][in_c_in_group][kh][kw].
using WeightMask = std::vector<std::uint8_t>;

WeightMask dense_mask(const ConvWork& work);
// Zeroes floor(n * sparsity) of the n weights feeding each output channel,
// so per-channel nonzeros equal ceil(n * (1 - sparsity)) exactly.
WeightMask sparsity_mask(const ConvWork& work, double sparsity);

// Literal loop-nest enumeration of the selected schedule, one cycle per PE
// array step; OS skips masked-out weights. Dense-mask results must equal the
// analytic formulas exactly. Guarded to small layers (<= 1e7 dense MACs).
std::int64_t oracle_cycles(const ConvWork& work, const AcceleratorConfig& cfg, DataflowMode mode,
                           const WeightMask& mask);

// Faster-mode selection over full per-layer totals; ties prefer lower energy,
// then WS.
DataflowMode pick_mode(std::int64_t ws_total_cycles, double ws_energy, std::int64_t os_total_cycles,
                       double os_energy);

}  // namespace sqdse
