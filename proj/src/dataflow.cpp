#include "sqdse/dataflow.hpp"

#include <algorithm>
#include <cmath>

namespace sqdse {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

const char* mode_name(DataflowMode mode) { return mode == DataflowMode::WS ? "ws" : "os"; }

std::optional<ConvWork> conv_work(const Layer& layer, const TensorShape& in_shape) {
    ConvWork work;
    if (const auto* conv = std::get_if<ConvAttrs>(&layer.kind)) {
        work.kernel_h = conv->kernel_h;
        work.kernel_w = conv->kernel_w;
        work.stride = conv->stride;
        work.pad_h = conv->pad_h;
        work.pad_w = conv->pad_w;
        work.in_c = in_shape.c;
        work.in_h = in_shape.h;
        work.in_w = in_shape.w;
        work.out_c = conv->out_channels;
        work.out_h = (in_shape.h + 2 * conv->pad_h - conv->kernel_h) / conv->stride + 1;
        work.out_w = (in_shape.w + 2 * conv->pad_w - conv->kernel_w) / conv->stride + 1;
        work.groups = conv->groups;
        return work;
    }
    if (const auto* fc = std::get_if<FcAttrs>(&layer.kind)) {
        work.in_c = int(in_shape.elements());
        work.in_h = work.in_w = 1;
        work.out_c = fc->out_features;
        work.out_h = work.out_w = 1;
        return work;
    }
    return std::nullopt;
}

CycleReport ws_cycles(const ConvWork& work, const AcceleratorConfig& cfg) {
    const std::int64_t cig = work.in_c_per_group();
    const std::int64_t cog = work.out_c_per_group();
    const std::int64_t spatial = std::int64_t(work.out_h) * work.out_w;
    const std::int64_t per_group = std::int64_t(work.kernel_h) * work.kernel_w *
                                   ceil_div(cig, cfg.pe_rows) * ceil_div(cog, cfg.pe_cols) * spatial;

    CycleReport report;
    report.mode = DataflowMode::WS;
    report.compute_cycles = work.groups * per_group;
    report.accesses.macs = work.dense_macs();
    report.accesses.rf_accesses = 3 * report.accesses.macs;
    const std::int64_t weight_reads = work.weight_count();
    const std::int64_t input_reads = report.compute_cycles * std::min<std::int64_t>(cfg.pe_rows, cig);
    const std::int64_t psum_pairs = report.compute_cycles * std::min<std::int64_t>(cfg.pe_cols, cog);
    report.accesses.buffer_accesses = weight_reads + input_reads + 2 * psum_pairs;
    report.utilized_pes =
        double(report.accesses.macs) / (double(report.compute_cycles) * cfg.pe_count());
    return report;
}

CycleReport os_cycles(const ConvWork& work, const AcceleratorConfig& cfg) {
    const std::int64_t cig = work.in_c_per_group();
    const std::int64_t weights_per_channel = std::int64_t(work.kernel_h) * work.kernel_w * cig;
    const std::int64_t inner =
        std::int64_t(std::ceil(double(weights_per_channel) * (1.0 - cfg.weight_sparsity)));
    const std::int64_t tiles = ceil_div(work.out_h, cfg.pe_rows) * ceil_div(work.out_w, cfg.pe_cols);

    CycleReport report;
    report.mode = DataflowMode::OS;
    report.compute_cycles = std::int64_t(work.out_c) * tiles * inner;
    report.accesses.macs =
        std::int64_t(std::llround(double(work.dense_macs()) * (1.0 - cfg.weight_sparsity)));
    report.accesses.rf_accesses = 3 * report.accesses.macs;
    const std::int64_t out_elems = std::int64_t(work.out_h) * work.out_w * work.out_c;
    const std::int64_t input_reads = out_elems * inner;  // one read per active PE per cycle
    const std::int64_t weight_reads = report.compute_cycles;  // one broadcast per cycle
    report.accesses.buffer_accesses = input_reads + weight_reads + out_elems;
    report.utilized_pes =
        double(report.accesses.macs) / (double(report.compute_cycles) * cfg.pe_count());
    return report;
}

CycleReport elementwise_report(std::int64_t elements, const AcceleratorConfig& cfg) {
    CycleReport report;
    report.mode = DataflowMode::OS;
    report.compute_cycles = elements == 0 ? 0 : ceil_div(elements, cfg.pe_count());
    report.accesses.buffer_accesses = 2 * elements;
    report.accesses.elementwise_ops = elements;
    return report;
}

WeightMask dense_mask(const ConvWork& work) {
    return WeightMask(size_t(work.weight_count()), 1);
}

WeightMask sparsity_mask(const ConvWork& work, double sparsity) {
    WeightMask mask(size_t(work.weight_count()), 1);
    const std::int64_t per_channel = std::int64_t(work.kernel_h) * work.kernel_w * work.in_c_per_group();
    const std::int64_t zeros = std::int64_t(per_channel * sparsity);
    for (int co = 0; co < work.out_c; ++co)
        for (std::int64_t i = 0; i < zeros; ++i) mask[size_t(co * per_channel + i)] = 0;
    return mask;
}

std::int64_t oracle_cycles(const ConvWork& work, const AcceleratorConfig& cfg, DataflowMode mode,
                           const WeightMask& mask) {
    if (work.dense_macs() > 10'000'000)
        throw DataflowError("oracle size guard exceeded (dense MACs > 1e7)");
    if (std::int64_t(mask.size()) != work.weight_count())
        throw DataflowError("weight mask size mismatch");

    const int cig = work.in_c_per_group();
    const int cog = work.out_c_per_group();
    std::int64_t cycles = 0;

    if (mode == DataflowMode::WS) {
        // Array holds one Pr x Pc weight sub-matrix per kernel position and
        // streams every output pixel through it.
        const std::int64_t col_tiles = ceil_div(cog, cfg.pe_cols);
        const std::int64_t row_tiles = ceil_div(cig, cfg.pe_rows);
        for (int g = 0; g < work.groups; ++g)
            for (std::int64_t kt = 0; kt < col_tiles; ++kt)
                for (std::int64_t ct = 0; ct < row_tiles; ++ct)
                    for (int i = 0; i < work.kernel_h; ++i)
                        for (int j = 0; j < work.kernel_w; ++j)
                            for (int y = 0; y < work.out_h; ++y)
                                for (int x = 0; x < work.out_w; ++x) ++cycles;
        return cycles;
    }

    // OS / SOC-MOP: one Pr x Pc output block per pass, one output channel at a
    // time, one nonzero weight broadcast per cycle.
    const std::int64_t per_channel = std::int64_t(work.kernel_h) * work.kernel_w * cig;
    for (int g = 0; g < work.groups; ++g) {
        for (int co = 0; co < cog; ++co) {
            const std::int64_t base = (std::int64_t(g) * cog + co) * per_channel;
            for (int y0 = 0; y0 < work.out_h; y0 += cfg.pe_rows) {
                for (int x0 = 0; x0 < work.out_w; x0 += cfg.pe_cols) {
                    for (std::int64_t widx = 0; widx < per_channel; ++widx)
                        if (mask[size_t(base + widx)]) ++cycles;
                }
            }
        }
    }
    return cycles;
}

DataflowMode pick_mode(std::int64_t ws_total_cycles, double ws_energy, std::int64_t os_total_cycles,
                       double os_energy) {
    if (ws_total_cycles != os_total_cycles)
        return ws_total_cycles < os_total_cycles ? DataflowMode::WS : DataflowMode::OS;
    if (ws_energy != os_energy) return ws_energy < os_energy ? DataflowMode::WS : DataflowMode::OS;
    return DataflowMode::WS;
}

}  // namespace sqdse
