#pragma once

#include <array>
#include <string>
#include <vector>

#include "sqdse/netir.hpp"

namespace sqdse {

// Parameterization of the SqueezeNext family. Width multiplier scales the
// four stage widths and the pre-classifier bottleneck; the stem convolution
// keeps its 64 output channels at every width.
struct SqueezeNextSpec {
    double width_mult = 1.0;
    std::array<int, 4> depth_dist{6, 6, 8, 1};
    int conv1_kernel = 7;            // 7 or 5
    int conv1_stride = 2;
    int group_size = 1;              // 1 or 2, applied to block-internal 1x1 convs
    std::array<int, 4> stage_widths{32, 64, 128, 256};
    int conv1_channels = 64;
    int fc_bottleneck_base = 128;    // scaled by width_mult
    int num_classes = 1000;
};

class ZooError : public std::runtime_error {
public:
    explicit ZooError(const std::string& message) : std::runtime_error(message) {}
};

LayerGraph build_squeezenext(const SqueezeNextSpec& spec);

// Baseline comparison networks, built from their published layer tables.
LayerGraph build_alexnet();
LayerGraph build_squeezenet_v10();
LayerGraph build_squeezenet_v11();
LayerGraph build_mobilenet();

// Closed catalog dispatch; throws ZooError for unknown names.
LayerGraph build_variant(const std::string& name);

struct CatalogEntry {
    std::string name;
    std::string description;
    double expected_params;   // published count, 0 when unpublished
    double expected_macs;     // published count, 0 when unpublished
    std::string source_table;
};

const std::vector<CatalogEntry>& catalog();
std::string catalog_to_text();

}  // namespace sqdse
