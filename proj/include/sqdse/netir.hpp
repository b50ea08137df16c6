#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sqdse {

// Batch is fixed at 1 everywhere; a shape is channels x height x width.
struct TensorShape {
    int c = 0;
    int h = 0;
    int w = 0;

    std::int64_t elements() const { return std::int64_t(c) * h * w; }
    bool operator==(const TensorShape&) const = default;
};

enum class PoolKind { Max, Avg };

struct InputAttrs {
    bool operator==(const InputAttrs&) const = default;
};

struct ConvAttrs {
    int kernel_h = 1;
    int kernel_w = 1;
    int stride = 1;
    int pad_h = 0;
    int pad_w = 0;
    int out_channels = 0;
    int groups = 1;
    bool bias = false;
    bool batchnorm = false;
    bool relu = false;

    bool operator==(const ConvAttrs&) const = default;
};

struct FcAttrs {
    int out_features = 0;
    bool bias = true;

    bool operator==(const FcAttrs&) const = default;
};

struct PoolAttrs {
    PoolKind kind = PoolKind::Max;
    int kernel = 2;
    int stride = 2;
    int pad = 0;

    bool operator==(const PoolAttrs&) const = default;
};

struct GapAttrs {
    bool operator==(const GapAttrs&) const = default;
};

struct AddAttrs {
    bool operator==(const AddAttrs&) const = default;
};

using LayerKind = std::variant<InputAttrs, ConvAttrs, FcAttrs, PoolAttrs, GapAttrs, AddAttrs>;

// "input", "conv", "fc", "pool", "gap" or "add".
const char* kind_name(const LayerKind& kind);

struct Layer {
    std::string id;
    LayerKind kind;
    std::vector<std::string> inputs;          // predecessor ids
    std::optional<TensorShape> out_shape;     // filled by infer_shapes

    bool structurally_equal(const Layer& other) const {
        return id == other.id && kind == other.kind && inputs == other.inputs;
    }
};

class GraphError : public std::runtime_error {
public:
    GraphError(std::string node_id, const std::string& message)
        : std::runtime_error("node '" + node_id + "': " + message), node(std::move(node_id)) {}

    const std::string node;
};

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& message) : std::runtime_error(message) {}
};

struct Diagnostic {
    std::string node;
    std::string message;
};

struct LayerGraph {
    std::string name;
    TensorShape input_shape;
    std::vector<Layer> layers;   // topological order

    const Layer* find(const std::string& id) const;
    int index_of(const std::string& id) const;   // -1 if absent

    bool structurally_equal(const LayerGraph& other) const;
};

// Per-layer accounting. `elementwise` counts elements touched by pool/add/gap
// layers (zero MACs); convs and FCs leave it zero.
struct LayerCost {
    std::int64_t params = 0;
    std::int64_t macs = 0;
    std::int64_t elementwise = 0;
};

// Shape of the tensor feeding `layer` (its first predecessor's output, or the
// graph input for the input node). Requires shapes inferred for predecessors.
TensorShape input_shape_of(const LayerGraph& graph, const Layer& layer);

// Annotates every node with its output shape. Throws GraphError on the first
// structural or arithmetic problem (bad predecessor, mismatched add operands,
// non-positive output dimension, group divisibility).
LayerGraph infer_shapes(LayerGraph graph);

// Non-throwing structural check; empty result iff all graph invariants hold.
std::vector<Diagnostic> validate(const LayerGraph& graph);

// Counting rules:
//   conv params = Kh*Kw*(Ci/g)*Co + Co [bias] + 2*Co [batchnorm affine]
//   fc params   = flat(Ci)*L + L [bias]
//   conv macs   = Hout*Wout*Kh*Kw*(Ci/g)*Co, fc macs = flat(Ci)*L
// Pool/add/input contribute zero params and MACs.
LayerCost layer_cost(const Layer& layer, const TensorShape& in_shape);

// Requires shapes inferred (throws GraphError otherwise).
std::vector<LayerCost> per_layer_costs(const LayerGraph& graph);
std::int64_t param_count(const LayerGraph& graph);
std::int64_t mac_count(const LayerGraph& graph);

// Canonical JSON document (stable key order). from_text(to_text(g)) is a
// structural identity; unknown or missing fields are parse errors.
std::string to_text(const LayerGraph& graph);
LayerGraph from_text(const std::string& document);

}  // namespace sqdse
